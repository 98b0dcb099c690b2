//! Overlapping cube extraction and count-normalized aggregation.

use crate::error::{mismatch, Result, SmdsError};
use crate::tensor::Tensor3;

/// A regular lattice of cube origins over a source tensor.
///
/// Along each axis the origins are `0, s, 2s, ...` plus one final origin
/// clamped to `n - c`, so every entry of the source is covered and no
/// padding is needed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeGrid {
    source: [usize; 3],
    cube: [usize; 3],
    strides: [usize; 3],
    origins: Vec<[usize; 3]>,
}

fn axis_origins(n: usize, c: usize, s: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=n - c).step_by(s).collect();
    if *out.last().unwrap() + c < n {
        out.push(n - c);
    }
    out
}

/// Plans the cube lattice for a source of `dims`.
pub fn plan_grid(dims: [usize; 3], cube: [usize; 3], strides: [usize; 3]) -> Result<CubeGrid> {
    for ax in 0..3 {
        if cube[ax] == 0 || cube[ax] > dims[ax] {
            return Err(SmdsError::InvalidArgument(format!(
                "cube {:?} does not fit inside source {:?}",
                cube, dims
            )));
        }
        if strides[ax] == 0 {
            return Err(SmdsError::InvalidArgument("strides must be >= 1".into()));
        }
    }
    let per_axis: Vec<Vec<usize>> = (0..3)
        .map(|ax| axis_origins(dims[ax], cube[ax], strides[ax]))
        .collect();
    let mut origins = Vec::with_capacity(per_axis.iter().map(Vec::len).product());
    for &a in &per_axis[0] {
        for &b in &per_axis[1] {
            for &c in &per_axis[2] {
                origins.push([a, b, c]);
            }
        }
    }
    Ok(CubeGrid {
        source: dims,
        cube,
        strides,
        origins,
    })
}

/// Strides that overlap cubes by half along the two spatial axes.
pub fn default_strides(cube: [usize; 3]) -> [usize; 3] {
    [(cube[0] / 2).max(1), (cube[1] / 2).max(1), cube[2].max(1)]
}

impl CubeGrid {
    pub fn source_dims(&self) -> [usize; 3] {
        self.source
    }

    pub fn cube_dims(&self) -> [usize; 3] {
        self.cube
    }

    pub fn strides(&self) -> [usize; 3] {
        self.strides
    }

    pub fn origins(&self) -> &[[usize; 3]] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    /// Number of cubes covering each source entry.
    pub fn coverage(&self) -> Tensor3 {
        let mut counts = Tensor3::zeros(self.source);
        for &o in &self.origins {
            for_each_in_cube(self.cube, |i, j, k| {
                counts[[o[0] + i, o[1] + j, o[2] + k]] += 1.0;
            });
        }
        counts
    }

    fn check_source(&self, dims: [usize; 3]) -> Result<()> {
        if dims != self.source {
            return Err(mismatch(format!(
                "grid planned for {:?}, tensor is {:?}",
                self.source, dims
            )));
        }
        Ok(())
    }
}

#[inline]
fn for_each_in_cube(cube: [usize; 3], mut f: impl FnMut(usize, usize, usize)) {
    for k in 0..cube[2] {
        for j in 0..cube[1] {
            for i in 0..cube[0] {
                f(i, j, k);
            }
        }
    }
}

/// Copies the subtensor of `g` at `origin` with size `cube`.
pub fn extract_cube(g: &Tensor3, origin: [usize; 3], cube: [usize; 3]) -> Tensor3 {
    Tensor3::from_fn(cube, |i, j, k| {
        g.get(origin[0] + i, origin[1] + j, origin[2] + k)
    })
}

pub fn extract_cubes(g: &Tensor3, grid: &CubeGrid) -> Result<Vec<Tensor3>> {
    grid.check_source(g.dims())?;
    Ok(grid
        .origins
        .iter()
        .map(|&o| extract_cube(g, o, grid.cube))
        .collect())
}

/// Averages overlapping cubes back into a tensor of the grid's source dims.
///
/// Each entry is the mean of the cube values covering it, normalized by its
/// own coverage count. A running mean is used so that identical estimates
/// average back to themselves bit for bit.
pub fn aggregate_cubes(cubes: &[Tensor3], grid: &CubeGrid) -> Result<Tensor3> {
    if cubes.len() != grid.len() {
        return Err(mismatch(format!(
            "{} cubes for a grid of {}",
            cubes.len(),
            grid.len()
        )));
    }
    let mut mean = Tensor3::zeros(grid.source);
    let mut count = vec![0u32; mean.len()];
    for (cube, &o) in cubes.iter().zip(&grid.origins) {
        if cube.dims() != grid.cube {
            return Err(mismatch(format!(
                "cube dims {:?}, grid expects {:?}",
                cube.dims(),
                grid.cube
            )));
        }
        for_each_in_cube(grid.cube, |i, j, k| {
            let at = mean.offset(o[0] + i, o[1] + j, o[2] + k);
            count[at] += 1;
            let m = &mut mean.data_mut()[at];
            *m += (cube.get(i, j, k) - *m) / count[at] as f64;
        });
    }
    Ok(mean)
}

/// Adjoint of [`aggregate_cubes`]: maps a gradient on the aggregated tensor
/// to per-cube gradients (`grad / coverage`, extracted at every origin).
pub fn aggregate_adjoint(grad: &Tensor3, grid: &CubeGrid) -> Result<Vec<Tensor3>> {
    grid.check_source(grad.dims())?;
    let coverage = grid.coverage();
    let weighted = grad.zip_map(&coverage, |g, c| g / c)?;
    extract_cubes(&weighted, grid)
}
