//! Multidimensional sparse coding of cubes: DCT dictionaries, soft
//! thresholding and tensor ISTA (TISTA).

use std::f64::consts::PI;

use crate::error::{mismatch, Result, SmdsError};
use crate::tensor::{Matrix, Tensor3};

/// Three per-mode dictionaries; `d[j]` is `I_j x M_j` with atoms as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionarySet {
    d: [Matrix; 3],
}

impl DictionarySet {
    pub fn new(d1: Matrix, d2: Matrix, d3: Matrix) -> Result<Self> {
        let d = [d1, d2, d3];
        for (j, m) in d.iter().enumerate() {
            if m.nrows() == 0 || m.nrows() > m.ncols() {
                return Err(SmdsError::InvalidArgument(format!(
                    "dictionary {} is {}x{}, need 1 <= I <= M",
                    j + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.column_iter().any(|c| c.iter().all(|&v| v == 0.0)) {
                return Err(SmdsError::InvalidArgument(format!(
                    "dictionary {} has an all-zero atom",
                    j + 1
                )));
            }
        }
        Ok(DictionarySet { d })
    }

    /// DCT dictionaries for a cube of size `cube` with `atoms` atoms per mode.
    pub fn dct(cube: [usize; 3], atoms: [usize; 3]) -> Result<Self> {
        DictionarySet::new(
            dct_dictionary(cube[0], atoms[0])?,
            dct_dictionary(cube[1], atoms[1])?,
            dct_dictionary(cube[2], atoms[2])?,
        )
    }

    pub fn mode(&self, j: usize) -> &Matrix {
        &self.d[j]
    }

    pub fn matrices(&self) -> &[Matrix; 3] {
        &self.d
    }

    pub fn cube_dims(&self) -> [usize; 3] {
        [self.d[0].nrows(), self.d[1].nrows(), self.d[2].nrows()]
    }

    pub fn atom_dims(&self) -> [usize; 3] {
        [self.d[0].ncols(), self.d[1].ncols(), self.d[2].ncols()]
    }
}

/// DCT dictionary with `m` atoms of length `i`.
///
/// For `i == m` this is the orthonormal DCT-II basis (atom `k` is the
/// `k`-th cosine, the first atom constant). For `i < m` it is the usual
/// overcomplete construction: sampled cosines of frequency `k / m`, mean
/// removed from every atom but the first, unit-norm columns.
pub fn dct_dictionary(i: usize, m: usize) -> Result<Matrix> {
    if i == 0 || i > m {
        return Err(SmdsError::InvalidArgument(format!(
            "DCT dictionary needs 1 <= size ({}) <= atoms ({})",
            i, m
        )));
    }
    if i == m {
        let n = i as f64;
        return Ok(Matrix::from_fn(i, m, |t, k| {
            let alpha = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            alpha * (PI * (2.0 * t as f64 + 1.0) * k as f64 / (2.0 * n)).cos()
        }));
    }
    let mut d = Matrix::from_fn(i, m, |t, k| (PI * (t * k) as f64 / m as f64).cos());
    for k in 0..m {
        let mut col = d.column_mut(k);
        if k > 0 {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        let norm = col.norm();
        col /= norm;
    }
    Ok(d)
}

/// Entrywise `sgn(x) max(|x| - theta, 0)` with a scalar threshold.
pub fn soft_threshold(x: &Tensor3, theta: f64) -> Result<Tensor3> {
    if !(theta >= 0.0) {
        return Err(SmdsError::InvalidArgument(format!(
            "threshold must be nonnegative, got {}",
            theta
        )));
    }
    Ok(x.map(|v| shrink(v, theta)))
}

/// Soft thresholding with one threshold per entry.
pub fn soft_threshold_tensor(x: &Tensor3, theta: &Tensor3) -> Result<Tensor3> {
    if theta.data().iter().any(|t| !(*t >= 0.0)) {
        return Err(SmdsError::InvalidArgument(
            "threshold tensor has negative entries".into(),
        ));
    }
    x.zip_map(theta, shrink)
}

#[inline]
pub(crate) fn shrink(v: f64, theta: f64) -> f64 {
    if v > theta {
        v - theta
    } else if v < -theta {
        v + theta
    } else {
        0.0
    }
}

/// The same operator written as `relu(x - theta) - relu(-x - theta)`.
pub fn soft_threshold_relu(x: &Tensor3, theta: &Tensor3) -> Result<Tensor3> {
    let relu = |v: f64| v.max(0.0);
    x.zip_map(theta, |v, t| relu(v - t) - relu(-v - t))
}

/// Lipschitz constant of the gradient of the coding data term:
/// `prod_j sigma_max(D_j)^2`.
pub fn lipschitz_constant(d: &DictionarySet) -> f64 {
    d.d.iter()
        .map(|m| {
            let s = m.singular_values();
            let top = s.iter().fold(0.0_f64, |a, &b| a.max(b));
            top * top
        })
        .product()
}

/// Solver settings; `mu` of the joint model is fixed to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TistaConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the relative change of the objective drops below this.
    pub tol: f64,
}

impl Default for TistaConfig {
    fn default() -> Self {
        TistaConfig {
            lambda: 0.0,
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

impl TistaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(SmdsError::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.max_iters == 0 {
            return Err(SmdsError::Config("max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(SmdsError::Config(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TistaOutput {
    pub code: Tensor3,
    pub iterations: usize,
    /// Objective before the first iteration followed by one value per iteration.
    pub objective: Vec<f64>,
}

/// Objective `1/2 ||cube - code x D||_F^2 + lambda ||code||_1`.
pub fn coding_objective(cube: &Tensor3, code: &Tensor3, d: &DictionarySet, lambda: f64) -> Result<f64> {
    let resid = cube.sub(&reconstruct_cube(code, d)?)?;
    Ok(0.5 * resid.fro_norm().powi(2) + lambda * code.l1_norm())
}

/// Analysis coefficients `cube x_1 D1^T x_2 D2^T x_3 D3^T`.
pub fn analysis(cube: &Tensor3, d: &DictionarySet) -> Result<Tensor3> {
    check_cube(cube, d)?;
    cube.multi_mode_product_t(&d.d[0], &d.d[1], &d.d[2])
}

fn check_cube(cube: &Tensor3, d: &DictionarySet) -> Result<()> {
    if cube.dims() != d.cube_dims() {
        return Err(mismatch(format!(
            "cube dims {:?}, dictionaries expect {:?}",
            cube.dims(),
            d.cube_dims()
        )));
    }
    Ok(())
}

/// Tensor ISTA from a zero code with step `1/L` and threshold `lambda/L`.
pub fn tista_solve(cube: &Tensor3, d: &DictionarySet, cfg: &TistaConfig) -> Result<TistaOutput> {
    cfg.validate()?;
    let l = lipschitz_constant(d);
    tista_solve_with(cube, d, cfg, l)
}

/// [`tista_solve`] with a precomputed Lipschitz constant.
pub fn tista_solve_with(
    cube: &Tensor3,
    d: &DictionarySet,
    cfg: &TistaConfig,
    lipschitz: f64,
) -> Result<TistaOutput> {
    check_cube(cube, d)?;
    let grams: Vec<Matrix> = d.d.iter().map(|m| m.transpose() * m).collect();
    let target = analysis(cube, d)?;
    let step = 1.0 / lipschitz;
    let theta = cfg.lambda / lipschitz;

    let mut code = Tensor3::zeros(d.atom_dims());
    let mut objective = vec![0.5 * cube.fro_norm().powi(2)];
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        let mut grad = code.multi_mode_product(&grams[0], &grams[1], &grams[2])?;
        grad.axpy(-1.0, &target)?;
        let mut next = code;
        next.axpy(-step, &grad)?;
        code = next.map(|v| shrink(v, theta));
        iterations += 1;
        if !code.all_finite() {
            return Err(SmdsError::NonFinite(format!(
                "TISTA iterate became non-finite at iteration {}",
                iterations
            )));
        }
        let f = coding_objective(cube, &code, d, cfg.lambda)?;
        let prev = *objective.last().unwrap();
        objective.push(f);
        if (prev - f).abs() <= cfg.tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(TistaOutput {
        code,
        iterations,
        objective,
    })
}

/// Synthesis `code x_1 D1 x_2 D2 x_3 D3`.
pub fn reconstruct_cube(code: &Tensor3, d: &DictionarySet) -> Result<Tensor3> {
    if code.dims() != d.atom_dims() {
        return Err(mismatch(format!(
            "code dims {:?}, dictionaries expect {:?}",
            code.dims(),
            d.atom_dims()
        )));
    }
    code.multi_mode_product(&d.d[0], &d.d[1], &d.d[2])
}
