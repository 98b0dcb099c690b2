//! Spectral subspace learning: HySime rank estimation, SVD basis extraction,
//! and projection to / reconstruction from the subspace coefficients.

use log::warn;
use nalgebra::SymmetricEigen;

use crate::error::{mismatch, Result, SmdsError};
use crate::tensor::{Matrix, Tensor3};

/// Maximum tolerated deviation of `A^T A` from the identity.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Orthonormal `B x R` matrix whose columns span the spectral subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    a: Matrix,
}

impl SpectralBasis {
    /// Wraps a matrix after checking `1 <= R <= B` and column orthonormality.
    pub fn new(a: Matrix) -> Result<Self> {
        let (b, r) = (a.nrows(), a.ncols());
        if r == 0 || r > b {
            return Err(SmdsError::InvalidArgument(format!(
                "basis must satisfy 1 <= R <= B, got {}x{}",
                b, r
            )));
        }
        let gram = a.transpose() * &a;
        let dev = (gram - Matrix::identity(r, r)).amax();
        if dev > ORTHONORMAL_TOL {
            return Err(SmdsError::InvalidArgument(format!(
                "basis columns are not orthonormal (max |A^T A - I| = {:e})",
                dev
            )));
        }
        Ok(SpectralBasis { a })
    }

    pub fn identity(bands: usize) -> Self {
        SpectralBasis {
            a: Matrix::identity(bands, bands),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn bands(&self) -> usize {
        self.a.nrows()
    }

    pub fn rank(&self) -> usize {
        self.a.ncols()
    }
}

/// Outcome of HySime subspace identification.
#[derive(Debug, Clone)]
pub struct RankEstimate {
    pub rank: usize,
    /// Set when the input carried no usable signal (constant image); `rank` is then 1.
    pub degenerate: bool,
    /// Estimated per-band noise variances.
    pub noise_variances: Vec<f64>,
}

/// Per-band noise estimate by ridge-regularized multiple regression of each
/// band on all the others. Returns the residual matrix (`B x N`).
fn estimate_noise(y: &Matrix) -> Matrix {
    let (bands, n) = (y.nrows(), y.ncols());
    let rr = y * y.transpose();
    let ridge = 1e-6 * rr.trace() / bands as f64;
    let regularized = &rr + Matrix::identity(bands, bands) * ridge;
    let rri = regularized
        .try_inverse()
        .expect("ridge-regularized Gram matrix is invertible");

    let mut beta = Matrix::zeros(bands, bands);
    for i in 0..bands {
        let pivot = rri[(i, i)];
        // Inverse of the Gram matrix with band i removed, embedded in the full size.
        let xx = &rri - rri.column(i) * rri.row(i) / pivot;
        let mut rra = rr.column(i).clone_owned();
        rra[i] = 0.0;
        let mut b = xx * rra;
        b[i] = 0.0;
        beta.set_row(i, &b.transpose());
    }
    let residual = y - beta * y;
    debug_assert_eq!(residual.ncols(), n);
    residual
}

/// Minimum number of pixels HySime needs for the per-band regression.
pub fn hysime_min_pixels(bands: usize) -> usize {
    bands + 1
}

/// Estimates the signal subspace dimension of `y` with HySime.
///
/// Requires at least two bands and more pixels than bands. Constant images
/// yield `rank = 1` with `degenerate = true`.
pub fn estimate_rank_hysime(y: &Tensor3) -> Result<RankEstimate> {
    let [h, w, bands] = y.dims();
    if bands < 2 {
        return Err(SmdsError::InvalidArgument(
            "HySime needs at least two bands".into(),
        ));
    }
    if h * w < hysime_min_pixels(bands) {
        return Err(SmdsError::InvalidArgument(format!(
            "HySime needs more pixels ({}) than bands ({})",
            h * w,
            bands
        )));
    }
    let ym = y.unfold(3)?;
    let n = ym.ncols() as f64;

    let scale = ym.amax();
    let spread = (0..bands)
        .map(|b| {
            let row = ym.row(b);
            let mean = row.mean();
            row.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    if scale == 0.0 || spread <= 1e-12 * scale {
        warn!("HySime: input image is constant, falling back to rank 1");
        return Ok(RankEstimate {
            rank: 1,
            degenerate: true,
            noise_variances: vec![0.0; bands],
        });
    }

    let noise = estimate_noise(&ym);
    let noise_variances: Vec<f64> = (0..bands)
        .map(|b| noise.row(b).norm_squared() / n)
        .collect();

    let signal = &ym - &noise;
    let ry = &ym * ym.transpose() / n;
    let rx = &signal * signal.transpose() / n;
    let mut rn = Matrix::from_diagonal(&nalgebra::DVector::from_vec(noise_variances.clone()));
    let jitter = rx.trace() / bands as f64 / 1e5;
    for b in 0..bands {
        rn[(b, b)] += jitter;
    }

    let eig = SymmetricEigen::new(rx);
    let mut order: Vec<usize> = (0..bands).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut rank = 0;
    for &i in &order {
        let e = eig.eigenvectors.column(i);
        let py = (e.transpose() * &ry * e)[(0, 0)];
        let pn = (e.transpose() * &rn * e)[(0, 0)];
        if -py + 2.0 * pn < 0.0 {
            rank += 1;
        }
    }
    Ok(RankEstimate {
        rank: rank.clamp(1, bands),
        degenerate: false,
        noise_variances,
    })
}

/// Top-`r` left singular vectors of the mode-3 unfolding of `y`.
///
/// Each column is sign-normalized so that its largest-magnitude entry is positive.
pub fn learn_basis_svd(y: &Tensor3, r: usize) -> Result<SpectralBasis> {
    let bands = y.dims()[2];
    if r == 0 || r > bands {
        return Err(SmdsError::InvalidArgument(format!(
            "rank {} outside 1..={}",
            r, bands
        )));
    }
    let ym = y.unfold(3)?;
    let svd = ym.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut a = Matrix::zeros(bands, r);
    for (dst, &src) in order.iter().take(r).enumerate() {
        let mut col = u.column(src).clone_owned();
        let pivot = col.iter().fold(0.0_f64, |m, &v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            col.neg_mut();
        }
        a.set_column(dst, &col);
    }
    SpectralBasis::new(a)
}

/// Subspace coefficients `G = Y x_3 A^T`, dims `(H, W, R)`.
pub fn project(y: &Tensor3, basis: &SpectralBasis) -> Result<Tensor3> {
    if y.dims()[2] != basis.bands() {
        return Err(mismatch(format!(
            "image has {} bands, basis expects {}",
            y.dims()[2],
            basis.bands()
        )));
    }
    y.mode_n_product_t(&basis.a, 3)
}

/// Image reconstruction `X = G x_3 A`, dims `(H, W, B)`.
pub fn reconstruct(g: &Tensor3, basis: &SpectralBasis) -> Result<Tensor3> {
    if g.dims()[2] != basis.rank() {
        return Err(mismatch(format!(
            "coefficients have {} channels, basis rank is {}",
            g.dims()[2],
            basis.rank()
        )));
    }
    g.mode_n_product(&basis.a, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(dims: [usize; 3], seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn rank_one_line_is_recovered() {
        let bands = 7;
        let mut a_true = nalgebra::DVector::from_fn(bands, |i, _| (i as f64 + 1.0).sin());
        a_true.normalize_mut();
        let a_mat = Matrix::from_column_slice(bands, 1, a_true.as_slice());
        let g = random([6, 5, 1], 3);
        let y = g.mode_n_product(&a_mat, 3).unwrap();
        let basis = learn_basis_svd(&y, 1).unwrap();
        let dot = basis.matrix().column(0).dot(&a_true);
        assert!((dot.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_rank_round_trip() {
        let y = random([5, 6, 4], 1);
        let basis = learn_basis_svd(&y, 4).unwrap();
        let back = reconstruct(&project(&y, &basis).unwrap(), &basis).unwrap();
        assert!(back.sub(&y).unwrap().fro_norm() <= 1e-9 * y.fro_norm());
    }

    #[test]
    fn rank_two_data_has_no_residual() {
        let bands = 9;
        let a = Matrix::from_fn(bands, 2, |i, j| ((i + 1) as f64 * (j as f64 + 0.5)).cos());
        let y = random([8, 7, 2], 5).mode_n_product(&a, 3).unwrap();
        let basis = learn_basis_svd(&y, 2).unwrap();
        let back = reconstruct(&project(&y, &basis).unwrap(), &basis).unwrap();
        assert!(back.sub(&y).unwrap().fro_norm() / y.fro_norm() <= 1e-9);
    }

    #[test]
    fn rank_out_of_range_is_rejected() {
        let y = random([4, 4, 3], 2);
        assert!(learn_basis_svd(&y, 4).is_err());
        assert!(learn_basis_svd(&y, 0).is_err());
    }

    #[test]
    fn identity_basis_projects_to_input() {
        let y = random([3, 4, 5], 9);
        assert_eq!(project(&y, &SpectralBasis::identity(5)).unwrap(), y);
    }

    #[test]
    fn single_coefficient_reconstructs_scaled_column() {
        let y = random([6, 6, 5], 4);
        let basis = learn_basis_svd(&y, 3).unwrap();
        let mut g = Tensor3::zeros([1, 1, 3]);
        g.set(0, 0, 1, 2.5);
        let x = reconstruct(&g, &basis).unwrap();
        for b in 0..5 {
            assert!((x.get(0, 0, b) - 2.5 * basis.matrix()[(b, 1)]).abs() < 1e-15);
        }
        assert_eq!(reconstruct(&Tensor3::zeros([2, 2, 3]), &basis).unwrap().fro_norm(), 0.0);
    }

    #[test]
    fn mismatched_shapes_are_errors() {
        let basis = SpectralBasis::identity(4);
        assert!(project(&random([2, 2, 3], 0), &basis).is_err());
        assert!(reconstruct(&random([2, 2, 3], 0), &basis).is_err());
    }

    #[test]
    fn constant_image_takes_degenerate_path() {
        let y = Tensor3::filled([8, 8, 4], 0.3);
        let est = estimate_rank_hysime(&y).unwrap();
        assert_eq!(est.rank, 1);
        assert!(est.degenerate);
    }

    #[test]
    fn hysime_preconditions() {
        assert!(estimate_rank_hysime(&random([4, 4, 1], 0)).is_err());
        assert!(estimate_rank_hysime(&random([2, 2, 8], 0)).is_err());
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        assert!(SpectralBasis::new(Matrix::from_element(3, 2, 1.0)).is_err());
    }
}
