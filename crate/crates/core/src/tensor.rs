//! Dense order-3 tensors, mode-n unfoldings and mode-n products.
//!
//! Entries are stored with the first index varying fastest, so the element
//! `(i1, i2, i3)` of a tensor with dims `(n1, n2, n3)` lives at offset
//! `i1 + n1 * (i2 + n2 * i3)`. Mode indices in the public API are 1-based
//! (1, 2, 3) to match the usual tensor notation.
//!
//! Unfoldings follow the Kolda convention: the mode-n unfolding is an
//! `n_n x (prod of the other dims)` matrix whose column index is built from
//! the remaining modes with the lower-numbered mode varying fastest.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{mismatch, Result, SmdsError};

/// Column-major dense matrix used for bases and dictionaries.
pub type Matrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

fn check_mode(n: usize) -> Result<usize> {
    if (1..=3).contains(&n) {
        Ok(n - 1)
    } else {
        Err(SmdsError::InvalidMode(n))
    }
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Tensor3 {
            dims,
            data: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn filled(dims: [usize; 3], value: f64) -> Self {
        Tensor3 {
            dims,
            data: vec![value; dims[0] * dims[1] * dims[2]],
        }
    }

    /// Builds a tensor from data laid out with the first index fastest.
    pub fn from_vec(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(mismatch(format!(
                "data length {} does not match dims {:?} ({} entries)",
                data.len(),
                dims,
                expected
            )));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Tensor3 {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor3, mut f: impl FnMut(f64, f64) -> f64) -> Result<Tensor3> {
        self.require_same_dims(other)?;
        Ok(Tensor3 {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn require_same_dims(&self, other: &Tensor3) -> Result<()> {
        if self.dims != other.dims {
            return Err(mismatch(format!(
                "tensor dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        self.map(|x| x * s)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Tensor3) -> Result<()> {
        self.require_same_dims(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn dot(&self, other: &Tensor3) -> Result<f64> {
        self.require_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).sum()
    }

    pub fn l0_count(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0.0).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Mode-n unfolding (`n` in 1..=3).
    pub fn unfold(&self, n: usize) -> Result<Matrix> {
        let m = check_mode(n)?;
        let (lo, dm, hi) = split_dims(self.dims, m);
        Ok(Matrix::from_fn(dm, lo * hi, |row, col| {
            let (l, h) = (col % lo, col / lo);
            self.data[l + lo * (row + dm * h)]
        }))
    }

    /// Inverse of [`Tensor3::unfold`].
    pub fn refold(mat: &Matrix, n: usize, dims: [usize; 3]) -> Result<Tensor3> {
        let m = check_mode(n)?;
        let (lo, dm, hi) = split_dims(dims, m);
        if mat.nrows() != dm || mat.ncols() != lo * hi {
            return Err(mismatch(format!(
                "cannot refold {}x{} matrix into {:?} along mode {}",
                mat.nrows(),
                mat.ncols(),
                dims,
                n
            )));
        }
        let mut out = Tensor3::zeros(dims);
        for h in 0..hi {
            for row in 0..dm {
                for l in 0..lo {
                    out.data[l + lo * (row + dm * h)] = mat[(row, l + lo * h)];
                }
            }
        }
        Ok(out)
    }

    /// Mode-n product `self x_n u`; `u` must have `dims[n-1]` columns.
    pub fn mode_n_product(&self, u: &Matrix, n: usize) -> Result<Tensor3> {
        let m = check_mode(n)?;
        if u.ncols() != self.dims[m] {
            return Err(mismatch(format!(
                "mode-{} product needs {} columns, matrix is {}x{}",
                n,
                self.dims[m],
                u.nrows(),
                u.ncols()
            )));
        }
        Ok(product_kernel(self, u, m, false))
    }

    /// Mode-n product with the transpose, `self x_n u^T`, without forming `u^T`.
    pub fn mode_n_product_t(&self, u: &Matrix, n: usize) -> Result<Tensor3> {
        let m = check_mode(n)?;
        if u.nrows() != self.dims[m] {
            return Err(mismatch(format!(
                "transposed mode-{} product needs {} rows, matrix is {}x{}",
                n,
                self.dims[m],
                u.nrows(),
                u.ncols()
            )));
        }
        Ok(product_kernel(self, u, m, true))
    }

    /// `self x_1 u1 x_2 u2 x_3 u3`.
    pub fn multi_mode_product(&self, u1: &Matrix, u2: &Matrix, u3: &Matrix) -> Result<Tensor3> {
        self.mode_n_product(u1, 1)?
            .mode_n_product(u2, 2)?
            .mode_n_product(u3, 3)
    }

    /// `self x_1 u1^T x_2 u2^T x_3 u3^T`.
    pub fn multi_mode_product_t(&self, u1: &Matrix, u2: &Matrix, u3: &Matrix) -> Result<Tensor3> {
        self.mode_n_product_t(u1, 1)?
            .mode_n_product_t(u2, 2)?
            .mode_n_product_t(u3, 3)
    }
}

impl Index<[usize; 3]> for Tensor3 {
    type Output = f64;

    fn index(&self, idx: [usize; 3]) -> &f64 {
        &self.data[self.offset(idx[0], idx[1], idx[2])]
    }
}

impl IndexMut<[usize; 3]> for Tensor3 {
    fn index_mut(&mut self, idx: [usize; 3]) -> &mut f64 {
        let o = self.offset(idx[0], idx[1], idx[2]);
        &mut self.data[o]
    }
}

/// (product of dims before `m`, dims[m], product of dims after `m`)
#[inline]
fn split_dims(dims: [usize; 3], m: usize) -> (usize, usize, usize) {
    let lo: usize = dims[..m].iter().product();
    let hi: usize = dims[m + 1..].iter().product();
    (lo, dims[m], hi)
}

fn product_kernel(t: &Tensor3, u: &Matrix, m: usize, transpose: bool) -> Tensor3 {
    let (lo, dm, hi) = split_dims(t.dims, m);
    let rows = if transpose { u.ncols() } else { u.nrows() };
    let mut dims = t.dims;
    dims[m] = rows;
    let mut out = vec![0.0; lo * rows * hi];
    for h in 0..hi {
        for a in 0..rows {
            let dst = &mut out[lo * (a + rows * h)..lo * (a + rows * h + 1)];
            for j in 0..dm {
                let coef = if transpose { u[(j, a)] } else { u[(a, j)] };
                if coef == 0.0 {
                    continue;
                }
                let src = &t.data[lo * (j + dm * h)..lo * (j + dm * h + 1)];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += coef * s;
                }
            }
        }
    }
    Tensor3 { dims, data: out }
}
