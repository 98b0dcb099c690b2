//! HSC1 image container, JSON sidecars, and the synthetic low-rank phantom.
//!
//! HSC1 layout (little endian):
//!
//! ```text
//! magic  b"HSC1"
//! u32    H (rows)
//! u32    W (columns)
//! u32    B (bands)
//! u32    dtype code (1 = f32)
//! f32 x H*W*B payload, band sequential: band-major, then row, column fastest
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmdsError};
use crate::tensor::{Matrix, Tensor3};

pub const HSC_MAGIC: &[u8; 4] = b"HSC1";
pub const DTYPE_F32: u32 = 1;
const HEADER_LEN: usize = 20;

pub fn encode_hsi(t: &Tensor3) -> Vec<u8> {
    let [h, w, b] = t.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * t.len());
    out.extend_from_slice(HSC_MAGIC);
    for v in [h as u32, w as u32, b as u32, DTYPE_F32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for k in 0..b {
        for i in 0..h {
            for j in 0..w {
                out.extend_from_slice(&(t.get(i, j, k) as f32).to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_hsi(bytes: &[u8]) -> Result<Tensor3> {
    if bytes.len() < 4 || &bytes[..4] != HSC_MAGIC {
        return Err(SmdsError::Format("missing HSC1 magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(SmdsError::Corrupt("truncated HSC1 header".into()));
    }
    let field = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (h, w, b, dtype) = (field(0) as usize, field(1) as usize, field(2) as usize, field(3));
    if dtype != DTYPE_F32 {
        return Err(SmdsError::Format(format!("unsupported dtype code {}", dtype)));
    }
    if h == 0 || w == 0 || b == 0 {
        return Err(SmdsError::Corrupt(format!("empty dims {}x{}x{}", h, w, b)));
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(b))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| SmdsError::Corrupt("header dims overflow".into()))?;
    if payload.len() != expected {
        return Err(SmdsError::Corrupt(format!(
            "payload has {} bytes, header {}x{}x{} needs {}",
            payload.len(),
            h,
            w,
            b,
            expected
        )));
    }
    let mut values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    let mut t = Tensor3::zeros([h, w, b]);
    for k in 0..b {
        for i in 0..h {
            for j in 0..w {
                t.set(i, j, k, values.next().unwrap());
            }
        }
    }
    if !t.all_finite() {
        return Err(SmdsError::Corrupt("payload contains non-finite values".into()));
    }
    Ok(t)
}

pub fn write_hsi(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    fs::write(path, encode_hsi(t))?;
    Ok(())
}

pub fn read_hsi(path: impl AsRef<Path>) -> Result<Tensor3> {
    decode_hsi(&fs::read(path)?)
}

/// Optional metadata stored next to an image as `<file>.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HsiSidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    /// Per-band noise standard deviations, when the image was synthesized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<f64>>,
}

pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar(path: impl AsRef<Path>, meta: &HsiSidecar) -> Result<()> {
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(meta)?)?;
    Ok(())
}

/// Reads the sidecar of `path` if one exists.
pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Option<HsiSidecar>> {
    let p = sidecar_path(path);
    if !p.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_slice(&fs::read(p)?)?))
}

/// Parameters of a synthetic exactly low-rank hyperspectral image.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub dims: [usize; 3],
    pub rank: usize,
    /// Moving-average window (bands) applied to the random-walk spectra.
    pub spectral_smoothness: usize,
    /// Gaussian blur deviation (pixels) of the abundance maps.
    pub abundance_smoothness: f64,
    pub seed: u64,
}

impl PhantomSpec {
    pub fn new(dims: [usize; 3], rank: usize, seed: u64) -> Self {
        PhantomSpec {
            dims,
            rank,
            spectral_smoothness: 3,
            abundance_smoothness: 3.0,
            seed,
        }
    }
}

/// Generates `X = G x_3 A` with smooth orthonormal spectra `A` and smooth
/// abundance maps `G`, scaled into `[0, 1]`.
///
/// The first spectrum is strictly positive; its abundance map is offset so
/// that every entry of `X` is nonnegative. Offsetting and scaling keep the
/// mode-3 unfolding at rank exactly `spec.rank`.
pub fn make_phantom(spec: &PhantomSpec) -> Result<Tensor3> {
    let [h, w, bands] = spec.dims;
    if spec.rank == 0 || spec.rank > bands || h == 0 || w == 0 {
        return Err(SmdsError::InvalidArgument(format!(
            "phantom needs 1 <= rank <= bands and nonempty dims, got rank {} for {:?}",
            spec.rank, spec.dims
        )));
    }
    if spec.rank > h * w {
        return Err(SmdsError::InvalidArgument(
            "phantom rank exceeds the pixel count".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let spectra = smooth_spectra(bands, spec.rank, spec.spectral_smoothness.max(1), &mut rng);

    let mut g = Tensor3::zeros([h, w, spec.rank]);
    for r in 0..spec.rank {
        let map = smooth_map(h, w, spec.abundance_smoothness, &mut rng);
        let (offset, amp) = if r == 0 { (1.5, 0.5) } else { (0.0, 1.0 / (r as f64).sqrt()) };
        for j in 0..w {
            for i in 0..h {
                g.set(i, j, r, offset + amp * map[i + h * j]);
            }
        }
    }
    let mut x = g.mode_n_product(&spectra, 3)?;

    // Lift the positive first component until the image is nonnegative.
    let mut lift = 0.0_f64;
    for k in 0..bands {
        let a = spectra[(k, 0)];
        for j in 0..w {
            for i in 0..h {
                lift = lift.max(-x.get(i, j, k) / a);
            }
        }
    }
    if lift > 0.0 {
        for k in 0..bands {
            let a = spectra[(k, 0)];
            for j in 0..w {
                for i in 0..h {
                    x[[i, j, k]] += lift * a;
                }
            }
        }
    }
    let peak = x.max_abs();
    Ok(x.map(|v| (v / peak).clamp(0.0, 1.0)))
}

fn smooth_spectra(bands: usize, rank: usize, window: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut s = Matrix::zeros(bands, rank);
    for r in 0..rank {
        let mut walk = Vec::with_capacity(bands);
        let mut acc = 0.0;
        for _ in 0..bands {
            let step: f64 = StandardNormal.sample(rng);
            acc += step;
            walk.push(acc);
        }
        let smoothed: Vec<f64> = (0..bands)
            .map(|b| {
                let lo = b.saturating_sub(window / 2);
                let hi = (b + window / 2 + 1).min(bands);
                walk[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect();
        if r == 0 {
            let span = smoothed.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-12);
            for (b, v) in smoothed.iter().enumerate() {
                s[(b, 0)] = 1.0 + 0.3 * v / span;
            }
        } else {
            for (b, v) in smoothed.iter().enumerate() {
                s[(b, r)] = *v;
            }
        }
    }
    // Modified Gram-Schmidt, twice for stability; keeps column 0 positive.
    for _ in 0..2 {
        for r in 0..rank {
            for q in 0..r {
                let proj = s.column(q).dot(&s.column(r));
                let qcol = s.column(q).clone_owned();
                s.column_mut(r).axpy(-proj, &qcol, 1.0);
            }
            let n = s.column(r).norm();
            s.column_mut(r).unscale_mut(n);
        }
    }
    s
}

/// Zero-mean, unit-deviation Gaussian-blurred white noise, column-major `h x w`.
fn smooth_map(h: usize, w: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise: Vec<f64> = (0..h * w).map(|_| StandardNormal.sample(rng)).collect();
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = if sigma > 0.0 {
        let k: Vec<f64> = (-radius..=radius)
            .map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let s: f64 = k.iter().sum();
        k.into_iter().map(|v| v / s).collect()
    } else {
        vec![1.0]
    };
    let radius = (kernel.len() / 2) as isize;
    let reflect = |p: isize, n: usize| -> usize {
        let n = n as isize;
        let mut p = p;
        while p < 0 || p >= n {
            p = if p < 0 { -p - 1 } else { 2 * n - p - 1 };
        }
        p as usize
    };
    let mut tmp = vec![0.0; h * w];
    for j in 0..w {
        for i in 0..h {
            tmp[i + h * j] = kernel
                .iter()
                .enumerate()
                .map(|(t, kv)| kv * noise[reflect(i as isize + t as isize - radius, h) + h * j])
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for j in 0..w {
        for i in 0..h {
            out[i + h * j] = kernel
                .iter()
                .enumerate()
                .map(|(t, kv)| kv * tmp[i + h * reflect(j as isize + t as isize - radius, w)])
                .sum();
        }
    }
    let n = out.len() as f64;
    let mean = out.iter().sum::<f64>() / n;
    let sd = (out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-12);
    out.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    out
}

/// Lists the `.hsc` files of a directory in sorted order.
pub fn list_hsi_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "hsc"))
        .collect();
    files.sort();
    Ok(files)
}
