//! Image quality indices: mean per-band PSNR, single-scale SSIM, and the
//! spectral angle mapper.

use crate::error::{mismatch, Result, SmdsError};
use crate::tensor::Tensor3;

/// PSNR assigned to a band whose error is exactly zero.
pub const PSNR_CAP_DB: f64 = 100.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub psnr: f64,
    /// True when every band was identical (PSNR capped).
    pub identical: bool,
    pub ssim: f64,
    pub sam: f64,
    /// Pixels skipped by SAM because one of the spectra is zero.
    pub sam_excluded: usize,
    pub per_band_psnr: Vec<f64>,
}

fn check(reference: &Tensor3, test: &Tensor3) -> Result<()> {
    if reference.dims() != test.dims() {
        return Err(mismatch(format!(
            "reference {:?} vs test {:?}",
            reference.dims(),
            test.dims()
        )));
    }
    Ok(())
}

fn check_peak(peak: f64) -> Result<()> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(SmdsError::InvalidArgument(format!("peak must be > 0, got {}", peak)));
    }
    Ok(())
}

/// PSNR of every band, capped at [`PSNR_CAP_DB`] for error-free bands.
pub fn psnr_per_band(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<Vec<f64>> {
    check(reference, test)?;
    check_peak(peak)?;
    let [h, w, bands] = reference.dims();
    let plane = h * w;
    Ok((0..bands)
        .map(|b| {
            let r = &reference.data()[b * plane..(b + 1) * plane];
            let t = &test.data()[b * plane..(b + 1) * plane];
            let mse = r.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / plane as f64;
            if mse == 0.0 {
                PSNR_CAP_DB
            } else {
                10.0 * (peak * peak / mse).log10()
            }
        })
        .collect())
}

/// Mean of the per-band PSNRs in dB.
pub fn psnr(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<f64> {
    let bands = psnr_per_band(reference, test, peak)?;
    Ok(bands.iter().sum::<f64>() / bands.len() as f64)
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-(i as f64 - half).powi(2) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" Gaussian filtering of an `h x w` column-major plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, win: &[f64]) -> Vec<f64> {
    let n = win.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut rows = vec![0.0; oh * w];
    for j in 0..w {
        for i in 0..oh {
            rows[i + oh * j] = (0..n).map(|t| win[t] * plane[i + t + h * j]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for j in 0..ow {
        for i in 0..oh {
            out[i + oh * j] = (0..n).map(|t| win[t] * rows[i + oh * (j + t)]).sum();
        }
    }
    out
}

fn ssim_band(r: &[f64], t: &[f64], h: usize, w: usize, peak: f64, win: &[f64]) -> f64 {
    let c1 = (SSIM_K1 * peak).powi(2);
    let c2 = (SSIM_K2 * peak).powi(2);
    let mu_r = filter_valid(r, h, w, win);
    let mu_t = filter_valid(t, h, w, win);
    let rr: Vec<f64> = r.iter().map(|v| v * v).collect();
    let tt: Vec<f64> = t.iter().map(|v| v * v).collect();
    let rt: Vec<f64> = r.iter().zip(t).map(|(a, b)| a * b).collect();
    let e_rr = filter_valid(&rr, h, w, win);
    let e_tt = filter_valid(&tt, h, w, win);
    let e_rt = filter_valid(&rt, h, w, win);
    let n = mu_r.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (mr, mt) = (mu_r[i], mu_t[i]);
            let var_r = e_rr[i] - mr * mr;
            let var_t = e_tt[i] - mt * mt;
            let cov = e_rt[i] - mr * mt;
            ((2.0 * mr * mt + c1) * (2.0 * cov + c2))
                / ((mr * mr + mt * mt + c1) * (var_r + var_t + c2))
        })
        .sum();
    total / n as f64
}

/// Band-averaged SSIM with an 11x11 Gaussian window (deviation 1.5).
pub fn ssim(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<f64> {
    check(reference, test)?;
    check_peak(peak)?;
    let [h, w, bands] = reference.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(SmdsError::InvalidArgument(format!(
            "SSIM needs at least {0}x{0} pixels, image is {1}x{2}",
            SSIM_WINDOW, h, w
        )));
    }
    let win = gaussian_window();
    let plane = h * w;
    let total: f64 = (0..bands)
        .map(|b| {
            ssim_band(
                &reference.data()[b * plane..(b + 1) * plane],
                &test.data()[b * plane..(b + 1) * plane],
                h,
                w,
                peak,
                &win,
            )
        })
        .sum();
    Ok(total / bands as f64)
}

/// Mean spectral angle in radians (in `[0, pi]`) and the number of excluded zero-spectrum pixels.
pub fn sam_with_count(reference: &Tensor3, test: &Tensor3) -> Result<(f64, usize)> {
    check(reference, test)?;
    let [h, w, bands] = reference.dims();
    let mut total = 0.0;
    let mut used = 0usize;
    for j in 0..w {
        for i in 0..h {
            let (mut nr, mut nt) = (0.0_f64, 0.0_f64);
            for k in 0..bands {
                nr += reference.get(i, j, k).powi(2);
                nt += test.get(i, j, k).powi(2);
            }
            if nr == 0.0 || nt == 0.0 {
                continue;
            }
            let (nr, nt) = (nr.sqrt(), nt.sqrt());
            // Angle between unit vectors u, v as 2 atan2(|u - v|, |u + v|);
            // stays accurate near 0 where acos of the cosine does not.
            let (mut diff, mut sum) = (0.0, 0.0);
            for k in 0..bands {
                let (u, v) = (reference.get(i, j, k) / nr, test.get(i, j, k) / nt);
                diff += (u - v) * (u - v);
                sum += (u + v) * (u + v);
            }
            total += 2.0 * diff.sqrt().atan2(sum.sqrt());
            used += 1;
        }
    }
    if used == 0 {
        return Err(SmdsError::InvalidArgument(
            "SAM is undefined: every pixel has a zero spectrum".into(),
        ));
    }
    Ok((total / used as f64, h * w - used))
}

pub fn sam(reference: &Tensor3, test: &Tensor3) -> Result<f64> {
    sam_with_count(reference, test).map(|(s, _)| s)
}

/// All three indices at once.
pub fn evaluate(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<MetricReport> {
    let per_band_psnr = psnr_per_band(reference, test, peak)?;
    let psnr = per_band_psnr.iter().sum::<f64>() / per_band_psnr.len() as f64;
    let identical = reference == test;
    let (sam, sam_excluded) = sam_with_count(reference, test)?;
    Ok(MetricReport {
        psnr,
        identical,
        ssim: ssim(reference, test, peak)?,
        sam,
        sam_excluded,
        per_band_psnr,
    })
}
