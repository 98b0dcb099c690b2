//! The iterative denoiser: subspace projection followed by TISTA sparse
//! coding of overlapping cubes with fixed DCT dictionaries.

use log::warn;
use rayon::prelude::*;

use crate::error::{Result, SmdsError};
use crate::patching::{aggregate_cubes, default_strides, extract_cubes, plan_grid};
use crate::sparse_coding::{
    analysis, lipschitz_constant, reconstruct_cube, tista_solve_with, DictionarySet, TistaConfig,
};
use crate::subspace::{estimate_rank_hysime, learn_basis_svd, project, reconstruct, RankEstimate};
use crate::tensor::Tensor3;

/// Median absolute value to Gaussian deviation.
const MAD_TO_SIGMA: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankChoice {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    /// `lambda = factor * sigma_hat`, where `sigma_hat` is the MAD noise
    /// estimate of the non-DC analysis coefficients of all cubes.
    Auto { factor: f64 },
    Fixed(f64),
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::Auto { factor: DEFAULT_LAMBDA_FACTOR }
    }
}

pub const DEFAULT_LAMBDA_FACTOR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicConfig {
    pub rank: RankChoice,
    pub cube: [usize; 3],
    /// `None` selects half-overlapping spatial strides.
    pub strides: Option<[usize; 3]>,
    /// `None` selects square dictionaries matching the cube.
    pub atoms: Option<[usize; 3]>,
    pub lambda: LambdaChoice,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ClassicConfig {
    fn default() -> Self {
        ClassicConfig {
            rank: RankChoice::Auto,
            cube: [9, 9, 9],
            strides: None,
            atoms: None,
            lambda: LambdaChoice::default(),
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassicReport {
    pub rank: usize,
    pub rank_estimate: Option<RankEstimate>,
    pub cube: [usize; 3],
    pub cubes: usize,
    pub lambda: f64,
    pub lipschitz: f64,
    pub mean_iterations: f64,
    /// Objective trace of every cube, in grid order.
    pub objective_traces: Vec<Vec<f64>>,
}

/// Runs the full denoiser on a noisy `H x W x B` image.
pub fn denoise_classic(y: &Tensor3, cfg: &ClassicConfig) -> Result<(Tensor3, ClassicReport)> {
    let [h, w, bands] = y.dims();
    if cfg.cube.contains(&0) || cfg.max_iters == 0 {
        return Err(SmdsError::Config("cube sizes and max_iters must be positive".into()));
    }
    if cfg.cube[0] > h || cfg.cube[1] > w {
        return Err(SmdsError::Config(format!(
            "cube {:?} larger than the {}x{} image",
            cfg.cube, h, w
        )));
    }

    let (rank, rank_estimate) = match cfg.rank {
        RankChoice::Fixed(r) => {
            if r == 0 || r > bands {
                return Err(SmdsError::Config(format!("rank {} outside 1..={}", r, bands)));
            }
            if cfg.cube[2] > r {
                return Err(SmdsError::Config(format!(
                    "cube depth {} exceeds the subspace rank {}",
                    cfg.cube[2], r
                )));
            }
            (r, None)
        }
        RankChoice::Auto => {
            let est = estimate_rank_hysime(y)?;
            let r = est.rank.min(bands.saturating_sub(1)).max(1);
            (r, Some(est))
        }
    };

    let mut cube = cfg.cube;
    if cube[2] > rank {
        warn!("cube depth {} exceeds subspace rank {}, shrinking", cube[2], rank);
        cube[2] = rank;
    }
    let atoms = match cfg.atoms {
        None => cube,
        Some(m) => {
            let m = [m[0], m[1], m[2].max(cube[2])];
            if m[0] < cube[0] || m[1] < cube[1] {
                return Err(SmdsError::Config(format!(
                    "atom counts {:?} smaller than cube {:?}",
                    m, cube
                )));
            }
            m
        }
    };
    let strides = match cfg.strides {
        Some(s) => [s[0], s[1], s[2].min(cube[2]).max(1)],
        None => default_strides(cube),
    };

    let basis = learn_basis_svd(y, rank)?;
    let g = project(y, &basis)?;
    let grid = plan_grid(g.dims(), cube, strides)?;
    let cubes = extract_cubes(&g, &grid)?;
    let dict = DictionarySet::dct(cube, atoms)?;
    let lipschitz = lipschitz_constant(&dict);

    let lambda = match cfg.lambda {
        LambdaChoice::Fixed(l) => l,
        LambdaChoice::Auto { factor } => factor * mad_noise_estimate(&cubes, &dict)?,
    };
    let tista = TistaConfig {
        lambda,
        max_iters: cfg.max_iters,
        tol: cfg.tol,
    };
    tista.validate()?;

    let solved: Vec<_> = cubes
        .par_iter()
        .map(|c| {
            let out = tista_solve_with(c, &dict, &tista, lipschitz)?;
            let rec = reconstruct_cube(&out.code, &dict)?;
            Ok((rec, out.iterations, out.objective))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = solved.len();
    let mut estimates = Vec::with_capacity(n);
    let mut traces = Vec::with_capacity(n);
    let mut iterations = 0usize;
    for (rec, iters, trace) in solved {
        estimates.push(rec);
        iterations += iters;
        traces.push(trace);
    }
    let g_hat = aggregate_cubes(&estimates, &grid)?;
    let x_hat = reconstruct(&g_hat, &basis)?;

    let report = ClassicReport {
        rank,
        rank_estimate,
        cube,
        cubes: n,
        lambda,
        lipschitz,
        mean_iterations: iterations as f64 / n as f64,
        objective_traces: traces,
    };
    Ok((x_hat, report))
}

/// Robust noise deviation from the non-DC analysis coefficients.
fn mad_noise_estimate(cubes: &[Tensor3], dict: &DictionarySet) -> Result<f64> {
    let mut mags = Vec::new();
    for c in cubes {
        let coeffs = analysis(c, dict)?;
        mags.extend(coeffs.data().iter().skip(1).map(|v| v.abs()));
    }
    if mags.is_empty() {
        return Ok(0.0);
    }
    let mid = mags.len() / 2;
    let (_, median, _) = mags.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*median / MAD_TO_SIGMA)
}
