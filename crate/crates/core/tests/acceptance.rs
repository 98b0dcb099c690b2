//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary under `cargo test`; exits nonzero if any criterion fails.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use smds::classic::{denoise_classic, ClassicConfig, RankChoice};
use smds::io::{make_phantom, PhantomSpec};
use smds::metrics::{psnr, sam, ssim};
use smds::net::{count_params, estimate_basis, forward, init_params, NetConfig, NetParams};
use smds::patching::{aggregate_cubes, extract_cubes, plan_grid};
use smds::sparse_coding::{tista_solve, DictionarySet, TistaConfig};
use smds::subspace::{estimate_rank_hysime, learn_basis_svd, project, reconstruct};
use smds::train::{smoothed_losses, synth_noise_seeded, train_loop, HsiDataset, TrainConfig};
use smds::Tensor3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn param_counts() -> Outcome {
    let nine = [9, 9, 9];
    let cases: Vec<([usize; 3], [usize; 3], usize, usize)> = vec![
        (nine, [5, 5, 5], 6, 1155),
        (nine, [7, 7, 7], 6, 2625),
        (nine, nine, 6, 5103),
        (nine, [11, 11, 11], 6, 8877),
        (nine, [13, 13, 13], 6, 14235),
        (nine, nine, 3, 2916),
        (nine, nine, 6, 5103),
        (nine, nine, 9, 7290),
        (nine, nine, 12, 9477),
        (nine, nine, 15, 11664),
        ([3, 3, 3], nine, 6, 4617),
        ([5, 5, 5], nine, 6, 4779),
        ([7, 7, 7], nine, 6, 4941),
        (nine, nine, 6, 5103),
        ([11, 11, 11], nine, 6, 5265),
    ];
    let t = Instant::now();
    let bad: Vec<String> = cases
        .iter()
        .filter(|(i, m, k, want)| count_params(*i, *m, *k) != *want)
        .map(|(i, m, k, want)| format!("I={:?} M={:?} K={} -> {} (want {})", i, m, k, count_params(*i, *m, *k), want))
        .collect();
    let ok = bad.is_empty() && within(t.elapsed(), Duration::from_secs(1));
    outcome(ok, if bad.is_empty() { "15/15 exact".into() } else { bad.join("; ") })
}

fn gradients() -> Outcome {
    let t = Instant::now();
    let configs: [([usize; 3], [usize; 3], usize, [usize; 3]); 5] = [
        ([3, 3, 2], [4, 4, 3], 2, [8, 8, 5]),
        ([2, 2, 2], [2, 2, 2], 1, [6, 6, 4]),
        ([3, 2, 2], [3, 4, 2], 2, [7, 8, 5]),
        ([3, 3, 2], [3, 3, 3], 1, [8, 7, 5]),
        ([2, 3, 2], [4, 3, 3], 2, [8, 8, 4]),
    ];
    let mut worst = [0.0f64; 4];
    for (seed, (cube, atoms, k, image)) in configs.into_iter().enumerate() {
        let p = common::tiny_problem(100 + seed as u64, cube, atoms, k, image);
        let w = common::gradient_check(&p, 1e-6, 1e-8);
        for c in 0..4 {
            worst[c] = worst[c].max(w[c]);
        }
    }
    let ok = worst.iter().all(|&w| w <= 1e-4) && within(t.elapsed(), Duration::from_secs(60));
    outcome(
        ok,
        format!(
            "5 configs, worst rel err D {:.1e} C {:.1e} W {:.1e} Lambda {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn tista_monotone() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rise = f64::NEG_INFINITY;
    for _ in 0..100 {
        let mut mats = Vec::new();
        let mut cube = [0; 3];
        for c in cube.iter_mut() {
            let i = rng.random_range(2..6);
            let m = rng.random_range(i..i + 4);
            *c = i;
            mats.push(DMatrix::from_fn(i, m, |_, _| rng.sample::<f64, _>(StandardNormal)));
        }
        let d = DictionarySet::new(mats.remove(0), mats.remove(0), mats.remove(0)).unwrap();
        let x = Tensor3::from_fn(cube, |_, _, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = rng.random_range(0.0..1.0);
        let out = tista_solve(&x, &d, &TistaConfig { lambda, max_iters: 100, tol: 0.0 }).unwrap();
        for w in out.objective.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
    }
    let ok = worst_rise <= 1e-10 && within(t.elapsed(), Duration::from_secs(30));
    outcome(ok, format!("100 instances, largest per-step change {:.2e}", worst_rise))
}

fn zero_thresholds(p: &mut NetParams) {
    for t in &mut p.lambdas {
        t.data_mut().iter_mut().for_each(|v| *v = 0.0);
    }
}

fn rel(a: &Tensor3, b: &Tensor3) -> f64 {
    a.sub(b).unwrap().fro_norm() / b.fro_norm()
}

fn identity_regime() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y = common::random_tensor([24, 20, 31], &mut rng, 0.0, 1.0);
    let basis = learn_basis_svd(&y, 9).unwrap();
    let target = reconstruct(&project(&y, &basis).unwrap(), &basis).unwrap();
    let full_y = common::random_tensor([20, 20, 12], &mut rng, 0.0, 1.0);
    let full = learn_basis_svd(&full_y, 12).unwrap();
    let mut worst_proj = 0.0f64;
    let mut worst_full = 0.0f64;
    for k in [1, 3, 6] {
        let cfg = NetConfig::new([9, 9, 9], [9, 9, 9], k).unwrap();
        let mut p = init_params(&cfg).unwrap();
        zero_thresholds(&mut p);
        let (x, _) = forward(&y, &basis, &p, &cfg).unwrap();
        worst_proj = worst_proj.max(rel(&x, &target));
        let (xf, _) = forward(&full_y, &full, &p, &cfg).unwrap();
        worst_full = worst_full.max(rel(&xf, &full_y));
    }
    let ok = worst_proj <= 1e-8 && worst_full <= 1e-8 && within(t.elapsed(), Duration::from_secs(30));
    outcome(ok, format!("K in {{1,3,6}}: vs projection {:.1e}, R=B vs input {:.1e}", worst_proj, worst_full))
}

fn subspace_exactness() -> Outcome {
    let mut found = Vec::new();
    let mut worst_resid = 0.0f64;
    for r in 1..=8 {
        let x = make_phantom(&PhantomSpec::new([64, 64, 31], r, 40 + r as u64)).unwrap();
        found.push(estimate_rank_hysime(&x).unwrap().rank);
        let basis = learn_basis_svd(&x, r).unwrap();
        let back = reconstruct(&project(&x, &basis).unwrap(), &basis).unwrap();
        worst_resid = worst_resid.max(rel(&back, &x));
    }
    let ranks_ok = found.iter().enumerate().all(|(i, &f)| f == i + 1);
    let g = make_phantom(&PhantomSpec::new([37, 29, 7], 3, 1)).unwrap();
    let grid = plan_grid(g.dims(), [9, 9, 3], [4, 4, 2]).unwrap();
    let bitwise = aggregate_cubes(&extract_cubes(&g, &grid).unwrap(), &grid).unwrap() == g;
    outcome(
        ranks_ok && worst_resid <= 1e-9 && bitwise,
        format!("HySime ranks {:?}, worst projection residual {:.1e}, roundtrip bitwise {}", found, worst_resid, bitwise),
    )
}

/// Gain of an independent numpy implementation of the same pipeline on the
/// identical f32-stored phantom (seed 2024) and noise (seed 7).
const CLASSIC_ORACLE_GAIN_DB: f64 = 10.6874;

fn classic_gain() -> Outcome {
    let t = Instant::now();
    let f32_round = |t: &Tensor3| t.map(|v| v as f32 as f64);
    let x = f32_round(&make_phantom(&PhantomSpec::new([64, 64, 31], 5, 2024)).unwrap());
    let (y, _) = synth_noise_seeded(&x, 25.0 / 255.0, 7).unwrap();
    let y = f32_round(&y);
    let (x_hat, report) = denoise_classic(&y, &ClassicConfig::default()).unwrap();
    let noisy = psnr(&x, &y, 1.0).unwrap();
    let den = psnr(&x, &x_hat, 1.0).unwrap();
    let gain = den - noisy;
    let ok = gain >= 5.0 && within(t.elapsed(), Duration::from_secs(120));
    outcome(
        ok,
        format!(
            "rank {} noisy {:.2} dB -> {:.2} dB, gain {:.2} dB (oracle {:.2} dB, threshold 5)",
            report.rank, noisy, den, gain, CLASSIC_ORACLE_GAIN_DB
        ),
    )
}

fn desk_training() -> Outcome {
    let t = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let side = 32;
        let images = (0..10)
            .map(|s| make_phantom(&PhantomSpec::new([side, side, 31], 5, 100 + s)).unwrap())
            .collect();
        let ds = HsiDataset::from_clean(images);
        let mut net = NetConfig::new([5, 5, 5], [5, 5, 5], 2).unwrap();
        net.strides = Some([2, 2, 5]);
        let cfg = TrainConfig {
            epochs: 1000,
            max_steps: Some(200),
            batch_size: 2,
            patch: 24,
            lr0: 5e-3,
            sigma_max: 25.0 / 255.0,
            seed: 1,
            ..Default::default()
        };
        let out = train_loop(&ds, &net, &cfg).unwrap();
        let window = 20;
        let smooth = smoothed_losses(&out.history, window);
        let first = smooth[window - 1];
        let last = *smooth.last().unwrap();

        let x = make_phantom(&PhantomSpec::new([side, side, 31], 5, 999)).unwrap();
        let (y, _) = synth_noise_seeded(&x, 25.0 / 255.0, 77).unwrap();
        let basis = estimate_basis(&y, RankChoice::Auto, 5).unwrap();
        let mut ident = init_params(&net).unwrap();
        zero_thresholds(&mut ident);
        let (xi, _) = forward(&y, &basis, &ident, &net).unwrap();
        let (xt, _) = forward(&y, &basis, &out.params, &net).unwrap();
        let (pi, pt) = (psnr(&x, &xi, 1.0).unwrap(), psnr(&x, &xt, 1.0).unwrap());
        let ok = out.history.len() == 200 && last <= 0.5 * first && pt >= pi + 1.0 && within(t.elapsed(), Duration::from_secs(600));
        outcome(
            ok,
            format!(
                "200 steps: smoothed loss {:.3} -> {:.3} (x{:.2}); held-out PSNR identity {:.2} dB, trained {:.2} dB; {:.1}s on 1 thread",
                first,
                last,
                last / first,
                pi,
                pt,
                t.elapsed().as_secs_f64()
            ),
        )
    })
}

fn full_scale_note() -> Outcome {
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/full_protocol.sh");
    let present = script.is_file();
    outcome(
        present,
        "full-dataset benchmark values not reproduced at desk scale; protocol script scripts/full_protocol.sh provided",
    )
}

fn metric_sanity() -> Outcome {
    let x = make_phantom(&PhantomSpec::new([24, 24, 8], 3, 5)).unwrap();
    let s = ssim(&x, &x, 1.0).unwrap();
    let exact = sam(&x, &x.scale(4.0)).unwrap();
    let a = sam(&x, &x.scale(3.7)).unwrap();
    let noise = Tensor3::from_fn(x.dims(), |i, j, k| (((i * 7 + j * 13 + k * 3) % 11) as f64 - 5.0) * 1e-3);
    let y1 = x.add(&noise).unwrap();
    let y2 = x.add(&noise.scale(2.0)).unwrap();
    let drop = psnr(&x, &y1, 1.0).unwrap() - psnr(&x, &y2, 1.0).unwrap();
    let expect = 20.0 * 2f64.log10();
    // scaling by 3.7 rounds every entry, so only rounding-level angles remain
    let ok = s == 1.0 && exact == 0.0 && a <= 1e-14 && (drop - expect).abs() <= 1e-9;
    outcome(
        ok,
        format!(
            "ssim(x,x)={} sam(x,4x)={} sam(x,3.7x)={:.1e} psnr drop {:.12} (want {:.12})",
            s, exact, a, drop, expect
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("parameter-count reproduction", param_counts),
        ("gradient correctness", gradients),
        ("TISTA monotonicity", tista_monotone),
        ("identity regime", identity_regime),
        ("subspace exactness", subspace_exactness),
        ("desk-scale denoising gain", classic_gain),
        ("desk-scale training", desk_training),
        ("full-scale results out of scope", full_scale_note),
        ("metric sanity", metric_sanity),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{:>6.2}s] {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            name,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
