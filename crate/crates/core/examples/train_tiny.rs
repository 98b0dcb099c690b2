// Trains a two-layer network on synthetic images and compares it with the
// untrained identity-regime forward on a held-out image.
//
// ```bash
// cargo run --release --example train_tiny -- 200
// ```

use smds::classic::RankChoice;
use smds::io::{make_phantom, PhantomSpec};
use smds::metrics::psnr;
use smds::net::{estimate_basis, forward, init_params, NetConfig};
use smds::train::{smoothed_losses, synth_noise_seeded, train_loop, HsiDataset, TrainConfig};

pub fn train_and_report(steps: usize) -> smds::Result<(f64, f64)> {
    let images = (0..10)
        .map(|s| make_phantom(&PhantomSpec::new([32, 32, 31], 5, 100 + s)))
        .collect::<smds::Result<Vec<_>>>()?;
    let mut net = NetConfig::new([5, 5, 5], [5, 5, 5], 2)?;
    net.strides = Some([2, 2, 5]);
    let cfg = TrainConfig {
        epochs: usize::MAX,
        max_steps: Some(steps),
        patch: 24,
        sigma_max: 25.0 / 255.0,
        seed: 1,
        ..Default::default()
    };
    let out = train_loop(&HsiDataset::from_clean(images), &net, &cfg)?;
    let smooth = smoothed_losses(&out.history, 20);
    for r in out.history.iter().step_by(20) {
        println!("step {:>4}  epoch {:>3}  loss {:.4}  smoothed {:.4}", r.step, r.epoch, r.loss, smooth[r.step]);
    }

    let x = make_phantom(&PhantomSpec::new([32, 32, 31], 5, 999))?;
    let (y, _) = synth_noise_seeded(&x, 25.0 / 255.0, 77)?;
    let basis = estimate_basis(&y, RankChoice::Auto, 5)?;
    let mut ident = init_params(&net)?;
    ident.lambdas.iter_mut().for_each(|t| t.data_mut().iter_mut().for_each(|v| *v = 0.0));
    let (xi, _) = forward(&y, &basis, &ident, &net)?;
    let (xt, _) = forward(&y, &basis, &out.params, &net)?;
    let (pi, pt) = (psnr(&x, &xi, 1.0)?, psnr(&x, &xt, 1.0)?);
    println!("held-out: noisy {:.2} dB, identity {:.2} dB, trained {:.2} dB", psnr(&x, &y, 1.0)?, pi, pt);
    Ok((pi, pt))
}

pub fn run_example() -> smds::Result<()> {
    train_and_report(40).map(|_| ())
}

fn main() {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    if let Err(e) = train_and_report(steps) {
        eprintln!("error: {}", e);
        std::process::exit(1);
    }
}
