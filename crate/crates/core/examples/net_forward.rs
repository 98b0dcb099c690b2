// The unfolded network at its DCT initialization: zero thresholds give the
// plain subspace projection, small thresholds already shrink noise.
//
// ```bash
// cargo run --example net_forward
// ```

use smds::classic::RankChoice;
use smds::io::{make_phantom, PhantomSpec};
use smds::metrics::psnr;
use smds::net::{denoise_net, estimate_basis, forward, init_params, NetConfig};
use smds::train::synth_noise_seeded;

pub fn run_example() -> smds::Result<()> {
    let cfg = NetConfig::default();
    let mut params = init_params(&cfg)?;
    println!("K={} cube {:?} atoms {:?}: {} parameters", cfg.layers, cfg.cube, cfg.atoms, cfg.param_count());

    let x = make_phantom(&PhantomSpec::new([48, 48, 31], 5, 11))?;
    let (y, _) = synth_noise_seeded(&x, 30.0 / 255.0, 2)?;
    let basis = estimate_basis(&y, RankChoice::Auto, cfg.cube[2])?;
    println!("basis rank {} (at least the cube depth)", basis.rank());

    for level in [0.0, 0.01, 0.05, 0.1] {
        for t in &mut params.lambdas {
            t.data_mut().iter_mut().for_each(|v| *v = level);
        }
        let (x_hat, _) = forward(&y, &basis, &params, &cfg)?;
        println!("thresholds {:.2}: psnr {:.2} dB (noisy {:.2})", level, psnr(&x, &x_hat, 1.0)?, psnr(&x, &y, 1.0)?);
    }

    let tiled = denoise_net(&y, &params, &cfg, RankChoice::Auto, 32, 8)?;
    println!("tiled 32x32 / stride 8: psnr {:.2} dB", psnr(&x, &tiled, 1.0)?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {}", e);
        std::process::exit(1);
    }
}
