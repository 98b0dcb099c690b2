// MPSNR, SSIM and SAM between a reference and degraded copies.
//
// ```bash
// cargo run --example quality_metrics
// ```

use smds::io::{make_phantom, PhantomSpec};
use smds::metrics::{evaluate, sam};
use smds::train::synth_noise_seeded;

pub fn run_example() -> smds::Result<()> {
    let x = make_phantom(&PhantomSpec::new([40, 40, 16], 4, 5))?;
    let same = evaluate(&x, &x, 1.0)?;
    println!("identical: psnr {:.2} (capped: {}) ssim {:.4} sam {:.4}", same.psnr, same.identical, same.ssim, same.sam);

    for s8 in [5.0, 15.0, 55.0] {
        let (y, _) = synth_noise_seeded(&x, s8 / 255.0, 3)?;
        let m = evaluate(&x, &y, 1.0)?;
        let worst = m.per_band_psnr.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("sigma <= {:>2}/255: psnr {:.2} (worst band {:.2}) ssim {:.4} sam {:.4}", s8, m.psnr, worst, m.ssim, m.sam);
    }

    println!("sam is scale free: sam(x, 2.5x) = {:.1e}", sam(&x, &x.scale(2.5))?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {}", e);
        std::process::exit(1);
    }
}
