// Training-free denoising: subspace projection plus TISTA sparse coding of
// overlapping cubes with DCT dictionaries.
//
// ```bash
// cargo run --release --example classic_denoise
// ```

use smds::classic::{denoise_classic, ClassicConfig, LambdaChoice};
use smds::io::{make_phantom, PhantomSpec};
use smds::metrics::evaluate;
use smds::train::synth_noise_seeded;

pub fn run_example() -> smds::Result<()> {
    let x = make_phantom(&PhantomSpec::new([64, 64, 31], 5, 2024))?;
    let (y, _) = synth_noise_seeded(&x, 25.0 / 255.0, 7)?;
    let before = evaluate(&x, &y, 1.0)?;
    println!("noisy:    psnr {:.2} dB  ssim {:.4}  sam {:.4}", before.psnr, before.ssim, before.sam);

    for factor in [0.5, 1.0, 2.0] {
        let cfg = ClassicConfig {
            lambda: LambdaChoice::Auto { factor },
            ..Default::default()
        };
        let (x_hat, report) = denoise_classic(&y, &cfg)?;
        let m = evaluate(&x, &x_hat, 1.0)?;
        println!(
            "factor {:.1}: psnr {:.2} dB  ssim {:.4}  sam {:.4}  (rank {}, cube {:?}, lambda {:.4})",
            factor, m.psnr, m.ssim, m.sam, report.rank, report.cube, report.lambda
        );
    }

    // overcomplete dictionaries need real iterations
    let cfg = ClassicConfig {
        atoms: Some([10, 10, 5]),
        max_iters: 500,
        ..Default::default()
    };
    let (x_hat, report) = denoise_classic(&y, &cfg)?;
    println!(
        "10x10x5 atoms: psnr {:.2} dB after {:.1} iterations per cube",
        evaluate(&x, &x_hat, 1.0)?.psnr,
        report.mean_iterations
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {}", e);
        std::process::exit(1);
    }
}
