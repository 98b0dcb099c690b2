// Rank estimation and spectral subspace projection on a synthetic image.
//
// ```bash
// cargo run --example subspace
// ```

use smds::io::{make_phantom, PhantomSpec};
use smds::subspace::{estimate_rank_hysime, learn_basis_svd, project, reconstruct};
use smds::train::synth_noise_seeded;

pub fn run_example() -> smds::Result<()> {
    let x = make_phantom(&PhantomSpec::new([64, 64, 31], 6, 3))?;
    let (y, sigmas) = synth_noise_seeded(&x, 20.0 / 255.0, 1)?;
    println!("noise deviations range {:.4} .. {:.4}", sigmas.iter().cloned().fold(f64::MAX, f64::min), sigmas.iter().cloned().fold(0.0, f64::max));

    for (name, img) in [("clean", &x), ("noisy", &y)] {
        let est = estimate_rank_hysime(img)?;
        println!("{} image: estimated rank {}", name, est.rank);
    }

    let basis = learn_basis_svd(&y, 6)?;
    let g = project(&y, &basis)?;
    let back = reconstruct(&g, &basis)?;
    println!("projected image {:?} -> reconstructed {:?}", g.dims(), back.dims());
    let err_noisy = y.sub(&x)?.fro_norm();
    let err_proj = back.sub(&x)?.fro_norm();
    println!("error to clean: noisy {:.3}, after projection {:.3}", err_noisy, err_proj);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {}", e);
        std::process::exit(1);
    }
}
