// Mode-n unfolding and products on a small order-3 tensor.
//
// ```bash
// cargo run --example tensor_algebra
// ```

use smds::{Matrix, Tensor3};

pub fn run_example() -> smds::Result<()> {
    let x = Tensor3::from_fn([2, 3, 4], |i, j, k| (i + 2 * j + 6 * k) as f64);
    println!("x has dims {:?} and norm {:.3}", x.dims(), x.fro_norm());

    for n in 1..=3 {
        let m = x.unfold(n)?;
        println!("mode-{} unfolding: {}x{}", n, m.nrows(), m.ncols());
        assert_eq!(Tensor3::refold(&m, n, x.dims())?, x);
    }

    // spectral mixing along mode 3: four bands down to two
    let u = Matrix::from_row_slice(2, 4, &[0.5, 0.5, 0.5, 0.5, 0.5, -0.5, 0.5, -0.5]);
    let y = x.mode_n_product(&u, 3)?;
    println!("x x_3 U has dims {:?}", y.dims());

    let a = Matrix::identity(2, 2);
    let b = Matrix::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.0 });
    let z = x.multi_mode_product(&a, &b, &Matrix::identity(4, 4))?;
    assert!((z.fro_norm() - 2.0 * x.fro_norm()).abs() < 1e-12);
    println!("scaling mode 2 by 2 doubles the norm: {:.3}", z.fro_norm());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {}", e);
        std::process::exit(1);
    }
}
