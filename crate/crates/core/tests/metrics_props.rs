use smds::io::{make_phantom, PhantomSpec};
use smds::metrics::{evaluate, psnr, sam, ssim};
use smds::train::synth_noise_seeded;
use smds::Tensor3;

#[test]
fn psnr_falls_as_noise_grows() {
    let x = make_phantom(&PhantomSpec::new([32, 32, 8], 3, 1)).unwrap();
    let unit = Tensor3::from_fn(x.dims(), |i, j, k| (((i * 37 + j * 11 + k * 5) % 17) as f64 - 8.0) / 8.0);
    let mut last = f64::INFINITY;
    for s in [0.005, 0.01, 0.02, 0.05, 0.1, 0.2] {
        let p = psnr(&x, &x.add(&unit.scale(s)).unwrap(), 1.0).unwrap();
        assert!(p < last);
        last = p;
    }
}

#[test]
fn sam_is_symmetric_and_scale_free() {
    let x = make_phantom(&PhantomSpec::new([16, 16, 10], 4, 2)).unwrap();
    let y = make_phantom(&PhantomSpec::new([16, 16, 10], 4, 3)).unwrap();
    assert_eq!(sam(&x, &y).unwrap(), sam(&y, &x).unwrap());
    assert!((sam(&x, &y.scale(3.0)).unwrap() - sam(&x, &y).unwrap()).abs() < 1e-14);
    assert!(sam(&x, &y).unwrap() > 0.0);
}

#[test]
fn heavy_noise_drags_ssim_down() {
    let x = make_phantom(&PhantomSpec::new([32, 32, 6], 3, 4)).unwrap();
    let (y, _) = synth_noise_seeded(&x, 0.5, 9).unwrap();
    assert!(ssim(&x, &y, 1.0).unwrap() < 0.9);
    let r = evaluate(&x, &y, 1.0).unwrap();
    assert!(!r.identical && r.ssim <= 1.0 && r.per_band_psnr.len() == 6);
    assert!(evaluate(&x, &x, 1.0).unwrap().identical);
}
