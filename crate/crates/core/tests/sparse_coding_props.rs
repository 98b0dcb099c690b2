use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use smds::sparse_coding::{
    analysis, coding_objective, dct_dictionary, lipschitz_constant, reconstruct_cube, soft_threshold,
    soft_threshold_relu, soft_threshold_tensor, tista_solve, DictionarySet, TistaConfig,
};
use smds::{Matrix, Tensor3};

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Tensor3, DictionarySet, f64) {
    let mut mats = Vec::new();
    let mut cube = [0; 3];
    for c in cube.iter_mut() {
        let i = rng.random_range(2..5);
        let m = rng.random_range(i..i + 3);
        *c = i;
        mats.push(gaussian(i, m, rng));
    }
    let d = DictionarySet::new(mats.remove(0), mats.remove(0), mats.remove(0)).unwrap();
    let x = Tensor3::from_fn(cube, |_, _, _| rng.sample::<f64, _>(StandardNormal));
    (x, d, rng.random_range(0.01..0.5))
}

#[test]
fn tista_objective_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (x, d, lambda) = random_instance(&mut rng);
        let out = tista_solve(&x, &d, &TistaConfig { lambda, max_iters: 60, tol: 0.0 }).unwrap();
        for w in out.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "objective rose from {} to {}", w[0], w[1]);
        }
    }
}

/// Square DCT bases with a small random perturbation: invertible, so the
/// objective is strongly convex and the iteration contracts.
fn perturbed_dct_instance(rng: &mut ChaCha8Rng) -> (Tensor3, DictionarySet, f64) {
    let mut mats = Vec::new();
    let mut cube = [0; 3];
    for c in cube.iter_mut() {
        let i = rng.random_range(2..5);
        *c = i;
        mats.push(dct_dictionary(i, i).unwrap() + gaussian(i, i, rng) * 0.1);
    }
    let d = DictionarySet::new(mats.remove(0), mats.remove(0), mats.remove(0)).unwrap();
    let x = Tensor3::from_fn(cube, |_, _, _| rng.sample::<f64, _>(StandardNormal));
    (x, d, rng.random_range(0.01..0.5))
}

#[test]
fn tista_converges_to_a_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let (x, d, lambda) = perturbed_dct_instance(&mut rng);
        let out = tista_solve(&x, &d, &TistaConfig { lambda, max_iters: 20000, tol: 0.0 }).unwrap();
        let l = lipschitz_constant(&d);
        let resid = x.sub(&reconstruct_cube(&out.code, &d).unwrap()).unwrap();
        let mut step = out.code.clone();
        step.axpy(1.0 / l, &analysis(&resid, &d).unwrap()).unwrap();
        let next = soft_threshold(&step, lambda / l).unwrap();
        assert!(next.sub(&out.code).unwrap().max_abs() <= 1e-8 * (1.0 + out.code.max_abs()));
    }
}

#[test]
fn orthonormal_case_solves_in_one_step() {
    let d = DictionarySet::dct([4, 4, 3], [4, 4, 3]).unwrap();
    let x = Tensor3::from_fn([4, 4, 3], |i, j, k| ((i * 5 + j * 3 + k) as f64).sin());
    let out = tista_solve(&x, &d, &TistaConfig { lambda: 0.2, max_iters: 50, tol: 0.0 }).unwrap();
    let exact = soft_threshold(&analysis(&x, &d).unwrap(), 0.2).unwrap();
    assert!(out.code.sub(&exact).unwrap().max_abs() < 1e-13);
    assert!((lipschitz_constant(&d) - 1.0).abs() < 1e-12);
}

#[test]
fn lambda_zero_reaches_least_squares_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (x, d, _) = random_instance(&mut rng);
    let out = tista_solve(&x, &d, &TistaConfig { lambda: 0.0, max_iters: 20000, tol: 0.0 }).unwrap();
    // all D_j have full row rank, so the residual vanishes
    let f = coding_objective(&x, &out.code, &d, 0.0).unwrap();
    assert!(f < 1e-10 * x.fro_norm().powi(2), "residual energy {}", f);
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    DMatrix::from_fn(a.nrows() * b.nrows(), a.ncols() * b.ncols(), |r, c| {
        a[(r / b.nrows(), c / b.ncols())] * b[(r % b.nrows(), c % b.ncols())]
    })
}

#[test]
fn lipschitz_matches_power_iteration_on_full_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let (_, d, _) = random_instance(&mut rng);
        let [d1, d2, d3] = d.matrices();
        // vec(code x_1 D1 x_2 D2 x_3 D3) = (D3 kron D2 kron D1) vec(code) with mode 1 fastest
        let full = kron(&kron(d3, d2), d1);
        let gram = full.transpose() * &full;
        let mut v = DVector::from_fn(gram.nrows(), |i, _| 1.0 + (i as f64).sin());
        let mut est = 0.0;
        for _ in 0..5000 {
            let w = &gram * &v;
            est = w.norm() / v.norm();
            v = w.normalize();
        }
        let l = lipschitz_constant(&d);
        assert!((est - l).abs() <= 1e-8 * l, "power {} vs product {}", est, l);
    }
}

#[test]
fn dct_dictionaries_are_well_formed() {
    let c = dct_dictionary(9, 9).unwrap();
    assert!((c.transpose() * &c - DMatrix::identity(9, 9)).amax() < 1e-13);
    assert!(c.column(0).iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    let o = dct_dictionary(5, 9).unwrap();
    for k in 0..9 {
        assert!((o.column(k).norm() - 1.0).abs() < 1e-13);
        if k > 0 {
            assert!(o.column(k).sum().abs() < 1e-13);
        }
    }
    assert!(dct_dictionary(6, 5).is_err());
}

proptest! {
    #[test]
    fn shrink_is_the_l1_prox(v in -3.0f64..3.0, theta in 0.0f64..2.0) {
        let s = soft_threshold(&Tensor3::filled([1, 1, 1], v), theta).unwrap().data()[0];
        let cost = |z: f64| 0.5 * (z - v).powi(2) + theta * z.abs();
        let best = (0..=6000).map(|i| -3.0 + i as f64 * 1e-3).fold(f64::INFINITY, |a, z| a.min(cost(z)));
        prop_assert!(cost(s) <= best + 1e-12);
    }

    #[test]
    fn relu_form_agrees(vals in prop::collection::vec(-2.0f64..2.0, 8), thetas in prop::collection::vec(0.0f64..1.0, 8)) {
        let x = Tensor3::from_vec([2, 2, 2], vals).unwrap();
        let t = Tensor3::from_vec([2, 2, 2], thetas).unwrap();
        prop_assert_eq!(soft_threshold_relu(&x, &t).unwrap(), soft_threshold_tensor(&x, &t).unwrap());
    }

    #[test]
    fn shrink_never_grows_magnitude(v in -5.0f64..5.0, theta in 0.0f64..5.0) {
        let s = soft_threshold(&Tensor3::filled([1, 1, 1], v), theta).unwrap().data()[0];
        prop_assert!(s.abs() <= v.abs());
        prop_assert!(s == 0.0 || s.signum() == v.signum());
    }
}

#[test]
fn negative_threshold_is_rejected() {
    let x = Tensor3::zeros([2, 2, 2]);
    assert!(soft_threshold(&x, -0.1).is_err());
    assert!(soft_threshold_tensor(&x, &Tensor3::filled([2, 2, 2], -1.0)).is_err());
    assert!(TistaConfig { lambda: -1.0, ..Default::default() }.validate().is_err());
}
