#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smds::net::{backward, forward, init_params, loss, GradientSet, NetConfig, NetParams};
use smds::subspace::learn_basis_svd;
use smds::{SpectralBasis, Tensor3};

pub fn random_tensor(dims: [usize; 3], rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| rng.random_range(lo..hi))
}

/// A tiny randomized network problem: params away from the DCT init,
/// thresholds straddling the typical coefficient magnitude.
pub struct TinyProblem {
    pub cfg: NetConfig,
    pub params: NetParams,
    pub y: Tensor3,
    pub x: Tensor3,
    pub basis: SpectralBasis,
}

pub fn tiny_problem(seed: u64, cube: [usize; 3], atoms: [usize; 3], layers: usize, image: [usize; 3]) -> TinyProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = NetConfig::new(cube, atoms, layers).unwrap();
    cfg.strides = Some([2, 2, 1]);
    let mut params = init_params(&cfg).unwrap();
    for m in params.d.iter_mut().chain(params.c.iter_mut()).chain(params.w.iter_mut()) {
        for v in m.iter_mut() {
            *v += rng.random_range(-0.3..0.3);
        }
    }
    for t in params.lambdas.iter_mut() {
        for v in t.data_mut() {
            *v = rng.random_range(0.0..0.4);
        }
    }
    let x = random_tensor(image, &mut rng, 0.0, 1.0);
    let y = x.map(|v| v + rng.random_range(-0.2..0.2));
    let basis = learn_basis_svd(&y, cube[2].max(3).min(image[2])).unwrap();
    TinyProblem { cfg, params, y, x, basis }
}

pub fn loss_at(p: &TinyProblem, params: &NetParams) -> f64 {
    let (x_hat, _) = forward(&p.y, &p.basis, params, &p.cfg).unwrap();
    loss(&x_hat, &p.x).unwrap()
}

pub fn analytic_grad(p: &TinyProblem) -> GradientSet {
    let (x_hat, cache) = forward(&p.y, &p.basis, &p.params, &p.cfg).unwrap();
    backward(&cache, &x_hat, &p.x, &p.params).unwrap()
}

/// Worst relative error per parameter class (D, C, W, Lambda) between the
/// analytic gradient and central differences with step `h`, over entries
/// whose analytic magnitude exceeds `floor`.
pub fn gradient_check(p: &TinyProblem, h: f64, floor: f64) -> [f64; 4] {
    let analytic = analytic_grad(p);
    let a_slices: Vec<Vec<f64>> = analytic.slices().iter().map(|s| s.to_vec()).collect();
    let mut worst = [0.0f64; 4];
    for (block, grads) in a_slices.iter().enumerate() {
        let class = if block < 9 { block / 3 } else { 3 };
        for (i, &g) in grads.iter().enumerate() {
            if g.abs() <= floor {
                continue;
            }
            let mut plus = p.params.clone();
            plus.slices_mut()[block][i] += h;
            let mut minus = p.params.clone();
            minus.slices_mut()[block][i] -= h;
            let fd = (loss_at(p, &plus) - loss_at(p, &minus)) / (2.0 * h);
            let rel = (g - fd).abs() / g.abs().max(fd.abs());
            worst[class] = worst[class].max(rel);
        }
    }
    worst
}
