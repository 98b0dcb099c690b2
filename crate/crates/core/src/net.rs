//! The unfolded network: `K` multidimensional sparse coding blocks with
//! shared dictionaries and per-layer threshold tensors, followed by cube
//! reconstruction, aggregation and spectral reconstruction.
//!
//! Every block maps a code `B` of shape `M1 x M2 x M3` to the next one:
//!
//! ```text
//! E = G_i - B x1 D1 x2 D2 x3 D3
//! H = B + E x1 C1^T x2 C2^T x3 C3^T
//! B' = soft_threshold(H, Lambda_k)
//! ```
//!
//! starting from `B = 0`. The final code is synthesized with the decoupled
//! reconstruction dictionaries `W`.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::Hasher;
use std::path::Path;

use rayon::prelude::*;

use crate::classic::RankChoice;
use crate::error::{Result, SmdsError};
use crate::patching::{aggregate_cubes, default_strides, extract_cubes, plan_grid, CubeGrid};
use crate::sparse_coding::{dct_dictionary, shrink};
use crate::subspace::{estimate_rank_hysime, learn_basis_svd, project, reconstruct, SpectralBasis};
use crate::tensor::{Matrix, Tensor3};

/// Initial value of every threshold entry.
pub const LAMBDA_INIT: f64 = 1e-2;

/// Spatial tile size and stride used when denoising whole images.
pub const TILE_SIZE: usize = 56;
pub const TILE_STRIDE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub cube: [usize; 3],
    pub atoms: [usize; 3],
    pub layers: usize,
    /// Cube strides over the projected image; `None` halves the spatial cube size.
    pub strides: Option<[usize; 3]>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            cube: [9, 9, 9],
            atoms: [9, 9, 9],
            layers: 6,
            strides: None,
        }
    }
}

impl NetConfig {
    pub fn new(cube: [usize; 3], atoms: [usize; 3], layers: usize) -> Result<Self> {
        let cfg = NetConfig {
            cube,
            atoms,
            layers,
            strides: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for j in 0..3 {
            if self.cube[j] == 0 || self.cube[j] > self.atoms[j] {
                return Err(SmdsError::Config(format!(
                    "need 1 <= cube <= atoms per mode, got cube {:?} atoms {:?}",
                    self.cube, self.atoms
                )));
            }
        }
        if self.layers == 0 {
            return Err(SmdsError::Config("unfolding depth must be >= 1".into()));
        }
        if let Some(s) = self.strides {
            if s.contains(&0) {
                return Err(SmdsError::Config("strides must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn strides(&self) -> [usize; 3] {
        self.strides.unwrap_or_else(|| default_strides(self.cube))
    }

    pub fn param_count(&self) -> usize {
        count_params(self.cube, self.atoms, self.layers)
    }
}

/// Number of learnable scalars: three `I_j x M_j` matrices per mode (D, C, W)
/// plus one `M1 x M2 x M3` threshold tensor per layer.
pub fn count_params(cube: [usize; 3], atoms: [usize; 3], layers: usize) -> usize {
    let dicts: usize = (0..3).map(|j| cube[j] * atoms[j]).sum();
    3 * dicts + layers * atoms.iter().product::<usize>()
}

/// Learnable parameters. `d` are the synthesis dictionaries of the residual
/// step, `c` the analysis dictionaries, `w` the reconstruction dictionaries.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    pub d: [Matrix; 3],
    pub c: [Matrix; 3],
    pub w: [Matrix; 3],
    pub lambdas: Vec<Tensor3>,
}

/// Gradient of the loss with respect to every entry of [`NetParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub d: [Matrix; 3],
    pub c: [Matrix; 3],
    pub w: [Matrix; 3],
    pub lambdas: Vec<Tensor3>,
}

macro_rules! param_slices {
    ($t:ty) => {
        impl $t {
            /// All parameter blocks in storage order: D1..D3, C1..C3, W1..W3, Lambda_1..K.
            pub fn slices(&self) -> Vec<&[f64]> {
                let mut out: Vec<&[f64]> = Vec::with_capacity(9 + self.lambdas.len());
                for m in self.d.iter().chain(&self.c).chain(&self.w) {
                    out.push(m.as_slice());
                }
                out.extend(self.lambdas.iter().map(|t| t.data()));
                out
            }

            pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
                let mut out: Vec<&mut [f64]> = Vec::with_capacity(9 + self.lambdas.len());
                for m in self.d.iter_mut().chain(self.c.iter_mut()).chain(self.w.iter_mut()) {
                    out.push(m.as_mut_slice());
                }
                out.extend(self.lambdas.iter_mut().map(|t| t.data_mut()));
                out
            }

            pub fn len(&self) -> usize {
                self.slices().iter().map(|s| s.len()).sum()
            }

            pub fn is_empty(&self) -> bool {
                self.len() == 0
            }

            pub fn all_finite(&self) -> bool {
                self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
            }
        }
    };
}

param_slices!(NetParams);
param_slices!(GradientSet);

impl GradientSet {
    pub fn zeros_like(p: &NetParams) -> Self {
        let z = |m: &Matrix| Matrix::zeros(m.nrows(), m.ncols());
        GradientSet {
            d: [z(&p.d[0]), z(&p.d[1]), z(&p.d[2])],
            c: [z(&p.c[0]), z(&p.c[1]), z(&p.c[2])],
            w: [z(&p.w[0]), z(&p.w[1]), z(&p.w[2])],
            lambdas: p.lambdas.iter().map(|t| Tensor3::zeros(t.dims())).collect(),
        }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &GradientSet) {
        for (a, b) in self.slices_mut().into_iter().zip(other.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for block in self.slices_mut() {
            block.iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// DCT initialization: `D = C = W` per mode, every threshold at [`LAMBDA_INIT`].
pub fn init_params(cfg: &NetConfig) -> Result<NetParams> {
    cfg.validate()?;
    let dct: Vec<Matrix> = (0..3)
        .map(|j| dct_dictionary(cfg.cube[j], cfg.atoms[j]))
        .collect::<Result<_>>()?;
    let trio = || [dct[0].clone(), dct[1].clone(), dct[2].clone()];
    Ok(NetParams {
        d: trio(),
        c: trio(),
        w: trio(),
        lambdas: (0..cfg.layers)
            .map(|_| Tensor3::filled(cfg.atoms, LAMBDA_INIT))
            .collect(),
    })
}

impl NetParams {
    /// Checks that the parameter shapes agree with `cfg`.
    pub fn check(&self, cfg: &NetConfig) -> Result<()> {
        for j in 0..3 {
            for (name, m) in [("D", &self.d[j]), ("C", &self.c[j]), ("W", &self.w[j])] {
                if m.nrows() != cfg.cube[j] || m.ncols() != cfg.atoms[j] {
                    return Err(SmdsError::ShapeInconsistent(format!(
                        "{}{} is {}x{}, expected {}x{}",
                        name,
                        j + 1,
                        m.nrows(),
                        m.ncols(),
                        cfg.cube[j],
                        cfg.atoms[j]
                    )));
                }
            }
        }
        if self.lambdas.len() != cfg.layers {
            return Err(SmdsError::ShapeInconsistent(format!(
                "{} threshold tensors for {} layers",
                self.lambdas.len(),
                cfg.layers
            )));
        }
        if let Some(t) = self.lambdas.iter().find(|t| t.dims() != cfg.atoms) {
            return Err(SmdsError::ShapeInconsistent(format!(
                "threshold tensor {:?}, expected {:?}",
                t.dims(),
                cfg.atoms
            )));
        }
        Ok(())
    }

    /// Stable hash of every parameter bit pattern.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for block in self.slices() {
            h.write_usize(block.len());
            for v in block {
                h.write_u64(v.to_bits());
            }
        }
        h.finish()
    }

    /// Clamps every threshold entry at zero.
    pub fn project_thresholds(&mut self) {
        for t in &mut self.lambdas {
            t.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
}

/// Intermediate tensors of one sparse coding block.
#[derive(Debug, Clone)]
pub struct BlockOutput {
    pub e: Tensor3,
    pub h: Tensor3,
    pub b: Tensor3,
}

/// One unfolded iteration for layer `k` (1-based).
pub fn sparse_block(b_prev: &Tensor3, g_cube: &Tensor3, params: &NetParams, k: usize) -> Result<BlockOutput> {
    if k == 0 || k > params.lambdas.len() {
        return Err(SmdsError::InvalidArgument(format!(
            "layer {} outside 1..={}",
            k,
            params.lambdas.len()
        )));
    }
    let [d1, d2, d3] = &params.d;
    let [c1, c2, c3] = &params.c;
    let synth = b_prev.multi_mode_product(d1, d2, d3)?;
    let e = g_cube.sub(&synth)?;
    let mut h = e.multi_mode_product_t(c1, c2, c3)?;
    h.axpy(1.0, b_prev)?;
    let b = h.zip_map(&params.lambdas[k - 1], shrink)?;
    Ok(BlockOutput { e, h, b })
}

#[derive(Debug, Clone)]
struct CubeTrace {
    /// Outputs of layers 1..=K.
    blocks: Vec<BlockOutput>,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    fingerprint: u64,
    basis: SpectralBasis,
    grid: CubeGrid,
    cubes: Vec<CubeTrace>,
}

impl ForwardCache {
    pub fn grid(&self) -> &CubeGrid {
        &self.grid
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }
}

fn run_cube(g: &Tensor3, params: &NetParams) -> Result<(Tensor3, CubeTrace)> {
    let mut code = Tensor3::zeros(params.lambdas[0].dims());
    let mut blocks = Vec::with_capacity(params.lambdas.len());
    for k in 1..=params.lambdas.len() {
        let out = sparse_block(&code, g, params, k)?;
        code = out.b.clone();
        blocks.push(out);
    }
    let [w1, w2, w3] = &params.w;
    let rec = code.multi_mode_product(w1, w2, w3)?;
    Ok((rec, CubeTrace { blocks }))
}

/// Full network forward pass for an image `y` with its precomputed basis.
pub fn forward(
    y: &Tensor3,
    basis: &SpectralBasis,
    params: &NetParams,
    cfg: &NetConfig,
) -> Result<(Tensor3, ForwardCache)> {
    cfg.validate()?;
    params.check(cfg)?;
    let g = project(y, basis)?;
    let [h, w, r] = g.dims();
    if cfg.cube[0] > h || cfg.cube[1] > w || cfg.cube[2] > r {
        return Err(SmdsError::Config(format!(
            "cube {:?} does not fit the projected image {:?}",
            cfg.cube,
            g.dims()
        )));
    }
    let grid = plan_grid(g.dims(), cfg.cube, cfg.strides())?;
    let cubes = extract_cubes(&g, &grid)?;
    let results: Vec<(Tensor3, CubeTrace)> = cubes
        .par_iter()
        .map(|c| run_cube(c, params))
        .collect::<Result<_>>()?;
    let (recs, traces): (Vec<Tensor3>, Vec<CubeTrace>) = results.into_iter().unzip();
    let g_hat = aggregate_cubes(&recs, &grid)?;
    let x_hat = reconstruct(&g_hat, basis)?;
    if !x_hat.all_finite() {
        return Err(SmdsError::NonFinite("network output".into()));
    }
    Ok((
        x_hat,
        ForwardCache {
            fingerprint: params.fingerprint(),
            basis: basis.clone(),
            grid,
            cubes: traces,
        },
    ))
}

/// Squared Frobenius distance between the output and the clean image.
pub fn loss(x_hat: &Tensor3, x_clean: &Tensor3) -> Result<f64> {
    Ok(x_hat.sub(x_clean)?.fro_norm().powi(2))
}

/// `unfold_n(a) * unfold_n(b)^T` for tensors that agree on the other two modes.
fn contract_except(a: &Tensor3, b: &Tensor3, m: usize) -> Matrix {
    let (da, db) = (a.dims(), b.dims());
    let lo: usize = da[..m].iter().product();
    let hi: usize = da[m + 1..].iter().product();
    let (pa, pb) = (da[m], db[m]);
    let mut out = Matrix::zeros(pa, pb);
    for h in 0..hi {
        for q in 0..pb {
            let bs = &b.data()[lo * (q + pb * h)..lo * (q + pb * h + 1)];
            for p in 0..pa {
                let as_ = &a.data()[lo * (p + pa * h)..lo * (p + pa * h + 1)];
                out[(p, q)] += as_.iter().zip(bs).map(|(x, y)| x * y).sum::<f64>();
            }
        }
    }
    out
}

/// Gradients of `y = x x1 M1 x2 M2 x3 M3` with respect to each `M_j`,
/// given `dy`. With `transposed`, `y = x x1 M1^T x2 M2^T x3 M3^T`.
fn triple_product_grads(x: &Tensor3, dy: &Tensor3, mats: &[Matrix; 3], transposed: bool) -> Result<[Matrix; 3]> {
    let apply = |t: &Tensor3, j: usize| -> Result<Tensor3> {
        if transposed {
            t.mode_n_product_t(&mats[j], j + 1)
        } else {
            t.mode_n_product(&mats[j], j + 1)
        }
    };
    // x with every mode but `skip` transformed.
    let partial = |skip: usize| -> Result<Tensor3> {
        let mut t = x.clone();
        for j in 0..3 {
            if j != skip {
                t = apply(&t, j)?;
            }
        }
        Ok(t)
    };
    let mut out: [Matrix; 3] = Default::default();
    for j in 0..3 {
        let p = partial(j)?;
        out[j] = if transposed {
            contract_except(&p, dy, j)
        } else {
            contract_except(dy, &p, j)
        };
    }
    Ok(out)
}

fn add_mats(acc: &mut [Matrix; 3], g: [Matrix; 3], sign: f64) {
    for (a, b) in acc.iter_mut().zip(g) {
        *a += b * sign;
    }
}

fn cube_backward(trace: &CubeTrace, d_out: &Tensor3, params: &NetParams, grads: &mut GradientSet) -> Result<()> {
    let k_layers = trace.blocks.len();
    let code = &trace.blocks[k_layers - 1].b;
    add_mats(&mut grads.w, triple_product_grads(code, d_out, &params.w, false)?, 1.0);
    let [w1, w2, w3] = &params.w;
    let mut d_code = d_out.multi_mode_product_t(w1, w2, w3)?;

    let [d1, d2, d3] = &params.d;
    let [c1, c2, c3] = &params.c;
    for k in (0..k_layers).rev() {
        let block = &trace.blocks[k];
        let lambda = &params.lambdas[k];
        let mut d_h = Tensor3::zeros(block.h.dims());
        {
            let dl = grads.lambdas[k].data_mut();
            let dh = d_h.data_mut();
            for (i, ((&hv, &th), &db)) in block
                .h
                .data()
                .iter()
                .zip(lambda.data())
                .zip(d_code.data())
                .enumerate()
            {
                if hv.abs() > th {
                    dh[i] = db;
                    dl[i] -= hv.signum() * db;
                }
            }
        }
        // H = B_prev + E x C^T
        add_mats(&mut grads.c, triple_product_grads(&block.e, &d_h, &params.c, true)?, 1.0);
        let d_e = d_h.multi_mode_product(c1, c2, c3)?;
        let mut d_prev = d_h;
        if k > 0 {
            // E = G - B_prev x D
            let b_prev = &trace.blocks[k - 1].b;
            add_mats(&mut grads.d, triple_product_grads(b_prev, &d_e, &params.d, false)?, -1.0);
            d_prev.axpy(-1.0, &d_e.multi_mode_product_t(d1, d2, d3)?)?;
        }
        d_code = d_prev;
    }
    Ok(())
}

/// Cubes per gradient accumulator; fixed so the reduction order does not
/// depend on the thread count.
const GRAD_CHUNK: usize = 64;

/// Exact gradient of `||x_hat - x_clean||_F^2` with respect to all parameters.
pub fn backward(cache: &ForwardCache, x_hat: &Tensor3, x_clean: &Tensor3, params: &NetParams) -> Result<GradientSet> {
    if params.fingerprint() != cache.fingerprint {
        return Err(SmdsError::StaleCache);
    }
    let d_x = x_hat.sub(x_clean)?.scale(2.0);
    backward_from_output_grad(cache, &d_x, params)
}

/// Backpropagates an arbitrary gradient on the network output.
pub fn backward_from_output_grad(cache: &ForwardCache, d_x: &Tensor3, params: &NetParams) -> Result<GradientSet> {
    if params.fingerprint() != cache.fingerprint {
        return Err(SmdsError::StaleCache);
    }
    let d_g = project(d_x, &cache.basis)?;
    let d_cubes = crate::patching::aggregate_adjoint(&d_g, &cache.grid)?;
    let partials: Vec<GradientSet> = cache
        .cubes
        .par_chunks(GRAD_CHUNK)
        .zip(d_cubes.par_chunks(GRAD_CHUNK))
        .map(|(traces, douts)| {
            let mut acc = GradientSet::zeros_like(params);
            for (t, d) in traces.iter().zip(douts) {
                cube_backward(t, d, params, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = GradientSet::zeros_like(params);
    for p in &partials {
        total.add_scaled(1.0, p);
    }
    if !total.all_finite() {
        return Err(SmdsError::NonFinite("gradient".into()));
    }
    Ok(total)
}

/// Subspace basis for a noisy image: HySime rank (capped at `B - 1`), raised
/// to at least `min_rank` so cubes of that depth fit.
pub fn estimate_basis(y: &Tensor3, rank: RankChoice, min_rank: usize) -> Result<SpectralBasis> {
    let bands = y.dims()[2];
    if min_rank > bands {
        return Err(SmdsError::Config(format!(
            "cube depth {} exceeds the {} available bands",
            min_rank, bands
        )));
    }
    let r = match rank {
        RankChoice::Fixed(r) => r,
        RankChoice::Auto => estimate_rank_hysime(y)?.rank.min(bands.saturating_sub(1)).max(1),
    };
    learn_basis_svd(y, r.max(min_rank).min(bands))
}

/// Denoises a whole image: splits it into overlapping spatial tiles, runs the
/// network on each with a per-tile basis, and averages the overlaps.
pub fn denoise_net(
    y: &Tensor3,
    params: &NetParams,
    cfg: &NetConfig,
    rank: RankChoice,
    tile: usize,
    stride: usize,
) -> Result<Tensor3> {
    let [h, w, b] = y.dims();
    let tile_dims = [tile.min(h), tile.min(w), b];
    let grid = plan_grid(y.dims(), tile_dims, [stride.max(1), stride.max(1), b])?;
    let tiles = extract_cubes(y, &grid)?;
    let outs: Vec<Tensor3> = tiles
        .iter()
        .map(|t| {
            let basis = estimate_basis(t, rank, cfg.cube[2])?;
            forward(t, &basis, params, cfg).map(|(x, _)| x)
        })
        .collect::<Result<_>>()?;
    aggregate_cubes(&outs, &grid)
}

pub const MODEL_MAGIC: &[u8; 8] = b"SMDSNET1";

fn put_matrix_row_major(out: &mut Vec<u8>, m: &Matrix) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
}

fn put_tensor_row_major(out: &mut Vec<u8>, t: &Tensor3) {
    let [a, b, c] = t.dims();
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                out.extend_from_slice(&t.get(i, j, k).to_le_bytes());
            }
        }
    }
}

/// Serializes parameters in the `SMDSNET1` layout.
pub fn encode_params(params: &NetParams, cfg: &NetConfig) -> Result<Vec<u8>> {
    params.check(cfg)?;
    let mut out = Vec::with_capacity(8 + 28 + 8 * params.len());
    out.extend_from_slice(MODEL_MAGIC);
    for v in cfg.cube.iter().chain(&cfg.atoms).chain(std::iter::once(&cfg.layers)) {
        out.extend_from_slice(&(*v as u32).to_le_bytes());
    }
    for m in params.d.iter().chain(&params.c).chain(&params.w) {
        put_matrix_row_major(&mut out, m);
    }
    for t in &params.lambdas {
        put_tensor_row_major(&mut out, t);
    }
    Ok(out)
}

pub fn decode_params(bytes: &[u8]) -> Result<(NetParams, NetConfig)> {
    if bytes.len() < 8 {
        return Err(SmdsError::Corrupt("file shorter than the magic".into()));
    }
    if bytes[..7] != MODEL_MAGIC[..7] {
        return Err(SmdsError::Format("not an SMDSNET model file".into()));
    }
    if bytes[7] != MODEL_MAGIC[7] {
        return Err(SmdsError::Version(format!(
            "model format version {:?}",
            bytes[7] as char
        )));
    }
    if bytes.len() < 36 {
        return Err(SmdsError::Corrupt("truncated model header".into()));
    }
    let field = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    let cube = [field(0), field(1), field(2)];
    let atoms = [field(3), field(4), field(5)];
    let layers = field(6);
    let cfg = NetConfig {
        cube,
        atoms,
        layers,
        strides: None,
    };
    cfg.validate()
        .map_err(|e| SmdsError::ShapeInconsistent(format!("header: {}", e)))?;

    let payload = &bytes[36..];
    let dict_len: usize = (0..3).map(|j| cube[j] * atoms[j]).sum::<usize>() * 3;
    let lambda_len: usize = atoms.iter().product();
    if !payload.len().is_multiple_of(8) || payload.len() < 8 * dict_len {
        return Err(SmdsError::Corrupt(format!(
            "payload of {} bytes is truncated",
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let expected = dict_len + layers * lambda_len;
    if values.len() != expected {
        let found = (values.len() - dict_len) as f64 / lambda_len as f64;
        return Err(SmdsError::ShapeInconsistent(format!(
            "header declares {} layers, payload holds {} threshold tensors",
            layers, found
        )));
    }
    let mut it = values.into_iter();
    let take_matrix = |rows: usize, cols: usize, it: &mut std::vec::IntoIter<f64>| {
        let v: Vec<f64> = it.by_ref().take(rows * cols).collect();
        Matrix::from_row_slice(rows, cols, &v)
    };
    let mut mats: Vec<Matrix> = Vec::with_capacity(9);
    for _ in 0..3 {
        for j in 0..3 {
            mats.push(take_matrix(cube[j], atoms[j], &mut it));
        }
    }
    let mut lambdas = Vec::with_capacity(layers);
    for _ in 0..layers {
        let mut t = Tensor3::zeros(atoms);
        for i in 0..atoms[0] {
            for j in 0..atoms[1] {
                for k in 0..atoms[2] {
                    t.set(i, j, k, it.next().unwrap());
                }
            }
        }
        lambdas.push(t);
    }
    let mut mats = mats.into_iter();
    let mut next3 = || [mats.next().unwrap(), mats.next().unwrap(), mats.next().unwrap()];
    let params = NetParams {
        d: next3(),
        c: next3(),
        w: next3(),
        lambdas,
    };
    if !params.all_finite() {
        return Err(SmdsError::Corrupt("non-finite parameter".into()));
    }
    if params.lambdas.iter().any(|t| t.data().iter().any(|&v| v < 0.0)) {
        return Err(SmdsError::Corrupt("negative threshold entry".into()));
    }
    Ok((params, cfg))
}

pub fn save_params(params: &NetParams, cfg: &NetConfig, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_params(params, cfg)?)?;
    Ok(())
}

pub fn load_params(path: impl AsRef<Path>) -> Result<(NetParams, NetConfig)> {
    decode_params(&fs::read(path)?)
}
