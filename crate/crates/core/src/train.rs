//! Supervised training of the unfolded network with Adam.

use std::fs;
use std::io::Write;
use std::path::Path;

use log::info;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classic::RankChoice;
use crate::error::{Result, SmdsError};
use crate::net::{backward, estimate_basis, forward, init_params, loss, GradientSet, NetConfig, NetParams};
use crate::tensor::Tensor3;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Side of the square training patches.
    pub patch: usize,
    pub lr0: f64,
    /// Multiplicative decay applied every `decay_every` epochs.
    pub lr_decay: f64,
    pub decay_every: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Upper end of the per-band noise deviation range (data in [0, 1]).
    pub sigma_max: f64,
    pub seed: u64,
    pub rank: RankChoice,
    /// Stop after this many optimizer steps even if epochs remain.
    pub max_steps: Option<usize>,
    /// Call the checkpoint hook every this many epochs (0 disables it).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 2,
            patch: 56,
            lr0: 5e-3,
            lr_decay: 0.35,
            decay_every: 80,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            sigma_max: 95.0 / 255.0,
            seed: 0,
            rank: RankChoice::Auto,
            max_steps: None,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SmdsError::Config(m.to_string()));
        if self.epochs == 0 || self.batch_size == 0 || self.patch == 0 || self.decay_every == 0 {
            return bad("epochs, batch size, patch and decay interval must be positive");
        }
        if !(self.lr0 >= 0.0) || !self.lr0.is_finite() {
            return bad("learning rate must be >= 0");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay < 1.0) {
            return bad("learning-rate decay must lie in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return bad("Adam constants out of range");
        }
        if !(self.sigma_max >= 0.0) {
            return bad("sigma_max must be >= 0");
        }
        Ok(())
    }
}

/// Step-decayed learning rate `lr0 * decay^floor(epoch / decay_every)`.
pub fn lr_at(epoch: usize, cfg: &TrainConfig) -> f64 {
    cfg.lr0 * cfg.lr_decay.powi((epoch / cfg.decay_every) as i32)
}

/// Adam moments, flattened in parameter storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn for_params(p: &NetParams) -> Self {
        AdamState::new(p.len())
    }
}

/// One bias-corrected Adam update of `params` in place. Advances `state.step`.
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) {
    let bc1 = 1.0 - beta1.powi(step as i32);
    let bc2 = 1.0 - beta2.powi(step as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}

/// Adam step over every parameter, followed by clamping thresholds at zero.
pub fn adam_step(params: &mut NetParams, grads: &GradientSet, state: &mut AdamState, lr: f64, cfg: &TrainConfig) -> Result<()> {
    if state.m.len() != params.len() || grads.len() != params.len() {
        return Err(SmdsError::ShapeInconsistent(format!(
            "optimizer state holds {} entries, parameters {}",
            state.m.len(),
            params.len()
        )));
    }
    state.step += 1;
    let mut offset = 0;
    for (p, g) in params.slices_mut().into_iter().zip(grads.slices()) {
        let n = p.len();
        adam_update(
            p,
            g,
            &mut state.m[offset..offset + n],
            &mut state.v[offset..offset + n],
            state.step,
            lr,
            cfg.beta1,
            cfg.beta2,
            cfg.epsilon,
        );
        offset += n;
    }
    params.project_thresholds();
    Ok(())
}

/// Adds zero-mean Gaussian noise to every band with a deviation drawn
/// uniformly from `[0, sigma_max]` per band. Returns the noisy image and the
/// drawn deviations.
pub fn synth_noise<R: Rng>(x: &Tensor3, sigma_max: f64, rng: &mut R) -> Result<(Tensor3, Vec<f64>)> {
    if !(sigma_max >= 0.0) || !sigma_max.is_finite() {
        return Err(SmdsError::InvalidArgument(format!("sigma_max must be >= 0, got {}", sigma_max)));
    }
    let [h, w, bands] = x.dims();
    let plane = h * w;
    let mut y = x.clone();
    let mut sigmas = Vec::with_capacity(bands);
    for b in 0..bands {
        let sigma = if sigma_max > 0.0 { rng.random_range(0.0..=sigma_max) } else { 0.0 };
        sigmas.push(sigma);
        if sigma == 0.0 {
            continue;
        }
        let normal = Normal::new(0.0, sigma).expect("finite nonnegative deviation");
        for v in &mut y.data_mut()[b * plane..(b + 1) * plane] {
            *v += normal.sample(rng);
        }
    }
    Ok((y, sigmas))
}

pub fn synth_noise_seeded(x: &Tensor3, sigma_max: f64, seed: u64) -> Result<(Tensor3, Vec<f64>)> {
    synth_noise(x, sigma_max, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Reverses the column order (left-right mirror).
pub fn flip_horizontal(t: &Tensor3) -> Tensor3 {
    let [_, w, _] = t.dims();
    Tensor3::from_fn(t.dims(), |i, j, k| t.get(i, w - 1 - j, k))
}

/// Reverses the row order (up-down mirror).
pub fn flip_vertical(t: &Tensor3) -> Tensor3 {
    let [h, _, _] = t.dims();
    Tensor3::from_fn(t.dims(), |i, j, k| t.get(h - 1 - i, j, k))
}

/// A drawn augmentation: spatial crop origin plus optional flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentDraw {
    pub row: usize,
    pub col: usize,
    pub size: usize,
    pub hflip: bool,
    pub vflip: bool,
}

impl AugmentDraw {
    /// Full-image crop without flips.
    pub fn identity(dims: [usize; 3]) -> Self {
        AugmentDraw {
            row: 0,
            col: 0,
            size: dims[0].min(dims[1]),
            hflip: false,
            vflip: false,
        }
    }

    pub fn sample<R: Rng>(dims: [usize; 3], size: usize, rng: &mut R) -> Result<Self> {
        if dims[0] < size || dims[1] < size {
            return Err(SmdsError::InvalidArgument(format!(
                "patch {}x{} smaller than the {}x{} target",
                dims[0], dims[1], size, size
            )));
        }
        Ok(AugmentDraw {
            row: rng.random_range(0..=dims[0] - size),
            col: rng.random_range(0..=dims[1] - size),
            size,
            hflip: rng.random_bool(0.5),
            vflip: rng.random_bool(0.5),
        })
    }

    pub fn apply(&self, t: &Tensor3) -> Tensor3 {
        let [_, _, b] = t.dims();
        let mut out = crate::patching::extract_cube(t, [self.row, self.col, 0], [self.size, self.size, b]);
        if self.hflip {
            out = flip_horizontal(&out);
        }
        if self.vflip {
            out = flip_vertical(&out);
        }
        out
    }
}

/// Random crop to `size x size` with random flips, identical for both members.
pub fn augment<R: Rng>(clean: &Tensor3, noisy: &Tensor3, size: usize, rng: &mut R) -> Result<(Tensor3, Tensor3)> {
    clean.require_same_dims(noisy)?;
    let draw = AugmentDraw::sample(clean.dims(), size, rng)?;
    Ok((draw.apply(clean), draw.apply(noisy)))
}

#[derive(Debug, Clone)]
pub struct HsiSample {
    pub clean: Tensor3,
    /// Fixed noisy counterpart; when absent, noise is synthesized fresh for
    /// every use of the sample.
    pub noisy: Option<Tensor3>,
}

#[derive(Debug, Clone, Default)]
pub struct HsiDataset {
    pub samples: Vec<HsiSample>,
}

impl HsiDataset {
    pub fn from_clean(images: Vec<Tensor3>) -> Self {
        HsiDataset {
            samples: images
                .into_iter()
                .map(|clean| HsiSample { clean, noisy: None })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub lr: f64,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetParams,
    pub adam: AdamState,
    pub history: Vec<StepRecord>,
}

/// Receives `(epoch, params, optimizer state)` after every checkpoint interval.
pub type CheckpointHook<'a> = dyn FnMut(usize, &NetParams, &AdamState) -> Result<()> + 'a;

/// Mean loss and gradient over one batch of noisy/clean patches.
pub fn batch_gradient(
    batch: &[(Tensor3, Tensor3)],
    params: &NetParams,
    net_cfg: &NetConfig,
    rank: RankChoice,
) -> Result<(f64, GradientSet)> {
    let mut total = GradientSet::zeros_like(params);
    let mut total_loss = 0.0;
    for (clean, noisy) in batch {
        let basis = estimate_basis(noisy, rank, net_cfg.cube[2])?;
        let (x_hat, cache) = forward(noisy, &basis, params, net_cfg)?;
        total_loss += loss(&x_hat, clean)?;
        total.add_scaled(1.0, &backward(&cache, &x_hat, clean, params)?);
    }
    let scale = 1.0 / batch.len() as f64;
    total.scale(scale);
    Ok((total_loss * scale, total))
}

pub fn train_loop(dataset: &HsiDataset, net_cfg: &NetConfig, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let params = init_params(net_cfg)?;
    let adam = AdamState::for_params(&params);
    train_loop_from(dataset, net_cfg, cfg, params, adam, None)
}

/// Training from given parameters and optimizer state, with an optional checkpoint hook.
pub fn train_loop_from(
    dataset: &HsiDataset,
    net_cfg: &NetConfig,
    cfg: &TrainConfig,
    mut params: NetParams,
    mut adam: AdamState,
    mut checkpoint: Option<&mut CheckpointHook<'_>>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    net_cfg.validate()?;
    params.check(net_cfg)?;
    if dataset.is_empty() {
        return Err(SmdsError::InvalidArgument("training set is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::new();
    let mut step = 0usize;

    'epochs: for epoch in 0..cfg.epochs {
        let lr = lr_at(epoch, cfg);
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            if cfg.max_steps.is_some_and(|m| step >= m) {
                break 'epochs;
            }
            let mut batch = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let sample = &dataset.samples[i];
                let pair = match &sample.noisy {
                    Some(noisy) => augment(&sample.clean, noisy, cfg.patch, &mut rng)?,
                    None => {
                        let draw = AugmentDraw::sample(sample.clean.dims(), cfg.patch, &mut rng)?;
                        let clean = draw.apply(&sample.clean);
                        let (noisy, _) = synth_noise(&clean, cfg.sigma_max, &mut rng)?;
                        (clean, noisy)
                    }
                };
                batch.push(pair);
            }
            let at = |what: &str| SmdsError::NonFinite(format!("{} at step {} (epoch {})", what, step, epoch));
            let (batch_loss, grads) = batch_gradient(&batch, &params, net_cfg, cfg.rank).map_err(|e| match e {
                SmdsError::NonFinite(m) => at(&m),
                other => other,
            })?;
            if !batch_loss.is_finite() {
                return Err(at("loss"));
            }
            adam_step(&mut params, &grads, &mut adam, lr, cfg)?;
            history.push(StepRecord {
                step,
                epoch,
                lr,
                loss: batch_loss,
            });
            step += 1;
        }
        info!("epoch {} done, last loss {:.6}", epoch, history.last().map_or(f64::NAN, |r| r.loss));
        if cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0 {
            if let Some(hook) = checkpoint.as_deref_mut() {
                hook(epoch + 1, &params, &adam)?;
            }
        }
    }
    Ok(TrainOutcome {
        params,
        adam,
        history,
    })
}

/// Moving average of the loss over a trailing window.
pub fn smoothed_losses(history: &[StepRecord], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..history.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            history[lo..=i].iter().map(|r| r.loss).sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}

pub fn write_loss_csv(path: impl AsRef<Path>, history: &[StepRecord]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "step,epoch,lr,loss")?;
    for r in history {
        writeln!(f, "{},{},{:e},{:e}", r.step, r.epoch, r.lr, r.loss)?;
    }
    Ok(())
}

pub const ADAM_MAGIC: &[u8; 8] = b"SMDSADM1";

pub fn encode_adam(state: &AdamState) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * state.m.len());
    out.extend_from_slice(ADAM_MAGIC);
    out.extend_from_slice(&state.step.to_le_bytes());
    out.extend_from_slice(&(state.m.len() as u64).to_le_bytes());
    for v in state.m.iter().chain(&state.v) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_adam(bytes: &[u8]) -> Result<AdamState> {
    if bytes.len() < 24 {
        return Err(SmdsError::Corrupt("truncated optimizer state".into()));
    }
    if &bytes[..8] != ADAM_MAGIC {
        return Err(SmdsError::Format("not an optimizer state file".into()));
    }
    let step = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let n = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let payload = &bytes[24..];
    if payload.len() != 16 * n {
        return Err(SmdsError::Corrupt(format!(
            "optimizer payload has {} bytes, expected {}",
            payload.len(),
            16 * n
        )));
    }
    let vals: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(AdamState {
        step,
        m: vals[..n].to_vec(),
        v: vals[n..].to_vec(),
    })
}

pub fn save_adam(state: &AdamState, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_adam(state))?;
    Ok(())
}

pub fn load_adam(path: impl AsRef<Path>) -> Result<AdamState> {
    decode_adam(&fs::read(path)?)
}
