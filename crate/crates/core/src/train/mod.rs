//! Per-pixel training: dataset assembly from cubes, the optimizer loop, the
//! least-squares reference model and the cross-validation drivers.

mod baseline;
mod dataset;
mod experiments;

use std::borrow::Borrow;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use baseline::{linear_baseline, AffineMap};
pub use dataset::{group_by_class, load_dataset, LabeledCube};
pub use experiments::{kfold_split, run_crossval, run_interclass, CrossvalOutcome, FoldAssignment};

use crate::error::{Error, Result};
use crate::forward::{synthesize_rgb, MixingMatrix};
use crate::network::{backward_into, forward_into, ArchitectureSpec, Backprop, Gradients, NetworkParams, Real, Tape};
use crate::spectral::SpectralCube;

/// Samples per gradient work unit. Fixed so that the reduction order, and
/// therefore the result, does not depend on the number of workers.
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Pixels whose largest RGB value reaches this are treated as specular.
    pub specular_mask_threshold: f64,
    /// Pixels drawn per cube; `None` takes every unmasked pixel.
    pub samples_per_cube: Option<usize>,
    /// Standard deviation of Gaussian noise added to training inputs.
    pub input_jitter: f64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 256,
            epochs: 5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            specular_mask_threshold: 0.98,
            samples_per_cube: None,
            input_jitter: 0.0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size must be >= 1"));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::param("Adam betas must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::param("Adam epsilon must be positive"));
        }
        let t = self.specular_mask_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::param(format!("mask threshold {t} must lie in (0, 1]")));
        }
        if self.samples_per_cube == Some(0) {
            return Err(Error::param("samples_per_cube must be >= 1"));
        }
        if !(self.input_jitter >= 0.0 && self.input_jitter.is_finite()) {
            return Err(Error::param("input_jitter must be nonnegative"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers must be >= 1"));
        }
        Ok(())
    }
}

/// Where a training pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelSource {
    pub cube: usize,
    pub row: usize,
    pub col: usize,
}

/// `N` (RGB, spectrum) training pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDataset {
    bands: usize,
    inputs: Vec<f32>,
    targets: Vec<f32>,
    provenance: Vec<PixelSource>,
}

impl PixelDataset {
    pub fn new(bands: usize, inputs: Vec<f32>, targets: Vec<f32>, provenance: Vec<PixelSource>) -> Result<Self> {
        let n = provenance.len();
        if bands == 0 || inputs.len() != 3 * n || targets.len() != bands * n {
            return Err(Error::dim(format!(
                "{} inputs and {} targets do not form {n} pairs of 3 -> {bands}",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.iter().chain(&targets).any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("training values must be finite and inside [0, 1]"));
        }
        Ok(Self {
            bands,
            inputs,
            targets,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn input(&self, n: usize) -> &[f32] {
        &self.inputs[3 * n..3 * n + 3]
    }

    pub fn target(&self, n: usize) -> &[f32] {
        &self.targets[self.bands * n..self.bands * (n + 1)]
    }

    pub fn inputs(&self) -> &[f32] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f32] {
        &self.targets
    }

    pub fn provenance(&self) -> &[PixelSource] {
        &self.provenance
    }
}

/// Synthesizes RGB for every cube and draws training pixels.
///
/// Within each cube, pixels whose brightest channel reaches `mask_threshold`
/// are excluded and `samples_per_cube` positions are drawn without
/// replacement (all of them when `None`). Pairs are ordered by cube, then
/// raster position.
pub fn assemble_dataset<C: Borrow<SpectralCube>>(
    cubes: &[C],
    mix: &MixingMatrix,
    samples_per_cube: Option<usize>,
    mask_threshold: f64,
    seed: u64,
) -> Result<PixelDataset> {
    if !(mask_threshold > 0.0) {
        return Err(Error::param("mask threshold must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bands = mix.bands();
    let (mut inputs, mut targets, mut provenance) = (Vec::new(), Vec::new(), Vec::new());
    for (id, cube) in cubes.iter().enumerate() {
        let cube = cube.borrow();
        let rgb = synthesize_rgb(cube, mix)?;
        let usable: Vec<usize> = rgb
            .data()
            .chunks_exact(3)
            .enumerate()
            .filter(|(_, px)| px.iter().all(|&v| (v as f64) < mask_threshold))
            .map(|(p, _)| p)
            .collect();
        let picked: Vec<usize> = match samples_per_cube {
            None => usable,
            Some(n) if n > usable.len() => {
                return Err(Error::Sampling {
                    cube: format!("#{id}"),
                    requested: n,
                    available: usable.len(),
                })
            }
            Some(n) => {
                let mut idx = index::sample(&mut rng, usable.len(), n).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|k| usable[k]).collect()
            }
        };
        for p in picked {
            inputs.extend_from_slice(&rgb.data()[3 * p..3 * p + 3]);
            targets.extend_from_slice(&cube.data()[bands * p..bands * (p + 1)]);
            provenance.push(PixelSource {
                cube: id,
                row: p / cube.width(),
                col: p % cube.width(),
            });
        }
    }
    PixelDataset::new(bands, inputs, targets, provenance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained<T> {
    pub params: NetworkParams<T>,
    /// Mean per-pixel loss of each epoch, measured before each update.
    pub loss_history: Vec<f64>,
}

struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
    lr: T,
    b1: T,
    b2: T,
    eps: T,
}

impl<T: Real> Adam<T> {
    fn new(n: usize, cfg: &TrainConfig) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
            lr: T::of(cfg.learning_rate),
            b1: T::of(cfg.beta1),
            b2: T::of(cfg.beta2),
            eps: T::of(cfg.epsilon),
        }
    }

    fn step(&mut self, params: &mut NetworkParams<T>, grads: &Gradients<T>) {
        self.t += 1;
        let one = T::one();
        let c1 = one - self.b1.powi(self.t);
        let c2 = one - self.b2.powi(self.t);
        for (((p, &g), m), v) in params.iter_mut().zip(grads.iter()).zip(&mut self.m).zip(&mut self.v) {
            *m = self.b1 * *m + (one - self.b1) * g;
            *v = self.b2 * *v + (one - self.b2) * g * g;
            let mhat = *m / c1;
            let vhat = *v / c2;
            *p -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

/// Scratch state of one gradient work unit.
struct Unit<T> {
    grads: Gradients<T>,
    tape: Tape<T>,
    bp: Backprop<T>,
    loss: f64,
}

impl<T: Real> Unit<T> {
    fn new(params: &NetworkParams<T>) -> Self {
        let tape = Tape::with_capacity(params, CHUNK);
        Self {
            grads: Gradients::zeros_like(params),
            bp: Backprop::new(&tape),
            tape,
            loss: 0.0,
        }
    }

    fn run(&mut self, params: &NetworkParams<T>, inputs: &[T], targets: &[T]) {
        self.grads.fill_zero();
        forward_into(params, inputs, &mut self.tape);
        self.loss = backward_into(params, &self.tape, targets, &mut self.grads, &mut self.bp).as_f64();
    }
}

/// Trains a freshly initialized network (seeded by `cfg.seed`).
pub fn train<T: Real>(data: &PixelDataset, spec: ArchitectureSpec, cfg: &TrainConfig) -> Result<Trained<T>> {
    let init = NetworkParams::init(spec, cfg.seed)?;
    train_from(data, init, cfg)
}

/// Minibatch Adam on the mean squared error, starting from `params`.
///
/// Each batch is split into fixed-size work units whose gradients are summed
/// in order, so the result is bit-identical for any `cfg.workers`.
pub fn train_from<T: Real>(data: &PixelDataset, mut params: NetworkParams<T>, cfg: &TrainConfig) -> Result<Trained<T>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::param("training dataset is empty"));
    }
    if params.spec().input_bands != 3 || data.bands() != params.output_bands() {
        return Err(Error::dim(format!(
            "dataset maps 3 -> {} bands, network maps {} -> {}",
            data.bands(),
            params.spec().input_bands,
            params.output_bands()
        )));
    }
    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::param(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let bands = data.bands();
    let batch = cfg.batch_size.min(data.len());
    let mut units: Vec<Unit<T>> = (0..batch.div_ceil(CHUNK)).map(|_| Unit::new(&params)).collect();
    let mut total = Gradients::zeros_like(&params);
    let mut adam = Adam::new(params.param_count(), cfg);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(1);
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    jitter_rng.set_stream(2);
    let jitter = (cfg.input_jitter > 0.0)
        .then(|| Normal::new(0.0, cfg.input_jitter).map_err(|e| Error::param(e.to_string())))
        .transpose()?;

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut xb: Vec<T> = Vec::with_capacity(3 * batch);
    let mut yb: Vec<T> = Vec::with_capacity(bands * batch);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for (b, ids) in order.chunks(batch).enumerate() {
            xb.clear();
            yb.clear();
            for &n in ids {
                for &v in data.input(n) {
                    let v = match &jitter {
                        Some(d) => v as f64 + d.sample(&mut jitter_rng),
                        None => v as f64,
                    };
                    xb.push(T::of(v));
                }
                yb.extend(data.target(n).iter().map(|&v| T::of_f32(v)));
            }
            let n_units = ids.len().div_ceil(CHUNK);
            let work = |(u, unit): (usize, &mut Unit<T>)| {
                let lo = u * CHUNK;
                let hi = (lo + CHUNK).min(ids.len());
                unit.run(&params, &xb[3 * lo..3 * hi], &yb[bands * lo..bands * hi]);
            };
            match &pool {
                Some(pool) => pool.install(|| units[..n_units].par_iter_mut().enumerate().for_each(work)),
                None => units[..n_units].iter_mut().enumerate().for_each(work),
            }
            total.fill_zero();
            let mut batch_loss = 0.0;
            for unit in &units[..n_units] {
                total.add_assign(&unit.grads);
                batch_loss += unit.loss;
            }
            if !batch_loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    loss: batch_loss / ids.len() as f64,
                });
            }
            epoch_loss += batch_loss;
            total.scale(T::one() / T::of(ids.len() as f64));
            adam.step(&mut params, &total);
        }
        let mean = epoch_loss / data.len() as f64;
        log::info!("epoch {}/{}: loss {mean:.6e}", epoch + 1, cfg.epochs);
        history.push(mean);
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            epoch: cfg.epochs.saturating_sub(1),
            batch: 0,
            loss: f64::NAN,
        });
    }
    Ok(Trained {
        params,
        loss_history: history,
    })
}
