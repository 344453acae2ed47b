//! Sphere sampling, ADAM, and the multi-restart training loop.
//!
//! Every network is fitted to the constant target 1 on uniformly random
//! points of the unit sphere `S^{d-1}`. Runs are fully deterministic in
//! `(spec, config)`: dataset, initial weights and per-epoch batch order are
//! all drawn from independent ChaCha streams keyed by the run seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::TrainError;
use crate::net::{GradientBundle, Matrix, Network, NetworkSpec};

const DATASET_STREAM: u64 = 1;
const SHUFFLE_STREAM_BASE: u64 = 1 << 40;

/// Loss above which a run is considered diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// The regression target on the sphere.
pub const TARGET: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub num_points: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Full-dataset loss is recorded every `log_every` epochs and after the last one.
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_points: 10_000,
            batch_size: 1000,
            epochs: 10_000,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            restarts: 5,
            log_every: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: String| Err(TrainError::InvalidConfig(msg));
        if self.batch_size < 1 {
            return fail("batch_size must be at least 1".into());
        }
        if self.num_points < self.batch_size {
            return fail(format!(
                "num_points ({}) must be at least batch_size ({})",
                self.num_points, self.batch_size
            ));
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return fail("ADAM betas must lie in [0, 1)".into());
        }
        if !(self.adam_eps > 0.0) {
            return fail("adam_eps must be positive".into());
        }
        if self.restarts < 1 {
            return fail("restarts must be at least 1".into());
        }
        if self.log_every < 1 {
            return fail("log_every must be at least 1".into());
        }
        Ok(())
    }
}

/// Unit vectors in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// `m` points uniform on `S^{d-1}` (normalized standard Gaussians).
pub fn sample_sphere(dim: usize, m: usize, seed: u64) -> Dataset {
    assert!(dim >= 2 && m >= 1, "sample_sphere needs d >= 2 and m >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DATASET_STREAM);
    let mut coords = Vec::with_capacity(dim * m);
    let mut v = vec![0.0; dim];
    for _ in 0..m {
        let norm = loop {
            for c in v.iter_mut() {
                *c = StandardNormal.sample(&mut rng);
            }
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 1e-100 {
                break n;
            }
        };
        coords.extend(v.iter().map(|c| c / norm));
    }
    Dataset { dim, coords }
}

/// First and second moment estimates for every weight, plus the step count.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Matrix>,
    v: Vec<Matrix>,
    step: u64,
}

impl AdamState {
    pub fn new(spec: &NetworkSpec) -> Self {
        let zeros: Vec<Matrix> = spec
            .layer_shapes()
            .into_iter()
            .map(|(r, c)| Matrix::zeros(r, c))
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &[Matrix] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Matrix] {
        &self.v
    }

    /// One bias-corrected ADAM update of `weights` in place.
    pub fn step(
        &mut self,
        weights: &mut [Matrix],
        grads: &GradientBundle,
        config: &TrainConfig,
    ) -> Result<(), TrainError> {
        let shapes_match = weights.len() == grads.grads.len()
            && weights.len() == self.m.len()
            && weights
                .iter()
                .zip(&grads.grads)
                .zip(&self.m)
                .all(|((w, g), m)| w.shape() == g.shape() && w.shape() == m.shape());
        if !shapes_match {
            return Err(TrainError::ShapeMismatch);
        }
        self.step += 1;
        let (b1, b2) = (config.adam_beta1, config.adam_beta2);
        let t = self.step as i32;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let lr = config.learning_rate;
        for (((w, g), m), v) in weights
            .iter_mut()
            .zip(&grads.grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for (((wi, &gi), mi), vi) in w
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice())
            {
                *mi = b1 * *mi + (1.0 - b1) * gi;
                *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *wi -= lr * m_hat / (v_hat.sqrt() + config.adam_eps);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub network: Network,
    pub final_loss: f64,
    pub loss_history: Vec<(usize, f64)>,
    pub restart_index: usize,
    pub seed_used: u64,
}

fn epoch_order(n: usize, seed: u64, epoch: usize, order: &mut Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SHUFFLE_STREAM_BASE + epoch as u64);
    order.clear();
    order.extend(0..n);
    order.shuffle(&mut rng);
}

fn dataset_loss(net: &Network, data: &Dataset) -> f64 {
    let mut ws = net.workspace();
    let sq: f64 = data
        .points()
        .map(|x| (net.forward_with(x, &mut ws) - TARGET).powi(2))
        .sum();
    sq / data.len() as f64
}

/// Trains one network from `config.seed`.
pub fn train(spec: &NetworkSpec, config: &TrainConfig) -> Result<TrainResult, TrainError> {
    spec.validate()?;
    config.validate()?;
    let seed = config.seed;
    let data = sample_sphere(spec.input_dim(), config.num_points, seed);
    let mut net = Network::init(spec.clone(), seed)?;
    let mut adam = AdamState::new(spec);
    let mut grads = GradientBundle::zeros(spec);
    let mut ws = net.workspace();
    let mut order = Vec::with_capacity(data.len());
    let mut history = Vec::with_capacity(config.epochs / config.log_every + 1);

    for epoch in 1..=config.epochs {
        epoch_order(data.len(), seed, epoch, &mut order);
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            let mut sq = 0.0;
            for &i in batch {
                sq += net.accumulate_sample(data.point(i), TARGET, batch.len(), &mut ws, &mut grads);
            }
            let loss = sq / batch.len() as f64;
            if !loss.is_finite() || loss > DIVERGENCE_THRESHOLD {
                return Err(TrainError::Diverged { seed, epoch, loss });
            }
            grads.loss = loss;
            adam.step(net.weights_mut(), &grads, config)?;
        }
        if epoch % config.log_every == 0 || epoch == config.epochs {
            let loss = dataset_loss(&net, &data);
            if !loss.is_finite() || loss > DIVERGENCE_THRESHOLD {
                return Err(TrainError::Diverged { seed, epoch, loss });
            }
            history.push((epoch, loss));
        }
    }

    let final_loss = history.last().map(|&(_, l)| l).expect("epochs >= 1");
    Ok(TrainResult {
        network: net,
        final_loss,
        loss_history: history,
        restart_index: 0,
        seed_used: seed,
    })
}

/// Runs `config.restarts` trainings with seeds `seed, seed + 1, ...` and keeps
/// the lowest final loss. Ties go to the earliest restart; diverged runs are
/// skipped.
pub fn train_best_of(spec: &NetworkSpec, config: &TrainConfig) -> Result<TrainResult, TrainError> {
    Ok(train_all(spec, config)?.0)
}

/// Like [`train_best_of`] but also returns the final loss of every restart
/// (`None` for diverged runs).
pub fn train_all(
    spec: &NetworkSpec,
    config: &TrainConfig,
) -> Result<(TrainResult, Vec<Option<f64>>), TrainError> {
    spec.validate()?;
    config.validate()?;
    let runs: Vec<Result<TrainResult, TrainError>> = (0..config.restarts)
        .into_par_iter()
        .map(|k| {
            let cfg = TrainConfig {
                seed: config.seed.wrapping_add(k as u64),
                ..config.clone()
            };
            train(spec, &cfg).map(|mut r| {
                r.restart_index = k;
                r
            })
        })
        .collect();

    let losses = runs.iter().map(|r| r.as_ref().ok().map(|r| r.final_loss)).collect();
    let mut best: Option<TrainResult> = None;
    let mut last_err = None;
    for run in runs {
        match run {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.final_loss < b.final_loss) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(b) => Ok((b, losses)),
        None => Err(TrainError::AllRestartsDiverged {
            restarts: config.restarts,
            last: Box::new(last_err.expect("at least one restart ran")),
        }),
    }
}
