//! Reference implementations of the discrete MCMC algorithms.
//!
//! One chain is strictly sequential; multiple chains run concurrently with
//! independent seeds. All randomness flows through [`ChainRng`], which
//! assigns one logical substream per random variable plus dedicated streams
//! for index selection and accept decisions. The counter-based generator
//! makes every draw addressable by coordinates, so the pipeline simulator
//! can consume the identical noise out of order.

pub mod machine;
mod pas;
mod steps;

pub use pas::{pas_log_alpha, pas_selection_scores, pas_step, PasOutcome};
pub use steps::{
    async_gibbs_step, block_gibbs_step, gibbs_step, mh_step, random_flip_proposal, MhOutcome,
    Proposal,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anneal::AnnealSchedule;
use crate::model::{GraphModel, ModelError, StateVector};
use crate::quant::{self, QuantError};
use crate::rng::{self, streams};
use crate::samplers::{self, GumbelLut, SampleError};

use machine::MachineModel;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error("invalid chain config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Algorithm {
    Mh,
    Gibbs,
    BlockGibbs,
    AsyncGibbs,
    Pas { l: usize },
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Mh => "mh",
            Algorithm::Gibbs => "gibbs",
            Algorithm::BlockGibbs => "block-gibbs",
            Algorithm::AsyncGibbs => "async-gibbs",
            Algorithm::Pas { .. } => "pas",
        }
    }
}

/// Which sampler backend draws values from per-variable conditionals.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerKind {
    /// Exact Gumbel-max over unnormalized scores (default).
    Gumbel,
    /// Prefix-sum sampler over exponentiated weights.
    Cdf,
    /// Gumbel-max with table-quantized noise.
    Lut(GumbelLut),
}

impl Default for SamplerKind {
    fn default() -> Self {
        SamplerKind::Gumbel
    }
}

/// Numeric mode for conditional scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainArith {
    /// Double-precision scores straight from the model.
    Exact,
    /// The datapath's 32-bit fixed-point arithmetic; bit-compatible with
    /// the pipeline simulator.
    Machine { frac_bits: u32 },
}

impl Default for ChainArith {
    fn default() -> Self {
        ChainArith::Exact
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub algorithm: Algorithm,
    pub num_steps: u64,
    pub burn_in: u64,
    pub anneal: AnnealSchedule,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub arith: ChainArith,
    /// Initial assignment; all zeros when absent.
    pub init: Option<Vec<u8>>,
    /// Record (step, energy, best energy) every `trace_stride` steps;
    /// 0 disables the trace.
    pub trace_stride: u64,
}

impl ChainConfig {
    pub fn new(algorithm: Algorithm, num_steps: u64, seed: u64) -> Self {
        Self {
            algorithm,
            num_steps,
            burn_in: 0,
            anneal: AnnealSchedule::constant(1.0),
            seed,
            sampler: SamplerKind::Gumbel,
            arith: ChainArith::Exact,
            init: None,
            trace_stride: 0,
        }
    }

    pub fn validate(&self, model: &GraphModel) -> Result<(), ChainError> {
        if self.burn_in > self.num_steps {
            return Err(ChainError::InvalidConfig(format!(
                "burn_in {} exceeds num_steps {}",
                self.burn_in, self.num_steps
            )));
        }
        self.anneal
            .validate()
            .map_err(ChainError::InvalidConfig)?;
        if let Algorithm::Pas { l } = self.algorithm {
            if l < 1 || l > model.rv_count() {
                return Err(ChainError::InvalidConfig(format!(
                    "pas l {} outside 1..={}",
                    l,
                    model.rv_count()
                )));
            }
        }
        if let Some(init) = &self.init {
            model.validate_state(&StateVector::new(init.clone()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: u64,
    pub energy: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub final_state: StateVector,
    /// Per-variable value counts over the post-burn-in steps. Each
    /// variable's counts sum to `num_steps - burn_in`.
    pub histograms: Vec<Vec<u64>>,
    pub best_state: Vec<u8>,
    pub best_energy: f64,
    pub energy_trace: Vec<TracePoint>,
    pub proposed: u64,
    pub accepted: u64,
}

impl ChainResult {
    /// Normalized per-variable marginal estimates.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        self.histograms
            .iter()
            .map(|h| {
                let total: u64 = h.iter().sum();
                if total == 0 {
                    vec![0.0; h.len()]
                } else {
                    h.iter().map(|&c| c as f64 / total as f64).collect()
                }
            })
            .collect()
    }
}

/// Per-stream draw bookkeeping shared by the chains and the simulator.
///
/// Streams `0..n` carry conditional-bin noise for the matching variable
/// (one draw per scanned bin). Stream `n` carries index-selection noise,
/// `n + 1` accept/reject uniforms and `n + 2` auxiliary proposal draws.
#[derive(Debug, Clone)]
pub struct ChainRng {
    seed: u64,
    rv_count: usize,
    counters: Vec<u64>,
}

impl ChainRng {
    pub fn new(seed: u64, rv_count: usize) -> Self {
        Self {
            seed,
            rv_count,
            counters: vec![0; rv_count + 3],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self, stream: u64) -> u64 {
        self.counters[stream as usize]
    }

    fn take(&mut self, stream: u64, n: u64) -> u64 {
        let c = &mut self.counters[stream as usize];
        let base = *c;
        *c += n;
        base
    }

    /// Gumbel-max over `scores` using the bin-noise stream of `rv`.
    pub fn gumbel_over_rv(&mut self, rv: usize, scores: &[f64]) -> Result<usize, SampleError> {
        let base = self.take(rv as u64, scores.len() as u64);
        samplers::gumbel_sample_at(scores, self.seed, rv as u64, base)
    }

    /// LUT-noise Gumbel-max using the bin-noise stream of `rv`.
    pub fn lut_over_rv(
        &mut self,
        rv: usize,
        scores_q: &[i32],
        lut: &GumbelLut,
        frac_bits: u32,
    ) -> Result<usize, SampleError> {
        let base = self.take(rv as u64, scores_q.len() as u64);
        let mut rng = crate::rng::UniformRng::substream(self.seed, rv as u64);
        rng.set_counter(base);
        samplers::gumbel_sample_lut(scores_q, lut, frac_bits, &mut rng)
    }

    /// Prefix-sum draw (single uniform) from the bin-noise stream of `rv`.
    pub fn cdf_over_rv(&mut self, rv: usize, weights: &[f64]) -> Result<usize, SampleError> {
        let base = self.take(rv as u64, 1);
        let mut rng = crate::rng::UniformRng::substream(self.seed, rv as u64);
        rng.set_counter(base);
        samplers::cdf_sample(weights, &mut rng)
    }

    /// Gumbel-max over selection scores (index stream).
    pub fn gumbel_selection(&mut self, scores: &[f64]) -> Result<usize, SampleError> {
        let stream = streams::selection(self.rv_count);
        let base = self.take(stream, scores.len() as u64);
        samplers::gumbel_sample_at(scores, self.seed, stream, base)
    }

    /// Uniform in (0, 1) from the accept stream.
    pub fn accept_uniform(&mut self) -> f64 {
        let stream = streams::accept(self.rv_count);
        let base = self.take(stream, 1);
        rng::unit_open(rng::draw_at(self.seed, stream, base))
    }

    /// Uniform index from the auxiliary stream.
    pub fn aux_index(&mut self, n: usize) -> usize {
        let stream = streams::aux(self.rv_count);
        let base = self.take(stream, 1);
        let raw = rng::draw_at(self.seed, stream, base);
        ((raw >> 11) as f64 * (1.0 / 9.007_199_254_740_992e15) * n as f64) as usize % n
    }
}

/// Evaluation context: model, optional quantized view, sampler backend.
/// Shared with the pipeline simulator's sequencer, which drives the same
/// scoring and sampling paths from compiled memory images.
pub struct EvalCtx<'m> {
    pub model: &'m GraphModel,
    pub machine: Option<MachineModel>,
    pub sampler: SamplerKind,
}

impl<'m> EvalCtx<'m> {
    pub fn new(model: &'m GraphModel, arith: ChainArith, sampler: SamplerKind) -> Result<Self, ChainError> {
        let machine = match arith {
            ChainArith::Exact => None,
            ChainArith::Machine { frac_bits } => {
                Some(MachineModel::from_model(model, frac_bits)?)
            }
        };
        Ok(Self {
            model,
            machine,
            sampler,
        })
    }

    pub fn frac_bits(&self) -> u32 {
        self.machine
            .as_ref()
            .map(|m| m.frac_bits)
            .unwrap_or(quant::DEFAULT_FRAC_BITS)
    }

    /// Quantized `-beta` multiplier for the current step (machine mode).
    pub fn neg_beta_q(&self, beta: f64) -> Result<i64, ChainError> {
        Ok(quant::quantize(-beta, self.frac_bits())? as i64)
    }

    /// Sampling scores (`-beta * local energy` up to arithmetic mode) for
    /// every candidate value of `rv`.
    pub fn scores(
        &self,
        values: &[u8],
        rv: usize,
        beta: f64,
        neg_beta_q: i64,
    ) -> Result<Vec<f64>, ChainError> {
        match &self.machine {
            None => {
                let state = StateVector {
                    values: values.to_vec(),
                    step: 0,
                };
                let local = self.model.local_conditional_energies(&state, rv)?;
                Ok(local.into_iter().map(|e| -beta * e).collect())
            }
            Some(m) => Ok(m.prepared_scores(&m.local_bins_q(values, rv), neg_beta_q)),
        }
    }

    /// Draw a value for `rv` from `softmax(scores)` with the configured
    /// backend, consuming the rv's noise stream.
    pub fn sample_value(
        &self,
        chain_rng: &mut ChainRng,
        rv: usize,
        scores: &[f64],
    ) -> Result<usize, ChainError> {
        let idx = match &self.sampler {
            SamplerKind::Gumbel => chain_rng.gumbel_over_rv(rv, scores)?,
            SamplerKind::Cdf => {
                let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = scores.iter().map(|&s| (s - m).exp()).collect();
                chain_rng.cdf_over_rv(rv, &weights)?
            }
            SamplerKind::Lut(lut) => {
                let frac = self.frac_bits();
                let scores_q: Vec<i32> = scores
                    .iter()
                    .map(|&s| quant::quantize(s, frac))
                    .collect::<Result<_, _>>()?;
                chain_rng.lut_over_rv(rv, &scores_q, lut, frac)?
            }
        };
        Ok(idx)
    }
}

/// Run a chain to completion. Deterministic given the config seed.
pub fn run_chain(model: &GraphModel, config: &ChainConfig) -> Result<ChainResult, ChainError> {
    config.validate(model)?;
    model.validate()?;
    let n = model.rv_count();
    let ctx = EvalCtx::new(model, config.arith, config.sampler.clone())?;
    let mut chain_rng = ChainRng::new(config.seed, n);

    let mut state = StateVector::new(
        config
            .init
            .clone()
            .unwrap_or_else(|| vec![0; n]),
    );
    let mut energy = model.energy_full(&state)?;
    let mut best_energy = energy;
    let mut best_state = state.values.clone();
    let mut histograms: Vec<Vec<u64>> = model
        .cardinalities()
        .iter()
        .map(|&c| vec![0u64; c as usize])
        .collect();
    let mut trace = Vec::new();
    let mut proposed = 0u64;
    let mut accepted = 0u64;

    let gibbs_order: Vec<usize> = (0..n).collect();
    let blocks = match config.algorithm {
        Algorithm::BlockGibbs => model.block_partition(),
        _ => Vec::new(),
    };

    for t in 0..config.num_steps {
        state.step = t;
        let beta = config.anneal.beta(t);
        let delta = match config.algorithm {
            Algorithm::Mh => {
                let proposal = random_flip_proposal(model, &state, &mut chain_rng);
                let outcome = mh_step(&ctx, &mut state, &proposal, beta, &mut chain_rng)?;
                proposed += 1;
                if outcome.accepted {
                    accepted += 1;
                }
                outcome.delta_e
            }
            Algorithm::Gibbs => gibbs_step(&ctx, &mut state, &gibbs_order, beta, &mut chain_rng)?,
            Algorithm::BlockGibbs => {
                block_gibbs_step(&ctx, &mut state, &blocks, beta, &mut chain_rng)?
            }
            Algorithm::AsyncGibbs => async_gibbs_step(&ctx, &mut state, beta, &mut chain_rng)?,
            Algorithm::Pas { l } => {
                let outcome = pas_step(&ctx, &mut state, l, beta, &mut chain_rng)?;
                proposed += 1;
                if outcome.accepted {
                    accepted += 1;
                }
                outcome.delta_e
            }
        };
        energy += delta;

        if energy < best_energy {
            best_energy = energy;
            best_state.copy_from_slice(&state.values);
        }
        if t >= config.burn_in {
            for (rv, &v) in state.values.iter().enumerate() {
                histograms[rv][v as usize] += 1;
            }
        }
        if config.trace_stride > 0 && t % config.trace_stride == 0 {
            trace.push(TracePoint {
                step: t,
                energy,
                best_energy,
            });
        }
    }

    state.step = config.num_steps;
    Ok(ChainResult {
        final_state: state,
        histograms,
        best_state,
        best_energy,
        energy_trace: trace,
        proposed,
        accepted,
    })
}
