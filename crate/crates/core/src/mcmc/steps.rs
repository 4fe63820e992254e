//! Single-step kernels for the Metropolis-Hastings family.

use crate::model::GraphModel;
use crate::model::StateVector;

use super::{ChainError, ChainRng, EvalCtx};

/// A proposed move: value changes applied in order plus the log proposal
/// densities of the forward and reverse directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub changes: Vec<(usize, u8)>,
    pub log_q_forward: f64,
    pub log_q_reverse: f64,
}

impl Proposal {
    /// Symmetric proposal (forward and reverse densities cancel).
    pub fn symmetric(changes: Vec<(usize, u8)>) -> Self {
        Self {
            changes,
            log_q_forward: 0.0,
            log_q_reverse: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhOutcome {
    pub accepted: bool,
    pub log_alpha: f64,
    /// Energy change actually applied (0 on reject).
    pub delta_e: f64,
}

/// Uniform single-variable resample proposal: pick a variable from the
/// auxiliary stream and a value uniformly over its cardinality. Symmetric.
pub fn random_flip_proposal(
    model: &GraphModel,
    state: &StateVector,
    rng: &mut ChainRng,
) -> Proposal {
    let rv = rng.aux_index(model.rv_count());
    let card = model.cardinality(rv) as usize;
    let value = rng.aux_index(card) as u8;
    let _ = state;
    Proposal::symmetric(vec![(rv, value)])
}

/// One accept/reject step. The acceptance probability is computed in the
/// log domain: `log alpha = min(0, -beta * dE + log_q_rev - log_q_fwd)`.
/// On accept the changes stay applied; on reject the state is restored.
pub fn mh_step(
    ctx: &EvalCtx,
    state: &mut StateVector,
    proposal: &Proposal,
    beta: f64,
    rng: &mut ChainRng,
) -> Result<MhOutcome, ChainError> {
    let mut delta_e = 0.0;
    let mut undo: Vec<(usize, u8)> = Vec::with_capacity(proposal.changes.len());
    for &(rv, new_value) in &proposal.changes {
        delta_e += ctx.model.energy_delta(state, rv, new_value)?;
        undo.push((rv, state.values[rv]));
        state.values[rv] = new_value;
    }

    let log_alpha = (-beta * delta_e + proposal.log_q_reverse - proposal.log_q_forward).min(0.0);
    let accepted = rng.accept_uniform().ln() < log_alpha;
    if accepted {
        Ok(MhOutcome {
            accepted,
            log_alpha,
            delta_e,
        })
    } else {
        for &(rv, old) in undo.iter().rev() {
            state.values[rv] = old;
        }
        Ok(MhOutcome {
            accepted,
            log_alpha,
            delta_e: 0.0,
        })
    }
}

fn resample(
    ctx: &EvalCtx,
    values: &[u8],
    rv: usize,
    beta: f64,
    neg_beta_q: i64,
    rng: &mut ChainRng,
) -> Result<u8, ChainError> {
    let scores = ctx.scores(values, rv, beta, neg_beta_q)?;
    Ok(ctx.sample_value(rng, rv, &scores)? as u8)
}

/// Systematic-scan Gibbs sweep: each variable resampled in sequence from
/// its conditional. Returns the total energy change.
pub fn gibbs_step(
    ctx: &EvalCtx,
    state: &mut StateVector,
    rv_order: &[usize],
    beta: f64,
    rng: &mut ChainRng,
) -> Result<f64, ChainError> {
    let neg_beta_q = ctx.neg_beta_q(beta)?;
    let mut delta = 0.0;
    for &rv in rv_order {
        let new = resample(ctx, &state.values, rv, beta, neg_beta_q, rng)?;
        delta += ctx.model.energy_delta(state, rv, new)?;
        state.values[rv] = new;
    }
    Ok(delta)
}

/// Block sweep: iterate the blocks in order; within a block every
/// conditional is computed from the pre-block state, then all members are
/// written. Members of a block are never blanket neighbors, so this is
/// statistically identical to a sequential scan with within-block order
/// freedom.
pub fn block_gibbs_step(
    ctx: &EvalCtx,
    state: &mut StateVector,
    blocks: &[Vec<usize>],
    beta: f64,
    rng: &mut ChainRng,
) -> Result<f64, ChainError> {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    if n != ctx.model.rv_count() {
        return Err(ChainError::InvalidConfig(format!(
            "blocks cover {n} of {} rvs",
            ctx.model.rv_count()
        )));
    }
    let neg_beta_q = ctx.neg_beta_q(beta)?;
    let mut delta = 0.0;
    let mut pending: Vec<(usize, u8)> = Vec::new();
    for block in blocks {
        pending.clear();
        for &rv in block {
            let new = resample(ctx, &state.values, rv, beta, neg_beta_q, rng)?;
            pending.push((rv, new));
        }
        for &(rv, new) in &pending {
            delta += ctx.model.energy_delta(state, rv, new)?;
            state.values[rv] = new;
        }
    }
    Ok(delta)
}

/// Hogwild-style full sweep: every conditional evaluated at the previous
/// state, then all variables written simultaneously.
pub fn async_gibbs_step(
    ctx: &EvalCtx,
    state: &mut StateVector,
    beta: f64,
    rng: &mut ChainRng,
) -> Result<f64, ChainError> {
    let neg_beta_q = ctx.neg_beta_q(beta)?;
    let snapshot = state.values.clone();
    let mut pending = Vec::with_capacity(snapshot.len());
    for rv in 0..ctx.model.rv_count() {
        let new = resample(ctx, &snapshot, rv, beta, neg_beta_q, rng)?;
        pending.push(new);
    }
    let mut delta = 0.0;
    for (rv, &new) in pending.iter().enumerate() {
        delta += ctx.model.energy_delta(state, rv, new)?;
        state.values[rv] = new;
    }
    Ok(delta)
}
