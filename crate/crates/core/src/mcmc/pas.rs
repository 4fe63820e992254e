//! Path auxiliary sampler: a gradient-style proposal that selects the most
//! "dynamic" variables, resamples them along a path, and applies an exact
//! accept/reject correction.
//!
//! One step:
//! 1. For every variable compute the energy gap sum
//!    `dE_i = sum_{s != x_i} (E(x with x_i = s) - E(x))`, restricted to the
//!    variable's blanket factors.
//! 2. Draw `l` indices i.i.d. from the categorical over `-beta * dE`
//!    (Gumbel-max on the selection stream), with replacement; duplicates
//!    are dropped in application order.
//! 3. Resample each selected variable from its conditional at the evolving
//!    path state.
//! 4. Accept with the Metropolis ratio over the extended proposal: reverse
//!    index draws priced at the proposed state and the reverse value path
//!    walked in reverse order.

use crate::model::StateVector;
use crate::samplers::log_sum_exp;

use super::{ChainError, ChainRng, EvalCtx};

#[derive(Debug, Clone, PartialEq)]
pub struct PasOutcome {
    pub accepted: bool,
    pub log_alpha: f64,
    /// Energy change actually applied (0 on reject).
    pub delta_e: f64,
    /// Deduplicated indices in application order.
    pub path: Vec<usize>,
}

/// Selection scores `-beta * dE_i` for every variable (arithmetic mode of
/// the context).
pub fn pas_selection_scores(
    ctx: &EvalCtx,
    values: &[u8],
    beta: f64,
    neg_beta_q: i64,
) -> Result<Vec<f64>, ChainError> {
    let n = ctx.model.rv_count();
    let mut scores = Vec::with_capacity(n);
    match &ctx.machine {
        None => {
            let state = StateVector {
                values: values.to_vec(),
                step: 0,
            };
            for rv in 0..n {
                let local = ctx.model.local_conditional_energies(&state, rv)?;
                let cur = local[values[rv] as usize];
                let gap: f64 = local.iter().map(|e| e - cur).sum();
                scores.push(-beta * gap);
            }
        }
        Some(m) => {
            for rv in 0..n {
                let gap_q = m.delta_e_sum_q(values, rv);
                scores.push(m.prepared_score(gap_q, neg_beta_q));
            }
        }
    }
    Ok(scores)
}

/// Log acceptance ratio for a completed path, recomputed from scratch via
/// the score oracle. `draws` is the raw index sequence (with duplicates),
/// `path` the deduplicated applications. Shared verbatim by the pipeline
/// simulator's sequencer so that both sides reach bit-identical decisions.
pub fn pas_log_alpha(
    mut rv_scores: impl FnMut(&[u8], usize) -> Result<Vec<f64>, ChainError>,
    mut selection: impl FnMut(&[u8]) -> Result<Vec<f64>, ChainError>,
    x: &[u8],
    draws: &[usize],
    path: &[(usize, u8, u8)],
) -> Result<f64, ChainError> {
    // Forward index pricing at the pre-step state.
    let sel_x = selection(x)?;
    let lse_x = log_sum_exp(&sel_x);
    let mut log_idx_fwd = 0.0;
    for &j in draws {
        log_idx_fwd += sel_x[j] - lse_x;
    }

    // Forward value path; the target ratio telescopes along it.
    let mut z = x.to_vec();
    let mut log_q_fwd = 0.0;
    let mut log_target_ratio = 0.0;
    for &(rv, old, new) in path {
        let scores = rv_scores(&z, rv)?;
        let lse = log_sum_exp(&scores);
        log_q_fwd += scores[new as usize] - lse;
        log_target_ratio += scores[new as usize] - scores[old as usize];
        z[rv] = new;
    }

    // Reverse index pricing at the proposed state.
    let sel_y = selection(&z)?;
    let lse_y = log_sum_exp(&sel_y);
    let mut log_idx_rev = 0.0;
    for &j in draws {
        log_idx_rev += sel_y[j] - lse_y;
    }

    // Reverse value path restores the original values in reverse order.
    let mut log_q_rev = 0.0;
    for &(rv, old, _) in path.iter().rev() {
        let scores = rv_scores(&z, rv)?;
        let lse = log_sum_exp(&scores);
        log_q_rev += scores[old as usize] - lse;
        z[rv] = old;
    }
    debug_assert_eq!(z, x);

    Ok((log_target_ratio + log_idx_rev + log_q_rev - log_idx_fwd - log_q_fwd).min(0.0))
}

/// One path-auxiliary step; `l = 0` degenerates to no move.
pub fn pas_step(
    ctx: &EvalCtx,
    state: &mut StateVector,
    l: usize,
    beta: f64,
    rng: &mut ChainRng,
) -> Result<PasOutcome, ChainError> {
    if l == 0 {
        return Ok(PasOutcome {
            accepted: true,
            log_alpha: 0.0,
            delta_e: 0.0,
            path: Vec::new(),
        });
    }
    let neg_beta_q = ctx.neg_beta_q(beta)?;
    let x = state.values.clone();

    // Step 1-2: selection draws, with replacement.
    let sel = pas_selection_scores(ctx, &x, beta, neg_beta_q)?;
    let mut draws = Vec::with_capacity(l);
    for _ in 0..l {
        draws.push(rng.gumbel_selection(&sel)?);
    }

    // Step 3: resample along the path, first occurrence wins.
    let mut seen = vec![false; ctx.model.rv_count()];
    let mut path: Vec<(usize, u8, u8)> = Vec::new();
    let mut delta_e = 0.0;
    for &j in &draws {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        let scores = ctx.scores(&state.values, j, beta, neg_beta_q)?;
        let new = ctx.sample_value(rng, j, &scores)? as u8;
        let old = state.values[j];
        delta_e += ctx.model.energy_delta(state, j, new)?;
        path.push((j, old, new));
        state.values[j] = new;
    }

    // Step 4: exact correction.
    let log_alpha = pas_log_alpha(
        |values, rv| ctx.scores(values, rv, beta, neg_beta_q),
        |values| pas_selection_scores(ctx, values, beta, neg_beta_q),
        &x,
        &draws,
        &path,
    )?;

    let accepted = rng.accept_uniform().ln() < log_alpha;
    if !accepted {
        for &(rv, old, _) in path.iter().rev() {
            state.values[rv] = old;
        }
        delta_e = 0.0;
    }
    Ok(PasOutcome {
        accepted,
        log_alpha,
        delta_e,
        path: path.iter().map(|&(rv, _, _)| rv).collect(),
    })
}
