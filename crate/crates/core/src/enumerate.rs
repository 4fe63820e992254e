//! Exact inference by joint enumeration, for small models.
//!
//! Cost is the product of all cardinalities; callers guard the size.

use crate::model::{GraphModel, ModelError, StateVector};

/// Iterate every joint assignment of the model's variables.
pub fn for_each_state(
    model: &GraphModel,
    mut f: impl FnMut(&[u8]),
) -> Result<(), ModelError> {
    let cards: Vec<u16> = model.cardinalities();
    let n = cards.len();
    let mut values = vec![0u8; n];
    loop {
        f(&values);
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            values[i] += 1;
            if (values[i] as u16) < cards[i] {
                break;
            }
            values[i] = 0;
            i += 1;
        }
    }
}

/// Exact per-variable marginals of `P(x) ∝ exp(-beta * E(x))`.
pub fn exact_marginals(model: &GraphModel, beta: f64) -> Result<Vec<Vec<f64>>, ModelError> {
    let cards = model.cardinalities();
    let mut marginals: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c as usize]).collect();
    let mut z = 0.0;

    // Shift energies by the minimum to keep the exponentials in range.
    let mut min_e = f64::INFINITY;
    for_each_state(model, |values| {
        let e = energy_of(model, values);
        if e < min_e {
            min_e = e;
        }
    })?;
    for_each_state(model, |values| {
        let w = (-beta * (energy_of(model, values) - min_e)).exp();
        z += w;
        for (rv, &v) in values.iter().enumerate() {
            marginals[rv][v as usize] += w;
        }
    })?;
    for m in &mut marginals {
        for p in m.iter_mut() {
            *p /= z;
        }
    }
    Ok(marginals)
}

/// Exact joint distribution as (state, probability) pairs in enumeration
/// order.
pub fn exact_joint(model: &GraphModel, beta: f64) -> Result<Vec<(Vec<u8>, f64)>, ModelError> {
    let mut states: Vec<(Vec<u8>, f64)> = Vec::new();
    let mut min_e = f64::INFINITY;
    for_each_state(model, |values| {
        let e = energy_of(model, values);
        if e < min_e {
            min_e = e;
        }
    })?;
    let mut z = 0.0;
    for_each_state(model, |values| {
        let w = (-beta * (energy_of(model, values) - min_e)).exp();
        z += w;
        states.push((values.to_vec(), w));
    })?;
    for (_, p) in &mut states {
        *p /= z;
    }
    Ok(states)
}

/// Minimum-energy assignment and its energy, by exhaustive search.
pub fn exact_minimum(model: &GraphModel) -> Result<(Vec<u8>, f64), ModelError> {
    let mut best = (Vec::new(), f64::INFINITY);
    for_each_state(model, |values| {
        let e = energy_of(model, values);
        if e < best.1 {
            best = (values.to_vec(), e);
        }
    })?;
    Ok(best)
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

fn energy_of(model: &GraphModel, values: &[u8]) -> f64 {
    let state = StateVector {
        values: values.to_vec(),
        step: 0,
    };
    model.energy_full(&state).expect("enumerated state is valid")
}
