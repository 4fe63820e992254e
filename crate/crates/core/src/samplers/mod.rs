//! Discrete-distribution sampling primitives.
//!
//! The Gumbel-max path consumes unnormalized log-weights directly (scores
//! `-beta * E`, shifted by any constant); the CDF path consumes nonnegative
//! weights. Ties always resolve to the lowest index, matching a sequential
//! comparator that updates only on strict greater-than.

mod lut;

pub use lut::{GumbelLut, DEFAULT_LUT_SIZE, DEFAULT_PRECISION_BITS, LUT_INTEGER_BITS};

use thiserror::Error;

use crate::rng::UniformRng;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("gumbel noise input {0} outside the open interval (0, 1)")]
    UnitRange(f64),
    #[error("cannot sample from an empty distribution")]
    Empty,
    #[error("cdf sampler needs at least one strictly positive weight")]
    DegenerateWeights,
    #[error("negative weight {0} at index {1}")]
    NegativeWeight(f64, usize),
    #[error("fixed-point overflow adding noise to energy at index {0}")]
    WidthOverflow(usize),
    #[error("{0}")]
    BadLutConfig(String),
}

/// `-ln(-ln(u))` for `u` in the open unit interval.
#[inline]
pub fn gumbel_noise(u: f64) -> Result<f64, SampleError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(SampleError::UnitRange(u));
    }
    Ok(-(-u.ln()).ln())
}

#[inline]
fn gumbel_noise_unchecked(u: f64) -> f64 {
    -(-u.ln()).ln()
}

/// Argmax of `scores[j] + noise(j)` with lowest-index tie-breaking.
#[inline]
pub fn perturbed_argmax(scores: &[f64], mut noise: impl FnMut(usize) -> f64) -> usize {
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (j, &v) in scores.iter().enumerate() {
        let s = v + noise(j);
        if s > best_score {
            best_score = s;
            best = j;
        }
    }
    best
}

/// Sample an index from the categorical distribution `softmax(scores)` via
/// the Gumbel-max trick. `scores` are log-probabilities up to a shared
/// constant; one uniform draw is consumed per entry.
pub fn gumbel_sample(scores: &[f64], rng: &mut UniformRng) -> Result<usize, SampleError> {
    if scores.is_empty() {
        return Err(SampleError::Empty);
    }
    Ok(perturbed_argmax(scores, |_| {
        gumbel_noise_unchecked(rng.next_open())
    }))
}

/// Same as [`gumbel_sample`] but with noise addressed by absolute draw
/// coordinates, so out-of-order consumers (the pipeline simulator) produce
/// the identical index.
pub fn gumbel_sample_at(
    scores: &[f64],
    seed: u64,
    stream: u64,
    counter_base: u64,
) -> Result<usize, SampleError> {
    if scores.is_empty() {
        return Err(SampleError::Empty);
    }
    Ok(perturbed_argmax(scores, |j| {
        gumbel_noise_unchecked(crate::rng::unit_open(crate::rng::draw_at(
            seed,
            stream,
            counter_base + j as u64,
        )))
    }))
}

/// Gumbel-max over fixed-point energies with LUT noise.
///
/// `scores_q` share the scale `2^-frac_bits`; LUT entries are aligned by a
/// left shift. Each entry consumes one raw draw of `log2(lut.size())` bits.
/// The accumulating adder is 32-bit; overflowing it is an error.
pub fn gumbel_sample_lut(
    scores_q: &[i32],
    lut: &GumbelLut,
    frac_bits: u32,
    rng: &mut UniformRng,
) -> Result<usize, SampleError> {
    if scores_q.is_empty() {
        return Err(SampleError::Empty);
    }
    let shift = frac_bits
        .checked_sub(lut.frac_bits())
        .ok_or_else(|| SampleError::BadLutConfig("lut finer than energy scale".into()))?;
    let mut best = 0usize;
    let mut best_score = i64::MIN;
    for (j, &v) in scores_q.iter().enumerate() {
        let noise = (lut.entry(rng.next_bits(lut.index_bits()) as usize) as i64) << shift;
        let s = v as i64 + noise;
        if s > i32::MAX as i64 || s < i32::MIN as i64 {
            return Err(SampleError::WidthOverflow(j));
        }
        if s > best_score {
            best_score = s;
            best = j;
        }
    }
    Ok(best)
}

/// Prefix-sum (inverse transform) sampler over nonnegative weights:
/// scales one uniform draw by the total and returns the smallest index
/// whose running prefix exceeds it.
pub fn cdf_sample(weights: &[f64], rng: &mut UniformRng) -> Result<usize, SampleError> {
    if weights.is_empty() {
        return Err(SampleError::Empty);
    }
    let mut total = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w < 0.0 || !w.is_finite() {
            return Err(SampleError::NegativeWeight(w, i));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(SampleError::DegenerateWeights);
    }
    let target = rng.next_f64() * total;
    let mut prefix = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        prefix += w;
        if prefix > target {
            return Ok(i);
        }
    }
    // Rounding may leave the final prefix equal to target; return the last
    // index with positive weight.
    Ok(weights
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("total > 0 means a positive weight exists"))
}

/// Normalized probabilities of `softmax(scores)`; shared constant removed
/// through the max for numerical stability.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        // All entries impossible; match the sampler's lowest-index rule.
        let mut p = vec![0.0; scores.len()];
        if !p.is_empty() {
            p[0] = 1.0;
        }
        return p;
    }
    let exps: Vec<f64> = scores.iter().map(|&s| (s - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// `log(sum(exp(scores)))` with the usual max shift.
pub fn log_sum_exp(scores: &[f64]) -> f64 {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + scores.iter().map(|&s| (s - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_fixed_points() {
        // u = e^-1 -> 0, u = e^-e -> -1.
        assert!(gumbel_noise((-1.0f64).exp()).unwrap().abs() < 1e-12);
        assert!((gumbel_noise((-std::f64::consts::E).exp()).unwrap() + 1.0).abs() < 1e-12);
        // u = 0.5 -> -ln(ln 2), checked against an independent evaluation.
        let g = gumbel_noise(0.5).unwrap();
        assert!((g - 0.36651292058166435).abs() < 1e-15);
    }

    #[test]
    fn noise_rejects_closed_endpoints() {
        assert!(gumbel_noise(0.0).is_err());
        assert!(gumbel_noise(1.0).is_err());
        assert!(gumbel_noise(-0.5).is_err());
    }

    #[test]
    fn single_entry_always_zero() {
        let mut rng = UniformRng::new(3);
        for _ in 0..20 {
            assert_eq!(gumbel_sample(&[1.25], &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn impossible_category_never_sampled() {
        let mut rng = UniformRng::new(4);
        for _ in 0..200 {
            assert_eq!(
                gumbel_sample(&[0.0, f64::NEG_INFINITY], &mut rng).unwrap(),
                0
            );
        }
    }

    #[test]
    fn empty_distribution_is_an_error() {
        let mut rng = UniformRng::new(4);
        assert_eq!(gumbel_sample(&[], &mut rng), Err(SampleError::Empty));
        assert_eq!(cdf_sample(&[], &mut rng), Err(SampleError::Empty));
    }

    #[test]
    fn shift_invariance_is_exact() {
        let scores = [0.3, -1.2, 0.9, 0.0];
        let shifted: Vec<f64> = scores.iter().map(|s| s + 7.5).collect();
        let mut a = UniformRng::new(99);
        let mut b = UniformRng::new(99);
        for _ in 0..500 {
            assert_eq!(
                gumbel_sample(&scores, &mut a).unwrap(),
                gumbel_sample(&shifted, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn random_access_matches_sequential_sampling() {
        let scores = [0.1, 0.7, -0.3];
        let mut rng = UniformRng::substream(5, 2);
        for k in 0..50u64 {
            let seq = gumbel_sample(&scores, &mut rng).unwrap();
            let random = gumbel_sample_at(&scores, 5, 2, k * 3).unwrap();
            assert_eq!(seq, random);
        }
    }

    #[test]
    fn cdf_prefix_rule() {
        // Forced draws via counter search: find raws giving u ~ 0.3, 0.7.
        // Simpler: check the rule directly on the prefix logic.
        let mut rng = UniformRng::new(1);
        let idx = cdf_sample(&[1.0], &mut rng).unwrap();
        assert_eq!(idx, 0);
        assert!(cdf_sample(&[0.0, 0.0], &mut rng).is_err());
        assert!(cdf_sample(&[-1.0, 2.0], &mut rng).is_err());
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[0.0, 1.0, -2.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > p[0] && p[0] > p[2]);
    }
}
