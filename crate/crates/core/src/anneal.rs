//! Inverse-temperature schedules.

use serde::{Deserialize, Serialize};

/// Schedule for the inverse temperature applied to energies before
/// sampling. `Constant` is the usual choice for posterior inference;
/// the geometric ramp anneals combinatorial optimization runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnnealSchedule {
    Constant {
        beta: f64,
    },
    /// Geometric interpolation from `beta_start` to `beta_end` over
    /// `num_steps` steps. Requires `beta_end >= beta_start` so that the
    /// schedule is monotonically non-decreasing.
    Geometric {
        beta_start: f64,
        beta_end: f64,
        num_steps: u64,
    },
}

impl AnnealSchedule {
    pub fn constant(beta: f64) -> Self {
        AnnealSchedule::Constant { beta }
    }

    pub fn geometric(beta_start: f64, beta_end: f64, num_steps: u64) -> Self {
        AnnealSchedule::Geometric {
            beta_start,
            beta_end,
            num_steps,
        }
    }

    /// Default ramp used for combinatorial optimization runs.
    pub fn cop_default(num_steps: u64) -> Self {
        Self::geometric(0.1, 10.0, num_steps)
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            AnnealSchedule::Constant { beta } => {
                if beta > 0.0 && beta.is_finite() {
                    Ok(())
                } else {
                    Err(format!("beta must be positive and finite, got {beta}"))
                }
            }
            AnnealSchedule::Geometric {
                beta_start,
                beta_end,
                num_steps,
            } => {
                if !(beta_start > 0.0 && beta_start.is_finite()) {
                    return Err(format!("beta_start must be positive, got {beta_start}"));
                }
                if !(beta_end >= beta_start && beta_end.is_finite()) {
                    return Err(format!(
                        "beta_end must be >= beta_start for a non-decreasing ramp, got {beta_end}"
                    ));
                }
                if num_steps == 0 {
                    return Err("num_steps must be positive".into());
                }
                Ok(())
            }
        }
    }

    /// Inverse temperature at step `t` (0-based).
    pub fn beta(&self, t: u64) -> f64 {
        match *self {
            AnnealSchedule::Constant { beta } => beta,
            AnnealSchedule::Geometric {
                beta_start,
                beta_end,
                num_steps,
            } => {
                if num_steps <= 1 {
                    return beta_end;
                }
                let frac = (t.min(num_steps - 1)) as f64 / (num_steps - 1) as f64;
                beta_start * (beta_end / beta_start).powf(frac)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_flat() {
        let s = AnnealSchedule::constant(1.5);
        assert_eq!(s.beta(0), 1.5);
        assert_eq!(s.beta(999), 1.5);
    }

    #[test]
    fn geometric_is_monotone_and_hits_endpoints() {
        let s = AnnealSchedule::geometric(0.1, 10.0, 1000);
        assert!((s.beta(0) - 0.1).abs() < 1e-12);
        assert!((s.beta(999) - 10.0).abs() < 1e-9);
        let mut prev = 0.0;
        for t in 0..1000 {
            let b = s.beta(t);
            assert!(b >= prev);
            prev = b;
        }
        // Clamped past the end.
        assert!((s.beta(5000) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn validation_rejects_decreasing_ramp() {
        assert!(AnnealSchedule::geometric(1.0, 0.5, 10).validate().is_err());
        assert!(AnnealSchedule::constant(-1.0).validate().is_err());
    }
}
