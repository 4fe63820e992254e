//! Binary restricted Boltzmann machine.
//!
//! `E(v, h) = -sum a_i v_i - sum b_j h_j - sum v_i W_ij h_j`.
//! Variables are ordered visible then hidden, all binary.

use super::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct Rbm {
    pub visible: usize,
    pub hidden: usize,
    pub vbias: Vec<f64>,
    pub hbias: Vec<f64>,
    /// Row-major `visible x hidden` coupling matrix.
    pub weights: Vec<f64>,
}

impl Rbm {
    pub fn new(
        vbias: Vec<f64>,
        hbias: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let visible = vbias.len();
        let hidden = hbias.len();
        let rbm = Self {
            visible,
            hidden,
            vbias,
            hbias,
            weights,
        };
        rbm.validate()?;
        Ok(rbm)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.visible == 0 || self.hidden == 0 {
            return Err(ModelError::Invalid("empty rbm layer".into()));
        }
        if self.weights.len() != self.visible * self.hidden {
            return Err(ModelError::BadTableLen {
                rv: 0,
                got: self.weights.len(),
                expected: self.visible * self.hidden,
            });
        }
        let finite = self.vbias.iter().chain(&self.hbias).chain(&self.weights);
        if finite.clone().any(|x| !x.is_finite()) {
            return Err(ModelError::NonFiniteEnergy { rv: 0 });
        }
        Ok(())
    }

    pub fn rv_count(&self) -> usize {
        self.visible + self.hidden
    }

    #[inline]
    pub fn weight(&self, vis: usize, hid: usize) -> f64 {
        self.weights[vis * self.hidden + hid]
    }

    pub fn energy(&self, values: &[u8]) -> f64 {
        let (v, h) = values.split_at(self.visible);
        let mut e = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0 {
                e -= self.vbias[i];
            }
        }
        for (j, &hj) in h.iter().enumerate() {
            if hj != 0 {
                e -= self.hbias[j];
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0 {
                for (j, &hj) in h.iter().enumerate() {
                    if hj != 0 {
                        e -= self.weight(i, j);
                    }
                }
            }
        }
        e
    }

    /// Energies `[E(x_rv = 0), E(x_rv = 1)]` over the factors touching `rv`.
    pub fn local_energies(&self, values: &[u8], rv: usize) -> Vec<f64> {
        let field = if rv < self.visible {
            let mut f = self.vbias[rv];
            for j in 0..self.hidden {
                if values[self.visible + j] != 0 {
                    f += self.weight(rv, j);
                }
            }
            f
        } else {
            let j = rv - self.visible;
            let mut f = self.hbias[j];
            for i in 0..self.visible {
                if values[i] != 0 {
                    f += self.weight(i, j);
                }
            }
            f
        };
        vec![0.0, -field]
    }

    /// The full opposite layer; the coupling matrix is dense.
    pub fn neighbors(&self, rv: usize) -> Vec<usize> {
        if rv < self.visible {
            (self.visible..self.visible + self.hidden).collect()
        } else {
            (0..self.visible).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_rbm_energy() {
        let rbm = Rbm::new(
            vec![0.5, -0.25],
            vec![1.0],
            vec![2.0, -1.0], // W[0][0], W[1][0]
        )
        .unwrap();
        // v = (1, 0), h = (1): E = -0.5 - 1.0 - 2.0
        assert!((rbm.energy(&[1, 0, 1]) + 3.5).abs() < 1e-12);
    }

    #[test]
    fn local_matches_full_difference() {
        let rbm = Rbm::new(
            vec![0.3, -0.2, 0.1],
            vec![0.4, -0.6],
            vec![1.0, -0.5, 0.25, 0.75, -1.25, 0.5],
        )
        .unwrap();
        let values = [1u8, 0, 1, 0, 1];
        for rv in 0..5 {
            let local = rbm.local_energies(&values, rv);
            let mut v0 = values;
            v0[rv] = 0;
            let mut v1 = values;
            v1[rv] = 1;
            let diff = rbm.energy(&v1) - rbm.energy(&v0);
            assert!(
                ((local[1] - local[0]) - diff).abs() < 1e-12,
                "rv {rv}: local {local:?} vs diff {diff}"
            );
        }
    }

    #[test]
    fn layers_are_mutual_blankets() {
        let rbm = Rbm::new(vec![0.0; 3], vec![0.0; 2], vec![0.0; 6]).unwrap();
        assert_eq!(rbm.neighbors(0), vec![3, 4]);
        assert_eq!(rbm.neighbors(4), vec![0, 1, 2]);
    }
}
