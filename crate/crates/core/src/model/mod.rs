//! Discrete energy models over random variables.
//!
//! Every model family is expressed as an energy function `E(x)` in the log
//! domain: lower energy means more probable, and the target distribution is
//! `P(x) ∝ exp(-beta * E(x))`. No normalizer is ever computed.

mod bayes;
mod pairwise;
mod rbm;

pub mod loaders;
pub mod presets;

pub use bayes::{BayesNet, BayesNode};
pub use pairwise::{Edge, Interaction, PairwiseModel};
pub use rbm::Rbm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hardware-aligned ceiling on per-variable cardinality.
pub const MAX_CARDINALITY: u16 = 256;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cardinality {card} of rv {rv} out of range (2..={MAX_CARDINALITY})")]
    BadCardinality { rv: usize, card: u32 },
    #[error("rv id {rv} out of range (model has {count} rvs)")]
    BadRvId { rv: usize, count: usize },
    #[error("state length {state_len} does not match rv count {rv_count}")]
    DimensionMismatch { state_len: usize, rv_count: usize },
    #[error("state value {value} for rv {rv} exceeds cardinality {card}")]
    BadStateValue { rv: usize, value: u16, card: u16 },
    #[error("edge ({u}, {v}) references an invalid rv id")]
    BadEdge { u: usize, v: usize },
    #[error("directed edge structure contains a cycle through rv {rv}")]
    Cyclic { rv: usize },
    #[error("energy table for rv {rv} has {got} entries, expected {expected}")]
    BadTableLen { rv: usize, got: usize, expected: usize },
    #[error("non-finite energy in table for rv {rv}")]
    NonFiniteEnergy { rv: usize },
    #[error("{0}")]
    Invalid(String),
}

/// A discrete random variable: an integer id and the number of values it
/// can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomVariable {
    pub id: usize,
    pub cardinality: u16,
}

impl RandomVariable {
    pub fn new(id: usize, cardinality: u16) -> Result<Self, ModelError> {
        if cardinality < 2 || cardinality > MAX_CARDINALITY {
            return Err(ModelError::BadCardinality {
                rv: id,
                card: cardinality as u32,
            });
        }
        Ok(Self { id, cardinality })
    }
}

/// Current assignment of all random variables plus chain bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateVector {
    pub values: Vec<u8>,
    pub step: u64,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0; n],
            step: 0,
        }
    }

    pub fn new(values: Vec<u8>) -> Self {
        Self { values, step: 0 }
    }

    pub fn value(&self, rv: usize) -> u8 {
        self.values[rv]
    }
}

/// Unified representation of the supported model families.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphModel {
    BayesNet(BayesNet),
    Pairwise(PairwiseModel),
    Rbm(Rbm),
}

impl GraphModel {
    pub fn rv_count(&self) -> usize {
        match self {
            GraphModel::BayesNet(m) => m.node_count(),
            GraphModel::Pairwise(m) => m.rv_count(),
            GraphModel::Rbm(m) => m.rv_count(),
        }
    }

    pub fn cardinality(&self, rv: usize) -> u16 {
        match self {
            GraphModel::BayesNet(m) => m.cardinality(rv),
            GraphModel::Pairwise(m) => m.cardinality(rv),
            GraphModel::Rbm(_) => 2,
        }
    }

    pub fn cardinalities(&self) -> Vec<u16> {
        (0..self.rv_count()).map(|rv| self.cardinality(rv)).collect()
    }

    /// True when every variable is binary.
    pub fn is_binary(&self) -> bool {
        (0..self.rv_count()).all(|rv| self.cardinality(rv) == 2)
    }

    /// Check model self-consistency (edge ids, acyclicity, finite tables).
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            GraphModel::BayesNet(m) => m.validate(),
            GraphModel::Pairwise(m) => m.validate(),
            GraphModel::Rbm(m) => m.validate(),
        }
    }

    pub fn validate_state(&self, state: &StateVector) -> Result<(), ModelError> {
        if state.values.len() != self.rv_count() {
            return Err(ModelError::DimensionMismatch {
                state_len: state.values.len(),
                rv_count: self.rv_count(),
            });
        }
        for (rv, &v) in state.values.iter().enumerate() {
            let card = self.cardinality(rv);
            if (v as u16) >= card {
                return Err(ModelError::BadStateValue {
                    rv,
                    value: v as u16,
                    card,
                });
            }
        }
        Ok(())
    }

    fn check_rv(&self, rv: usize) -> Result<(), ModelError> {
        if rv >= self.rv_count() {
            return Err(ModelError::BadRvId {
                rv,
                count: self.rv_count(),
            });
        }
        Ok(())
    }

    /// Total energy of `state`: all unary/table terms plus pairwise terms,
    /// in the log domain.
    pub fn energy_full(&self, state: &StateVector) -> Result<f64, ModelError> {
        self.validate_state(state)?;
        Ok(match self {
            GraphModel::BayesNet(m) => m.energy(&state.values),
            GraphModel::Pairwise(m) => m.energy(&state.values),
            GraphModel::Rbm(m) => m.energy(&state.values),
        })
    }

    /// Energy restricted to the factors touching `rv`, evaluated for every
    /// candidate value of `rv`. Entry differences equal full-energy
    /// differences; the shared constant is arbitrary.
    pub fn local_conditional_energies(
        &self,
        state: &StateVector,
        rv: usize,
    ) -> Result<Vec<f64>, ModelError> {
        self.check_rv(rv)?;
        Ok(match self {
            GraphModel::BayesNet(m) => m.local_energies(&state.values, rv),
            GraphModel::Pairwise(m) => m.local_energies(&state.values, rv),
            GraphModel::Rbm(m) => m.local_energies(&state.values, rv),
        })
    }

    /// Energy change from setting `rv` to `new_value` in `state`.
    pub fn energy_delta(
        &self,
        state: &StateVector,
        rv: usize,
        new_value: u8,
    ) -> Result<f64, ModelError> {
        let local = self.local_conditional_energies(state, rv)?;
        let old = state.values[rv] as usize;
        Ok(local[new_value as usize] - local[old])
    }

    /// Markov blanket of `rv`: neighbors for undirected models, parents,
    /// children and co-parents for directed ones.
    pub fn markov_blanket(&self, rv: usize) -> Result<Vec<usize>, ModelError> {
        self.check_rv(rv)?;
        Ok(match self {
            GraphModel::BayesNet(m) => m.markov_blanket(rv),
            GraphModel::Pairwise(m) => m.neighbors(rv),
            GraphModel::Rbm(m) => m.neighbors(rv),
        })
    }

    /// Partition the variables into blocks such that no two members of a
    /// block are in each other's Markov blanket.
    ///
    /// Greedy coloring of the blanket graph in descending-degree order
    /// (ties by id). Blocks are emitted in color order with ascending
    /// members, which reproduces the two-color chessboard partition on
    /// 2D-grid models.
    pub fn block_partition(&self) -> Vec<Vec<usize>> {
        let n = self.rv_count();
        let blankets: Vec<Vec<usize>> = (0..n)
            .map(|rv| self.markov_blanket(rv).expect("valid rv"))
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&rv| (usize::MAX - blankets[rv].len(), rv));

        let mut color = vec![usize::MAX; n];
        let mut num_colors = 0;
        for &rv in &order {
            let mut used = vec![false; num_colors];
            for &nb in &blankets[rv] {
                if color[nb] != usize::MAX {
                    used[color[nb]] = true;
                }
            }
            let c = used.iter().position(|&u| !u).unwrap_or(num_colors);
            if c == num_colors {
                num_colors += 1;
            }
            color[rv] = c;
        }

        let mut blocks = vec![Vec::new(); num_colors];
        for rv in 0..n {
            blocks[color[rv]].push(rv);
        }
        blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> GraphModel {
        // Nodes 0..4 with edges 0-1, 0-2, 1-3, 2-3.
        let edges = vec![(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)];
        GraphModel::Pairwise(
            PairwiseModel::uniform_binary(4, &edges, Interaction::IsingSpin).unwrap(),
        )
    }

    #[test]
    fn blanket_of_four_cycle() {
        let m = four_cycle();
        assert_eq!(m.markov_blanket(0).unwrap(), vec![1, 2]);
        assert_eq!(m.markov_blanket(3).unwrap(), vec![1, 2]);
    }

    #[test]
    fn partition_of_four_cycle() {
        let m = four_cycle();
        let blocks = m.block_partition();
        assert_eq!(blocks, vec![vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn partition_of_edgeless_graph_is_single_block() {
        let m = GraphModel::Pairwise(
            PairwiseModel::uniform_binary(5, &[], Interaction::IsingSpin).unwrap(),
        );
        assert_eq!(m.block_partition(), vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn isolated_node_has_empty_blanket() {
        let m = GraphModel::Pairwise(
            PairwiseModel::uniform_binary(3, &[(0, 1, 1.0)], Interaction::IsingSpin).unwrap(),
        );
        assert!(m.markov_blanket(2).unwrap().is_empty());
    }

    #[test]
    fn grid_partition_is_chessboard() {
        for (w, h) in [(4usize, 4usize), (3, 5), (6, 6), (2, 2)] {
            let m = presets::ising_grid(w, h, 1.0).unwrap();
            let blocks = m.block_partition();
            assert_eq!(blocks.len(), 2, "{w}x{h} grid should 2-color");
            for (bi, block) in blocks.iter().enumerate() {
                for &rv in block {
                    let (r, c) = (rv / w, rv % w);
                    assert_eq!((r + c) % 2, bi, "rv {rv} in wrong parity block");
                }
            }
        }
    }

    #[test]
    fn state_validation_catches_mismatches() {
        let m = four_cycle();
        let bad = StateVector::zeros(3);
        assert!(m.energy_full(&bad).is_err());
        let mut bad2 = StateVector::zeros(4);
        bad2.values[1] = 2;
        assert!(m.energy_full(&bad2).is_err());
    }
}
