//! Pairwise models: unary energy vectors plus per-edge couplings.
//!
//! Covers Ising, Potts/MRF grids, and penalty-encoded combinatorial
//! problems (independent set, max-cut, max-clique).

use super::{ModelError, RandomVariable, MAX_CARDINALITY};

/// How an edge weight contributes energy for endpoint values (a, b).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    /// `-w * s_a * s_b` on spins `s = 2x - 1`; binary variables only.
    IsingSpin,
    /// `-w * [a == b]` (ferromagnetic Potts for positive weights).
    PottsMatch,
    /// `w * a * b`; binary variables only (independent-set penalties).
    Product,
    /// `-w * [a != b]` (rewards cut edges).
    Mismatch,
}

impl Interaction {
    /// Edge energy for endpoint values `a`, `b` and weight `w`.
    #[inline]
    pub fn energy(self, w: f64, a: u8, b: u8) -> f64 {
        match self {
            Interaction::IsingSpin => {
                let sa = 2.0 * a as f64 - 1.0;
                let sb = 2.0 * b as f64 - 1.0;
                -w * sa * sb
            }
            Interaction::PottsMatch => {
                if a == b {
                    -w
                } else {
                    0.0
                }
            }
            Interaction::Product => w * a as f64 * b as f64,
            Interaction::Mismatch => {
                if a != b {
                    -w
                } else {
                    0.0
                }
            }
        }
    }

    pub fn binary_only(self) -> bool {
        matches!(self, Interaction::IsingSpin | Interaction::Product)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseModel {
    rvs: Vec<RandomVariable>,
    unary: Vec<Vec<f64>>,
    edges: Vec<Edge>,
    interaction: Interaction,
    // rv -> (edge index, other endpoint)
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PairwiseModel {
    pub fn new(
        cards: &[u16],
        unary: Vec<Vec<f64>>,
        edges: Vec<Edge>,
        interaction: Interaction,
    ) -> Result<Self, ModelError> {
        let rvs = cards
            .iter()
            .enumerate()
            .map(|(id, &c)| RandomVariable::new(id, c))
            .collect::<Result<Vec<_>, _>>()?;
        let n = rvs.len();
        if unary.len() != n {
            return Err(ModelError::DimensionMismatch {
                state_len: unary.len(),
                rv_count: n,
            });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (ei, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n || e.u == e.v {
                return Err(ModelError::BadEdge { u: e.u, v: e.v });
            }
            adjacency[e.u].push((ei, e.v));
            adjacency[e.v].push((ei, e.u));
        }
        let model = Self {
            rvs,
            unary,
            edges,
            interaction,
            adjacency,
        };
        model.validate()?;
        Ok(model)
    }

    /// All-zero unary energies over `n` binary variables.
    pub fn uniform_binary(
        n: usize,
        edges: &[(usize, usize, f64)],
        interaction: Interaction,
    ) -> Result<Self, ModelError> {
        let edges = edges
            .iter()
            .map(|&(u, v, weight)| Edge { u, v, weight })
            .collect();
        Self::new(&vec![2; n], vec![vec![0.0; 2]; n], edges, interaction)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (rv, u) in self.unary.iter().enumerate() {
            let card = self.rvs[rv].cardinality as usize;
            if u.len() != card {
                return Err(ModelError::BadTableLen {
                    rv,
                    got: u.len(),
                    expected: card,
                });
            }
            if u.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::NonFiniteEnergy { rv });
            }
            if self.interaction.binary_only() && card != 2 {
                return Err(ModelError::Invalid(format!(
                    "interaction {:?} requires binary variables, rv {rv} has cardinality {card}",
                    self.interaction
                )));
            }
        }
        if self.edges.iter().any(|e| !e.weight.is_finite()) {
            return Err(ModelError::Invalid("non-finite edge weight".into()));
        }
        Ok(())
    }

    pub fn rv_count(&self) -> usize {
        self.rvs.len()
    }

    pub fn cardinality(&self, rv: usize) -> u16 {
        self.rvs[rv].cardinality
    }

    pub fn interaction(&self) -> Interaction {
        self.interaction
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn unary(&self, rv: usize) -> &[f64] {
        &self.unary[rv]
    }

    pub fn energy(&self, values: &[u8]) -> f64 {
        let mut e = 0.0;
        for (rv, u) in self.unary.iter().enumerate() {
            e += u[values[rv] as usize];
        }
        for edge in &self.edges {
            e += self
                .interaction
                .energy(edge.weight, values[edge.u], values[edge.v]);
        }
        e
    }

    pub fn local_energies(&self, values: &[u8], rv: usize) -> Vec<f64> {
        let card = self.rvs[rv].cardinality as usize;
        let mut out = self.unary[rv].clone();
        for &(ei, other) in &self.adjacency[rv] {
            let w = self.edges[ei].weight;
            let vb = values[other];
            for (s, slot) in out.iter_mut().enumerate().take(card) {
                *slot += self.interaction.energy(w, s as u8, vb);
            }
        }
        out
    }

    /// Sorted, deduplicated neighbor list.
    pub fn neighbors(&self, rv: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self.adjacency[rv].iter().map(|&(_, o)| o).collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    pub fn adjacency(&self, rv: usize) -> &[(usize, usize)] {
        &self.adjacency[rv]
    }

    pub fn max_cardinality(&self) -> u16 {
        self.rvs
            .iter()
            .map(|r| r.cardinality)
            .max()
            .unwrap_or(MAX_CARDINALITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model_has_zero_energy() {
        let m = PairwiseModel::uniform_binary(3, &[], Interaction::IsingSpin).unwrap();
        assert_eq!(m.energy(&[0, 1, 0]), 0.0);
    }

    #[test]
    fn two_spin_ising_convention() {
        // E = -J * s0 * s1 with J = 1; spins (+1, +1) are values (1, 1).
        let m = PairwiseModel::uniform_binary(2, &[(0, 1, 1.0)], Interaction::IsingSpin).unwrap();
        assert_eq!(m.energy(&[1, 1]), -1.0);
        assert_eq!(m.energy(&[0, 0]), -1.0);
        assert_eq!(m.energy(&[0, 1]), 1.0);
    }

    #[test]
    fn isolated_rv_local_energies_are_unary() {
        let m = PairwiseModel::new(
            &[2],
            vec![vec![0.2, 0.7]],
            vec![],
            Interaction::PottsMatch,
        )
        .unwrap();
        assert_eq!(m.local_energies(&[0], 0), vec![0.2, 0.7]);
    }

    #[test]
    fn product_interaction_rejects_nonbinary() {
        let r = PairwiseModel::new(
            &[3, 3],
            vec![vec![0.0; 3], vec![0.0; 3]],
            vec![Edge {
                u: 0,
                v: 1,
                weight: 1.0,
            }],
            Interaction::Product,
        );
        assert!(r.is_err());
    }

    #[test]
    fn self_loop_rejected() {
        let r = PairwiseModel::uniform_binary(2, &[(0, 0, 1.0)], Interaction::IsingSpin);
        assert!(r.is_err());
    }
}
