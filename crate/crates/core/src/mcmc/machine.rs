//! Quantized model view matching the accelerator datapath.
//!
//! The pipeline computes conditional energies as 32-bit fixed-point sums of
//! pre-quantized table entries, scales them by the quantized `-beta`
//! multiplier and hands the descaled result to the sampler. This module is
//! the single definition of that arithmetic; the compiler lays the same
//! quantized values into memory images and the reference chains evaluate
//! them directly, so both sides agree bit for bit.
//!
//! Binary pairwise models (including RBMs) are first rewritten in product
//! form: per-edge energy `e(a, b)` becomes a constant (dropped), linear
//! terms folded into the value-1 unary energies, and a single product
//! coefficient per edge. Conditional-energy differences are unchanged by
//! the rewrite, which is all sampling depends on.

use crate::model::{GraphModel, ModelError};
#[cfg(test)]
use crate::model::StateVector;
use crate::quant::{descale, fixed_mul, fits_i32, quantize};

use super::ChainError;

#[derive(Debug, Clone, PartialEq)]
pub struct MachineNode {
    pub cardinality: u16,
    pub parents: Vec<usize>,
    pub table_q: Vec<i32>,
    pub children: Vec<usize>,
}

/// Product-form view of a binary pairwise model.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryCanonical {
    /// Energy of value 0 (constant per variable).
    pub base_q: Vec<i32>,
    /// Energy of value 1 before neighbor contributions.
    pub one_q: Vec<i32>,
    /// Per-variable `(neighbor, slope)`: value-1 energy gains `slope` for
    /// each neighbor currently at 1.
    pub adj: Vec<Vec<(usize, i32)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MachineKind {
    Bayes(Vec<MachineNode>),
    Binary(BinaryCanonical),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineModel {
    pub frac_bits: u32,
    pub cards: Vec<u16>,
    pub kind: MachineKind,
}

impl MachineModel {
    pub fn from_model(model: &GraphModel, frac_bits: u32) -> Result<Self, ChainError> {
        let cards = model.cardinalities();
        let kind = match model {
            GraphModel::BayesNet(net) => {
                let mut nodes = Vec::with_capacity(net.node_count());
                for rv in 0..net.node_count() {
                    let node = net.node(rv);
                    let table_q = node
                        .table
                        .iter()
                        .map(|&e| quantize(e, frac_bits))
                        .collect::<Result<Vec<_>, _>>()?;
                    nodes.push(MachineNode {
                        cardinality: node.cardinality,
                        parents: node.parents.clone(),
                        table_q,
                        children: net.children(rv).to_vec(),
                    });
                }
                MachineKind::Bayes(nodes)
            }
            GraphModel::Pairwise(m) => {
                if !model.is_binary() {
                    return Err(ChainError::Model(ModelError::Invalid(
                        "machine arithmetic supports bayes nets and binary pairwise models"
                            .into(),
                    )));
                }
                let n = m.rv_count();
                let mut base = vec![0.0f64; n];
                let mut one = vec![0.0f64; n];
                for rv in 0..n {
                    base[rv] = m.unary(rv)[0];
                    one[rv] = m.unary(rv)[1];
                }
                let mut slopes = Vec::with_capacity(m.edges().len());
                for e in m.edges() {
                    let kind = m.interaction();
                    let e00 = kind.energy(e.weight, 0, 0);
                    let e01 = kind.energy(e.weight, 0, 1);
                    let e10 = kind.energy(e.weight, 1, 0);
                    let e11 = kind.energy(e.weight, 1, 1);
                    one[e.u] += e10 - e00;
                    one[e.v] += e01 - e00;
                    slopes.push(e11 - e10 - e01 + e00);
                }
                let mut adj = vec![Vec::new(); n];
                for (ei, e) in m.edges().iter().enumerate() {
                    let sq = quantize(slopes[ei], frac_bits)?;
                    adj[e.u].push((e.v, sq));
                    adj[e.v].push((e.u, sq));
                }
                MachineKind::Binary(BinaryCanonical {
                    base_q: base
                        .iter()
                        .map(|&x| quantize(x, frac_bits))
                        .collect::<Result<_, _>>()?,
                    one_q: one
                        .iter()
                        .map(|&x| quantize(x, frac_bits))
                        .collect::<Result<_, _>>()?,
                    adj,
                })
            }
            GraphModel::Rbm(rbm) => {
                let n = rbm.rv_count();
                let mut base = vec![0i32; n];
                let mut one = Vec::with_capacity(n);
                for i in 0..rbm.visible {
                    one.push(quantize(-rbm.vbias[i], frac_bits)?);
                }
                for j in 0..rbm.hidden {
                    one.push(quantize(-rbm.hbias[j], frac_bits)?);
                }
                let mut adj = vec![Vec::new(); n];
                for i in 0..rbm.visible {
                    for j in 0..rbm.hidden {
                        let sq = quantize(-rbm.weight(i, j), frac_bits)?;
                        adj[i].push((rbm.visible + j, sq));
                        adj[rbm.visible + j].push((i, sq));
                    }
                }
                base.clear();
                base.resize(n, 0);
                MachineKind::Binary(BinaryCanonical {
                    base_q: base,
                    one_q: one,
                    adj,
                })
            }
        };
        Ok(Self {
            frac_bits,
            cards,
            kind,
        })
    }

    pub fn rv_count(&self) -> usize {
        self.cards.len()
    }

    /// Quantized conditional-energy bins for every candidate value of `rv`.
    /// Sums are 64-bit exact over the 32-bit quantized terms.
    pub fn local_bins_q(&self, values: &[u8], rv: usize) -> Vec<i64> {
        match &self.kind {
            MachineKind::Bayes(nodes) => {
                let card = nodes[rv].cardinality as usize;
                let mut scratch = values.to_vec();
                let mut out = Vec::with_capacity(card);
                for s in 0..card {
                    scratch[rv] = s as u8;
                    let mut e = self.bayes_entry_q(nodes, rv, &scratch, s as u8);
                    for &c in &nodes[rv].children {
                        e += self.bayes_entry_q(nodes, c, &scratch, scratch[c]);
                    }
                    out.push(e);
                }
                out
            }
            MachineKind::Binary(b) => {
                let mut field = 0i64;
                for &(nbr, slope) in &b.adj[rv] {
                    if values[nbr] != 0 {
                        field += slope as i64;
                    }
                }
                vec![b.base_q[rv] as i64, b.one_q[rv] as i64 + field]
            }
        }
    }

    fn bayes_entry_q(&self, nodes: &[MachineNode], rv: usize, values: &[u8], value: u8) -> i64 {
        let node = &nodes[rv];
        let mut row = 0usize;
        for &p in &node.parents {
            row = row * nodes[p].cardinality as usize + values[p] as usize;
        }
        node.table_q[row * node.cardinality as usize + value as usize] as i64
    }

    /// `sum_{s != x_rv} (bin(s) - bin(x_rv))` in quantized units.
    pub fn delta_e_sum_q(&self, values: &[u8], rv: usize) -> i64 {
        let bins = self.local_bins_q(values, rv);
        let cur = bins[values[rv] as usize];
        bins.iter().map(|&b| b - cur).sum()
    }

    /// Descaled sampling score for one quantized bin: the datapath's
    /// scaling multiplier applied to `-beta`.
    #[inline]
    pub fn prepared_score(&self, bin_q: i64, neg_beta_q: i64) -> f64 {
        let scaled = fixed_mul(bin_q, neg_beta_q, self.frac_bits);
        debug_assert!(fits_i32(scaled), "score overflows the 32-bit datapath");
        descale(scaled, self.frac_bits)
    }

    /// Scores for a full bin vector.
    pub fn prepared_scores(&self, bins_q: &[i64], neg_beta_q: i64) -> Vec<f64> {
        bins_q
            .iter()
            .map(|&b| self.prepared_score(b, neg_beta_q))
            .collect()
    }

    /// Exact 32-bit score word for one bin (used by integer samplers).
    pub fn prepared_score_q(&self, bin_q: i64, neg_beta_q: i64) -> i32 {
        fixed_mul(bin_q, neg_beta_q, self.frac_bits) as i32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use crate::quant::DEFAULT_FRAC_BITS;

    #[test]
    fn canonical_form_preserves_conditional_differences() {
        let model = presets::ising_grid(3, 3, 0.8).unwrap();
        let mm = MachineModel::from_model(&model, DEFAULT_FRAC_BITS).unwrap();
        let values = [1u8, 0, 1, 1, 0, 0, 1, 0, 1];
        for rv in 0..9 {
            let state = StateVector::new(values.to_vec());
            let exact = model.local_conditional_energies(&state, rv).unwrap();
            let bins = mm.local_bins_q(&values, rv);
            let exact_diff = exact[1] - exact[0];
            let q_diff = descale(bins[1] - bins[0], DEFAULT_FRAC_BITS);
            assert!(
                (exact_diff - q_diff).abs() < 4.0 / 65536.0,
                "rv {rv}: {exact_diff} vs {q_diff}"
            );
        }
    }

    #[test]
    fn rbm_canonical_matches_local_differences() {
        let model = presets::random_rbm(5, 3, 0.7, 3);
        let mm = MachineModel::from_model(&model, DEFAULT_FRAC_BITS).unwrap();
        let values = [1u8, 0, 1, 0, 1, 1, 0, 1];
        for rv in 0..8 {
            let state = StateVector::new(values.to_vec());
            let exact = model.local_conditional_energies(&state, rv).unwrap();
            let bins = mm.local_bins_q(&values, rv);
            let exact_diff = exact[1] - exact[0];
            let q_diff = descale(bins[1] - bins[0], DEFAULT_FRAC_BITS);
            assert!((exact_diff - q_diff).abs() < 16.0 / 65536.0);
        }
    }

    #[test]
    fn bayes_bins_match_quantized_table_sums() {
        let model = presets::toy_chain();
        let mm = MachineModel::from_model(&model, DEFAULT_FRAC_BITS).unwrap();
        let values = [0u8, 1, 0];
        let state = StateVector::new(values.to_vec());
        let exact = model.local_conditional_energies(&state, 1).unwrap();
        let bins = mm.local_bins_q(&values, 1);
        for s in 0..2 {
            let approx = descale(bins[s], DEFAULT_FRAC_BITS);
            assert!((approx - exact[s]).abs() < 4.0 / 65536.0);
        }
    }

    #[test]
    fn potts_is_rejected() {
        let model = presets::potts_grid(2, 2, 3, 1.0, 0.5, 1).unwrap();
        assert!(MachineModel::from_model(&model, 16).is_err());
    }
}
