//! Bayesian networks with conditional energy tables.
//!
//! Tables store negative log-probabilities. Rows run in row-major order
//! over the parent configuration (first listed parent most significant),
//! with the node's own value fastest.

use super::{ModelError, MAX_CARDINALITY};

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNode {
    pub cardinality: u16,
    pub parents: Vec<usize>,
    /// Energies, length = product(parent cardinalities) * cardinality.
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    nodes: Vec<BayesNode>,
    names: Vec<String>,
    children: Vec<Vec<usize>>,
}

impl BayesNet {
    pub fn new(nodes: Vec<BayesNode>, names: Vec<String>) -> Result<Self, ModelError> {
        let n = nodes.len();
        let names = if names.is_empty() {
            (0..n).map(|i| format!("rv{i}")).collect()
        } else {
            names
        };
        if names.len() != n {
            return Err(ModelError::Invalid(format!(
                "{} names for {} nodes",
                names.len(),
                n
            )));
        }
        let mut children = vec![Vec::new(); n];
        for (id, node) in nodes.iter().enumerate() {
            for &p in &node.parents {
                if p >= n {
                    return Err(ModelError::BadEdge { u: p, v: id });
                }
                children[p].push(id);
            }
        }
        let net = Self {
            nodes,
            names,
            children,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.nodes.len();
        for (id, node) in self.nodes.iter().enumerate() {
            if node.cardinality < 2 || node.cardinality > MAX_CARDINALITY {
                return Err(ModelError::BadCardinality {
                    rv: id,
                    card: node.cardinality as u32,
                });
            }
            let expected = self.table_rows(id) * node.cardinality as usize;
            if node.table.len() != expected {
                return Err(ModelError::BadTableLen {
                    rv: id,
                    got: node.table.len(),
                    expected,
                });
            }
            if node.table.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::NonFiniteEnergy { rv: id });
            }
        }
        // Kahn's algorithm for acyclicity.
        let mut indeg = vec![0usize; n];
        for (id, node) in self.nodes.iter().enumerate() {
            indeg[id] = node.parents.len();
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if seen != n {
            let rv = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(ModelError::Cyclic { rv });
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cardinality(&self, rv: usize) -> u16 {
        self.nodes[rv].cardinality
    }

    pub fn node(&self, rv: usize) -> &BayesNode {
        &self.nodes[rv]
    }

    pub fn name(&self, rv: usize) -> &str {
        &self.names[rv]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn children(&self, rv: usize) -> &[usize] {
        &self.children[rv]
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.parents.len()).sum()
    }

    fn table_rows(&self, rv: usize) -> usize {
        self.nodes[rv]
            .parents
            .iter()
            .map(|&p| self.nodes[p].cardinality as usize)
            .product()
    }

    /// Row index for the parent configuration in `values`.
    pub fn parent_row(&self, rv: usize, values: &[u8]) -> usize {
        let mut row = 0usize;
        for &p in &self.nodes[rv].parents {
            row = row * self.nodes[p].cardinality as usize + values[p] as usize;
        }
        row
    }

    /// Table entry for node `rv` taking `value` under the parent
    /// configuration in `values`.
    pub fn entry(&self, rv: usize, values: &[u8], value: u8) -> f64 {
        let node = &self.nodes[rv];
        let row = self.parent_row(rv, values);
        node.table[row * node.cardinality as usize + value as usize]
    }

    pub fn energy(&self, values: &[u8]) -> f64 {
        (0..self.nodes.len())
            .map(|rv| self.entry(rv, values, values[rv]))
            .sum()
    }

    /// Energies over candidate values of `rv`, restricted to the factors in
    /// its Markov blanket: its own table row plus each child's entry
    /// re-evaluated with `rv` set to the candidate.
    pub fn local_energies(&self, values: &[u8], rv: usize) -> Vec<f64> {
        let card = self.nodes[rv].cardinality;
        let mut scratch = values.to_vec();
        let mut out = Vec::with_capacity(card as usize);
        for s in 0..card {
            scratch[rv] = s as u8;
            let mut e = self.entry(rv, &scratch, s as u8);
            for &c in &self.children[rv] {
                e += self.entry(c, &scratch, scratch[c]);
            }
            out.push(e);
        }
        out
    }

    /// Parents, children and co-parents (sorted, deduplicated, excluding
    /// `rv` itself).
    pub fn markov_blanket(&self, rv: usize) -> Vec<usize> {
        let mut blanket: Vec<usize> = self.nodes[rv].parents.clone();
        for &c in &self.children[rv] {
            blanket.push(c);
            for &cp in &self.nodes[c].parents {
                if cp != rv {
                    blanket.push(cp);
                }
            }
        }
        blanket.sort_unstable();
        blanket.dedup();
        blanket
    }
}

/// Convert a conditional probability table to energies.
pub fn energies_from_probs(probs: &[f64]) -> Vec<f64> {
    probs.iter().map(|&p| -p.ln()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> BayesNet {
        // a -> b -> c, all binary, made-up probabilities.
        let pa = [0.6, 0.4];
        let pb = [0.9, 0.1, 0.2, 0.8]; // rows: a=0, a=1
        let pc = [0.7, 0.3, 0.4, 0.6]; // rows: b=0, b=1
        BayesNet::new(
            vec![
                BayesNode {
                    cardinality: 2,
                    parents: vec![],
                    table: energies_from_probs(&pa),
                },
                BayesNode {
                    cardinality: 2,
                    parents: vec![0],
                    table: energies_from_probs(&pb),
                },
                BayesNode {
                    cardinality: 2,
                    parents: vec![1],
                    table: energies_from_probs(&pc),
                },
            ],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn energy_is_sum_of_entries() {
        let net = chain();
        let v = [1u8, 0, 1];
        let expect = -(0.4f64.ln()) - (0.2f64.ln()) - (0.3f64.ln());
        assert!((net.energy(&v) - expect).abs() < 1e-12);
    }

    #[test]
    fn blanket_includes_coparents() {
        // d with parents a, b; blanket(a) = {b, d}.
        let net = BayesNet::new(
            vec![
                BayesNode {
                    cardinality: 2,
                    parents: vec![],
                    table: energies_from_probs(&[0.5, 0.5]),
                },
                BayesNode {
                    cardinality: 2,
                    parents: vec![],
                    table: energies_from_probs(&[0.5, 0.5]),
                },
                BayesNode {
                    cardinality: 2,
                    parents: vec![0, 1],
                    table: energies_from_probs(&[0.5; 8]),
                },
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(net.markov_blanket(0), vec![1, 2]);
    }

    #[test]
    fn chain_blanket() {
        let net = chain();
        assert_eq!(net.markov_blanket(0), vec![1]);
        assert_eq!(net.markov_blanket(1), vec![0, 2]);
        assert_eq!(net.markov_blanket(2), vec![1]);
    }

    #[test]
    fn cycle_detected() {
        let r = BayesNet::new(
            vec![
                BayesNode {
                    cardinality: 2,
                    parents: vec![1],
                    table: vec![0.0; 4],
                },
                BayesNode {
                    cardinality: 2,
                    parents: vec![0],
                    table: vec![0.0; 4],
                },
            ],
            vec![],
        );
        assert!(matches!(r, Err(ModelError::Cyclic { .. })));
    }

    #[test]
    fn local_energy_differences_match_full() {
        let net = chain();
        let values = [0u8, 1, 0];
        let local = net.local_energies(&values, 1);
        let mut v0 = values;
        v0[1] = 0;
        let mut v1 = values;
        v1[1] = 1;
        let full_diff = net.energy(&v1) - net.energy(&v0);
        assert!(((local[1] - local[0]) - full_diff).abs() < 1e-12);
    }
}
