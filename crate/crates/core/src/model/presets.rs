//! Canonical model builders used by benchmarks and tests.

use super::bayes::{energies_from_probs, BayesNet, BayesNode};
use super::{Edge, GraphModel, Interaction, ModelError, PairwiseModel, Rbm};
use crate::rng::UniformRng;

/// Penalty multiplier for independent-set encodings. Slightly above one so
/// every feasible optimum strictly dominates any infeasible configuration.
pub const MIS_PENALTY: f64 = 1.0001;

/// Classic five-node alarm network (burglary, earthquake, alarm, calls).
pub fn earthquake() -> GraphModel {
    let nodes = vec![
        // 0: Burglary
        BayesNode {
            cardinality: 2,
            parents: vec![],
            table: energies_from_probs(&[0.99, 0.01]),
        },
        // 1: Earthquake
        BayesNode {
            cardinality: 2,
            parents: vec![],
            table: energies_from_probs(&[0.98, 0.02]),
        },
        // 2: Alarm | Burglary, Earthquake
        BayesNode {
            cardinality: 2,
            parents: vec![0, 1],
            table: energies_from_probs(&[
                0.999, 0.001, // B=0, E=0
                0.71, 0.29, // B=0, E=1
                0.06, 0.94, // B=1, E=0
                0.05, 0.95, // B=1, E=1
            ]),
        },
        // 3: JohnCalls | Alarm
        BayesNode {
            cardinality: 2,
            parents: vec![2],
            table: energies_from_probs(&[0.95, 0.05, 0.10, 0.90]),
        },
        // 4: MaryCalls | Alarm
        BayesNode {
            cardinality: 2,
            parents: vec![2],
            table: energies_from_probs(&[0.99, 0.01, 0.30, 0.70]),
        },
    ];
    let names = ["Burglary", "Earthquake", "Alarm", "JohnCalls", "MaryCalls"]
        .map(String::from)
        .to_vec();
    GraphModel::BayesNet(BayesNet::new(nodes, names).expect("static net"))
}

/// Six-node survey network (age, sex, education, occupation, residence,
/// travel).
pub fn survey() -> GraphModel {
    let nodes = vec![
        // 0: Age (young, adult, old)
        BayesNode {
            cardinality: 3,
            parents: vec![],
            table: energies_from_probs(&[0.30, 0.50, 0.20]),
        },
        // 1: Sex (male, female)
        BayesNode {
            cardinality: 2,
            parents: vec![],
            table: energies_from_probs(&[0.60, 0.40]),
        },
        // 2: Education | Age, Sex (high school, university)
        BayesNode {
            cardinality: 2,
            parents: vec![0, 1],
            table: energies_from_probs(&[
                0.75, 0.25, // young, male
                0.64, 0.36, // young, female
                0.72, 0.28, // adult, male
                0.70, 0.30, // adult, female
                0.88, 0.12, // old, male
                0.90, 0.10, // old, female
            ]),
        },
        // 3: Occupation | Education (employee, self-employed)
        BayesNode {
            cardinality: 2,
            parents: vec![2],
            table: energies_from_probs(&[0.96, 0.04, 0.92, 0.08]),
        },
        // 4: Residence | Education (small, big)
        BayesNode {
            cardinality: 2,
            parents: vec![2],
            table: energies_from_probs(&[0.25, 0.75, 0.20, 0.80]),
        },
        // 5: Travel | Occupation, Residence (car, train, other)
        BayesNode {
            cardinality: 3,
            parents: vec![3, 4],
            table: energies_from_probs(&[
                0.48, 0.42, 0.10, // employee, small
                0.58, 0.24, 0.18, // employee, big
                0.56, 0.36, 0.08, // self-employed, small
                0.70, 0.21, 0.09, // self-employed, big
            ]),
        },
    ];
    let names = ["Age", "Sex", "Education", "Occupation", "Residence", "Travel"]
        .map(String::from)
        .to_vec();
    GraphModel::BayesNet(BayesNet::new(nodes, names).expect("static net"))
}

/// Three-node chain `a -> b -> c`, all binary. The middle node's update
/// reads both its parent's table row and its child's, which exercises the
/// indirect table addressing path.
pub fn toy_chain() -> GraphModel {
    let nodes = vec![
        BayesNode {
            cardinality: 2,
            parents: vec![],
            table: energies_from_probs(&[0.35, 0.65]),
        },
        BayesNode {
            cardinality: 2,
            parents: vec![0],
            table: energies_from_probs(&[0.80, 0.20, 0.30, 0.70]),
        },
        BayesNode {
            cardinality: 2,
            parents: vec![1],
            table: energies_from_probs(&[0.55, 0.45, 0.15, 0.85]),
        },
    ];
    let names = ["a", "b", "c"].map(String::from).to_vec();
    GraphModel::BayesNet(BayesNet::new(nodes, names).expect("static net"))
}

/// 4-connected `width x height` Ising grid with uniform coupling `j`.
pub fn ising_grid(width: usize, height: usize, j: f64) -> Result<GraphModel, ModelError> {
    let mut edges = Vec::new();
    let id = |r: usize, c: usize| r * width + c;
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width {
                edges.push((id(r, c), id(r, c + 1), j));
            }
            if r + 1 < height {
                edges.push((id(r, c), id(r + 1, c), j));
            }
        }
    }
    Ok(GraphModel::Pairwise(PairwiseModel::uniform_binary(
        width * height,
        &edges,
        Interaction::IsingSpin,
    )?))
}

/// Ising grid with periodic boundaries: every site has exactly four
/// neighbors. Requires `width, height >= 3` so wrap edges stay distinct.
pub fn ising_torus(width: usize, height: usize, j: f64) -> Result<GraphModel, ModelError> {
    if width < 3 || height < 3 {
        return Err(ModelError::Invalid(
            "torus needs width and height >= 3".into(),
        ));
    }
    let id = |r: usize, c: usize| r * width + c;
    let mut edges = Vec::new();
    for r in 0..height {
        for c in 0..width {
            edges.push((id(r, c), id(r, (c + 1) % width), j));
            edges.push((id(r, c), id((r + 1) % height, c), j));
        }
    }
    Ok(GraphModel::Pairwise(PairwiseModel::uniform_binary(
        width * height,
        &edges,
        Interaction::IsingSpin,
    )?))
}

/// Ferromagnetic Potts grid with `labels` states per site and per-site
/// random unary energies in [0, `unary_scale`).
pub fn potts_grid(
    width: usize,
    height: usize,
    labels: u16,
    coupling: f64,
    unary_scale: f64,
    seed: u64,
) -> Result<GraphModel, ModelError> {
    let n = width * height;
    let mut rng = UniformRng::substream(seed, 11);
    let unary: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..labels).map(|_| rng.next_f64() * unary_scale).collect())
        .collect();
    let id = |r: usize, c: usize| r * width + c;
    let mut edges = Vec::new();
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width {
                edges.push(Edge {
                    u: id(r, c),
                    v: id(r, c + 1),
                    weight: coupling,
                });
            }
            if r + 1 < height {
                edges.push(Edge {
                    u: id(r, c),
                    v: id(r + 1, c),
                    weight: coupling,
                });
            }
        }
    }
    Ok(GraphModel::Pairwise(PairwiseModel::new(
        &vec![labels; n],
        unary,
        edges,
        Interaction::PottsMatch,
    )?))
}

/// Max-cut energy model: `E = -sum_(u,v) w * [x_u != x_v]`, so minimizing
/// energy maximizes the cut weight.
pub fn maxcut(n: usize, edges: &[(usize, usize, f64)]) -> Result<GraphModel, ModelError> {
    Ok(GraphModel::Pairwise(PairwiseModel::uniform_binary(
        n,
        edges,
        Interaction::Mismatch,
    )?))
}

/// Maximum-independent-set penalty encoding:
/// `E = -sum x_i + penalty * sum_(u,v) x_u x_v`.
pub fn mis(n: usize, edges: &[(usize, usize, f64)]) -> Result<GraphModel, ModelError> {
    let scaled: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&(u, v, w)| (u, v, w * MIS_PENALTY))
        .collect();
    let unary = vec![vec![0.0, -1.0]; n];
    let edges = scaled
        .into_iter()
        .map(|(u, v, weight)| Edge { u, v, weight })
        .collect();
    Ok(GraphModel::Pairwise(PairwiseModel::new(
        &vec![2; n],
        unary,
        edges,
        Interaction::Product,
    )?))
}

/// Maximum clique as independent set on the complement graph.
pub fn maxclique(n: usize, edges: &[(usize, usize, f64)]) -> Result<GraphModel, ModelError> {
    let mut present = vec![false; n * n];
    for &(u, v, _) in edges {
        if u >= n || v >= n {
            return Err(ModelError::BadEdge { u, v });
        }
        present[u * n + v] = true;
        present[v * n + u] = true;
    }
    let mut complement = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if !present[u * n + v] {
                complement.push((u, v, 1.0));
            }
        }
    }
    mis(n, &complement)
}

/// Seeded Erdos-Renyi-style graph with exactly `m` distinct edges.
pub fn random_edges(n: usize, m: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    assert!(m <= n * (n - 1) / 2, "too many edges requested");
    let mut rng = UniformRng::substream(seed, 17);
    let mut chosen = std::collections::BTreeSet::new();
    while chosen.len() < m {
        let u = rng.next_index(n);
        let v = rng.next_index(n);
        if u == v {
            continue;
        }
        let (a, b) = (u.min(v), u.max(v));
        chosen.insert((a, b));
    }
    chosen.into_iter().map(|(u, v)| (u, v, 1.0)).collect()
}

/// Random binary pairwise model with product couplings and random unary
/// energies, handy as a generic small test model.
pub fn random_binary_pairwise(n: usize, m: usize, scale: f64, seed: u64) -> GraphModel {
    let mut rng = UniformRng::substream(seed, 23);
    let edges: Vec<Edge> = random_edges(n, m, seed)
        .into_iter()
        .map(|(u, v, _)| Edge {
            u,
            v,
            weight: (rng.next_f64() * 2.0 - 1.0) * scale,
        })
        .collect();
    let unary = (0..n)
        .map(|_| vec![0.0, (rng.next_f64() * 2.0 - 1.0) * scale])
        .collect();
    GraphModel::Pairwise(
        PairwiseModel::new(&vec![2; n], unary, edges, Interaction::Product).expect("valid"),
    )
}

/// Seeded random RBM with weights in [-scale, scale).
pub fn random_rbm(visible: usize, hidden: usize, scale: f64, seed: u64) -> GraphModel {
    let mut rng = UniformRng::substream(seed, 29);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n).map(|_| (rng.next_f64() * 2.0 - 1.0) * scale).collect()
    };
    let vbias = draw(visible);
    let hbias = draw(hidden);
    let weights = draw(visible * hidden);
    GraphModel::Rbm(Rbm::new(vbias, hbias, weights).expect("valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StateVector;

    #[test]
    fn earthquake_shape() {
        let m = earthquake();
        assert_eq!(m.rv_count(), 5);
        if let GraphModel::BayesNet(net) = &m {
            assert_eq!(net.edge_count(), 4);
        } else {
            panic!("expected a bayes net");
        }
    }

    #[test]
    fn survey_shape() {
        let m = survey();
        assert_eq!(m.rv_count(), 6);
        if let GraphModel::BayesNet(net) = &m {
            assert_eq!(net.edge_count(), 6);
        } else {
            panic!("expected a bayes net");
        }
    }

    #[test]
    fn grid_has_right_edge_count() {
        if let GraphModel::Pairwise(m) = ising_grid(4, 4, 1.0).unwrap() {
            assert_eq!(m.edges().len(), 24);
        } else {
            panic!();
        }
    }

    #[test]
    fn mis_prefers_feasible_sets() {
        // Triangle: best independent set has one vertex, energy -1.
        let m = mis(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let e_single = m.energy_full(&StateVector::new(vec![1, 0, 0])).unwrap();
        let e_pair = m.energy_full(&StateVector::new(vec![1, 1, 0])).unwrap();
        assert!((e_single + 1.0).abs() < 1e-12);
        assert!(e_pair > e_single);
    }

    #[test]
    fn maxcut_counts_cut_edges() {
        let m = maxcut(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let e = m.energy_full(&StateVector::new(vec![0, 1, 0])).unwrap();
        assert!((e + 3.0).abs() < 1e-12);
    }

    #[test]
    fn maxclique_complement_of_complete_graph_is_edgeless() {
        let m = maxclique(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        if let GraphModel::Pairwise(p) = &m {
            assert!(p.edges().is_empty());
        } else {
            panic!();
        }
    }

    #[test]
    fn random_edges_deterministic() {
        assert_eq!(random_edges(10, 12, 5), random_edges(10, 12, 5));
        assert_eq!(random_edges(10, 12, 5).len(), 12);
    }
}
