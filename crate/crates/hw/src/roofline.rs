//! Three-axis roofline model for the sampler-computer system.
//!
//! A workload-on-hardware pairing is placed by two hardware-independent
//! coordinates, computation intensity (samples per compute op) and memory
//! intensity (samples per byte moved), against three peak-performance
//! roofs:
//!
//! * sampler roof: `se_count * clock / dist_size` samples/s, the bin rate
//!   of the sample unit divided by bins per sample;
//! * compute roof: `pe_count * (2^tree_depth + 2) * clock * CI`, counting
//!   the tree adders plus the scaling multiplier and accumulator of each
//!   processing element;
//! * memory roof: `banks * word_bytes * clock * MI`.
//!
//! Achievable throughput is the minimum of the three; the binding roof
//! classifies the bottleneck, with a 5% band collapsing near-ties into
//! "balanced".

use serde::Serialize;
use thiserror::Error;

use mcaccel_core::mcmc::Algorithm;
use mcaccel_core::model::GraphModel;

#[derive(Debug, Error)]
pub enum RooflineError {
    #[error("invalid hardware config: {0}")]
    BadConfig(String),
    #[error("unsupported workload/algorithm combination: {0}")]
    Unsupported(String),
    #[error("design-space grid is empty")]
    EmptyGrid,
}

/// Accelerator design parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HwConfig {
    /// Processing elements in the compute unit (T).
    pub pe_count: u32,
    /// Adder-tree depth per PE (K); each PE takes `2^K` inputs plus one
    /// reused partial.
    pub tree_depth: u32,
    /// Sample elements in the sample unit (S = 2^M).
    pub se_count: u32,
    /// Data memory banks (B), one 32-bit word per bank per cycle.
    pub banks: u32,
    pub clock_hz: f64,
    pub word_bytes: u32,
    /// Register-file entries per bank.
    pub rf_depth: u32,
    /// Words per data-memory bank.
    pub bank_words: u32,
}

impl HwConfig {
    /// Shorthand constructor mirroring the usual (T, K, S, M, B) tuple;
    /// `su_depth` is derived from `se_count`.
    pub fn new(pe_count: u32, tree_depth: u32, se_count: u32, banks: u32) -> Self {
        Self {
            pe_count,
            tree_depth,
            se_count,
            banks,
            clock_hz: 500e6,
            word_bytes: 4,
            rf_depth: 64,
            bank_words: 1024,
        }
    }

    /// Default evaluation point: T=64, K=3, S=64 (M=6), B=320.
    pub fn default_eval() -> Self {
        Self::new(64, 3, 64, 320)
    }

    /// log2 of the sample-element count (M).
    pub fn su_depth(&self) -> u32 {
        self.se_count.trailing_zeros()
    }

    /// Max inputs a PE consumes per cycle: `2^K` tree leaves plus the
    /// reused partial.
    pub fn pe_inputs(&self) -> u32 {
        (1 << self.tree_depth) + 1
    }

    /// Counted compute ops per cycle: tree adds, scaling multiply and
    /// accumulate per PE.
    pub fn cu_ops_per_cycle(&self) -> f64 {
        self.pe_count as f64 * ((1u64 << self.tree_depth) as f64 + 2.0)
    }

    pub fn bandwidth_bytes_per_cycle(&self) -> f64 {
        self.banks as f64 * self.word_bytes as f64
    }

    pub fn validate(&self) -> Result<(), RooflineError> {
        if self.pe_count < 1 {
            return Err(RooflineError::BadConfig("pe_count must be >= 1".into()));
        }
        if self.banks < 1 {
            return Err(RooflineError::BadConfig("banks must be >= 1".into()));
        }
        if !self.se_count.is_power_of_two() {
            return Err(RooflineError::BadConfig(format!(
                "se_count {} must be a power of two",
                self.se_count
            )));
        }
        if self.clock_hz <= 0.0 {
            return Err(RooflineError::BadConfig("clock must be positive".into()));
        }
        Ok(())
    }

    /// Label in the conventional parameter order.
    pub fn label(&self) -> String {
        format!(
            "T{}K{}S{}M{}B{}",
            self.pe_count,
            self.tree_depth,
            self.se_count,
            self.su_depth(),
            self.banks
        )
    }
}

/// On-chip memory sizing derived from the bank count: one 8 KB block
/// (1024 x 32 bits) per data bank, plus 8-bit sample entries and 20-bit
/// histogram counters scaled by their width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemorySizing {
    pub data_blocks: u32,
    pub sample_blocks: u32,
    pub histogram_blocks: u32,
    pub total_blocks: u32,
    pub total_kib: u32,
}

pub fn memory_sizing(hw: &HwConfig) -> MemorySizing {
    let b = hw.banks;
    let data_blocks = b;
    let sample_blocks = (b * 8).div_ceil(32);
    let histogram_blocks = (b * 20).div_ceil(32);
    let total_blocks = data_blocks + sample_blocks + histogram_blocks;
    MemorySizing {
        data_blocks,
        sample_blocks,
        histogram_blocks,
        total_blocks,
        total_kib: total_blocks * 8,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuMode {
    /// One comparator per distribution, iterating bins over cycles.
    Temporal,
    /// Comparator tree consuming many bins of one distribution per cycle.
    Spatial,
}

/// Per-sample cost coordinates of a workload, independent of hardware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkloadProfile {
    pub ops_per_sample: f64,
    pub bytes_per_sample: f64,
    pub dist_size: usize,
    pub su_mode: SuMode,
}

impl WorkloadProfile {
    pub fn ci(&self) -> f64 {
        if self.ops_per_sample == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.ops_per_sample
        }
    }

    pub fn mi(&self) -> f64 {
        if self.bytes_per_sample == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.bytes_per_sample
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bottleneck {
    SuBound,
    CuBound,
    MemoryBound,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Roofs {
    pub su: f64,
    pub cu: f64,
    pub mem: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RooflinePoint {
    pub ci: f64,
    pub mi: f64,
    /// Achievable throughput in samples per second.
    pub tp: f64,
    pub bottleneck: Bottleneck,
}

/// Peak throughput of each subsystem for this workload, in samples/s.
pub fn peak_roofs(hw: &HwConfig, profile: &WorkloadProfile) -> Roofs {
    let clock = hw.clock_hz;
    Roofs {
        su: hw.se_count as f64 * clock / profile.dist_size as f64,
        cu: hw.cu_ops_per_cycle() * clock * profile.ci(),
        mem: hw.bandwidth_bytes_per_cycle() * clock * profile.mi(),
    }
}

const BALANCED_TOLERANCE: f64 = 0.05;

/// Achievable throughput: the minimum roof, classified by the binding
/// subsystem. Roofs within 5% of the minimum tie into `Balanced`.
pub fn achievable_tp(hw: &HwConfig, profile: &WorkloadProfile) -> RooflinePoint {
    let roofs = peak_roofs(hw, profile);
    let tp = roofs.su.min(roofs.cu).min(roofs.mem);
    let near = |r: f64| r.is_finite() && (r - tp) <= BALANCED_TOLERANCE * tp;
    let close = [near(roofs.su), near(roofs.cu), near(roofs.mem)];
    let bottleneck = match close {
        [true, false, false] => Bottleneck::SuBound,
        [false, true, false] => Bottleneck::CuBound,
        [false, false, true] => Bottleneck::MemoryBound,
        _ => Bottleneck::Balanced,
    };
    RooflinePoint {
        ci: profile.ci(),
        mi: profile.mi(),
        tp,
        bottleneck,
    }
}

/// Count the cost of one MCMC update for this model/algorithm pairing.
///
/// Counting recipes (one "sample" is the unit of the SU's output):
///
/// * Gibbs-family sweep over a pairwise model: a sample is one variable
///   update; computing its distribution touches each blanket neighbor
///   once per candidate value plus the scale/accumulate op
///   (`ops = card * (degree + 1)`), and moves the neighbor values plus the
///   sample write (`bytes = (degree + 1) * word`); couplings and unaries
///   are held in the register file.
/// * Gibbs-family over a Bayes net: each candidate value reads the node's
///   own table row and one entry per child (`terms = 1 + children`), plus
///   the blanket values for table addressing.
/// * Path-auxiliary selection: a sample is one index draw out of `l`. Per
///   step the energy-gap vector is refreshed by streaming the dense
///   symmetric coupling half-matrix (each stored term feeds two row
///   accumulations at 2 ops each), then each drawn index resamples one
///   variable. Only binary models are supported.
///
/// Degrees are averaged over the model; the numbers are intentionally the
/// plain dataflow of each algorithm, not a particular schedule.
pub fn profile_workload(
    model: &GraphModel,
    algorithm: Algorithm,
    word_bytes: u32,
) -> Result<WorkloadProfile, RooflineError> {
    let n = model.rv_count();
    if n == 0 {
        return Err(RooflineError::Unsupported("empty model".into()));
    }
    let word = word_bytes as f64;
    let mean_degree = |model: &GraphModel| -> f64 {
        (0..n)
            .map(|rv| model.markov_blanket(rv).expect("valid rv").len())
            .sum::<usize>() as f64
            / n as f64
    };
    match algorithm {
        Algorithm::Gibbs | Algorithm::BlockGibbs | Algorithm::AsyncGibbs | Algorithm::Mh => {
            let blocks = model.block_partition();
            let max_block = blocks.iter().map(|b| b.len()).max().unwrap_or(1);
            let su_mode = if max_block >= 2 {
                SuMode::Temporal
            } else {
                SuMode::Spatial
            };
            let dist_size = (0..n).map(|rv| model.cardinality(rv)).max().unwrap() as usize;
            match model {
                GraphModel::Pairwise(_) | GraphModel::Rbm(_) => {
                    let d = mean_degree(model);
                    let card = (0..n)
                        .map(|rv| model.cardinality(rv) as f64)
                        .sum::<f64>()
                        / n as f64;
                    Ok(WorkloadProfile {
                        ops_per_sample: card * (d + 1.0),
                        bytes_per_sample: (d + 1.0) * word,
                        dist_size,
                        su_mode,
                    })
                }
                GraphModel::BayesNet(net) => {
                    let mut ops = 0.0;
                    let mut bytes = 0.0;
                    for rv in 0..n {
                        let card = net.cardinality(rv) as f64;
                        let terms = 1.0 + net.children(rv).len() as f64;
                        let blanket = net.markov_blanket(rv).len() as f64;
                        ops += card * (terms + 1.0);
                        bytes += (card * terms + blanket + 1.0) * word;
                    }
                    Ok(WorkloadProfile {
                        ops_per_sample: ops / n as f64,
                        bytes_per_sample: bytes / n as f64,
                        dist_size,
                        su_mode,
                    })
                }
            }
        }
        Algorithm::Pas { l } => {
            if !model.is_binary() {
                return Err(RooflineError::Unsupported(
                    "path-auxiliary profiling needs binary variables".into(),
                ));
            }
            if l < 1 {
                return Err(RooflineError::Unsupported("pas needs l >= 1".into()));
            }
            let nf = n as f64;
            let lf = l as f64;
            let d = mean_degree(model);
            let ops_per_step = 2.0 * nf * (nf - 1.0) + nf + 2.0 * lf * 2.0 * (d + 1.0);
            let bytes_per_step = (nf * (nf - 1.0) / 2.0 + nf + 2.0 * lf) * word;
            Ok(WorkloadProfile {
                ops_per_sample: ops_per_step / lf,
                bytes_per_sample: bytes_per_step / lf,
                dist_size: n,
                su_mode: SuMode::Spatial,
            })
        }
    }
}

/// Hardware resource index used to rank design points: compute-op slots
/// plus sample elements plus memory banks.
pub fn resource_index(hw: &HwConfig) -> f64 {
    hw.cu_ops_per_cycle() + hw.se_count as f64 + hw.banks as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct DseEntry {
    pub hw: HwConfig,
    /// Minimum over workloads of throughput relative to that workload's
    /// best across the whole grid.
    pub score: f64,
    pub min_tp: f64,
    pub resource: f64,
    pub per_workload: Vec<RooflinePoint>,
    pub on_frontier: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DseReport {
    /// Feasible configs (no workload memory-bound), best score first.
    pub feasible: Vec<DseEntry>,
    /// Configs rejected because some workload was memory-bound.
    pub filtered_out: usize,
}

/// Evaluate a config grid against a workload set.
///
/// Memory-bound pairings disqualify a config. Survivors are scored by the
/// minimum relative throughput across workloads (relative to the best
/// achieved for that workload anywhere in the grid), and the Pareto
/// frontier over (score, resource) is flagged.
pub fn dse(grid: &[HwConfig], workloads: &[WorkloadProfile]) -> Result<DseReport, RooflineError> {
    if grid.is_empty() {
        return Err(RooflineError::EmptyGrid);
    }
    if workloads.is_empty() {
        return Err(RooflineError::Unsupported("no workloads".into()));
    }
    for hw in grid {
        hw.validate()?;
    }

    let all_points: Vec<Vec<RooflinePoint>> = grid
        .iter()
        .map(|hw| workloads.iter().map(|w| achievable_tp(hw, w)).collect())
        .collect();

    let mut best_tp = vec![0.0f64; workloads.len()];
    for points in &all_points {
        for (wi, p) in points.iter().enumerate() {
            best_tp[wi] = best_tp[wi].max(p.tp);
        }
    }

    let mut feasible: Vec<DseEntry> = Vec::new();
    let mut filtered_out = 0usize;
    for (hw, points) in grid.iter().zip(all_points) {
        if points
            .iter()
            .any(|p| p.bottleneck == Bottleneck::MemoryBound)
        {
            filtered_out += 1;
            continue;
        }
        let score = points
            .iter()
            .enumerate()
            .map(|(wi, p)| {
                if best_tp[wi] > 0.0 {
                    p.tp / best_tp[wi]
                } else {
                    1.0
                }
            })
            .fold(f64::INFINITY, f64::min);
        let min_tp = points.iter().map(|p| p.tp).fold(f64::INFINITY, f64::min);
        feasible.push(DseEntry {
            hw: *hw,
            score,
            min_tp,
            resource: resource_index(hw),
            per_workload: points,
            on_frontier: false,
        });
    }

    // Pareto frontier over (score up, resource down).
    for i in 0..feasible.len() {
        let dominated = feasible.iter().enumerate().any(|(j, other)| {
            j != i
                && other.score >= feasible[i].score
                && other.resource <= feasible[i].resource
                && (other.score > feasible[i].score || other.resource < feasible[i].resource)
        });
        feasible[i].on_frontier = !dominated;
    }
    feasible.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.resource.partial_cmp(&b.resource).unwrap())
    });
    Ok(DseReport {
        feasible,
        filtered_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The interior-site Ising update: 4 neighbor reads, 10 ops, one
    /// 2-bin distribution, one sample write at 4-byte words.
    fn ising_update_profile() -> WorkloadProfile {
        WorkloadProfile {
            ops_per_sample: 10.0,
            bytes_per_sample: 20.0,
            dist_size: 2,
            su_mode: SuMode::Temporal,
        }
    }

    #[test]
    fn ising_profile_from_torus_model() {
        let model = mcaccel_core::model::presets::ising_torus(8, 8, 1.0).unwrap();
        let p = profile_workload(&model, Algorithm::BlockGibbs, 4).unwrap();
        assert!((p.ops_per_sample - 10.0).abs() < 1e-9);
        assert!((p.bytes_per_sample - 20.0).abs() < 1e-9);
        assert!((p.ci() - 0.1).abs() < 1e-12);
        assert!((p.mi() - 0.05).abs() < 1e-12);
        assert_eq!(p.dist_size, 2);
        assert_eq!(p.su_mode, SuMode::Temporal);
    }

    #[test]
    fn toy_config_roofs_hand_evaluated() {
        // T=4, K=1, S=4, B=12 at unit clock on the Ising update:
        // su = 4/2 = 2, cu = 4*(2+2)*0.1 = 1.6, mem = 12*4*0.05 = 2.4.
        let mut hw = HwConfig::new(4, 1, 4, 12);
        hw.clock_hz = 1.0;
        let roofs = peak_roofs(&hw, &ising_update_profile());
        assert!((roofs.su - 2.0).abs() < 1e-12);
        assert!((roofs.cu - 1.6).abs() < 1e-12);
        assert!((roofs.mem - 2.4).abs() < 1e-12);
        let point = achievable_tp(&hw, &ising_update_profile());
        assert!((point.tp - 1.6).abs() < 1e-12);
        assert_eq!(point.bottleneck, Bottleneck::CuBound);
    }

    #[test]
    fn doubling_banks_lifts_memory_bound_throughput() {
        let mut hw = HwConfig::new(16, 3, 16, 2);
        hw.clock_hz = 1.0;
        let profile = ising_update_profile();
        let p1 = achievable_tp(&hw, &profile);
        assert_eq!(p1.bottleneck, Bottleneck::MemoryBound);
        hw.banks = 4;
        let p2 = achievable_tp(&hw, &profile);
        assert!((p2.tp - 2.0 * p1.tp).abs() < 1e-12);
    }

    #[test]
    fn balanced_apex_classifies_balanced() {
        // su = 2, cu = 16 * ci = 2 at ci = 1/8, mem = 8 * mi = 2 at
        // mi = 1/4 (word_bytes 4, banks 2).
        let mut hw = HwConfig::new(4, 1, 4, 2);
        hw.clock_hz = 1.0;
        let profile = WorkloadProfile {
            ops_per_sample: 8.0,
            bytes_per_sample: 4.0,
            dist_size: 2,
            su_mode: SuMode::Spatial,
        };
        let point = achievable_tp(&hw, &profile);
        assert_eq!(point.bottleneck, Bottleneck::Balanced);
        assert!((point.tp - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bypass_workload_never_cu_bound() {
        let profile = WorkloadProfile {
            ops_per_sample: 0.0,
            bytes_per_sample: 8.0,
            dist_size: 4,
            su_mode: SuMode::Spatial,
        };
        assert!(profile.ci().is_infinite());
        for hw in [HwConfig::new(1, 0, 2, 1), HwConfig::new(64, 3, 64, 320)] {
            let point = achievable_tp(&hw, &profile);
            assert_ne!(point.bottleneck, Bottleneck::CuBound);
        }
    }

    #[test]
    fn clock_scales_tp_but_not_classification() {
        let profile = ising_update_profile();
        let mut hw = HwConfig::new(8, 2, 8, 16);
        hw.clock_hz = 1.0;
        let p1 = achievable_tp(&hw, &profile);
        hw.clock_hz = 3.0;
        let p2 = achievable_tp(&hw, &profile);
        assert!((p2.tp - 3.0 * p1.tp).abs() < 1e-9);
        assert_eq!(p1.bottleneck, p2.bottleneck);
    }

    #[test]
    fn ci_mi_are_hardware_independent() {
        let profile = ising_update_profile();
        let a = achievable_tp(&HwConfig::new(4, 1, 4, 12), &profile);
        let b = achievable_tp(&HwConfig::new(64, 3, 64, 320), &profile);
        assert_eq!(a.ci, b.ci);
        assert_eq!(a.mi, b.mi);
    }

    #[test]
    fn tp_monotone_in_resources() {
        let profile = ising_update_profile();
        let base = HwConfig::new(8, 2, 8, 8);
        let tp = |hw: &HwConfig| achievable_tp(hw, &profile).tp;
        let mut t = base;
        t.pe_count *= 2;
        assert!(tp(&t) >= tp(&base));
        let mut s = base;
        s.se_count *= 2;
        assert!(tp(&s) >= tp(&base));
        let mut b = base;
        b.banks *= 2;
        assert!(tp(&b) >= tp(&base));
    }

    #[test]
    fn memory_sizing_reproduces_reference_point() {
        let sizing = memory_sizing(&HwConfig::default_eval());
        assert_eq!(sizing.data_blocks, 320);
        assert_eq!(sizing.sample_blocks, 80);
        assert_eq!(sizing.histogram_blocks, 200);
        assert_eq!(sizing.total_blocks, 600);
        assert_eq!(sizing.total_kib, 4800);
    }

    #[test]
    fn singleton_grid_dse_returns_it() {
        let hw = HwConfig::default_eval();
        let report = dse(&[hw], &[ising_update_profile()]).unwrap();
        assert_eq!(report.feasible.len(), 1);
        assert!(report.feasible[0].on_frontier);
    }

    #[test]
    fn memory_starved_config_is_filtered() {
        let mut tiny = HwConfig::new(64, 3, 64, 8);
        tiny.clock_hz = 1.0;
        let report = dse(
            &[tiny, HwConfig::default_eval()],
            &[ising_update_profile()],
        )
        .unwrap();
        assert_eq!(report.filtered_out, 1);
        assert_eq!(report.feasible.len(), 1);
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(
            dse(&[], &[ising_update_profile()]),
            Err(RooflineError::EmptyGrid)
        ));
    }
}
