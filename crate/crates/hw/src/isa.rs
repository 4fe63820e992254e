//! VLIW instruction set: in-memory form, bit-exact encoding and field
//! width formulas.
//!
//! Every field width is a pure function of the hardware parameters (see
//! [`IsaDims`]). Packing is dense little-endian in the documented field
//! order: kind, load lanes, register reads, crossbar lanes, compute
//! config, sample config, store lanes, loop fields.

use thiserror::Error;

use crate::roofline::HwConfig;

#[derive(Debug, Error, PartialEq)]
pub enum IsaError {
    #[error("field {field} value {value} exceeds {bits}-bit width")]
    FieldOverflow {
        field: &'static str,
        value: u64,
        bits: u32,
    },
    #[error("malformed word: {0}")]
    Malformed(String),
    #[error("word too short: expected {expected} bytes, got {got}")]
    ShortWord { expected: usize, got: usize },
}

/// Cap on index-buffer slots (and therefore the path length `l`).
pub const MAX_INDEX_SLOTS: usize = 256;
/// Distribution-size field width: sizes 1..=256.
pub const DIST_BITS: u32 = 9;
pub const DESC_BITS: u32 = 8;
pub const SLOT_BITS: u32 = 8;
pub const LOOP_COUNT_BITS: u32 = 20;
pub const LOOP_BODY_BITS: u32 = 12;
pub const KIND_BITS: u32 = 3;

fn bits_for(n: u64) -> u32 {
    64 - n.saturating_sub(1).leading_zeros().min(64)
}

/// Derived field widths and unit counts for one hardware configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsaDims {
    pub banks: usize,
    pub pes: usize,
    pub lanes_per_pe: usize,
    pub ses: usize,
    pub rf_bits: u32,
    pub data_addr_bits: u32,
    pub sample_bits: u32,
    pub hist_bits: u32,
    pub addr_bits: u32,
    pub bank_sel_bits: u32,
    pub lane_sel_bits: u32,
    pub sample_capacity: usize,
    pub hist_capacity: usize,
}

impl IsaDims {
    pub fn new(hw: &HwConfig) -> Self {
        let banks = hw.banks as usize;
        let sample_capacity = banks * 2048;
        let hist_capacity = banks * 2048;
        let rf_bits = bits_for(hw.rf_depth as u64);
        let data_addr_bits = bits_for(hw.bank_words as u64);
        let sample_bits = bits_for(sample_capacity as u64);
        let hist_bits = bits_for(hist_capacity as u64);
        Self {
            banks,
            pes: hw.pe_count as usize,
            lanes_per_pe: 1usize << hw.tree_depth,
            ses: hw.se_count as usize,
            rf_bits,
            data_addr_bits,
            sample_bits,
            hist_bits,
            addr_bits: data_addr_bits.max(sample_bits),
            bank_sel_bits: bits_for(hw.banks as u64),
            lane_sel_bits: bits_for(hw.banks as u64 + 2),
            sample_capacity,
            hist_capacity,
        }
    }

    pub fn lanes(&self) -> usize {
        self.pes * self.lanes_per_pe
    }

    /// One load lane: enable, source, transform, indirect flag, address,
    /// RF destination, descriptor index.
    fn load_lane_bits(&self) -> u32 {
        1 + 1 + 1 + 1 + self.addr_bits + self.rf_bits + DESC_BITS
    }

    fn cu_pe_bits(&self) -> u32 {
        // mode(2) + partial-dot(1) + beta(1) + acc(1) + wb enable(1)
        // + wb bank + wb entry
        2 + 1 + 1 + 1 + 1 + self.bank_sel_bits + self.rf_bits
    }

    fn su_bits(&self) -> u32 {
        // mode(1) + dist size + noise tag(2) + noise payload
        // + new-dist mask(S) + consume mask(S)
        1 + DIST_BITS + 2 + self.sample_bits.max(SLOT_BITS) + 2 * self.ses as u32
    }

    fn store_lane_bits(&self) -> u32 {
        // enable(1) + indirect(1) + hist(1) + index-buffer(1) + slot
        // + sample addr + hist base
        1 + 1 + 1 + 1 + SLOT_BITS + self.sample_bits + self.hist_bits
    }

    /// Total instruction width in bits.
    pub fn word_bits(&self) -> u32 {
        KIND_BITS
            + self.banks as u32 * self.load_lane_bits()
            + self.banks as u32 * self.rf_bits
            + self.lanes() as u32 * self.lane_sel_bits
            + self.pes as u32 * self.cu_pe_bits()
            + self.su_bits()
            + self.ses as u32 * self.store_lane_bits()
            + 1
            + LOOP_COUNT_BITS
            + LOOP_BODY_BITS
    }

    pub fn word_bytes(&self) -> usize {
        self.word_bits().div_ceil(8) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum InstrKind {
    Load = 0,
    Compute = 1,
    Sample = 2,
    ComputeSample = 3,
    ComputeSampleStore = 4,
    Nop = 5,
}

impl InstrKind {
    pub fn from_code(code: u8) -> Result<Self, IsaError> {
        Ok(match code {
            0 => InstrKind::Load,
            1 => InstrKind::Compute,
            2 => InstrKind::Sample,
            3 => InstrKind::ComputeSample,
            4 => InstrKind::ComputeSampleStore,
            5 => InstrKind::Nop,
            other => return Err(IsaError::Malformed(format!("bad kind code {other}"))),
        })
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            InstrKind::Load => "load",
            InstrKind::Compute => "compute",
            InstrKind::Sample => "sample",
            InstrKind::ComputeSample => "compute-sample",
            InstrKind::ComputeSampleStore => "compute-sample-store",
            InstrKind::Nop => "nop",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "load" => InstrKind::Load,
            "compute" => InstrKind::Compute,
            "sample" => InstrKind::Sample,
            "compute-sample" => InstrKind::ComputeSample,
            "compute-sample-store" => InstrKind::ComputeSampleStore,
            "nop" => InstrKind::Nop,
            _ => return None,
        })
    }

    pub fn has_compute(&self) -> bool {
        matches!(
            self,
            InstrKind::Compute | InstrKind::ComputeSample | InstrKind::ComputeSampleStore
        )
    }

    pub fn has_sample(&self) -> bool {
        matches!(
            self,
            InstrKind::Sample | InstrKind::ComputeSample | InstrKind::ComputeSampleStore
        )
    }

    pub fn has_store(&self) -> bool {
        matches!(self, InstrKind::ComputeSampleStore)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MemSrc {
    Data = 0,
    Sample = 1,
}

/// Value transform applied by the load unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum LoadTransform {
    Raw = 0,
    /// Map a binary sample value to a sign: `1 - 2x`.
    SpinSign = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadLane {
    pub enable: bool,
    pub src_sample: bool,
    pub transform_spin: bool,
    pub indirect: bool,
    pub addr: u32,
    pub dest: u16,
    pub descriptor: u8,
}

/// Source feeding one PE input lane through the crossbar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaneSrc {
    #[default]
    Zero,
    /// The constant 1 (folds additive constants into dot products).
    One,
    /// The value bank `b` delivers this cycle: its load result if the
    /// lane's bank has an enabled load, otherwise its RF read.
    Bank(u16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[repr(u8)]
pub enum PeMode {
    #[default]
    Bypass = 0,
    DotProduct = 1,
    ReducedSum = 2,
    Partial = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PeCfg {
    pub mode: PeMode,
    /// Partial submode: dot product instead of reduced sum.
    pub partial_dot: bool,
    /// Scale the result by the (negated) annealing register.
    pub use_beta: bool,
    /// Fold the PE accumulator into the result.
    pub accumulate: bool,
    pub writeback: Option<(u16, u16)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSrc {
    /// Per-variable bin-noise stream.
    Rv(u32),
    /// Stream of the variable held in an index-buffer slot.
    RvIndirect(u8),
    /// The index-selection stream.
    Selection,
}

impl Default for NoiseSrc {
    fn default() -> Self {
        NoiseSrc::Rv(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuCfg {
    pub spatial: bool,
    /// Bins of the distribution started this instruction.
    pub dist_size: u16,
    pub noise: NoiseSrc,
    /// SEs starting a new distribution this instruction (at most one).
    pub new_dist: Vec<bool>,
    /// SEs consuming a bin this instruction.
    pub consume: Vec<bool>,
}

impl SuCfg {
    pub fn idle(ses: usize) -> Self {
        Self {
            spatial: false,
            dist_size: 0,
            noise: NoiseSrc::Rv(0),
            new_dist: vec![false; ses],
            consume: vec![false; ses],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StoreLane {
    pub enable: bool,
    /// Resolve the target variable from the index buffer.
    pub indirect: bool,
    pub slot: u8,
    pub sample_addr: u32,
    pub hist_base: u32,
    pub write_hist: bool,
    /// Write the SE result into an index-buffer slot instead of sample
    /// memory (slot reused; sample_addr/hist ignored).
    pub to_index_buffer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoopCfg {
    pub begin: bool,
    pub count: u32,
    pub body_len: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub kind: InstrKind,
    pub loads: Vec<LoadLane>,
    /// Per-bank RF read address for this cycle.
    pub rf_read: Vec<u16>,
    pub lane_src: Vec<LaneSrc>,
    pub pes: Vec<PeCfg>,
    pub su: SuCfg,
    pub stores: Vec<StoreLane>,
    pub hwloop: LoopCfg,
}

impl Instruction {
    pub fn nop(dims: &IsaDims) -> Self {
        Self {
            kind: InstrKind::Nop,
            loads: vec![LoadLane::default(); dims.banks],
            rf_read: vec![0; dims.banks],
            lane_src: vec![LaneSrc::Zero; dims.lanes()],
            pes: vec![PeCfg::default(); dims.pes],
            su: SuCfg::idle(dims.ses),
            stores: vec![StoreLane::default(); dims.ses],
            hwloop: LoopCfg::default(),
        }
    }

    pub fn empty(kind: InstrKind, dims: &IsaDims) -> Self {
        let mut i = Self::nop(dims);
        i.kind = kind;
        i
    }
}

/// Little-endian bit cursor over a byte buffer.
struct BitWriter {
    buf: Vec<u8>,
    bit: usize,
}

impl BitWriter {
    fn new(bits: u32) -> Self {
        Self {
            buf: vec![0u8; (bits as usize).div_ceil(8)],
            bit: 0,
        }
    }

    fn put(&mut self, value: u64, bits: u32, field: &'static str) -> Result<(), IsaError> {
        if bits < 64 && value >= (1u64 << bits) {
            return Err(IsaError::FieldOverflow { field, value, bits });
        }
        for i in 0..bits as usize {
            if (value >> i) & 1 != 0 {
                self.buf[(self.bit + i) / 8] |= 1 << ((self.bit + i) % 8);
            }
        }
        self.bit += bits as usize;
        Ok(())
    }

    fn put_flag(&mut self, v: bool, field: &'static str) -> Result<(), IsaError> {
        self.put(v as u64, 1, field)
    }
}

struct BitReader<'a> {
    buf: &'a [u8],
    bit: usize,
}

impl<'a> BitReader<'a> {
    fn take(&mut self, bits: u32) -> u64 {
        let mut v = 0u64;
        for i in 0..bits as usize {
            let idx = self.bit + i;
            if self.buf[idx / 8] >> (idx % 8) & 1 != 0 {
                v |= 1 << i;
            }
        }
        self.bit += bits as usize;
        v
    }

    fn flag(&mut self) -> bool {
        self.take(1) != 0
    }
}

/// Densely pack an instruction into its binary word.
pub fn encode(instr: &Instruction, dims: &IsaDims) -> Result<Vec<u8>, IsaError> {
    let mut w = BitWriter::new(dims.word_bits());
    w.put(instr.kind as u64, KIND_BITS, "kind")?;
    debug_assert_eq!(instr.loads.len(), dims.banks);
    for lane in &instr.loads {
        w.put_flag(lane.enable, "load.enable")?;
        w.put_flag(lane.src_sample, "load.src")?;
        w.put_flag(lane.transform_spin, "load.transform")?;
        w.put_flag(lane.indirect, "load.indirect")?;
        w.put(lane.addr as u64, dims.addr_bits, "load.addr")?;
        w.put(lane.dest as u64, dims.rf_bits, "load.dest")?;
        w.put(lane.descriptor as u64, DESC_BITS, "load.descriptor")?;
    }
    for &addr in &instr.rf_read {
        w.put(addr as u64, dims.rf_bits, "rf_read")?;
    }
    for src in &instr.lane_src {
        let code = match src {
            LaneSrc::Zero => 0u64,
            LaneSrc::One => 1,
            LaneSrc::Bank(b) => {
                if *b as usize >= dims.banks {
                    return Err(IsaError::FieldOverflow {
                        field: "lane_src.bank",
                        value: *b as u64,
                        bits: dims.lane_sel_bits,
                    });
                }
                *b as u64 + 2
            }
        };
        w.put(code, dims.lane_sel_bits, "lane_src")?;
    }
    for pe in &instr.pes {
        w.put(pe.mode as u64, 2, "pe.mode")?;
        w.put_flag(pe.partial_dot, "pe.partial_dot")?;
        w.put_flag(pe.use_beta, "pe.use_beta")?;
        w.put_flag(pe.accumulate, "pe.accumulate")?;
        match pe.writeback {
            Some((bank, entry)) => {
                w.put_flag(true, "pe.wb")?;
                w.put(bank as u64, dims.bank_sel_bits, "pe.wb_bank")?;
                w.put(entry as u64, dims.rf_bits, "pe.wb_entry")?;
            }
            None => {
                w.put_flag(false, "pe.wb")?;
                w.put(0, dims.bank_sel_bits, "pe.wb_bank")?;
                w.put(0, dims.rf_bits, "pe.wb_entry")?;
            }
        }
    }
    w.put_flag(instr.su.spatial, "su.mode")?;
    w.put(instr.su.dist_size as u64, DIST_BITS, "su.dist_size")?;
    let (tag, payload) = match instr.su.noise {
        NoiseSrc::Rv(rv) => (0u64, rv as u64),
        NoiseSrc::RvIndirect(slot) => (1, slot as u64),
        NoiseSrc::Selection => (2, 0),
    };
    w.put(tag, 2, "su.noise_tag")?;
    w.put(payload, dims.sample_bits.max(SLOT_BITS), "su.noise_payload")?;
    for &b in &instr.su.new_dist {
        w.put_flag(b, "su.new_dist")?;
    }
    for &b in &instr.su.consume {
        w.put_flag(b, "su.consume")?;
    }
    for st in &instr.stores {
        w.put_flag(st.enable, "store.enable")?;
        w.put_flag(st.indirect, "store.indirect")?;
        w.put_flag(st.write_hist, "store.write_hist")?;
        w.put_flag(st.to_index_buffer, "store.to_index_buffer")?;
        w.put(st.slot as u64, SLOT_BITS, "store.slot")?;
        w.put(st.sample_addr as u64, dims.sample_bits, "store.sample_addr")?;
        w.put(st.hist_base as u64, dims.hist_bits, "store.hist_base")?;
    }
    w.put_flag(instr.hwloop.begin, "loop.begin")?;
    w.put(instr.hwloop.count as u64, LOOP_COUNT_BITS, "loop.count")?;
    w.put(instr.hwloop.body_len as u64, LOOP_BODY_BITS, "loop.body_len")?;
    debug_assert_eq!(w.bit as u32, dims.word_bits());
    Ok(w.buf)
}

pub fn decode(word: &[u8], dims: &IsaDims) -> Result<Instruction, IsaError> {
    if word.len() < dims.word_bytes() {
        return Err(IsaError::ShortWord {
            expected: dims.word_bytes(),
            got: word.len(),
        });
    }
    let mut r = BitReader { buf: word, bit: 0 };
    let kind = InstrKind::from_code(r.take(KIND_BITS) as u8)?;
    let mut loads = Vec::with_capacity(dims.banks);
    for _ in 0..dims.banks {
        loads.push(LoadLane {
            enable: r.flag(),
            src_sample: r.flag(),
            transform_spin: r.flag(),
            indirect: r.flag(),
            addr: r.take(dims.addr_bits) as u32,
            dest: r.take(dims.rf_bits) as u16,
            descriptor: r.take(DESC_BITS) as u8,
        });
    }
    let rf_read = (0..dims.banks)
        .map(|_| r.take(dims.rf_bits) as u16)
        .collect();
    let mut lane_src = Vec::with_capacity(dims.lanes());
    for _ in 0..dims.lanes() {
        let code = r.take(dims.lane_sel_bits);
        lane_src.push(match code {
            0 => LaneSrc::Zero,
            1 => LaneSrc::One,
            b => {
                let bank = b - 2;
                if bank as usize >= dims.banks {
                    return Err(IsaError::Malformed(format!("lane source bank {bank}")));
                }
                LaneSrc::Bank(bank as u16)
            }
        });
    }
    let mut pes = Vec::with_capacity(dims.pes);
    for _ in 0..dims.pes {
        let mode = match r.take(2) {
            0 => PeMode::Bypass,
            1 => PeMode::DotProduct,
            2 => PeMode::ReducedSum,
            _ => PeMode::Partial,
        };
        let partial_dot = r.flag();
        let use_beta = r.flag();
        let accumulate = r.flag();
        let wb_en = r.flag();
        let wb_bank = r.take(dims.bank_sel_bits) as u16;
        let wb_entry = r.take(dims.rf_bits) as u16;
        pes.push(PeCfg {
            mode,
            partial_dot,
            use_beta,
            accumulate,
            writeback: wb_en.then_some((wb_bank, wb_entry)),
        });
    }
    let spatial = r.flag();
    let dist_size = r.take(DIST_BITS) as u16;
    let noise_tag = r.take(2);
    let payload = r.take(dims.sample_bits.max(SLOT_BITS));
    let noise = match noise_tag {
        0 => NoiseSrc::Rv(payload as u32),
        1 => NoiseSrc::RvIndirect(payload as u8),
        2 => NoiseSrc::Selection,
        t => return Err(IsaError::Malformed(format!("noise tag {t}"))),
    };
    let new_dist = (0..dims.ses).map(|_| r.flag()).collect();
    let consume = (0..dims.ses).map(|_| r.flag()).collect();
    let mut stores = Vec::with_capacity(dims.ses);
    for _ in 0..dims.ses {
        let enable = r.flag();
        let indirect = r.flag();
        let write_hist = r.flag();
        let to_index_buffer = r.flag();
        stores.push(StoreLane {
            enable,
            indirect,
            write_hist,
            to_index_buffer,
            slot: r.take(SLOT_BITS) as u8,
            sample_addr: r.take(dims.sample_bits) as u32,
            hist_base: r.take(dims.hist_bits) as u32,
        });
    }
    let hwloop = LoopCfg {
        begin: r.flag(),
        count: r.take(LOOP_COUNT_BITS) as u32,
        body_len: r.take(LOOP_BODY_BITS) as u16,
    };
    Ok(Instruction {
        kind,
        loads,
        rf_read,
        lane_src,
        pes,
        su: SuCfg {
            spatial,
            dist_size,
            noise,
            new_dist,
            consume,
        },
        stores,
        hwloop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dims() -> IsaDims {
        IsaDims::new(&HwConfig::new(4, 1, 4, 12))
    }

    #[test]
    fn nop_encodes_to_kind_five_rest_zero() {
        let dims = toy_dims();
        let word = encode(&Instruction::nop(&dims), &dims).unwrap();
        assert_eq!(word[0] & 0b111, 5);
        assert_eq!(word[0] & !0b111, 0);
        assert!(word[1..].iter().all(|&b| b == 0));
    }

    #[test]
    fn nop_roundtrip() {
        let dims = toy_dims();
        let nop = Instruction::nop(&dims);
        let word = encode(&nop, &dims).unwrap();
        assert_eq!(decode(&word, &dims).unwrap(), nop);
    }

    #[test]
    fn width_formula_at_reference_configs() {
        let toy = toy_dims();
        assert_eq!(toy.word_bytes(), encode(&Instruction::nop(&toy), &toy).unwrap().len());
        let big = IsaDims::new(&HwConfig::default_eval());
        assert!(big.word_bits() > toy.word_bits());
        // A maxed-out store/load instruction still fits by construction.
        let mut i = Instruction::empty(InstrKind::ComputeSampleStore, &big);
        for lane in &mut i.loads {
            lane.enable = true;
            lane.addr = (1 << big.addr_bits) - 1;
            lane.dest = (1 << big.rf_bits) - 1;
            lane.descriptor = u8::MAX;
        }
        for st in &mut i.stores {
            st.enable = true;
            st.sample_addr = (1 << big.sample_bits) - 1;
            st.hist_base = (1 << big.hist_bits) - 1;
        }
        let word = encode(&i, &big).unwrap();
        assert_eq!(word.len(), big.word_bytes());
        assert_eq!(decode(&word, &big).unwrap(), i);
    }

    #[test]
    fn field_overflow_is_reported() {
        let dims = toy_dims();
        let mut i = Instruction::nop(&dims);
        i.loads[0].addr = 1 << dims.addr_bits;
        assert!(matches!(
            encode(&i, &dims),
            Err(IsaError::FieldOverflow { .. })
        ));
    }

    #[test]
    fn bad_kind_code_rejected() {
        let dims = toy_dims();
        let mut word = encode(&Instruction::nop(&dims), &dims).unwrap();
        word[0] = (word[0] & !0b111) | 0b111;
        assert!(decode(&word, &dims).is_err());
    }
}
