//! Text assembly for programs and single instructions.
//!
//! One instruction per line: the mnemonic followed by bracketed field
//! groups, only listing enabled lanes. The program form adds a header
//! carrying the hardware parameters, layout symbols, descriptors, phases
//! and the data image, so `assemble(disassemble(p)) == p` exactly.

use std::fmt::Write as _;

use thiserror::Error;

use crate::isa::{
    InstrKind, Instruction, IsaDims, LaneSrc, LoadLane, LoopCfg, NoiseSrc, PeCfg, PeMode,
    StoreLane, SuCfg,
};
use crate::program::{AddrDescriptor, AddrMode, Phase, Program, RvSymbol};
use crate::roofline::HwConfig;

#[derive(Debug, Error)]
pub enum AsmError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Structure(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> AsmError {
    AsmError::Syntax {
        line,
        msg: msg.into(),
    }
}

pub fn disassemble_instr(i: &Instruction, _dims: &IsaDims) -> String {
    let mut out = String::new();
    out.push_str(i.kind.mnemonic());

    let loads: Vec<String> = i
        .loads
        .iter()
        .enumerate()
        .filter(|(_, l)| l.enable)
        .map(|(b, l)| {
            let src = if l.src_sample { "s" } else { "d" };
            let spin = if l.transform_spin { "~" } else { "" };
            let ind = if l.indirect {
                format!("*{}", l.descriptor)
            } else {
                String::new()
            };
            format!("{b}={src}:{}{spin}{ind}>{}", l.addr, l.dest)
        })
        .collect();
    if !loads.is_empty() {
        let _ = write!(out, " ld[{}]", loads.join(","));
    }

    let reads: Vec<String> = i
        .rf_read
        .iter()
        .enumerate()
        .filter(|(_, &e)| e != 0)
        .map(|(b, &e)| format!("{b}={e}"))
        .collect();
    if !reads.is_empty() {
        let _ = write!(out, " rd[{}]", reads.join(","));
    }

    let lanes: Vec<String> = i
        .lane_src
        .iter()
        .enumerate()
        .filter(|(_, s)| !matches!(s, LaneSrc::Zero))
        .map(|(l, s)| match s {
            LaneSrc::One => format!("{l}=one"),
            LaneSrc::Bank(b) => format!("{l}=b{b}"),
            LaneSrc::Zero => unreachable!(),
        })
        .collect();
    if !lanes.is_empty() {
        let _ = write!(out, " xb[{}]", lanes.join(","));
    }

    let pes: Vec<String> = i
        .pes
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != PeCfg::default())
        .map(|(n, p)| {
            let mode = match (p.mode, p.partial_dot) {
                (PeMode::Bypass, _) => "byp",
                (PeMode::DotProduct, _) => "dot",
                (PeMode::ReducedSum, _) => "sum",
                (PeMode::Partial, false) => "par",
                (PeMode::Partial, true) => "pard",
            };
            let mut s = format!("{n}={mode}");
            if p.use_beta {
                s.push_str("+b");
            }
            if p.accumulate {
                s.push_str("+a");
            }
            if let Some((bank, entry)) = p.writeback {
                let _ = write!(s, ">{bank}:{entry}");
            }
            s
        })
        .collect();
    if !pes.is_empty() {
        let _ = write!(out, " pe[{}]", pes.join(","));
    }

    if i.kind.has_sample() {
        let mut parts = vec![if i.su.spatial { "s".to_string() } else { "t".to_string() }];
        if i.su.dist_size != 0 {
            parts.push(format!("n={}", i.su.dist_size));
        }
        match i.su.noise {
            NoiseSrc::Rv(rv) => parts.push(format!("ns=rv:{rv}")),
            NoiseSrc::RvIndirect(k) => parts.push(format!("ns=ix:{k}")),
            NoiseSrc::Selection => parts.push("ns=sel".to_string()),
        }
        let mask = |v: &[bool]| -> String {
            let mut x = 0u128;
            for (e, &b) in v.iter().enumerate() {
                if b {
                    x |= 1 << e;
                }
            }
            format!("{x:x}")
        };
        if i.su.new_dist.iter().any(|&b| b) {
            parts.push(format!("new={}", mask(&i.su.new_dist)));
        }
        if i.su.consume.iter().any(|&b| b) {
            parts.push(format!("go={}", mask(&i.su.consume)));
        }
        let _ = write!(out, " su[{}]", parts.join(","));
    }

    let stores: Vec<String> = i
        .stores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.enable)
        .map(|(e, s)| {
            if s.to_index_buffer {
                format!("{e}=ix:{}", s.slot)
            } else if s.indirect {
                let h = if s.write_hist { "/h" } else { "" };
                format!("{e}=s@{}{h}", s.slot)
            } else {
                let h = if s.write_hist {
                    format!("/h:{}", s.hist_base)
                } else {
                    String::new()
                };
                format!("{e}=s:{}{h}", s.sample_addr)
            }
        })
        .collect();
    if !stores.is_empty() {
        let _ = write!(out, " st[{}]", stores.join(","));
    }

    if i.hwloop.begin {
        let _ = write!(out, " loop[{},{}]", i.hwloop.count, i.hwloop.body_len);
    }
    out
}

fn split_groups(rest: &str) -> Result<Vec<(&str, &str)>, String> {
    let mut groups = Vec::new();
    for part in rest.split_whitespace() {
        let open = part
            .find('[')
            .ok_or_else(|| format!("expected name[...], got {part}"))?;
        if !part.ends_with(']') {
            return Err(format!("unterminated group {part}"));
        }
        groups.push((&part[..open], &part[open + 1..part.len() - 1]));
    }
    Ok(groups)
}

pub fn assemble_instr(line: &str, dims: &IsaDims) -> Result<Instruction, AsmError> {
    assemble_instr_at(line, dims, 0)
}

fn assemble_instr_at(line: &str, dims: &IsaDims, lineno: usize) -> Result<Instruction, AsmError> {
    let line = line.trim();
    let (mn, rest) = line.split_once(' ').unwrap_or((line, ""));
    let kind = InstrKind::from_mnemonic(mn)
        .ok_or_else(|| syntax(lineno, format!("unknown mnemonic {mn}")))?;
    let mut instr = Instruction::empty(kind, dims);

    let parse_u = |s: &str, what: &str| -> Result<u64, AsmError> {
        s.parse::<u64>()
            .map_err(|e| syntax(lineno, format!("bad {what} `{s}`: {e}")))
    };

    for (name, body) in
        split_groups(rest).map_err(|m| syntax(lineno, m))?
    {
        match name {
            "ld" => {
                for item in body.split(',') {
                    let (bank, spec) = item
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, format!("bad load {item}")))?;
                    let b = parse_u(bank, "bank")? as usize;
                    if b >= dims.banks {
                        return Err(syntax(lineno, format!("bank {b} out of range")));
                    }
                    let (src, spec) = spec
                        .split_once(':')
                        .ok_or_else(|| syntax(lineno, format!("bad load spec {spec}")))?;
                    let (addr_part, dest) = spec
                        .split_once('>')
                        .ok_or_else(|| syntax(lineno, format!("load needs >dest: {spec}")))?;
                    let (addr_part, desc) = match addr_part.split_once('*') {
                        Some((a, d)) => (a, Some(parse_u(d, "descriptor")? as u8)),
                        None => (addr_part, None),
                    };
                    let (addr_str, spin) = match addr_part.strip_suffix('~') {
                        Some(a) => (a, true),
                        None => (addr_part, false),
                    };
                    instr.loads[b] = LoadLane {
                        enable: true,
                        src_sample: match src {
                            "d" => false,
                            "s" => true,
                            _ => return Err(syntax(lineno, format!("bad src {src}"))),
                        },
                        transform_spin: spin,
                        indirect: desc.is_some(),
                        addr: parse_u(addr_str, "address")? as u32,
                        dest: parse_u(dest, "rf dest")? as u16,
                        descriptor: desc.unwrap_or(0),
                    };
                }
            }
            "rd" => {
                for item in body.split(',') {
                    let (bank, entry) = item
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, format!("bad read {item}")))?;
                    let b = parse_u(bank, "bank")? as usize;
                    instr.rf_read[b] = parse_u(entry, "entry")? as u16;
                }
            }
            "xb" => {
                for item in body.split(',') {
                    let (lane, src) = item
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, format!("bad lane {item}")))?;
                    let l = parse_u(lane, "lane")? as usize;
                    if l >= dims.lanes() {
                        return Err(syntax(lineno, format!("lane {l} out of range")));
                    }
                    instr.lane_src[l] = if src == "one" {
                        LaneSrc::One
                    } else if let Some(b) = src.strip_prefix('b') {
                        LaneSrc::Bank(parse_u(b, "bank")? as u16)
                    } else {
                        return Err(syntax(lineno, format!("bad lane src {src}")));
                    };
                }
            }
            "pe" => {
                for item in body.split(',') {
                    let (pe, spec) = item
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, format!("bad pe {item}")))?;
                    let p = parse_u(pe, "pe")? as usize;
                    if p >= dims.pes {
                        return Err(syntax(lineno, format!("pe {p} out of range")));
                    }
                    let (spec, wb) = match spec.split_once('>') {
                        Some((s, wb)) => {
                            let (bank, entry) = wb.split_once(':').ok_or_else(|| {
                                syntax(lineno, format!("bad writeback {wb}"))
                            })?;
                            (
                                s,
                                Some((
                                    parse_u(bank, "wb bank")? as u16,
                                    parse_u(entry, "wb entry")? as u16,
                                )),
                            )
                        }
                        None => (spec, None),
                    };
                    let mut flags = spec.split('+');
                    let mode_s = flags.next().unwrap();
                    let (mode, partial_dot) = match mode_s {
                        "byp" => (PeMode::Bypass, false),
                        "dot" => (PeMode::DotProduct, false),
                        "sum" => (PeMode::ReducedSum, false),
                        "par" => (PeMode::Partial, false),
                        "pard" => (PeMode::Partial, true),
                        m => return Err(syntax(lineno, format!("bad pe mode {m}"))),
                    };
                    let mut cfg = PeCfg {
                        mode,
                        partial_dot,
                        use_beta: false,
                        accumulate: false,
                        writeback: wb,
                    };
                    for f in flags {
                        match f {
                            "b" => cfg.use_beta = true,
                            "a" => cfg.accumulate = true,
                            f => return Err(syntax(lineno, format!("bad pe flag {f}"))),
                        }
                    }
                    instr.pes[p] = cfg;
                }
            }
            "su" => {
                let mut su = SuCfg::idle(dims.ses);
                for item in body.split(',') {
                    match item {
                        "t" => su.spatial = false,
                        "s" => su.spatial = true,
                        _ => {
                            let (key, val) = item
                                .split_once('=')
                                .ok_or_else(|| syntax(lineno, format!("bad su item {item}")))?;
                            match key {
                                "n" => su.dist_size = parse_u(val, "dist size")? as u16,
                                "ns" => {
                                    su.noise = if val == "sel" {
                                        NoiseSrc::Selection
                                    } else if let Some(rv) = val.strip_prefix("rv:") {
                                        NoiseSrc::Rv(parse_u(rv, "noise rv")? as u32)
                                    } else if let Some(k) = val.strip_prefix("ix:") {
                                        NoiseSrc::RvIndirect(parse_u(k, "noise slot")? as u8)
                                    } else {
                                        return Err(syntax(
                                            lineno,
                                            format!("bad noise source {val}"),
                                        ));
                                    };
                                }
                                "new" | "go" => {
                                    let mask = u128::from_str_radix(val, 16).map_err(|e| {
                                        syntax(lineno, format!("bad mask {val}: {e}"))
                                    })?;
                                    let target = if key == "new" {
                                        &mut su.new_dist
                                    } else {
                                        &mut su.consume
                                    };
                                    for (e, slot) in target.iter_mut().enumerate() {
                                        *slot = (mask >> e) & 1 != 0;
                                    }
                                }
                                k => return Err(syntax(lineno, format!("bad su key {k}"))),
                            }
                        }
                    }
                }
                instr.su = su;
            }
            "st" => {
                for item in body.split(',') {
                    let (se, spec) = item
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, format!("bad store {item}")))?;
                    let e = parse_u(se, "se")? as usize;
                    if e >= dims.ses {
                        return Err(syntax(lineno, format!("se {e} out of range")));
                    }
                    let lane = if let Some(slot) = spec.strip_prefix("ix:") {
                        StoreLane {
                            enable: true,
                            to_index_buffer: true,
                            slot: parse_u(slot, "slot")? as u8,
                            ..Default::default()
                        }
                    } else if let Some(rest) = spec.strip_prefix("s@") {
                        let (slot, hist) = match rest.strip_suffix("/h") {
                            Some(s) => (s, true),
                            None => (rest, false),
                        };
                        StoreLane {
                            enable: true,
                            indirect: true,
                            slot: parse_u(slot, "slot")? as u8,
                            write_hist: hist,
                            ..Default::default()
                        }
                    } else if let Some(rest) = spec.strip_prefix("s:") {
                        let (addr, hist) = match rest.split_once("/h:") {
                            Some((a, h)) => (a, Some(parse_u(h, "hist base")? as u32)),
                            None => (rest, None),
                        };
                        StoreLane {
                            enable: true,
                            sample_addr: parse_u(addr, "sample addr")? as u32,
                            write_hist: hist.is_some(),
                            hist_base: hist.unwrap_or(0),
                            ..Default::default()
                        }
                    } else {
                        return Err(syntax(lineno, format!("bad store spec {spec}")));
                    };
                    instr.stores[e] = lane;
                }
            }
            "loop" => {
                let (count, body_len) = body
                    .split_once(',')
                    .ok_or_else(|| syntax(lineno, "loop needs count,body"))?;
                instr.hwloop = LoopCfg {
                    begin: true,
                    count: parse_u(count, "loop count")? as u32,
                    body_len: parse_u(body_len, "loop body")? as u16,
                };
            }
            g => return Err(syntax(lineno, format!("unknown group {g}"))),
        }
    }
    Ok(instr)
}

pub fn disassemble_program(p: &Program) -> String {
    let dims = p.dims();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "hw {} {} {} {} {} {} {} {}",
        p.hw.pe_count,
        p.hw.tree_depth,
        p.hw.se_count,
        p.hw.banks,
        p.hw.clock_hz,
        p.hw.word_bytes,
        p.hw.rf_depth,
        p.hw.bank_words
    );
    let _ = writeln!(out, "frac {}", p.frac_bits);
    let _ = writeln!(out, "hist-stride {}", p.hist_stride);
    let _ = writeln!(out, "rvs {}", p.rv_count);
    let _ = writeln!(out, "loop {} {}", p.loop_start, p.loop_body_len);
    for (i, d) in p.descriptors.iter().enumerate() {
        match &d.mode {
            AddrMode::SampleOffset { terms } => {
                let t: Vec<String> = terms
                    .iter()
                    .map(|&(slot, stride)| format!("{slot}:{stride}"))
                    .collect();
                let _ = writeln!(out, "desc {i} sample {}", t.join(" "));
            }
            AddrMode::IndexOffset { k, stride } => {
                let _ = writeln!(out, "desc {i} ixoff {k} {stride}");
            }
            AddrMode::IndexTableSample { k, stride } => {
                let _ = writeln!(out, "desc {i} ixtab {k} {stride}");
            }
        }
    }
    for (i, s) in p.symbols.iter().enumerate() {
        let _ = writeln!(
            out,
            "sym {i} {} {} {} {}",
            s.name, s.cardinality, s.sample_addr, s.hist_base
        );
    }
    for ph in &p.phases {
        let _ = writeln!(out, "phase {} {} {}", ph.label, ph.start, ph.len);
    }
    for &(bank, addr, word) in &p.data_image {
        let _ = writeln!(out, "data {bank} {addr} {word}");
    }
    let _ = writeln!(out, "text");
    for i in &p.instrs {
        let _ = writeln!(out, "  {}", disassemble_instr(i, &dims));
    }
    out
}

pub fn assemble_program(text: &str) -> Result<Program, AsmError> {
    let mut hw: Option<HwConfig> = None;
    let mut frac_bits = 16u32;
    let mut hist_stride = 1u32;
    let mut rv_count = 0u32;
    let mut loop_start = 0u32;
    let mut loop_body_len = 0u32;
    let mut descriptors = Vec::new();
    let mut symbols = Vec::new();
    let mut phases = Vec::new();
    let mut data_image = Vec::new();
    let mut instrs = Vec::new();
    let mut in_text = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if in_text {
            let dims = IsaDims::new(hw.as_ref().ok_or_else(|| {
                syntax(lineno, "hw line must precede text")
            })?);
            instrs.push(assemble_instr_at(line, &dims, lineno)?);
            continue;
        }
        let mut tok = line.split_whitespace();
        let key = tok.next().unwrap();
        fn take_u<'a>(
            tok: &mut impl Iterator<Item = &'a str>,
            lineno: usize,
            what: &str,
        ) -> Result<u64, AsmError> {
            tok.next()
                .ok_or_else(|| syntax(lineno, format!("missing {what}")))?
                .parse::<u64>()
                .map_err(|e| syntax(lineno, format!("bad {what}: {e}")))
        }
        macro_rules! next_u {
            ($what:expr) => {
                take_u(&mut tok, lineno, $what)
            };
        }
        match key {
            "hw" => {
                let pe_count = next_u!("pe count")? as u32;
                let tree_depth = next_u!("tree depth")? as u32;
                let se_count = next_u!("se count")? as u32;
                let banks = next_u!("banks")? as u32;
                let clock: f64 = tok
                    .next()
                    .ok_or_else(|| syntax(lineno, "missing clock"))?
                    .parse()
                    .map_err(|e| syntax(lineno, format!("bad clock: {e}")))?;
                let word_bytes = next_u!("word bytes")? as u32;
                let rf_depth = next_u!("rf depth")? as u32;
                let bank_words = next_u!("bank words")? as u32;
                hw = Some(HwConfig {
                    pe_count,
                    tree_depth,
                    se_count,
                    banks,
                    clock_hz: clock,
                    word_bytes,
                    rf_depth,
                    bank_words,
                });
            }
            "frac" => frac_bits = next_u!("frac bits")? as u32,
            "hist-stride" => hist_stride = next_u!("hist stride")? as u32,
            "rvs" => rv_count = next_u!("rv count")? as u32,
            "loop" => {
                loop_start = next_u!("loop start")? as u32;
                loop_body_len = next_u!("loop body")? as u32;
            }
            "desc" => {
                let idx = next_u!("descriptor index")? as usize;
                if idx != descriptors.len() {
                    return Err(syntax(lineno, "descriptors must be in order"));
                }
                let kind = tok
                    .next()
                    .ok_or_else(|| syntax(lineno, "missing descriptor kind"))?;
                let mode = match kind {
                    "sample" => {
                        let mut terms = Vec::new();
                        for t in tok.by_ref() {
                            let (slot, stride) = t
                                .split_once(':')
                                .ok_or_else(|| syntax(lineno, format!("bad term {t}")))?;
                            terms.push((
                                slot.parse().map_err(|e| {
                                    syntax(lineno, format!("bad slot: {e}"))
                                })?,
                                stride.parse().map_err(|e| {
                                    syntax(lineno, format!("bad stride: {e}"))
                                })?,
                            ));
                        }
                        AddrMode::SampleOffset { terms }
                    }
                    "ixoff" => AddrMode::IndexOffset {
                        k: next_u!("slot")? as u8,
                        stride: next_u!("stride")? as u32,
                    },
                    "ixtab" => AddrMode::IndexTableSample {
                        k: next_u!("slot")? as u8,
                        stride: next_u!("stride")? as u32,
                    },
                    k => return Err(syntax(lineno, format!("bad descriptor kind {k}"))),
                };
                descriptors.push(AddrDescriptor { mode });
            }
            "sym" => {
                let idx = next_u!("symbol index")? as usize;
                if idx != symbols.len() {
                    return Err(syntax(lineno, "symbols must be in order"));
                }
                let name = tok
                    .next()
                    .ok_or_else(|| syntax(lineno, "missing name"))?
                    .to_string();
                symbols.push(RvSymbol {
                    name,
                    cardinality: next_u!("cardinality")? as u16,
                    sample_addr: next_u!("sample addr")? as u32,
                    hist_base: next_u!("hist base")? as u32,
                });
            }
            "phase" => {
                let label = tok
                    .next()
                    .ok_or_else(|| syntax(lineno, "missing label"))?
                    .to_string();
                phases.push(Phase {
                    label,
                    start: next_u!("start")? as u32,
                    len: next_u!("len")? as u32,
                });
            }
            "data" => {
                let bank = next_u!("bank")? as u16;
                let addr = next_u!("addr")? as u32;
                let word: i32 = tok
                    .next()
                    .ok_or_else(|| syntax(lineno, "missing word"))?
                    .parse()
                    .map_err(|e| syntax(lineno, format!("bad word: {e}")))?;
                data_image.push((bank, addr, word));
            }
            "text" => in_text = true,
            k => return Err(syntax(lineno, format!("unknown header key {k}"))),
        }
    }

    let hw = hw.ok_or_else(|| AsmError::Structure("missing hw line".into()))?;
    Ok(Program {
        hw,
        frac_bits,
        hist_stride,
        rv_count,
        loop_start,
        loop_body_len,
        instrs,
        descriptors,
        symbols,
        phases,
        data_image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nop_disassembles_to_nop() {
        let dims = IsaDims::new(&HwConfig::new(4, 1, 4, 12));
        let nop = Instruction::nop(&dims);
        assert_eq!(disassemble_instr(&nop, &dims), "nop");
        assert_eq!(assemble_instr("nop", &dims).unwrap(), nop);
    }

    #[test]
    fn instruction_roundtrip() {
        let dims = IsaDims::new(&HwConfig::new(4, 1, 4, 12));
        let mut i = Instruction::empty(InstrKind::ComputeSampleStore, &dims);
        i.loads[0] = LoadLane {
            enable: true,
            src_sample: false,
            transform_spin: false,
            indirect: true,
            addr: 18,
            dest: 3,
            descriptor: 2,
        };
        i.loads[5] = LoadLane {
            enable: true,
            src_sample: true,
            transform_spin: true,
            indirect: false,
            addr: 7,
            dest: 1,
            descriptor: 0,
        };
        i.rf_read[2] = 9;
        i.lane_src[0] = LaneSrc::Bank(0);
        i.lane_src[1] = LaneSrc::One;
        i.pes[0] = PeCfg {
            mode: PeMode::DotProduct,
            partial_dot: false,
            use_beta: true,
            accumulate: true,
            writeback: Some((3, 12)),
        };
        i.pes[2] = PeCfg {
            mode: PeMode::Partial,
            partial_dot: true,
            use_beta: false,
            accumulate: false,
            writeback: None,
        };
        i.su.spatial = false;
        i.su.dist_size = 2;
        i.su.noise = NoiseSrc::Rv(1);
        i.su.new_dist[0] = true;
        i.su.consume[0] = true;
        i.stores[0] = StoreLane {
            enable: true,
            indirect: false,
            slot: 0,
            sample_addr: 1,
            hist_base: 2,
            write_hist: true,
            to_index_buffer: false,
        };
        i.stores[3] = StoreLane {
            enable: true,
            to_index_buffer: true,
            slot: 7,
            ..Default::default()
        };
        i.hwloop = LoopCfg {
            begin: true,
            count: 1000,
            body_len: 12,
        };
        let text = disassemble_instr(&i, &dims);
        let back = assemble_instr(&text, &dims).unwrap();
        assert_eq!(back, i, "text was: {text}");
    }
}
