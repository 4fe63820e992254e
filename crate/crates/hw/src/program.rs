//! Compiled program container: instructions, address-generation
//! descriptors, layout symbols, phase markers and the data-memory image,
//! with a versioned binary file format.

use std::io::{Read, Write};

use thiserror::Error;

use crate::isa::{self, Instruction, IsaDims};
use crate::roofline::HwConfig;

pub const MAGIC: &[u8; 4] = b"MACC";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error(transparent)]
    Isa(#[from] isa::IsaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad program file: {0}")]
    Format(String),
}

/// Dynamic address computation for indirect loads.
///
/// The effective address starts from the lane's base field and adds the
/// descriptor terms. `IndexTableSample` first reads the lane's own data
/// bank at the computed offset and then loads sample memory at the word
/// read (pointer-chased neighbor lists).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AddrMode {
    /// `base + sum(sample[slot] * stride)`, up to two terms (table rows
    /// keyed by parent values).
    SampleOffset { terms: Vec<(u32, u32)> },
    /// `base + index_buffer[k] * stride` (rows keyed by a selected index).
    IndexOffset { k: u8, stride: u32 },
    /// `sample[ data[lane_bank][base + index_buffer[k] * stride] ]`.
    IndexTableSample { k: u8, stride: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddrDescriptor {
    pub mode: AddrMode,
}

/// Per-variable memory layout.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RvSymbol {
    pub name: String,
    pub cardinality: u16,
    pub sample_addr: u32,
    pub hist_base: u32,
}

/// Labeled instruction range, used for per-phase cycle accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub label: String,
    pub start: u32,
    pub len: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub hw: HwConfig,
    /// Fractional bits of the fixed-point datapath format.
    pub frac_bits: u32,
    /// Histogram stride: counters per variable.
    pub hist_stride: u32,
    pub rv_count: u32,
    /// Loop body [start, start + body_len) iterated by the hardware loop.
    pub loop_start: u32,
    pub loop_body_len: u32,
    pub instrs: Vec<Instruction>,
    pub descriptors: Vec<AddrDescriptor>,
    pub symbols: Vec<RvSymbol>,
    pub phases: Vec<Phase>,
    /// Initial data-memory image: (bank, addr, raw word).
    pub data_image: Vec<(u16, u32, i32)>,
}

impl Program {
    pub fn dims(&self) -> IsaDims {
        IsaDims::new(&self.hw)
    }

    pub fn phase(&self, label: &str) -> Option<&Phase> {
        self.phases.iter().find(|p| p.label == label)
    }

    /// Instructions inside the loop body.
    pub fn body(&self) -> &[Instruction] {
        let s = self.loop_start as usize;
        let e = s + self.loop_body_len as usize;
        &self.instrs[s..e]
    }

    pub fn write_to(&self, out: &mut impl Write) -> Result<(), ProgramError> {
        let dims = self.dims();
        out.write_all(MAGIC)?;
        w16(out, VERSION)?;
        w32(out, self.hw.pe_count)?;
        w32(out, self.hw.tree_depth)?;
        w32(out, self.hw.se_count)?;
        w32(out, self.hw.banks)?;
        w64(out, self.hw.clock_hz.to_bits())?;
        w32(out, self.hw.word_bytes)?;
        w32(out, self.hw.rf_depth)?;
        w32(out, self.hw.bank_words)?;
        w32(out, self.frac_bits)?;
        w32(out, self.hist_stride)?;
        w32(out, self.rv_count)?;
        w32(out, self.loop_start)?;
        w32(out, self.loop_body_len)?;

        w16(out, self.descriptors.len() as u16)?;
        for d in &self.descriptors {
            match &d.mode {
                AddrMode::SampleOffset { terms } => {
                    out.write_all(&[0u8, terms.len() as u8])?;
                    for &(slot, stride) in terms {
                        w32(out, slot)?;
                        w32(out, stride)?;
                    }
                }
                AddrMode::IndexOffset { k, stride } => {
                    out.write_all(&[1u8, *k])?;
                    w32(out, *stride)?;
                }
                AddrMode::IndexTableSample { k, stride } => {
                    out.write_all(&[2u8, *k])?;
                    w32(out, *stride)?;
                }
            }
        }

        w32(out, self.symbols.len() as u32)?;
        for s in &self.symbols {
            wstr(out, &s.name)?;
            w16(out, s.cardinality)?;
            w32(out, s.sample_addr)?;
            w32(out, s.hist_base)?;
        }

        w32(out, self.phases.len() as u32)?;
        for p in &self.phases {
            wstr(out, &p.label)?;
            w32(out, p.start)?;
            w32(out, p.len)?;
        }

        w32(out, self.data_image.len() as u32)?;
        for &(bank, addr, word) in &self.data_image {
            w16(out, bank)?;
            w32(out, addr)?;
            w32(out, word as u32)?;
        }

        w32(out, self.instrs.len() as u32)?;
        for i in &self.instrs {
            let word = isa::encode(i, &dims)?;
            out.write_all(&word)?;
        }
        Ok(())
    }

    pub fn read_from(inp: &mut impl Read) -> Result<Self, ProgramError> {
        let mut magic = [0u8; 4];
        inp.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ProgramError::Format("bad magic".into()));
        }
        let version = r16(inp)?;
        if version != VERSION {
            return Err(ProgramError::Format(format!(
                "unsupported version {version}"
            )));
        }
        let hw = HwConfig {
            pe_count: r32(inp)?,
            tree_depth: r32(inp)?,
            se_count: r32(inp)?,
            banks: r32(inp)?,
            clock_hz: f64::from_bits(r64(inp)?),
            word_bytes: r32(inp)?,
            rf_depth: r32(inp)?,
            bank_words: r32(inp)?,
        };
        let frac_bits = r32(inp)?;
        let hist_stride = r32(inp)?;
        let rv_count = r32(inp)?;
        let loop_start = r32(inp)?;
        let loop_body_len = r32(inp)?;

        let ndesc = r16(inp)?;
        let mut descriptors = Vec::with_capacity(ndesc as usize);
        for _ in 0..ndesc {
            let mut tag = [0u8; 2];
            inp.read_exact(&mut tag)?;
            let mode = match tag[0] {
                0 => {
                    let mut terms = Vec::with_capacity(tag[1] as usize);
                    for _ in 0..tag[1] {
                        terms.push((r32(inp)?, r32(inp)?));
                    }
                    AddrMode::SampleOffset { terms }
                }
                1 => AddrMode::IndexOffset {
                    k: tag[1],
                    stride: r32(inp)?,
                },
                2 => AddrMode::IndexTableSample {
                    k: tag[1],
                    stride: r32(inp)?,
                },
                t => return Err(ProgramError::Format(format!("descriptor tag {t}"))),
            };
            descriptors.push(AddrDescriptor { mode });
        }

        let nsym = r32(inp)?;
        let mut symbols = Vec::with_capacity(nsym as usize);
        for _ in 0..nsym {
            symbols.push(RvSymbol {
                name: rstr(inp)?,
                cardinality: r16(inp)?,
                sample_addr: r32(inp)?,
                hist_base: r32(inp)?,
            });
        }

        let nph = r32(inp)?;
        let mut phases = Vec::with_capacity(nph as usize);
        for _ in 0..nph {
            phases.push(Phase {
                label: rstr(inp)?,
                start: r32(inp)?,
                len: r32(inp)?,
            });
        }

        let nimg = r32(inp)?;
        let mut data_image = Vec::with_capacity(nimg as usize);
        for _ in 0..nimg {
            data_image.push((r16(inp)?, r32(inp)?, r32(inp)? as i32));
        }

        let dims = IsaDims::new(&hw);
        let nin = r32(inp)?;
        let mut instrs = Vec::with_capacity(nin as usize);
        let mut word = vec![0u8; dims.word_bytes()];
        for _ in 0..nin {
            inp.read_exact(&mut word)?;
            instrs.push(isa::decode(&word, &dims)?);
        }
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
}

fn w16(out: &mut impl Write, v: u16) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}
fn w32(out: &mut impl Write, v: u32) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}
fn w64(out: &mut impl Write, v: u64) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}
fn wstr(out: &mut impl Write, s: &str) -> std::io::Result<()> {
    w16(out, s.len() as u16)?;
    out.write_all(s.as_bytes())
}
fn r16(inp: &mut impl Read) -> Result<u16, ProgramError> {
    let mut b = [0u8; 2];
    inp.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}
fn r32(inp: &mut impl Read) -> Result<u32, ProgramError> {
    let mut b = [0u8; 4];
    inp.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
fn r64(inp: &mut impl Read) -> Result<u64, ProgramError> {
    let mut b = [0u8; 8];
    inp.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
fn rstr(inp: &mut impl Read) -> Result<String, ProgramError> {
    let len = r16(inp)? as usize;
    let mut buf = vec![0u8; len];
    inp.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| ProgramError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::InstrKind;

    #[test]
    fn binary_roundtrip() {
        let hw = HwConfig::new(4, 1, 4, 12);
        let dims = IsaDims::new(&hw);
        let mut instr = Instruction::empty(InstrKind::ComputeSample, &dims);
        instr.loads[2].enable = true;
        instr.loads[2].addr = 77;
        let program = Program {
            hw,
            frac_bits: 16,
            hist_stride: 2,
            rv_count: 3,
            loop_start: 0,
            loop_body_len: 2,
            instrs: vec![instr, Instruction::nop(&dims)],
            descriptors: vec![
                AddrDescriptor {
                    mode: AddrMode::SampleOffset {
                        terms: vec![(0, 2), (1, 1)],
                    },
                },
                AddrDescriptor {
                    mode: AddrMode::IndexTableSample { k: 3, stride: 8 },
                },
            ],
            symbols: vec![RvSymbol {
                name: "a".into(),
                cardinality: 2,
                sample_addr: 0,
                hist_base: 0,
            }],
            phases: vec![Phase {
                label: "rv0".into(),
                start: 0,
                len: 2,
            }],
            data_image: vec![(0, 5, -123), (3, 9, 456)],
        };
        let mut buf = Vec::new();
        program.write_to(&mut buf).unwrap();
        let back = Program::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(program, back);
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = b"NOPE0000".to_vec();
        assert!(Program::read_from(&mut buf.as_slice()).is_err());
    }
}
