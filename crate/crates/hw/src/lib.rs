//! Hardware side of the toolchain: the roofline analyzer, the VLIW ISA
//! with its compiler, and the cycle-accurate pipeline simulator.

pub mod asm;
pub mod isa;
pub mod program;
pub mod roofline;
