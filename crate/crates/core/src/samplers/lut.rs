//! Fixed-point lookup table mapping uniform bits to Gumbel noise.
//!
//! Entry `k` holds `-ln(-ln((k + 0.5) / size))` quantized to
//! `precision_bits` two's-complement fixed point with [`LUT_INTEGER_BITS`]
//! integer bits. The midpoint rule keeps per-bin bias symmetric, and four
//! integer bits cover the Gumbel mass for every supported table size.

use std::fmt::Write as _;

use super::SampleError;

pub const DEFAULT_LUT_SIZE: usize = 16;
pub const DEFAULT_PRECISION_BITS: u32 = 8;
pub const LUT_INTEGER_BITS: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GumbelLut {
    size: usize,
    precision_bits: u32,
    entries: Vec<i32>,
}

impl GumbelLut {
    /// Build a table of `size` entries (power of two, >= 2) at
    /// `precision_bits` total bits (>= integer bits, <= 16).
    pub fn build(size: usize, precision_bits: u32) -> Result<Self, SampleError> {
        if !size.is_power_of_two() || size < 2 {
            return Err(SampleError::BadLutConfig(format!(
                "lut size {size} must be a power of two >= 2"
            )));
        }
        if precision_bits < LUT_INTEGER_BITS || precision_bits > 16 {
            return Err(SampleError::BadLutConfig(format!(
                "precision {precision_bits} outside {LUT_INTEGER_BITS}..=16"
            )));
        }
        let frac_bits = precision_bits - LUT_INTEGER_BITS;
        let lo = -(1i64 << (precision_bits - 1));
        let hi = (1i64 << (precision_bits - 1)) - 1;
        let entries = (0..size)
            .map(|k| {
                let u = (k as f64 + 0.5) / size as f64;
                let g = -(-u.ln()).ln();
                let q = (g * (1i64 << frac_bits) as f64).round() as i64;
                q.clamp(lo, hi) as i32
            })
            .collect();
        Ok(Self {
            size,
            precision_bits,
            entries,
        })
    }

    pub fn with_defaults() -> Self {
        Self::build(DEFAULT_LUT_SIZE, DEFAULT_PRECISION_BITS).expect("defaults are valid")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.precision_bits - LUT_INTEGER_BITS
    }

    pub fn index_bits(&self) -> u32 {
        self.size.trailing_zeros()
    }

    #[inline]
    pub fn entry(&self, index: usize) -> i32 {
        self.entries[index]
    }

    pub fn entries(&self) -> &[i32] {
        &self.entries
    }

    /// Noise value as a real number (descaled fixed point).
    pub fn entry_value(&self, index: usize) -> f64 {
        self.entries[index] as f64 / (1i64 << self.frac_bits()) as f64
    }

    /// Plain-text dump: header line plus `index raw value` rows.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "gumbel-lut size {} precision {}",
            self.size, self.precision_bits
        );
        for (k, &q) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{k} {q} {}", self.entry_value(k));
        }
        out
    }

    /// Parse the [`dump`](Self::dump) format; raw entries are authoritative.
    pub fn parse(text: &str) -> Result<Self, SampleError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SampleError::BadLutConfig("empty lut file".into()))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() < 5 || tok[0] != "gumbel-lut" {
            return Err(SampleError::BadLutConfig("bad lut header".into()));
        }
        let size: usize = tok[2]
            .parse()
            .map_err(|e| SampleError::BadLutConfig(format!("bad size: {e}")))?;
        let precision: u32 = tok[4]
            .parse()
            .map_err(|e| SampleError::BadLutConfig(format!("bad precision: {e}")))?;
        let mut lut = Self::build(size, precision)?;
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() < 2 {
                return Err(SampleError::BadLutConfig(format!("bad lut row: {line}")));
            }
            let k: usize = cols[0]
                .parse()
                .map_err(|e| SampleError::BadLutConfig(format!("bad index: {e}")))?;
            let q: i32 = cols[1]
                .parse()
                .map_err(|e| SampleError::BadLutConfig(format!("bad entry: {e}")))?;
            if k >= lut.entries.len() {
                return Err(SampleError::BadLutConfig(format!("index {k} out of range")));
            }
            lut.entries[k] = q;
        }
        Ok(lut)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_shape() {
        let lut = GumbelLut::with_defaults();
        assert_eq!(lut.size(), 16);
        assert_eq!(lut.precision_bits(), 8);
        assert_eq!(lut.frac_bits(), 4);
        assert_eq!(lut.index_bits(), 4);
    }

    #[test]
    fn entries_are_monotone_in_index() {
        // -ln(-ln(u)) is increasing in u, and the index maps to ascending
        // uniform midpoints.
        let lut = GumbelLut::build(32, 10).unwrap();
        for w in lut.entries().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn default_range_fits_four_integer_bits() {
        let lut = GumbelLut::with_defaults();
        // size 16: extremes are about -1.24 and +3.45.
        assert!((lut.entry_value(0) + 1.2428).abs() < 0.05);
        assert!((lut.entry_value(15) - 3.4499).abs() < 0.05);
    }

    #[test]
    fn dump_parse_roundtrip() {
        let lut = GumbelLut::build(8, 6).unwrap();
        let text = lut.dump();
        assert_eq!(GumbelLut::parse(&text).unwrap(), lut);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(GumbelLut::build(12, 8).is_err());
        assert!(GumbelLut::build(16, 2).is_err());
    }
}
