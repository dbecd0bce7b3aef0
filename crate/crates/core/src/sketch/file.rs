//! Binary container for b-bit sketches.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "BBMH" | version u8 | D u64 | k u32 | b u8 | seed u64 | n u64 | flags u8
//! n records of ceil(k*b/8) bytes, value j at bit offset j*b, LSB first
//! if flags & 1: n labels, one i8 each (+1 or -1)
//! ```
//!
//! An unlabeled file is exactly the header plus `n * ceil(k*b/8)` bytes.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::learner::Label;
use crate::sketch::minwise::{check_bits, BBitSketch};

pub const MAGIC: &[u8; 4] = b"BBMH";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 8 + 4 + 1 + 8 + 8 + 1;

const FLAG_LABELS: u8 = 1;

/// Everything needed to rebuild the hash family that produced the records.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchHeader {
    pub universe_size: u64,
    pub k: u32,
    pub bits: u8,
    pub seed: u64,
}

impl SketchHeader {
    pub fn validate(&self) -> Result<()> {
        check_bits(self.bits)?;
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.universe_size == 0 {
            return Err(Error::invalid("universe size must be at least 1"));
        }
        Ok(())
    }

    /// Bytes per packed record, `ceil(k * b / 8)`.
    pub fn record_len(&self) -> usize {
        (self.k as usize * self.bits as usize).div_ceil(8)
    }

    fn encode(&self, n: u64, labeled: bool, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.universe_size.to_le_bytes());
        out.extend_from_slice(&self.k.to_le_bytes());
        out.push(self.bits);
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&n.to_le_bytes());
        out.push(if labeled { FLAG_LABELS } else { 0 });
    }
}

/// Pack `values` (each `< 2^bits`) LSB-first into `out`.
pub fn pack_record(values: &[u16], bits: u8, out: &mut Vec<u8>) {
    let start = out.len();
    out.resize(start + (values.len() * bits as usize).div_ceil(8), 0);
    let rec = &mut out[start..];
    let mut pos = 0usize;
    for &v in values {
        let mut v = v as u32;
        let mut left = bits as usize;
        while left > 0 {
            let byte = pos / 8;
            let off = pos % 8;
            let take = left.min(8 - off);
            rec[byte] |= ((v & ((1 << take) - 1)) << off) as u8;
            v >>= take;
            pos += take;
            left -= take;
        }
    }
}

/// Inverse of [`pack_record`] for `k` values.
pub fn unpack_record(rec: &[u8], k: usize, bits: u8) -> Vec<u16> {
    let mut out = Vec::with_capacity(k);
    let mut pos = 0usize;
    for _ in 0..k {
        let mut v = 0u32;
        let mut got = 0usize;
        while got < bits as usize {
            let byte = pos / 8;
            let off = pos % 8;
            let take = (bits as usize - got).min(8 - off);
            let chunk = (rec[byte] as u32 >> off) & ((1 << take) - 1);
            v |= chunk << got;
            got += take;
            pos += take;
        }
        out.push(v as u16);
    }
    out
}

fn pack_labels(labels: &[Label], out: &mut Vec<u8>) {
    out.extend(labels.iter().map(|l| l.as_i8() as u8));
}

/// A fully decoded sketch file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchFile {
    pub header: SketchHeader,
    pub sketches: Vec<BBitSketch>,
    /// One per sketch when present.
    pub labels: Option<Vec<Label>>,
}

impl SketchFile {
    pub fn new(header: SketchHeader, sketches: Vec<BBitSketch>, labels: Option<Vec<Label>>) -> Result<Self> {
        header.validate()?;
        if labels.as_ref().is_some_and(|l| l.len() != sketches.len()) {
            return Err(Error::shape("one label per sketch required"));
        }
        for s in &sketches {
            if s.k() != header.k as usize || s.bits() != header.bits {
                return Err(Error::shape("sketch shape disagrees with header"));
            }
        }
        Ok(Self {
            header,
            sketches,
            labels,
        })
    }

    /// Exact encoded size for `n` records.
    pub fn encoded_len(header: &SketchHeader, n: usize, labeled: bool) -> Option<usize> {
        let labels = if labeled { n } else { 0 };
        n.checked_mul(header.record_len())?
            .checked_add(labels)?
            .checked_add(HEADER_LEN)
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.sketches.len();
        let len = Self::encoded_len(&self.header, n, self.labels.is_some()).expect("in-memory file fits");
        let mut out = Vec::with_capacity(len);
        self.header.encode(n as u64, self.labels.is_some(), &mut out);
        for s in &self.sketches {
            pack_record(s.values(), self.header.bits, &mut out);
        }
        if let Some(labels) = &self.labels {
            pack_labels(labels, &mut out);
        }
        out
    }

    /// Decode a complete file image. Every length is validated before use.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::format("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::format("bad magic; not a BBMH sketch file"));
        }
        if bytes[4] != VERSION {
            return Err(Error::format(format!("unsupported version {}", bytes[4])));
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let header = SketchHeader {
            universe_size: u64_at(5),
            k: u32::from_le_bytes(bytes[13..17].try_into().unwrap()),
            bits: bytes[17],
            seed: u64_at(18),
        };
        let n = u64_at(26);
        let flags = bytes[34];
        header.validate().map_err(|e| Error::format(e.to_string()))?;
        if flags & !FLAG_LABELS != 0 {
            return Err(Error::format(format!("unknown flags {flags:#04x}")));
        }
        let labeled = flags & FLAG_LABELS != 0;
        let expected = usize::try_from(n)
            .ok()
            .and_then(|n| Self::encoded_len(&header, n, labeled))
            .ok_or_else(|| Error::format("record count overflows"))?;
        if expected != bytes.len() {
            return Err(Error::format(format!(
                "expected {expected} bytes for {n} records, found {}",
                bytes.len()
            )));
        }
        let n = n as usize;
        let k = header.k as usize;
        let rec_len = header.record_len();
        let value_bound = if header.universe_size < (1u64 << header.bits) {
            header.universe_size
        } else {
            u64::MAX
        };
        let records = &bytes[HEADER_LEN..HEADER_LEN + n * rec_len];
        let mut sketches = Vec::with_capacity(n);
        for (i, rec) in records.chunks_exact(rec_len).enumerate() {
            let values = unpack_record(rec, k, header.bits);
            if values.iter().any(|&v| v as u64 >= value_bound) {
                return Err(Error::format(format!("record {i}: value outside the universe")));
            }
            // unused high bits of the last byte must be zero so encoding is canonical
            let used = k * header.bits as usize;
            if !used.is_multiple_of(8) && rec[rec_len - 1] >> (used % 8) != 0 {
                return Err(Error::format(format!("record {i}: nonzero padding bits")));
            }
            sketches.push(BBitSketch::from_values(values, header.bits)?);
        }
        let labels = if labeled {
            let raw = &bytes[HEADER_LEN + n * rec_len..];
            let labels = raw
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    Label::from_i8(b as i8).ok_or_else(|| Error::format(format!("record {i}: label byte {b:#04x}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(labels)
        } else {
            None
        };
        Ok(Self {
            header,
            sketches,
            labels,
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.encode())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::decode(&buf)
    }

    /// Record section size in bits, excluding header and labels.
    pub fn payload_bits(&self) -> u64 {
        self.sketches.len() as u64 * self.header.record_len() as u64 * 8
    }
}

/// Streams records to a writer; the record count is fixed up front.
pub struct SketchWriter<W: Write> {
    inner: W,
    header: SketchHeader,
    expected: u64,
    labels: Option<Vec<Label>>,
    written: u64,
    buf: Vec<u8>,
}

impl<W: Write> SketchWriter<W> {
    pub fn new(mut inner: W, header: SketchHeader, n: u64, labeled: bool) -> Result<Self> {
        header.validate()?;
        let mut buf = Vec::with_capacity(HEADER_LEN);
        header.encode(n, labeled, &mut buf);
        inner.write_all(&buf)?;
        Ok(Self {
            inner,
            header,
            expected: n,
            labels: labeled.then(Vec::new),
            written: 0,
            buf,
        })
    }

    /// `label` must be given exactly when the writer was created labeled.
    pub fn push(&mut self, sketch: &BBitSketch, label: Option<Label>) -> Result<()> {
        if self.written == self.expected {
            return Err(Error::shape("more records than declared"));
        }
        if sketch.k() != self.header.k as usize || sketch.bits() != self.header.bits {
            return Err(Error::shape("sketch shape disagrees with header"));
        }
        match (&mut self.labels, label) {
            (Some(ls), Some(l)) => ls.push(l),
            (None, None) => {}
            _ => return Err(Error::shape("label presence disagrees with header")),
        }
        self.buf.clear();
        pack_record(sketch.values(), self.header.bits, &mut self.buf);
        self.inner.write_all(&self.buf)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.written != self.expected {
            return Err(Error::shape(format!(
                "declared {} records, wrote {}",
                self.expected, self.written
            )));
        }
        if let Some(labels) = &self.labels {
            self.buf.clear();
            pack_labels(labels, &mut self.buf);
            self.inner.write_all(&self.buf)?;
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}
