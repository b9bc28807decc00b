//! Versioned binary container for named tensors (model parameters, mean
//! images).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      b"CVFP"
//! version    u32 = 1
//! name_len   u32, spec name (UTF-8)
//! seed       u64
//! count      u32
//! per entry: name_len u32, name (UTF-8), ndim u32, dims u64 x ndim,
//!            offset u64 (in f64 elements from the start of the payload)
//! payload    f64 little-endian, entries back to back in table order
//! ```

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"CVFP";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub spec_name: String,
    pub seed: u64,
    pub entries: Vec<(String, Tensor)>,
}

impl Container {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_str(&mut out, &self.spec_name);
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        let mut offset = 0u64;
        for (name, t) in &self.entries {
            put_str(&mut out, name);
            out.extend_from_slice(&(t.ndim() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            out.extend_from_slice(&offset.to_le_bytes());
            offset += t.numel() as u64;
        }
        for (_, t) in &self.entries {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(r.err(0, "bad magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(r.err(4, &alloc::format!("unsupported version {version}")));
        }
        let spec_name = r.string()?;
        let seed = r.u64()?;
        let count = r.u32()? as usize;
        let mut table = Vec::new();
        let mut expected_offset = 0u64;
        for _ in 0..count {
            let name = r.string()?;
            let ndim = r.u32()? as usize;
            if ndim == 0 || ndim > 8 {
                return Err(r.err(r.pos, &alloc::format!("entry {name:?} has {ndim} dimensions")));
            }
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                let d = r.u64()?;
                if d == 0 || d > u32::MAX as u64 {
                    return Err(r.err(r.pos - 8, &alloc::format!("entry {name:?} has dimension {d}")));
                }
                shape.push(d as usize);
            }
            let offset = r.u64()?;
            if offset != expected_offset {
                return Err(r.err(
                    r.pos - 8,
                    &alloc::format!("entry {name:?} offset {offset}, expected {expected_offset}"),
                ));
            }
            let numel: u64 = shape.iter().map(|&d| d as u64).product();
            expected_offset = expected_offset
                .checked_add(numel)
                .ok_or_else(|| r.err(r.pos, "payload size overflows"))?;
            table.push((name, shape));
        }
        let payload = expected_offset
            .checked_mul(8)
            .filter(|&n| n == (bytes.len() - r.pos) as u64)
            .ok_or_else(|| {
                r.err(
                    r.pos,
                    &alloc::format!(
                        "payload holds {} bytes, table needs {} values",
                        bytes.len() - r.pos,
                        expected_offset
                    ),
                )
            })?;
        debug_assert_eq!(payload as usize, bytes.len() - r.pos);
        let mut entries = Vec::with_capacity(table.len());
        for (name, shape) in table {
            let numel: usize = shape.iter().product();
            let mut data = Vec::with_capacity(numel);
            for _ in 0..numel {
                data.push(f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes")));
            }
            entries.push((name, Tensor::new(&shape, data)?));
        }
        Ok(Self {
            spec_name,
            seed,
            entries,
        })
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, offset: usize, reason: &str) -> Error {
        Error::Container {
            offset,
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| self.err(self.pos, "truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let at = self.pos;
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        core::str::from_utf8(raw)
            .map(String::from)
            .map_err(|_| self.err(at, "name is not UTF-8"))
    }
}
