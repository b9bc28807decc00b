//! Binary PPM (`P6`, maxval 255) to and from `[3, H, W]` tensors.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn ppm_err(offset: usize, reason: impl ToString) -> Error {
    Error::Ppm {
        offset,
        reason: reason.to_string(),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ppm_err(start, alloc::format!("expected {what}")));
        }
        core::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| ppm_err(start, alloc::format!("{what} out of range")))
    }
}

/// Decodes a binary PPM into a channel-major tensor with values 0..=255.
pub fn decode_ppm(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(ppm_err(0, "bad magic, expected P6"));
    }
    let mut h = Header { bytes, pos: 2 };
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(ppm_err(2, "expected whitespace after magic"));
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    h.skip_space();
    let maxval_at = h.pos;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(ppm_err(
            maxval_at,
            alloc::format!("maxval {maxval} unsupported, expected 255"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(ppm_err(3, "zero image dimension"));
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(ppm_err(h.pos, "expected a single whitespace before the raster")),
    }
    let plane = width
        .checked_mul(height)
        .filter(|p| p.checked_mul(3).is_some())
        .ok_or_else(|| ppm_err(3, "image dimensions overflow"))?;
    let raster = &bytes[h.pos..];
    if raster.len() < 3 * plane {
        return Err(ppm_err(
            bytes.len(),
            alloc::format!("truncated raster: {} of {} bytes", raster.len(), 3 * plane),
        ));
    }
    if raster.len() > 3 * plane {
        return Err(ppm_err(h.pos + 3 * plane, "trailing bytes after raster"));
    }
    let mut data = alloc::vec![0.0; 3 * plane];
    for (p, px) in raster.chunks_exact(3).enumerate() {
        for c in 0..3 {
            data[c * plane + p] = f64::from(px[c]);
        }
    }
    Tensor::new(&[3, height, width], data)
}

/// Encodes a `[3, H, W]` tensor whose values are integers in 0..=255.
pub fn encode_ppm(img: &Tensor) -> Result<Vec<u8>> {
    let (c, h, w) = img.dims3("encode_ppm")?;
    if c != 3 {
        return Err(Error::shape("encode_ppm", img.shape(), &[3, h, w]));
    }
    let plane = h * w;
    let header = alloc::format!("P6\n{w} {h}\n255\n");
    let mut out = Vec::with_capacity(header.len() + 3 * plane);
    out.extend_from_slice(header.as_bytes());
    let d = img.data();
    for p in 0..plane {
        for ch in 0..3 {
            let v = d[ch * plane + p];
            if !(0.0..=255.0).contains(&v) || libm::trunc(v) != v {
                return Err(Error::invalid(alloc::format!(
                    "pixel value {v} at channel {ch}, index {p} is not an integer in 0..=255"
                )));
            }
            out.push(v as u8);
        }
    }
    Ok(out)
}
