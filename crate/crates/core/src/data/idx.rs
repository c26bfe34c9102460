//! The IDX container used by the MNIST family: a big-endian header followed
//! by raw `u8` payload.

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pixels: Vec<u8>,
}

impl IdxImages {
    pub fn len(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols).max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[i * size..(i + 1) * size]
    }
}

fn header(bytes: &[u8], words: usize) -> Result<Vec<u32>> {
    if bytes.len() < 4 * words {
        return Err(Error::Idx(format!(
            "file too short for header ({} bytes)",
            bytes.len()
        )));
    }
    Ok(bytes[..4 * words]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages> {
    let h = header(bytes, 4)?;
    if h[0] != IMAGE_MAGIC {
        return Err(Error::Idx(format!("bad image magic {:#010x}", h[0])));
    }
    let (count, rows, cols) = (h[1] as usize, h[2] as usize, h[3] as usize);
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::Idx("image dimensions overflow".into()))?;
    let body = &bytes[16..];
    if body.len() != expected {
        return Err(Error::Idx(format!(
            "image payload is {} bytes, header implies {expected}",
            body.len()
        )));
    }
    Ok(IdxImages {
        rows,
        cols,
        pixels: body.to_vec(),
    })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let h = header(bytes, 2)?;
    if h[0] != LABEL_MAGIC {
        return Err(Error::Idx(format!("bad label magic {:#010x}", h[0])));
    }
    let body = &bytes[8..];
    if body.len() != h[1] as usize {
        return Err(Error::Idx(format!(
            "label payload is {} bytes, header implies {}",
            body.len(),
            h[1]
        )));
    }
    Ok(body.to_vec())
}

#[cfg(test)]
pub(crate) fn encode_images(rows: u32, cols: u32, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::new();
    for w in [IMAGE_MAGIC, images.len() as u32, rows, cols] {
        out.extend_from_slice(&w.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

#[cfg(test)]
pub(crate) fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    for w in [LABEL_MAGIC, labels.len() as u32] {
        out.extend_from_slice(&w.to_be_bytes());
    }
    out.extend_from_slice(labels);
    out
}
