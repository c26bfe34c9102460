//! Binary cache for processed datasets.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic         8 bytes  "QNNDATA1"
//! num_features  u32
//! num_classes   u32
//! train_count   u32
//! val_count     u32
//! records       (train_count + val_count) × { label: u32, features: num_features × f64 }
//! ```
//!
//! Training records come first.

use super::{Dataset, Sample};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"QNNDATA1";

pub fn write_cache(dataset: &Dataset) -> Result<Vec<u8>> {
    let f = dataset.num_features();
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    for v in [f, dataset.num_classes, dataset.train.len(), dataset.val.len()] {
        let v = u32::try_from(v).map_err(|_| Error::Config("dataset too large to cache".into()))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    for s in dataset.train.iter().chain(&dataset.val) {
        if s.features.len() != f {
            return Err(Error::LengthMismatch {
                what: "sample features",
                expected: f,
                got: s.features.len(),
            });
        }
        out.extend_from_slice(&(s.label as u32).to_le_bytes());
        for x in &s.features {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_cache(bytes: &[u8]) -> Result<Dataset> {
    let bad = |msg: &str| Error::Config(format!("dataset cache: {msg}"));
    if bytes.len() < 24 || &bytes[..8] != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    let (f, classes, nt, nv) = (word(0), word(1), word(2), word(3));
    let record = 4 + 8 * f;
    if bytes.len() != 24 + record * (nt + nv) {
        return Err(bad("length does not match header"));
    }
    let samples: Vec<Sample> = bytes[24..]
        .chunks_exact(record)
        .map(|r| Sample {
            label: u32::from_le_bytes(r[..4].try_into().unwrap()) as usize,
            features: r[4..]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        })
        .collect();
    let mut train = samples;
    let val = train.split_off(nt);
    Ok(Dataset {
        train,
        val,
        num_classes: classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let d = Dataset {
            train: vec![Sample {
                features: vec![0.25, -1.5],
                label: 1,
            }],
            val: vec![
                Sample {
                    features: vec![f64::MIN_POSITIVE, 3.0],
                    label: 0,
                },
                Sample {
                    features: vec![0.0, 1e300],
                    label: 2,
                },
            ],
            num_classes: 3,
        };
        let bytes = write_cache(&d).unwrap();
        assert_eq!(bytes.len(), 24 + 3 * 20);
        assert_eq!(read_cache(&bytes).unwrap(), d);
        assert!(read_cache(&bytes[..bytes.len() - 1]).is_err());
    }
}
