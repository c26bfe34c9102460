use crate::error::{Error, Result};

pub const SIDE: usize = 28;
pub const CROP: usize = 24;
pub const CROP_OFFSET: usize = 2;
pub const POOL: usize = 6;
pub const OUT_SIDE: usize = CROP / POOL;

/// 28×28 `u8` image → 16 features in [0, 1]: scale, center-crop to 24×24,
/// 6×6 average pooling, row-major flatten.
pub fn preprocess(pixels: &[u8]) -> Result<Vec<f64>> {
    if pixels.len() != SIDE * SIDE {
        return Err(Error::LengthMismatch {
            what: "image pixels",
            expected: SIDE * SIDE,
            got: pixels.len(),
        });
    }
    let mut out = vec![0.0; OUT_SIDE * OUT_SIDE];
    for (bi, cell) in out.iter_mut().enumerate() {
        let (br, bc) = (bi / OUT_SIDE, bi % OUT_SIDE);
        let mut sum = 0.0;
        for r in 0..POOL {
            let row = CROP_OFFSET + br * POOL + r;
            for c in 0..POOL {
                let col = CROP_OFFSET + bc * POOL + c;
                sum += pixels[row * SIDE + col] as f64 / 255.0;
            }
        }
        *cell = sum / (POOL * POOL) as f64;
    }
    Ok(out)
}
