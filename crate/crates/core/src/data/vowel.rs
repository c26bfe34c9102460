use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Feature columns per row of the vowel-context table.
pub const RAW_FEATURES: usize = 10;
/// Leading metadata columns (train/test flag, speaker, sex).
const META_COLUMNS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct VowelRow {
    pub features: Vec<f64>,
    pub class: usize,
}

/// Parses the comma or whitespace separated vowel-context table: three
/// metadata columns, ten features, class index. Blank lines and lines
/// starting with `#` or `@` are skipped.
pub fn parse_table(text: &str) -> Result<Vec<VowelRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('@') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != META_COLUMNS + RAW_FEATURES + 1 {
            return Err(Error::Table(format!(
                "line {}: expected {} columns, found {}",
                lineno + 1,
                META_COLUMNS + RAW_FEATURES + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Table(format!("line {}: `{s}`: {e}", lineno + 1)))
        };
        let features = fields[META_COLUMNS..META_COLUMNS + RAW_FEATURES]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<_>>>()?;
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Table(format!("line {}: non-finite feature", lineno + 1)));
        }
        let class = fields[fields.len() - 1]
            .parse::<usize>()
            .map_err(|e| Error::Table(format!("line {}: class: {e}", lineno + 1)))?;
        rows.push(VowelRow { features, class });
    }
    Ok(rows)
}

/// Standardization followed by projection onto the leading principal
/// components of the fitted rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// All eigenvalues of the standardized covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors in eigenvalue order, one per row.
    pub components: Vec<Vec<f64>>,
    pub kept: usize,
}

const RANK_TOL: f64 = 1e-10;

impl Pca {
    /// Fits on `rows` (sample covariance, N − 1 denominator). Each component's
    /// largest-magnitude loading is made positive.
    pub fn fit(rows: &[Vec<f64>], kept: usize) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                available: n,
            });
        }
        let d = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::LengthMismatch {
                what: "feature row",
                expected: d,
                got: bad.len(),
            });
        }
        if kept > d {
            return Err(Error::RankDeficient {
                nonzero: d,
                needed: kept,
            });
        }
        let denom = (n - 1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut scale = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                scale[j] += (r[j] - mean[j]).powi(2);
            }
        }
        for s in &mut scale {
            *s = (*s / denom).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        let z = DMatrix::from_fn(n, d, |i, j| (rows[i][j] - mean[j]) / scale[j]);
        let cov = (z.transpose() * &z) / denom;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let top = eigenvalues[0].max(0.0);
        let nonzero = eigenvalues.iter().filter(|&&l| l > RANK_TOL * top.max(1.0)).count();
        if nonzero < kept {
            return Err(Error::RankDeficient {
                nonzero,
                needed: kept,
            });
        }
        let components = order
            .iter()
            .map(|&i| {
                let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
                let lead = v
                    .iter()
                    .copied()
                    .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
                if lead < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();
        Ok(Pca {
            mean,
            scale,
            eigenvalues,
            components,
            kept,
        })
    }

    pub fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Coordinates on the first `kept` components.
    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.project(row, self.kept)
    }

    pub fn project(&self, row: &[f64], components: usize) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::LengthMismatch {
                what: "feature row",
                expected: self.mean.len(),
                got: row.len(),
            });
        }
        let z = self.standardize(row);
        Ok(self.components[..components.min(self.components.len())]
            .iter()
            .map(|c| c.iter().zip(&z).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Inverse of a full-length projection, in standardized coordinates.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.mean.len()];
        for (c, a) in self.components.iter().zip(coords) {
            for (zi, ci) in z.iter_mut().zip(c) {
                *zi += a * ci;
            }
        }
        z
    }

    pub fn explained_variance_ratio(&self) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        self.eigenvalues[..self.kept].iter().sum::<f64>() / total
    }
}
