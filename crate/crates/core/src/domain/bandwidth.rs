use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Kernel bandwidth: one scale per dimension, or a full symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth {
    Diagonal(Vec<f64>),
    /// Row-major `d x d`, symmetric. Positive-definiteness is checked when
    /// the matrix is decomposed.
    Matrix { d: usize, entries: Vec<f64> },
}

impl Bandwidth {
    pub fn diagonal(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::Validation("bandwidth is empty".into()));
        }
        if let Some(k) = h.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::Validation(format!(
                "bandwidth entry {k} must be finite and positive, got {}",
                h[k]
            )));
        }
        Ok(Self::Diagonal(h))
    }

    pub fn isotropic(h: f64, d: usize) -> Result<Self> {
        Self::diagonal(vec![h; d])
    }

    pub fn matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::Validation("bandwidth matrix is empty".into()));
        }
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::Shape {
                    expected: d,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("bandwidth matrix has non-finite entries".into()));
        }
        for r in 0..d {
            for c in r + 1..d {
                let (a, b) = (entries[r * d + c], entries[c * d + r]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Validation(format!(
                        "bandwidth matrix is not symmetric at ({r}, {c})"
                    )));
                }
            }
        }
        Ok(Self::Matrix { d, entries })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Diagonal(h) => h.len(),
            Self::Matrix { d, .. } => *d,
        }
    }

    /// Diagonal scales, or a parameter error for the matrix form.
    pub fn as_diagonal(&self) -> Result<&[f64]> {
        match self {
            Self::Diagonal(h) => Ok(h),
            Self::Matrix { .. } => Err(Error::Parameter(
                "this method needs a diagonal bandwidth; rotate the data first".into(),
            )),
        }
    }
}
