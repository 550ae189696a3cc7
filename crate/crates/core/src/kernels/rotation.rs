use crate::domain::{Bandwidth, Sample};
use crate::error::{Error, Result};

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// `H = R diag(h^2) R^T` with orthogonal `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    pub d: usize,
    /// Row-major `d x d`; column `k` is the eigenvector for `h[k]^2`.
    pub r: Vec<f64>,
    pub h: Vec<f64>,
}

impl Rotation {
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.r[row * self.d + col]
    }

    /// `R^T` row-major, the map taking original to rotated coordinates.
    pub fn transpose(&self) -> Vec<f64> {
        transpose(&self.r, self.d)
    }

    /// `R^T x`
    pub fn rotate(&self, x: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|c| (0..self.d).map(|r| self.entry(r, c) * x[r]).sum())
            .collect()
    }

    /// Every sample point mapped by `R^T`.
    pub fn rotate_sample(&self, sample: &Sample) -> Result<Sample> {
        sample.transformed(&self.transpose())
    }

    pub fn diagonal_bandwidth(&self) -> Result<Bandwidth> {
        Bandwidth::diagonal(self.h.clone())
    }
}

/// Eigen-decomposition of a symmetric positive-definite bandwidth matrix.
///
/// Eigenvalues are sorted in decreasing order and each eigenvector has its
/// first nonzero entry positive. A diagonal bandwidth maps to the identity.
pub fn bandwidth_rotation(bandwidth: &Bandwidth) -> Result<Rotation> {
    let (d, entries) = match bandwidth {
        Bandwidth::Diagonal(h) => {
            let d = h.len();
            let mut r = vec![0.0; d * d];
            for k in 0..d {
                r[k * d + k] = 1.0;
            }
            return Ok(Rotation { d, r, h: h.clone() });
        }
        Bandwidth::Matrix { d, entries } => (*d, entries),
    };
    let (values, vectors) = jacobi_eigen(entries, d)?;
    if let Some(k) = values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Linalg(format!(
            "bandwidth matrix is not positive definite (eigenvalue {k} = {})",
            values[k]
        )));
    }
    Ok(Rotation {
        d,
        r: vectors,
        h: values.iter().map(|v| v.sqrt()).collect(),
    })
}

/// Cyclic Jacobi eigen-solver for a symmetric row-major matrix.
///
/// Returns eigenvalues in decreasing order and the row-major matrix whose
/// columns are the matching unit eigenvectors.
pub fn jacobi_eigen(a: &[f64], d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != d * d {
        return Err(Error::Shape {
            expected: d * d,
            got: a.len(),
        });
    }
    let mut m = a.to_vec();
    let mut v = vec![0.0; d * d];
    for k in 0..d {
        v[k * d + k] = 1.0;
    }
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|p| (0..d).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[p * d + q].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let mkp = m[k * d + p];
                    let mkq = m[k * d + q];
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p * d + k];
                    let mqk = m[q * d + k];
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Linalg(format!(
            "Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[j * d + j].total_cmp(&m[i * d + i]));
    let values = order.iter().map(|&i| m[i * d + i]).collect();
    let mut vectors = vec![0.0; d * d];
    for (col, &src) in order.iter().enumerate() {
        let flip = (0..d)
            .map(|r| v[r * d + src])
            .find(|x| *x != 0.0)
            .map_or(1.0, |x| x.signum());
        for r in 0..d {
            vectors[r * d + col] = flip * v[r * d + src];
        }
    }
    Ok((values, vectors))
}

pub(crate) fn transpose(a: &[f64], d: usize) -> Vec<f64> {
    let mut t = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            t[c * d + r] = a[r * d + c];
        }
    }
    t
}

#[cfg(test)]
pub(crate) fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for r in 0..d {
        for k in 0..d {
            let a_rk = a[r * d + k];
            for c in 0..d {
                out[r * d + c] += a_rk * b[k * d + c];
            }
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; d * d];
    for k in 0..d {
        inv[k * d + k] = 1.0;
    }
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| m[i * d + col].abs().total_cmp(&m[j * d + col].abs()))
            .expect("non-empty range");
        if m[pivot * d + col] == 0.0 {
            return Err(Error::Linalg("matrix is singular".into()));
        }
        if pivot != col {
            for c in 0..d {
                m.swap(pivot * d + c, col * d + c);
                inv.swap(pivot * d + c, col * d + c);
            }
        }
        let p = m[col * d + col];
        for c in 0..d {
            m[col * d + c] /= p;
            inv[col * d + c] /= p;
        }
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = m[r * d + col];
            if f != 0.0 {
                for c in 0..d {
                    m[r * d + c] -= f * m[col * d + c];
                    inv[r * d + c] -= f * inv[col * d + c];
                }
            }
        }
    }
    Ok(inv)
}

/// Determinant by LU elimination with partial pivoting.
pub fn determinant(a: &[f64], d: usize) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| m[i * d + col].abs().total_cmp(&m[j * d + col].abs()))
            .expect("non-empty range");
        if m[pivot * d + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..d {
                m.swap(pivot * d + c, col * d + c);
            }
            det = -det;
        }
        let p = m[col * d + col];
        det *= p;
        for r in col + 1..d {
            let f = m[r * d + col] / p;
            for c in col..d {
                m[r * d + c] -= f * m[col * d + c];
            }
        }
    }
    det
}

/// Symmetric inverse square root of an SPD matrix by Denman-Beavers iteration.
pub fn inverse_sqrt_spd(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut y = a.to_vec();
    let mut z = vec![0.0; d * d];
    for k in 0..d {
        z[k * d + k] = 1.0;
    }
    for _ in 0..100 {
        let yi = inverse(&y, d)?;
        let zi = inverse(&z, d)?;
        let y_next: Vec<f64> = y.iter().zip(&zi).map(|(a, b)| 0.5 * (a + b)).collect();
        let z_next: Vec<f64> = z.iter().zip(&yi).map(|(a, b)| 0.5 * (a + b)).collect();
        let change = z_next
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let size = z_next.iter().map(|v| v.abs()).fold(0.0, f64::max);
        y = y_next;
        z = z_next;
        if change <= 1e-15 * size {
            let zs = transpose(&z, d);
            return Ok(z.iter().zip(&zs).map(|(a, b)| 0.5 * (a + b)).collect());
        }
    }
    Err(Error::Linalg("inverse square root did not converge".into()))
}
