//! Quadratic reference implementations by direct summation.

use std::time::Instant;

use crate::domain::{Alignment, Bandwidth, DeltaVector, EvalResult, Sample};
use crate::error::{Error, Result};
use crate::kernels::{determinant, eval_unchecked, inverse_sqrt_spd, KernelFamily, KernelSpec};

fn check_queries(sample: &Sample, queries: &[Vec<f64>]) -> Result<()> {
    if let Some(q) = queries.iter().find(|q| q.len() != sample.dim()) {
        return Err(Error::Shape {
            expected: sample.dim(),
            got: q.len(),
        });
    }
    Ok(())
}

/// Weighted dominance sum `(1/N) sum_i y_i 1{x_i <=_delta z}` at every query.
///
/// With `exclude_self` the queries must be the sample points in input
/// order and term `i = j` is skipped.
pub fn ecdf_naive(
    sample: &Sample,
    queries: &[Vec<f64>],
    delta: &DeltaVector,
    exclude_self: bool,
) -> Result<EvalResult> {
    check_queries(sample, queries)?;
    if delta.dim() != sample.dim() {
        return Err(Error::Shape {
            expected: sample.dim(),
            got: delta.dim(),
        });
    }
    if exclude_self && queries.len() != sample.len() {
        return Err(Error::Shape {
            expected: sample.len(),
            got: queries.len(),
        });
    }
    let start = Instant::now();
    let cmps: Vec<Cmp> = (0..sample.dim())
        .map(|k| if delta.is_plus(k) { Cmp::Le } else { Cmp::Lt })
        .collect();
    let values = dominance_sums(sample, queries, exclude_self, &cmps);
    Ok(EvalResult::new(values, Alignment::Queries, "naive", start.elapsed().as_secs_f64()))
}

/// Empirical survival function `(1/N) sum_i y_i 1{x_i > z}` (strict in every
/// coordinate) at every query.
pub fn esf_naive(sample: &Sample, queries: &[Vec<f64>]) -> Result<EvalResult> {
    check_queries(sample, queries)?;
    let start = Instant::now();
    let values = dominance_sums(sample, queries, false, &vec![Cmp::Gt; sample.dim()]);
    Ok(EvalResult::new(values, Alignment::Queries, "naive", start.elapsed().as_secs_f64()))
}

#[derive(Clone, Copy)]
enum Cmp {
    Le,
    Lt,
    Gt,
}

fn mask_pass(mask: &mut [u8], column: &[f64], z: f64, cmp: Cmp) {
    let it = mask.iter_mut().zip(column);
    match cmp {
        Cmp::Le => it.for_each(|(m, &x)| *m &= u8::from(x <= z)),
        Cmp::Lt => it.for_each(|(m, &x)| *m &= u8::from(x < z)),
        Cmp::Gt => it.for_each(|(m, &x)| *m &= u8::from(x > z)),
    }
}

fn dominance_sums(sample: &Sample, queries: &[Vec<f64>], exclude_self: bool, cmps: &[Cmp]) -> Vec<f64> {
    let n = sample.len();
    let y = sample.weights();
    let mut mask = vec![0u8; n];
    queries
        .iter()
        .enumerate()
        .map(|(j, z)| {
            mask.fill(1);
            for (k, &zk) in z.iter().enumerate() {
                mask_pass(&mut mask, sample.column(k), zk, cmps[k]);
            }
            if exclude_self {
                mask[j] = 0;
            }
            let total: f64 = mask
                .iter()
                .zip(y)
                .map(|(&m, &w)| if m != 0 { w } else { 0.0 })
                .sum();
            total / n as f64
        })
        .collect()
}

/// Kernel density estimate by direct summation with Kahan compensation.
///
/// Diagonal bandwidth: `(1/(N prod h)) sum_i w_i K((x_i - z)/h)`. Matrix
/// bandwidth: `(1/(N |H|^{1/2})) sum_i w_i K(H^{-1/2}(x_i - z))` with the
/// symmetric inverse square root.
pub fn kde_naive(
    sample: &Sample,
    queries: &[Vec<f64>],
    kernel: &KernelSpec,
    bandwidth: &Bandwidth,
) -> Result<EvalResult> {
    check_queries(sample, queries)?;
    let d = sample.dim();
    if bandwidth.dim() != d {
        return Err(Error::Shape {
            expected: d,
            got: bandwidth.dim(),
        });
    }
    let start = Instant::now();
    let n = sample.len();
    let rows = sample.rows();
    let w = sample.weights();
    let values = match bandwidth {
        Bandwidth::Diagonal(h) => {
            let norm = n as f64 * h.iter().product::<f64>();
            let inv_h: Vec<f64> = h.iter().map(|v| 1.0 / v).collect();
            let laplacian = matches!(kernel.family, KernelFamily::Laplacian) && kernel.h == 1.0;
            let peak = 0.5f64.powi(d as i32);
            let mut u = vec![0.0; d];
            queries
                .iter()
                .map(|z| {
                    let mut acc = Kahan::default();
                    for (x, &wi) in rows.iter().zip(w) {
                        let k = if laplacian {
                            let s: f64 = (0..d).map(|k| ((x[k] - z[k]) * inv_h[k]).abs()).sum();
                            peak * (-s).exp()
                        } else {
                            for k in 0..d {
                                u[k] = (x[k] - z[k]) / h[k];
                            }
                            eval_unchecked(kernel, &u)
                        };
                        acc.add(wi * k);
                    }
                    acc.sum() / norm
                })
                .collect()
        }
        Bandwidth::Matrix { entries, .. } => {
            let det = determinant(entries, d);
            if !(det > 0.0) {
                return Err(Error::Linalg(format!(
                    "bandwidth matrix determinant {det} is not positive"
                )));
            }
            let s = inverse_sqrt_spd(entries, d)?;
            let norm = n as f64 * det.sqrt();
            let mut diff = vec![0.0; d];
            let mut u = vec![0.0; d];
            queries
                .iter()
                .map(|z| {
                    let mut acc = Kahan::default();
                    for (x, &wi) in rows.iter().zip(w) {
                        for k in 0..d {
                            diff[k] = x[k] - z[k];
                        }
                        for r in 0..d {
                            u[r] = (0..d).map(|c| s[r * d + c] * diff[c]).sum();
                        }
                        acc.add(wi * eval_unchecked(kernel, &u));
                    }
                    acc.sum() / norm
                })
                .collect()
        }
    };
    Ok(EvalResult::new(values, Alignment::Queries, "naive", start.elapsed().as_secs_f64()))
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn three() -> Sample {
        Sample::unweighted(&[vec![0.2, 0.7], vec![0.5, 0.1], vec![0.9, 0.9]]).unwrap()
    }

    #[test]
    fn ecdf_examples() {
        let s = three();
        let q = vec![vec![0.5, 0.8]];
        let plus = ecdf_naive(&s, &q, &DeltaVector::all_plus(2), false).unwrap();
        assert_eq!(plus.values, vec![2.0 / 3.0]);
        let minus = ecdf_naive(&s, &q, &DeltaVector::all_minus(2), false).unwrap();
        assert_eq!(minus.values, vec![1.0 / 3.0]);
        let empty = ecdf_naive(&s, &[vec![-10.0, -10.0]], &DeltaVector::all_plus(2), false).unwrap();
        assert_eq!(empty.values, vec![0.0]);
        let full = ecdf_naive(&s, &[vec![f64::INFINITY; 2]], &DeltaVector::all_plus(2), false).unwrap();
        assert_eq!(full.values, vec![1.0]);
    }

    #[test]
    fn ecdf_excluding_self() {
        let s = three();
        let pts = s.rows();
        let v = ecdf_naive(&s, &pts, &DeltaVector::all_plus(2), true).unwrap();
        assert_eq!(v.values, vec![0.0, 0.0, 2.0 / 3.0]);
        assert!(ecdf_naive(&s, &pts[..2], &DeltaVector::all_plus(2), true).is_err());
    }

    #[test]
    fn ecdf_dimension_mismatch() {
        assert!(ecdf_naive(&three(), &[vec![0.0]], &DeltaVector::all_plus(2), false).is_err());
        assert!(ecdf_naive(&three(), &[vec![0.0, 0.0]], &DeltaVector::all_plus(3), false).is_err());
    }

    #[test]
    fn esf_matches_reflected_strict_ecdf() {
        for seed in 0..50u64 {
            let s = crate::generate_gaussian_sample(60, 3, seed).unwrap();
            let q = crate::generate_gaussian_sample(15, 3, seed + 1000).unwrap().rows();
            let direct = esf_naive(&s, &q).unwrap();
            let negq: Vec<Vec<f64>> = q.iter().map(|z| z.iter().map(|v| -v).collect()).collect();
            let refl = ecdf_naive(&s.negated(), &negq, &DeltaVector::all_minus(3), false).unwrap();
            assert_eq!(direct.values, refl.values);
        }
        let s = three();
        assert_eq!(esf_naive(&s, &[vec![0.4, 0.4]]).unwrap().values, vec![1.0 / 3.0]);
    }

    #[test]
    fn kde_examples() {
        let one = Sample::unweighted(&[vec![0.0]]).unwrap();
        let h = Bandwidth::isotropic(1.0, 1).unwrap();
        let v = kde_naive(&one, &[vec![1.0]], &KernelSpec::laplacian(), &h).unwrap();
        assert_abs_diff_eq!(v.values[0], 0.5 * (-1.0f64).exp(), epsilon = 1e-16);
        assert_abs_diff_eq!(v.values[0], 0.183940, epsilon = 1e-6);
        let two = Sample::unweighted(&[vec![0.0], vec![1.0]]).unwrap();
        let v = kde_naive(&two, &[vec![0.0]], &KernelSpec::laplacian(), &h).unwrap();
        assert_abs_diff_eq!(v.values[0], 0.25 * (1.0 + (-1.0f64).exp()), epsilon = 1e-16);
        let u = kde_naive(&one, &[vec![1.5], vec![0.5]], &KernelSpec::uniform(), &h).unwrap();
        assert_eq!(u.values, vec![0.0, 0.5]);
    }

    #[test]
    fn kde_laplacian_fast_path_matches_generic() {
        let s = crate::generate_gaussian_sample(200, 2, 4).unwrap();
        let q = crate::generate_gaussian_sample(20, 2, 5).unwrap().rows();
        let h = Bandwidth::diagonal(vec![0.3, 0.7]).unwrap();
        let fast = kde_naive(&s, &q, &KernelSpec::laplacian(), &h).unwrap();
        let generic = kde_naive(&s, &q, &KernelSpec::polyexp(1.0, vec![1.0]).unwrap(), &h).unwrap();
        for (a, b) in fast.values.iter().zip(&generic.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn kde_non_negative_for_non_negative_kernels() {
        let s = crate::generate_gaussian_sample(100, 2, 9).unwrap();
        let q = crate::generate_gaussian_sample(30, 2, 10).unwrap().rows();
        let h = Bandwidth::isotropic(0.4, 2).unwrap();
        for k in [
            KernelSpec::laplacian(),
            KernelSpec::uniform(),
            KernelSpec::beta(2.0).unwrap(),
            crate::matern_coefficients(2).unwrap(),
            KernelSpec::matern32_additive(),
        ] {
            let v = kde_naive(&s, &q, &k, &h).unwrap();
            assert!(v.values.iter().all(|&x| x >= 0.0), "{k}");
        }
    }

    #[test]
    fn matrix_bandwidth_reduces_to_diagonal() {
        let s = crate::generate_gaussian_sample(50, 2, 2).unwrap();
        let q = s.rows();
        let hm = Bandwidth::matrix(&[vec![0.25, 0.0], vec![0.0, 0.49]]).unwrap();
        let hd = Bandwidth::diagonal(vec![0.5, 0.7]).unwrap();
        let a = kde_naive(&s, &q, &KernelSpec::laplacian(), &hm).unwrap();
        let b = kde_naive(&s, &q, &KernelSpec::laplacian(), &hd).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = Kahan::default();
        k.add(1.0);
        for _ in 0..10 {
            k.add(1e-16);
        }
        assert_eq!(k.sum(), 1.0 + 1e-15);
    }
}
