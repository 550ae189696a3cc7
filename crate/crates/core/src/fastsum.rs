//! Grid evaluation by histogramming followed by directional cumulative sums.
//!
//! The ECDF at every grid point is an orthant sum of the local-sum tensor,
//! obtained with one cumulative pass per axis. Kernel density estimates are
//! signed, exponentially reweighted combinations of such sums.

use std::time::Instant;

use rayon::prelude::*;

use crate::domain::{Alignment, Bandwidth, DeltaVector, EvalResult, RectilinearGrid, Sample};
use crate::error::{Error, Result};
use crate::histogram::{
    bins_by_division, bins_by_sorting, index_matrix, local_sums, scatter, strides, IndexMatrix,
    LocalSumTensor,
};
use crate::kernels::{KernelFamily, KernelSpec};

/// Largest admitted `span_k / h_k` for exponential kernels.
pub const EXPONENT_SPAN_LIMIT: f64 = 600.0;

/// Tensor of directional cumulative sums, same layout as [`LocalSumTensor`].
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl CumulativeTensor {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let flat: usize = index.iter().zip(strides(&self.dims)).map(|(i, s)| i * s).sum();
        self.data[flat]
    }
}

/// Inclusive prefix sums along axes with `+1` and inclusive suffix sums along
/// axes with `-1`.
pub fn directional_sweep(tensor: &LocalSumTensor, delta: &DeltaVector) -> CumulativeTensor {
    let dims = tensor.dims().to_vec();
    let mut data = tensor.data().to_vec();
    let plus: Vec<bool> = (0..dims.len()).map(|k| delta.is_plus(k)).collect();
    sweep_in_place(&mut data, &dims, &plus);
    CumulativeTensor { dims, data }
}

pub(crate) fn sweep_in_place(data: &mut [f64], dims: &[usize], plus: &[bool]) {
    let st = strides(dims);
    for k in 0..dims.len() {
        let n = dims[k];
        let inner = st[k];
        let block = n * inner;
        for chunk in data.chunks_exact_mut(block) {
            if plus[k] {
                for j in 1..n {
                    let (done, rest) = chunk.split_at_mut(j * inner);
                    let prev = &done[(j - 1) * inner..];
                    for (c, p) in rest[..inner].iter_mut().zip(prev) {
                        *c += p;
                    }
                }
            } else {
                for j in (0..n - 1).rev() {
                    let (head, next) = chunk.split_at_mut((j + 1) * inner);
                    let cur = &mut head[j * inner..];
                    for (c, p) in cur.iter_mut().zip(&next[..inner]) {
                        *c += p;
                    }
                }
            }
        }
    }
}

/// Values at the grid points of a tensor with `tensor_dims`, grid index 0
/// sitting at `shift`, moved to the front of the tensor's own buffer in
/// lexicographic order.
fn compact(mut data: Vec<f64>, shape: &[usize], tensor_dims: &[usize], shift: &[usize]) -> Vec<f64> {
    let d = shape.len();
    let st = strides(tensor_dims);
    let inner = shape[d - 1];
    let mut idx = vec![0usize; d];
    let mut out = 0;
    loop {
        let o: usize = (0..d).map(|k| (idx[k] + shift[k]) * st[k]).sum();
        data.copy_within(o..o + inner, out);
        out += inner;
        let mut k = d - 1;
        loop {
            if k == 0 {
                data.truncate(out);
                return data;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Outer product of per-axis factors, lexicographic order.
fn outer_product(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![1.0];
    for f in factors {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for &a in &acc {
            next.extend(f.iter().map(|b| a * b));
        }
        acc = next;
    }
    acc
}

/// Outer sum of per-axis terms plus `base`, lexicographic order.
fn outer_sum(base: f64, terms: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![base];
    for t in terms {
        let mut next = Vec::with_capacity(acc.len() * t.len());
        for &a in &acc {
            next.extend(t.iter().map(|b| a + b));
        }
        acc = next;
    }
    acc
}

fn check_grid(sample: &Sample, grid: &RectilinearGrid) -> Result<()> {
    if grid.dim() != sample.dim() {
        return Err(Error::Shape {
            expected: sample.dim(),
            got: grid.dim(),
        });
    }
    Ok(())
}

/// Unscaled sums `sum_i y_i 1{x_i <=_delta z}` at every grid point.
///
/// Integer weights give exact integers.
pub fn ecdf_fastsum_unscaled(
    sample: &Sample,
    grid: &RectilinearGrid,
    delta: &DeltaVector,
) -> Result<Vec<f64>> {
    check_grid(sample, grid)?;
    let mut t = local_sums(sample, grid, delta)?;
    let dims = t.dims().to_vec();
    sweep_in_place(t.data_mut(), &dims, &vec![true; dims.len()]);
    Ok(compact(t.into_data(), &grid.shape(), &dims, &vec![0; dims.len()]))
}

/// Generalized ECDF `(1/N) sum_i y_i 1{x_i <=_delta z}` at every grid point.
pub fn ecdf_fastsum(
    sample: &Sample,
    grid: &RectilinearGrid,
    delta: &DeltaVector,
) -> Result<EvalResult> {
    let start = Instant::now();
    let n = sample.len() as f64;
    let values = ecdf_fastsum_unscaled(sample, grid, delta)?
        .into_iter()
        .map(|v| v / n)
        .collect();
    Ok(EvalResult::new(
        values,
        Alignment::Grid,
        "fastsum",
        start.elapsed().as_secs_f64(),
    ))
}

/// Empirical survival function `(1/N) sum_i y_i 1{x_i > z}` (strict in every
/// coordinate) at every grid point, through the reflection `x -> -x`.
pub fn esf_fastsum(sample: &Sample, grid: &RectilinearGrid) -> Result<EvalResult> {
    let start = Instant::now();
    let mut r = ecdf_fastsum(
        &sample.negated(),
        &grid.negated(),
        &DeltaVector::all_minus(sample.dim()),
    )?;
    r.values.reverse();
    r.meta.seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Kernel density estimate at every grid point.
///
/// Supported kernels: Laplacian (`2^d` exponentially weighted CDFs), uniform
/// (`2^d` signed CDFs at shifted grids) and additive Matérn-3/2
/// (`2^d (d+1)` CDFs). The kernel shape multiplies the bandwidth.
pub fn kde_fastsum(
    sample: &Sample,
    grid: &RectilinearGrid,
    kernel: &KernelSpec,
    bandwidth: &Bandwidth,
) -> Result<EvalResult> {
    check_grid(sample, grid)?;
    let h = effective_bandwidth(sample, kernel, bandwidth)?;
    let start = Instant::now();
    let values = match kernel.family {
        KernelFamily::Laplacian => exponential_kde(sample, grid, &h, false)?,
        KernelFamily::Matern32Additive => exponential_kde(sample, grid, &h, true)?,
        KernelFamily::Uniform => uniform_kde(sample, grid, &h)?,
        _ => {
            return Err(Error::Parameter(format!(
                "fast-sum KDE supports laplacian, uniform and matern32-additive kernels, got {kernel}"
            )))
        }
    };
    Ok(EvalResult::new(
        values,
        Alignment::Grid,
        "fastsum",
        start.elapsed().as_secs_f64(),
    ))
}

pub(crate) fn effective_bandwidth(
    sample: &Sample,
    kernel: &KernelSpec,
    bandwidth: &Bandwidth,
) -> Result<Vec<f64>> {
    let h = bandwidth.as_diagonal()?;
    if h.len() != sample.dim() {
        return Err(Error::Shape {
            expected: sample.dim(),
            got: h.len(),
        });
    }
    Ok(h.iter().map(|v| v * kernel.h).collect())
}

/// Per-dimension midrange `c_k` of data and grid, after checking the
/// exponent range.
///
/// With centred coordinates every exponent is bounded by
/// `sum_k span_k / (2 h_k)`; both that sum and each `span_k / h_k` must stay
/// within [`EXPONENT_SPAN_LIMIT`].
pub(crate) fn centre_and_guard(
    sample: &Sample,
    extra: Option<&RectilinearGrid>,
    h: &[f64],
) -> Result<Vec<f64>> {
    let d = sample.dim();
    let mut centre = Vec::with_capacity(d);
    let mut ratios = Vec::with_capacity(d);
    for k in 0..d {
        let (mut lo, mut hi) = sample.min_max(k);
        if let Some(g) = extra {
            let z = g.knots(k);
            lo = lo.min(z[0]);
            hi = hi.max(z[z.len() - 1]);
        }
        let ratio = (hi - lo) / h[k];
        if !(ratio <= EXPONENT_SPAN_LIMIT) {
            return Err(Error::Range {
                dim: k,
                ratio,
                limit: EXPONENT_SPAN_LIMIT,
            });
        }
        ratios.push(ratio);
        centre.push(0.5 * (lo + hi));
    }
    let total: f64 = ratios.iter().map(|r| 0.5 * r).sum();
    if total > EXPONENT_SPAN_LIMIT {
        let worst = (0..d)
            .max_by(|&a, &b| ratios[a].total_cmp(&ratios[b]))
            .expect("d >= 1");
        return Err(Error::Range {
            dim: worst,
            ratio: total,
            limit: EXPONENT_SPAN_LIMIT,
        });
    }
    Ok(centre)
}

/// `w_i exp(sum_k delta_k (x_ki - c_k)/h_k)` for every point.
pub(crate) fn exponential_weights(
    sample: &Sample,
    delta: &DeltaVector,
    centre: &[f64],
    h: &[f64],
) -> Vec<f64> {
    let mut expo = vec![0.0; sample.len()];
    for k in 0..sample.dim() {
        let s = delta.sign(k) / h[k];
        for (e, &x) in expo.iter_mut().zip(sample.column(k)) {
            *e += s * (x - centre[k]);
        }
    }
    expo.iter()
        .zip(sample.weights())
        .map(|(e, w)| w * e.exp())
        .collect()
}

/// Laplacian (`with_linear = false`) or additive Matérn-3/2 KDE on the grid.
fn exponential_kde(
    sample: &Sample,
    grid: &RectilinearGrid,
    h: &[f64],
    with_linear: bool,
) -> Result<Vec<f64>> {
    let d = sample.dim();
    let n = sample.len();
    let centre = centre_and_guard(sample, Some(grid), h)?;
    let idx = index_matrix(sample, grid, &DeltaVector::all_plus(d))?;
    let cells = idx.cell_offsets();
    let tdims = idx.tensor_dims().to_vec();
    let shape = grid.shape();
    let centred_knots: Vec<Vec<f64>> = (0..d)
        .map(|k| grid.knots(k).iter().map(|z| z - centre[k]).collect())
        .collect();

    let terms: Vec<Vec<f64>> = DeltaVector::all(d)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|delta| {
            let plus: Vec<bool> = (0..d).map(|k| delta.is_plus(k)).collect();
            let shift: Vec<usize> = plus.iter().map(|&p| usize::from(!p)).collect();
            let y0 = exponential_weights(sample, &delta, &centre, h);
            let gather = |weights: &[f64]| -> Vec<f64> {
                let mut t = scatter(&tdims, &cells, weights);
                sweep_in_place(t.data_mut(), &tdims, &plus);
                compact(t.into_data(), &shape, &tdims, &shift)
            };
            let zfac = outer_product(
                &(0..d)
                    .map(|k| {
                        let s = -delta.sign(k) / h[k];
                        centred_knots[k].iter().map(|z| (s * z).exp()).collect()
                    })
                    .collect::<Vec<_>>(),
            );
            let mut g0 = gather(&y0);
            if !with_linear {
                g0.iter_mut().zip(&zfac).for_each(|(g, f)| *g *= f);
                return g0;
            }
            // (1 + sum_l delta_l z_l / h_l) F0 - sum_l (delta_l / h_l) F_l
            let lin = outer_sum(
                1.0,
                &(0..d)
                    .map(|k| {
                        let s = delta.sign(k) / h[k];
                        centred_knots[k].iter().map(|z| s * z).collect()
                    })
                    .collect::<Vec<_>>(),
            );
            let mut acc = g0;
            acc.iter_mut().zip(&lin).for_each(|(a, l)| *a *= l);
            for l in 0..d {
                let yl: Vec<f64> = y0
                    .iter()
                    .zip(sample.column(l))
                    .map(|(y, x)| y * (x - centre[l]))
                    .collect();
                let gl = gather(&yl);
                let s = delta.sign(l) / h[l];
                for (a, g) in acc.iter_mut().zip(&gl) {
                    *a -= s * g;
                }
            }
            acc.iter_mut().zip(&zfac).for_each(|(a, f)| *a *= f);
            acc
        })
        .collect();

    let hprod: f64 = h.iter().product();
    let mut norm = 2f64.powi(d as i32) * n as f64 * hprod;
    if with_linear {
        norm *= 1.0 + d as f64;
    }
    Ok(sum_terms(terms, grid.len(), norm))
}

fn sum_terms(terms: Vec<Vec<f64>>, m: usize, norm: f64) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for t in terms {
        for (o, v) in out.iter_mut().zip(t) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Uniform-kernel KDE: `sum_delta (prod delta) F_N(z + delta h, delta)`.
///
/// For each sign the counts are taken on the grid shifted by `delta_k h_k`,
/// binned against the shifted knots, so points at distance exactly `h` are
/// classified by direct comparison.
fn uniform_kde(sample: &Sample, grid: &RectilinearGrid, h: &[f64]) -> Result<Vec<f64>> {
    let d = sample.dim();
    let n = sample.len();
    let shape = grid.shape();
    // bins[k][0]: x <= z + h ; bins[k][1]: x < z - h
    let bins: Vec<[Vec<u32>; 2]> = (0..d)
        .map(|k| {
            let up: Vec<f64> = grid.knots(k).iter().map(|z| z + h[k]).collect();
            let down: Vec<f64> = grid.knots(k).iter().map(|z| z - h[k]).collect();
            let col = sample.column(k);
            match grid.mesh(k) {
                Some(m) => [
                    bins_by_division(col, &up, m, true),
                    bins_by_division(col, &down, m, false),
                ],
                None => [bins_by_sorting(col, &up, true), bins_by_sorting(col, &down, false)],
            }
        })
        .collect();
    let tdims: Vec<usize> = shape.iter().map(|m| m + 1).collect();
    let st = strides(&tdims);

    let terms: Vec<Vec<f64>> = DeltaVector::all(d)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|delta| {
            let mut cells = vec![0usize; n];
            for k in 0..d {
                let b = &bins[k][usize::from(!delta.is_plus(k))];
                for (c, &v) in cells.iter_mut().zip(b) {
                    *c += v as usize * st[k];
                }
            }
            let mut t = scatter(&tdims, &cells, sample.weights());
            sweep_in_place(t.data_mut(), &tdims, &vec![true; d]);
            let sign = delta.parity();
            let mut v = compact(t.into_data(), &shape, &tdims, &vec![0; d]);
            v.iter_mut().for_each(|x| *x *= sign);
            v
        })
        .collect();

    let norm = 2f64.powi(d as i32) * n as f64 * h.iter().product::<f64>();
    Ok(sum_terms(terms, grid.len(), norm))
}

/// Index matrix shared by the grid KDE paths, exposed for diagnostics.
pub fn kde_index_matrix(sample: &Sample, grid: &RectilinearGrid) -> Result<IndexMatrix> {
    index_matrix(sample, grid, &DeltaVector::all_plus(sample.dim()))
}
