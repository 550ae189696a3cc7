//! Divide-and-conquer dominance sums at the sample points.
//!
//! For a set of sign vectors `delta` and per-point weights `psi(x_i, delta)`
//! the engine computes, for every point `j`,
//!
//! ```text
//! F(x_j, delta) = sum_{i != j} psi(x_i, delta) 1{delta_k x_ki < delta_k x_kj for all k}
//! ```
//!
//! in `O(N log(N)^max(d-1, 1))` per channel. Coordinates are replaced by
//! their ranks, so each dimension must hold pairwise distinct values (or
//! ties must be broken explicitly).
//!
//! The recursion splits the point set in half along the last dimension,
//! solves both halves and then merges the cross pairs. A merge of two sets
//! `lo`, `hi` with `lo < hi` in the most recently resolved dimension `r`
//! splits `lo ∪ hi` at the median of dimension `r-1` and recurses on the four
//! resulting pairs. Only sign vectors whose orientation is consistent across
//! the resolved dimensions are carried into the cross pairs. Once a single
//! dimension is left, sorted sweeps finish the job.

use std::time::Instant;

use crate::domain::{Alignment, Bandwidth, DeltaVector, EvalResult, Sample};
use crate::error::{Error, Result};
use crate::fastsum::{centre_and_guard, effective_bandwidth, exponential_weights};
use crate::kernels::{KernelFamily, KernelSpec};

/// Largest dimension for which all `2^d` sign vectors fit one recursion.
pub const MAX_ALL_DELTA_DIM: usize = 7;

/// What to do with repeated coordinate values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Refuse samples with ties.
    #[default]
    Error,
    /// Order equal values by input index, as if perturbed infinitesimally.
    BreakByIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DncOptions {
    pub ties: TiePolicy,
}

/// Per-dimension orderings of the sample, `perm[k][r]` is the point of rank `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortPermutations {
    pub perm: Vec<Vec<u32>>,
    pub rank: Vec<Vec<u32>>,
}

impl SortPermutations {
    pub fn new(sample: &Sample, ties: TiePolicy) -> Result<Self> {
        let n = sample.len();
        let mut perm = Vec::with_capacity(sample.dim());
        let mut rank = Vec::with_capacity(sample.dim());
        for k in 0..sample.dim() {
            let col = sample.column(k);
            let mut p: Vec<u32> = (0..n as u32).collect();
            p.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            if ties == TiePolicy::Error && p.windows(2).any(|w| col[w[0] as usize] == col[w[1] as usize]) {
                return Err(Error::Ties { dim: k });
            }
            let mut r = vec![0u32; n];
            for (pos, &i) in p.iter().enumerate() {
                r[i as usize] = pos as u32;
            }
            perm.push(p);
            rank.push(r);
        }
        Ok(Self { perm, rank })
    }
}

type Range = (usize, usize);

struct Engine<'a> {
    d: usize,
    slots: usize,
    channels: usize,
    rank: Vec<Vec<u32>>,
    ord: Vec<Vec<u32>>,
    plus: Vec<u128>,
    psi: &'a [f64],
    out: Vec<f64>,
    scratch: Vec<u32>,
}

impl Engine<'_> {
    #[inline]
    fn row(&self, i: u32) -> usize {
        i as usize * self.slots * self.channels
    }

    fn recur_split(&mut self, start: usize, len: usize, mask: u128) {
        if len < 2 {
            return;
        }
        let k = self.d - 1;
        let half = len / 2;
        let threshold = self.rank[k][self.ord[k][start + half - 1] as usize];
        for dim in 0..k {
            self.partition(dim, start, len, k, threshold);
        }
        self.recur_split(start, half, mask);
        self.recur_split(start + half, len - half, mask);
        self.merge((start, half), (start + half, len - half), k, mask);
        for dim in 0..k {
            self.restore(dim, start, half, len);
        }
    }

    /// Cross contributions between `lo` and `hi`, where `lo < hi` in
    /// dimension `r` and dimensions `0..r` are unresolved. For `delta` in
    /// `mask`, `lo` is the source if `delta_r = +1`, otherwise `hi` is.
    fn merge(&mut self, lo: Range, hi: Range, r: usize, mask: u128) {
        if lo.1 == 0 || hi.1 == 0 || mask == 0 {
            return;
        }
        if cfg!(test) {
            self.check_separated(lo, hi, r);
        }
        match r {
            0 => self.merge_totals(lo, hi, mask),
            1 => {
                let (p0, p1) = (self.plus[0], self.plus[1]);
                self.merge1d_up(lo, hi, mask & p0 & p1);
                self.merge1d_down(lo, hi, mask & !p0 & p1);
                self.merge1d_up(hi, lo, mask & p0 & !p1);
                self.merge1d_down(hi, lo, mask & !p0 & !p1);
            }
            _ => {
                let k = r - 1;
                let (i, j) = self.median_split(lo, hi, k);
                let threshold_rank = self.split_rank(lo, hi, k, i, j);
                for dim in 0..k {
                    self.partition(dim, lo.0, lo.1, k, threshold_rank);
                    self.partition(dim, hi.0, hi.1, k, threshold_rank);
                }
                let lo1 = (lo.0, i);
                let lo2 = (lo.0 + i, lo.1 - i);
                let hi1 = (hi.0, j);
                let hi2 = (hi.0 + j, hi.1 - j);
                self.merge(lo1, hi1, r, mask);
                self.merge(lo2, hi2, r, mask);
                let same = !(self.plus[k] ^ self.plus[r]);
                self.merge(lo1, hi2, k, mask & same);
                self.merge(hi1, lo2, k, mask & !same);
                for dim in 0..k {
                    self.restore(dim, lo.0, i, lo.1);
                    self.restore(dim, hi.0, j, hi.1);
                }
            }
        }
    }

    /// Counts `(i, j)` of elements of `lo` and `hi` among the `floor(n/2)`
    /// smallest of `lo ∪ hi` in dimension `k`.
    fn median_split(&self, lo: Range, hi: Range, k: usize) -> (usize, usize) {
        let want = (lo.1 + hi.1) / 2;
        let list = &self.ord[k];
        let rank = &self.rank[k];
        let (mut i, mut j) = (0, 0);
        for _ in 0..want {
            let take_lo = j == hi.1
                || (i < lo.1 && rank[list[lo.0 + i] as usize] < rank[list[hi.0 + j] as usize]);
            if take_lo {
                i += 1;
            } else {
                j += 1;
            }
        }
        (i, j)
    }

    /// Largest rank in dimension `k` on the lower side of the split.
    fn split_rank(&self, lo: Range, hi: Range, k: usize, i: usize, j: usize) -> u32 {
        let list = &self.ord[k];
        let rank = &self.rank[k];
        let a = (i > 0).then(|| rank[list[lo.0 + i - 1] as usize]);
        let b = (j > 0).then(|| rank[list[hi.0 + j - 1] as usize]);
        a.max(b).expect("median split keeps at least one element")
    }

    /// Stable partition of `ord[dim][start..start+len]` into ranks
    /// `<= threshold` in dimension `key`, then the rest.
    fn partition(&mut self, dim: usize, start: usize, len: usize, key: usize, threshold: u32) {
        let rank = &self.rank[key];
        let list = &mut self.ord[dim][start..start + len];
        self.scratch.clear();
        let mut w = 0;
        for p in 0..len {
            let id = list[p];
            if rank[id as usize] <= threshold {
                list[w] = id;
                w += 1;
            } else {
                self.scratch.push(id);
            }
        }
        list[w..].copy_from_slice(&self.scratch);
    }

    /// Merges the sorted runs `[start, start+mid)` and `[start+mid, start+len)`
    /// of `ord[dim]` back into one run sorted by rank in `dim`.
    fn restore(&mut self, dim: usize, start: usize, mid: usize, len: usize) {
        if mid == 0 || mid == len {
            return;
        }
        let rank = &self.rank[dim];
        let list = &mut self.ord[dim][start..start + len];
        if rank[list[mid - 1] as usize] < rank[list[mid] as usize] {
            return;
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(&list[..mid]);
        let (mut a, mut b, mut w) = (0, mid, 0);
        while a < mid && b < len {
            if rank[self.scratch[a] as usize] < rank[list[b] as usize] {
                list[w] = self.scratch[a];
                a += 1;
            } else {
                list[w] = list[b];
                b += 1;
            }
            w += 1;
        }
        while a < mid {
            list[w] = self.scratch[a];
            a += 1;
            w += 1;
        }
    }

    fn slot_list(mask: u128) -> Vec<usize> {
        (0..128).filter(|s| mask >> s & 1 == 1).collect()
    }

    fn merge_totals(&mut self, lo: Range, hi: Range, mask: u128) {
        let c = self.channels;
        for s in Self::slot_list(mask) {
            let (src, tgt) = if self.plus[0] >> s & 1 == 1 { (lo, hi) } else { (hi, lo) };
            let mut total = vec![0.0; c];
            for p in src.0..src.0 + src.1 {
                let base = self.row(self.ord[0][p]) + s * c;
                for (t, v) in total.iter_mut().zip(&self.psi[base..base + c]) {
                    *t += v;
                }
            }
            for p in tgt.0..tgt.0 + tgt.1 {
                let base = self.row(self.ord[0][p]) + s * c;
                for (o, v) in self.out[base..base + c].iter_mut().zip(&total) {
                    *o += v;
                }
            }
        }
    }

    /// Sources with smaller first coordinate than the target.
    fn merge1d_up(&mut self, src: Range, tgt: Range, mask: u128) {
        if mask == 0 {
            return;
        }
        let slots = Self::slot_list(mask);
        let c = self.channels;
        let mut acc = vec![0.0; slots.len() * c];
        let mut j = 0;
        for p in tgt.0..tgt.0 + tgt.1 {
            let t_id = self.ord[0][p];
            let t_rank = self.rank[0][t_id as usize];
            while j < src.1 && self.rank[0][self.ord[0][src.0 + j] as usize] < t_rank {
                let s_row = self.row(self.ord[0][src.0 + j]);
                self.accumulate(&mut acc, &slots, s_row);
                j += 1;
            }
            self.emit(&acc, &slots, t_id);
            if j == src.1 {
                for q in p + 1..tgt.0 + tgt.1 {
                    self.emit(&acc, &slots, self.ord[0][q]);
                }
                break;
            }
        }
    }

    /// Sources with larger first coordinate than the target.
    fn merge1d_down(&mut self, src: Range, tgt: Range, mask: u128) {
        if mask == 0 {
            return;
        }
        let slots = Self::slot_list(mask);
        let c = self.channels;
        let mut acc = vec![0.0; slots.len() * c];
        let mut j = src.1;
        for p in (tgt.0..tgt.0 + tgt.1).rev() {
            let t_id = self.ord[0][p];
            let t_rank = self.rank[0][t_id as usize];
            while j > 0 && self.rank[0][self.ord[0][src.0 + j - 1] as usize] > t_rank {
                let s_row = self.row(self.ord[0][src.0 + j - 1]);
                self.accumulate(&mut acc, &slots, s_row);
                j -= 1;
            }
            self.emit(&acc, &slots, t_id);
            if j == 0 {
                for q in tgt.0..p {
                    self.emit(&acc, &slots, self.ord[0][q]);
                }
                break;
            }
        }
    }

    #[inline]
    fn accumulate(&self, acc: &mut [f64], slots: &[usize], s_row: usize) {
        let c = self.channels;
        for (a, &s) in acc.chunks_exact_mut(c).zip(slots) {
            let src = &self.psi[s_row + s * c..s_row + (s + 1) * c];
            for (x, v) in a.iter_mut().zip(src) {
                *x += v;
            }
        }
    }

    #[inline]
    fn emit(&mut self, acc: &[f64], slots: &[usize], t_id: u32) {
        let c = self.channels;
        let t_row = self.row(t_id);
        for (a, &s) in acc.chunks_exact(c).zip(slots) {
            let dst = &mut self.out[t_row + s * c..t_row + (s + 1) * c];
            for (o, v) in dst.iter_mut().zip(a) {
                *o += v;
            }
        }
    }

    fn check_separated(&self, lo: Range, hi: Range, r: usize) {
        let list = &self.ord[0];
        let rank = &self.rank[r];
        let lo_max = (lo.0..lo.0 + lo.1).map(|p| rank[list[p] as usize]).max();
        let hi_min = (hi.0..hi.0 + hi.1).map(|p| rank[list[p] as usize]).min();
        assert!(lo_max < hi_min, "merge sets not separated in dimension {r}");
    }
}

/// Runs the recursion for the sign vectors `deltas`.
///
/// `psi` is laid out `[point][delta][channel]` with `deltas.len()` sign
/// vectors and `channels` values each; the result has the same layout.
pub fn dominance_sums(
    sample: &Sample,
    deltas: &[DeltaVector],
    psi: &[f64],
    channels: usize,
    options: DncOptions,
) -> Result<Vec<f64>> {
    let d = sample.dim();
    let n = sample.len();
    if deltas.is_empty() || deltas.len() > 128 {
        return Err(Error::Parameter(format!(
            "between 1 and 128 sign vectors per recursion, got {}",
            deltas.len()
        )));
    }
    if let Some(bad) = deltas.iter().find(|dl| dl.dim() != d) {
        return Err(Error::Shape {
            expected: d,
            got: bad.dim(),
        });
    }
    let width = deltas.len() * channels;
    if psi.len() != n * width {
        return Err(Error::Shape {
            expected: n * width,
            got: psi.len(),
        });
    }
    let perms = SortPermutations::new(sample, options.ties)?;
    let plus = (0..d)
        .map(|k| {
            deltas
                .iter()
                .enumerate()
                .filter(|(_, dl)| dl.is_plus(k))
                .fold(0u128, |m, (s, _)| m | 1 << s)
        })
        .collect();
    let all: u128 = if deltas.len() == 128 { u128::MAX } else { (1u128 << deltas.len()) - 1 };
    let mut engine = Engine {
        d,
        slots: deltas.len(),
        channels,
        rank: perms.rank,
        ord: perms.perm,
        plus,
        psi,
        out: vec![0.0; psi.len()],
        scratch: Vec::with_capacity(n),
    };
    engine.recur_split(0, n, all);
    Ok(engine.out)
}

/// Empirical CDF at the sample points with strict inequalities,
/// `(1/N) sum_{i != j} y_i 1{x_i < x_j}`, plus `y_j / N` when `include_self`.
pub fn ecdf_dnc(sample: &Sample, include_self: bool) -> Result<EvalResult> {
    ecdf_dnc_with(sample, include_self, DncOptions::default())
}

pub fn ecdf_dnc_with(sample: &Sample, include_self: bool, options: DncOptions) -> Result<EvalResult> {
    let start = Instant::now();
    let delta = DeltaVector::all_plus(sample.dim());
    let mut sums = dominance_sums(sample, &[delta], sample.weights(), 1, options)?;
    if include_self {
        for (s, y) in sums.iter_mut().zip(sample.weights()) {
            *s += y;
        }
    }
    let n = sample.len() as f64;
    let values = sums.into_iter().map(|v| v / n).collect();
    Ok(EvalResult::new(values, Alignment::Sample, "dnc", start.elapsed().as_secs_f64()))
}

/// Polynomial factor `x_l^p x_m^q` of the weights (dimensions 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Monomial {
    pub l: usize,
    pub m: usize,
    pub p: u32,
    pub q: u32,
}

impl Monomial {
    pub fn constant() -> Self {
        Self::default()
    }

    fn eval(&self, sample: &Sample, i: usize) -> f64 {
        let a = if self.p == 0 { 1.0 } else { sample.coord(i, self.l).powi(self.p as i32) };
        let b = if self.q == 0 { 1.0 } else { sample.coord(i, self.m).powi(self.q as i32) };
        a * b
    }
}

/// `F(x_j, delta)` for every point and every sign vector, with
/// `psi(x_i, delta) = w_i x_l^p x_m^q exp(sum_k delta_k x_ki / h_k)`.
///
/// Exponentials are stored relative to the centre `c` (the per-dimension
/// midrange); the uncentred values carry the extra factor
/// `exp(sum_k delta_k c_k / h_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTermTable {
    n: usize,
    d: usize,
    centre: Vec<f64>,
    h: Vec<f64>,
    psi: Vec<f64>,
    values: Vec<f64>,
}

impl DeltaTermTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of sign vectors, `2^d`.
    pub fn columns(&self) -> usize {
        1 << self.d
    }

    pub fn centre(&self) -> &[f64] {
        &self.centre
    }

    fn scale(&self, delta: &DeltaVector) -> f64 {
        (0..self.d)
            .map(|k| delta.sign(k) * self.centre[k] / self.h[k])
            .sum::<f64>()
            .exp()
    }

    pub fn value(&self, j: usize, delta: &DeltaVector) -> f64 {
        self.centred_value(j, delta) * self.scale(delta)
    }

    pub fn psi(&self, i: usize, delta: &DeltaVector) -> f64 {
        self.centred_psi(i, delta) * self.scale(delta)
    }

    pub fn centred_value(&self, j: usize, delta: &DeltaVector) -> f64 {
        self.values[j * self.columns() + delta.index()]
    }

    pub fn centred_psi(&self, i: usize, delta: &DeltaVector) -> f64 {
        self.psi[i * self.columns() + delta.index()]
    }
}

fn check_all_delta_dim(d: usize) -> Result<()> {
    if d > MAX_ALL_DELTA_DIM {
        return Err(Error::Parameter(format!(
            "all-sign recursion supports d <= {MAX_ALL_DELTA_DIM}, got {d}"
        )));
    }
    Ok(())
}

/// Weighted strict-dominance sums for all `2^d` sign vectors in one recursion.
pub fn kde_terms_dnc(sample: &Sample, bandwidth: &Bandwidth, monomial: Monomial) -> Result<DeltaTermTable> {
    kde_terms_dnc_with(sample, bandwidth, monomial, DncOptions::default())
}

pub fn kde_terms_dnc_with(
    sample: &Sample,
    bandwidth: &Bandwidth,
    monomial: Monomial,
    options: DncOptions,
) -> Result<DeltaTermTable> {
    let d = sample.dim();
    check_all_delta_dim(d)?;
    if monomial.l >= d || monomial.m >= d {
        return Err(Error::Parameter(format!(
            "monomial dimensions ({}, {}) out of range for d = {d}",
            monomial.l, monomial.m
        )));
    }
    let h = effective_bandwidth(sample, &KernelSpec::laplacian(), bandwidth)?;
    let centre = centre_and_guard(sample, None, &h)?;
    let deltas: Vec<DeltaVector> = DeltaVector::all(d).collect();
    let poly: Vec<f64> = (0..sample.len()).map(|i| monomial.eval(sample, i)).collect();
    let cols: Vec<Vec<f64>> = deltas
        .iter()
        .map(|dl| exponential_weights(sample, dl, &centre, &h))
        .collect();
    let width = deltas.len();
    let mut psi = vec![0.0; sample.len() * width];
    for (s, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            psi[i * width + s] = v * poly[i];
        }
    }
    let values = dominance_sums(sample, &deltas, &psi, 1, options)?;
    Ok(DeltaTermTable {
        n: sample.len(),
        d,
        centre,
        h,
        psi,
        values,
    })
}

/// Kernel density estimate at the sample points.
///
/// Laplacian and additive Matérn-3/2 kernels; the self term `i = j` is
/// added separately since the recursion excludes it.
pub fn kde_dnc(sample: &Sample, kernel: &KernelSpec, bandwidth: &Bandwidth) -> Result<EvalResult> {
    kde_dnc_with(sample, kernel, bandwidth, DncOptions::default())
}

pub fn kde_dnc_with(
    sample: &Sample,
    kernel: &KernelSpec,
    bandwidth: &Bandwidth,
    options: DncOptions,
) -> Result<EvalResult> {
    let with_linear = match kernel.family {
        KernelFamily::Laplacian => false,
        KernelFamily::Matern32Additive => true,
        _ => {
            return Err(Error::Parameter(format!(
                "divide-and-conquer KDE supports laplacian and matern32-additive kernels, got {kernel}"
            )))
        }
    };
    let d = sample.dim();
    let n = sample.len();
    check_all_delta_dim(d)?;
    let h = effective_bandwidth(sample, kernel, bandwidth)?;
    let start = Instant::now();
    let centre = centre_and_guard(sample, None, &h)?;
    let deltas: Vec<DeltaVector> = DeltaVector::all(d).collect();
    let channels = if with_linear { d + 1 } else { 1 };
    let width = deltas.len() * channels;
    let mut psi = vec![0.0; n * width];
    for (s, dl) in deltas.iter().enumerate() {
        let y0 = exponential_weights(sample, dl, &centre, &h);
        for (i, &y) in y0.iter().enumerate() {
            let base = i * width + s * channels;
            psi[base] = y;
            for l in 0..channels - 1 {
                psi[base + 1 + l] = y * (sample.coord(i, l) - centre[l]);
            }
        }
    }
    let sums = dominance_sums(sample, &deltas, &psi, channels, options)?;

    let mut norm = 2f64.powi(d as i32) * n as f64 * h.iter().product::<f64>();
    if with_linear {
        norm *= 1.0 + d as f64;
    }
    let mut values = vec![0.0; n];
    let mut zc = vec![0.0; d];
    for (j, v) in values.iter_mut().enumerate() {
        for k in 0..d {
            zc[k] = sample.coord(j, k) - centre[k];
        }
        let mut acc = 0.0;
        for (s, dl) in deltas.iter().enumerate() {
            let base = j * width + s * channels;
            let expo: f64 = (0..d).map(|k| dl.sign(k) * zc[k] / h[k]).sum();
            let term = if with_linear {
                let mut t = (1.0 + expo) * sums[base];
                for l in 0..d {
                    t -= dl.sign(l) / h[l] * sums[base + 1 + l];
                }
                t
            } else {
                sums[base]
            };
            acc += (-expo).exp() * term;
        }
        *v = (acc + sample.weights()[j]) / norm;
    }
    Ok(EvalResult::new(values, Alignment::Sample, "dnc", start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate_gaussian_sample;
    use crate::naive::{ecdf_naive, kde_naive};
    use approx::assert_abs_diff_eq;

    fn three() -> Sample {
        Sample::unweighted(&[vec![0.2, 0.7], vec![0.5, 0.1], vec![0.9, 0.9]]).unwrap()
    }

    fn strict_oracle(s: &Sample) -> Vec<f64> {
        ecdf_naive(s, &s.rows(), &DeltaVector::all_minus(s.dim()), true)
            .unwrap()
            .values
    }

    #[test]
    fn ecdf_examples() {
        let s = three();
        assert_eq!(ecdf_dnc(&s, false).unwrap().values, vec![0.0, 0.0, 2.0 / 3.0]);
        assert_eq!(ecdf_dnc(&s, true).unwrap().values, vec![1.0 / 3.0, 1.0 / 3.0, 1.0]);
        let one = Sample::unweighted(&[vec![0.3, 0.1, 4.0]]).unwrap();
        assert_eq!(ecdf_dnc(&one, false).unwrap().values, vec![0.0]);
        assert_eq!(ecdf_dnc(&one, true).unwrap().values, vec![1.0]);
    }

    #[test]
    fn ecdf_matches_oracle_all_dims() {
        for d in 1..=6 {
            for seed in 0..4 {
                let s = generate_gaussian_sample(300 + 37 * seed as usize, d, seed * 10 + d as u64).unwrap();
                assert_eq!(ecdf_dnc(&s, false).unwrap().values, strict_oracle(&s), "d={d} seed={seed}");
            }
        }
    }

    #[test]
    fn ecdf_with_self_matches_non_strict_oracle() {
        let s = generate_gaussian_sample(500, 3, 3).unwrap();
        let dnc = ecdf_dnc(&s, true).unwrap();
        let naive = ecdf_naive(&s, &s.rows(), &DeltaVector::all_plus(3), false).unwrap();
        assert_eq!(dnc.values, naive.values);
    }

    #[test]
    fn ties_are_rejected_or_broken() {
        let s = Sample::unweighted(&[vec![0.0, 1.0], vec![0.0, 2.0], vec![1.0, 3.0]]).unwrap();
        assert!(matches!(ecdf_dnc(&s, false), Err(Error::Ties { dim: 0 })));
        let opts = DncOptions {
            ties: TiePolicy::BreakByIndex,
        };
        // point 1 counts as just above point 0 in dimension 0
        let v = ecdf_dnc_with(&s, false, opts).unwrap();
        assert_eq!(v.values, vec![0.0, 1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn pair_counting_touches_each_pair_once() {
        for d in 1..=4 {
            let n = if d <= 2 { 256 } else { 96 };
            let s = generate_gaussian_sample(n, d, 77 + d as u64).unwrap();
            let deltas: Vec<DeltaVector> = DeltaVector::all(d).collect();
            let width = deltas.len() * n;
            let mut psi = vec![0.0; n * width];
            for i in 0..n {
                for sl in 0..deltas.len() {
                    psi[i * width + sl * n + i] = 1.0;
                }
            }
            let out = dominance_sums(&s, &deltas, &psi, n, DncOptions::default()).unwrap();
            for (sl, dl) in deltas.iter().enumerate() {
                for j in 0..n {
                    for i in 0..n {
                        let dom = i != j
                            && (0..d).all(|k| dl.sign(k) * s.coord(i, k) < dl.sign(k) * s.coord(j, k));
                        assert_eq!(out[j * width + sl * n + i], f64::from(u8::from(dom)));
                    }
                }
            }
        }
    }

    #[test]
    fn terms_examples() {
        let s = three();
        let h = Bandwidth::isotropic(1.0, 2).unwrap();
        let t = kde_terms_dnc(&s, &h, Monomial::constant()).unwrap();
        let pp = DeltaVector::all_plus(2);
        assert_abs_diff_eq!(t.value(2, &pp), 0.9f64.exp() + 0.6f64.exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(t.value(2, &pp), 4.2817, epsilon = 1e-4);
        assert_eq!(t.value(0, &pp), 0.0);
        assert_eq!(t.value(1, &pp), 0.0);
        let mm = DeltaVector::all_minus(2);
        assert_abs_diff_eq!(t.value(0, &mm), (-1.8f64).exp(), epsilon = 1e-15);
        let one = Sample::unweighted(&[vec![1.0, 2.0]]).unwrap();
        let t1 = kde_terms_dnc(&one, &h, Monomial::constant()).unwrap();
        for dl in DeltaVector::all(2) {
            assert_eq!(t1.value(0, &dl), 0.0);
        }
    }

    #[test]
    fn terms_match_double_loop() {
        let s = generate_gaussian_sample(150, 3, 5).unwrap();
        let w: Vec<f64> = (0..150).map(|i| 1.0 + (i % 4) as f64 * 0.25).collect();
        let s = s.with_weights(w).unwrap();
        let h = Bandwidth::diagonal(vec![0.5, 0.8, 1.1]).unwrap();
        let mono = Monomial { l: 0, m: 2, p: 1, q: 2 };
        let t = kde_terms_dnc(&s, &h, mono).unwrap();
        for dl in DeltaVector::all(3) {
            for j in 0..150 {
                let mut want = 0.0;
                for i in 0..150 {
                    if i != j && (0..3).all(|k| dl.sign(k) * s.coord(i, k) < dl.sign(k) * s.coord(j, k)) {
                        let e: f64 = (0..3).map(|k| dl.sign(k) * s.coord(i, k) / [0.5, 0.8, 1.1][k]).sum();
                        want += s.weights()[i] * s.coord(i, 0) * s.coord(i, 2).powi(2) * e.exp();
                    }
                }
                assert_abs_diff_eq!(t.value(j, &dl), want, epsilon = 1e-13 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn kde_examples() {
        let two = Sample::unweighted(&[vec![0.0], vec![1.0]]).unwrap();
        let h = Bandwidth::isotropic(1.0, 1).unwrap();
        let v = kde_dnc(&two, &KernelSpec::laplacian(), &h).unwrap();
        let want = 0.25 * (1.0 + (-1.0f64).exp());
        assert_abs_diff_eq!(v.values[0], want, epsilon = 1e-16);
        assert_abs_diff_eq!(v.values[1], want, epsilon = 1e-16);
        let one = Sample::from_rows(&[vec![0.3, -0.2]], vec![2.0]).unwrap();
        let h2 = Bandwidth::diagonal(vec![0.5, 2.0]).unwrap();
        let v = kde_dnc(&one, &KernelSpec::laplacian(), &h2).unwrap();
        assert_abs_diff_eq!(v.values[0], 2.0 * 0.25 / 1.0, epsilon = 1e-16);
    }

    #[test]
    fn kde_matches_naive() {
        for d in 1..=4 {
            let s = generate_gaussian_sample(500, d, 40 + d as u64).unwrap();
            let h = Bandwidth::diagonal((0..d).map(|k| 0.15 + 0.1 * k as f64).collect()).unwrap();
            for k in [KernelSpec::laplacian(), KernelSpec::matern32_additive()] {
                let fast = kde_dnc(&s, &k, &h).unwrap();
                let slow = kde_naive(&s, &s.rows(), &k, &h).unwrap();
                let gap = fast.max_abs_diff(&slow).unwrap();
                assert!(gap <= 1e-13, "{k} d={d}: {gap}");
            }
        }
    }

    #[test]
    fn kde_rejects_unsupported_and_ties() {
        let s = three();
        let h = Bandwidth::isotropic(1.0, 2).unwrap();
        assert!(matches!(kde_dnc(&s, &KernelSpec::uniform(), &h), Err(Error::Parameter(_))));
        let tied = Sample::unweighted(&[vec![0.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(kde_dnc(&tied, &KernelSpec::laplacian(), &h), Err(Error::Ties { .. })));
    }
}
