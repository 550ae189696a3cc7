//! Generalized multivariate histograms: weighted point sums over the cells
//! cut out by a rectilinear grid.
//!
//! Bins are 0-based here. Along dimension `k` with knots `z_0 < ... < z_{M-1}`
//! there are `M + 1` bins; bin `b` holds the points with
//!
//! * `z_{b-1} < x <= z_b` when the sign is `+1`,
//! * `z_{b-1} <= x < z_b` when the sign is `-1`,
//!
//! with `z_{-1} = -inf` and `z_M = +inf`. Equivalently, the bin of `x` is the
//! number of knots `< x` (sign `+1`) or `<= x` (sign `-1`). Prefix sums over
//! the bins then reproduce `x <= z_b` and `x < z_b` respectively.
//!
//! Sums are kept unscaled (no `1/N` factor) so that integer weights are
//! accumulated without rounding.

use crate::domain::{DeltaVector, RectilinearGrid, Sample};
use crate::error::{Error, Result};

/// Dense tensor of shape `(M_1 + 1) x ... x (M_d + 1)`, last dimension contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSumTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
    scaled: bool,
}

impl LocalSumTensor {
    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        Self {
            dims,
            data: vec![0.0; len],
            scaled: false,
        }
    }

    pub fn from_parts(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::Shape {
                expected: len,
                got: data.len(),
            });
        }
        Ok(Self {
            dims,
            data,
            scaled: false,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Whether entries carry the `1/N` factor.
    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    /// Copy with every entry divided by `n`.
    pub fn scaled(&self, n: usize) -> Self {
        let inv = n as f64;
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| v / inv).collect(),
            scaled: true,
        }
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let flat: usize = index.iter().zip(self.strides()).map(|(i, s)| i * s).sum();
        self.data[flat]
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Per-dimension bin of every sample point, stored `d x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMatrix {
    n: usize,
    bins: Vec<u32>,
    dims: Vec<usize>,
}

impl IndexMatrix {
    /// Bins found by sorting each coordinate and walking the knots.
    pub fn sorted(sample: &Sample, grid: &RectilinearGrid, delta: &DeltaVector) -> Result<Self> {
        check_shapes(sample, grid, delta)?;
        let mut bins = Vec::with_capacity(sample.len() * sample.dim());
        for k in 0..sample.dim() {
            bins.extend(bins_by_sorting(sample.column(k), grid.knots(k), delta.is_plus(k)));
        }
        Ok(Self::assemble(sample.len(), bins, grid))
    }

    /// Bins found by dividing by the mesh width; needs a uniform grid.
    pub fn uniform(sample: &Sample, grid: &RectilinearGrid, delta: &DeltaVector) -> Result<Self> {
        check_shapes(sample, grid, delta)?;
        let mut bins = Vec::with_capacity(sample.len() * sample.dim());
        for k in 0..sample.dim() {
            let mesh = uniform_mesh(grid, k)?;
            bins.extend(bins_by_division(sample.column(k), grid.knots(k), mesh, delta.is_plus(k)));
        }
        Ok(Self::assemble(sample.len(), bins, grid))
    }

    fn assemble(n: usize, bins: Vec<u32>, grid: &RectilinearGrid) -> Self {
        let dims = grid.shape().iter().map(|m| m + 1).collect();
        Self { n, bins, dims }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Bin of point `i` along dimension `k`.
    pub fn bin(&self, k: usize, i: usize) -> usize {
        self.bins[k * self.n + i] as usize
    }

    pub fn row(&self, k: usize) -> &[u32] {
        &self.bins[k * self.n..(k + 1) * self.n]
    }

    /// Tensor shape `(M_k + 1)_k`.
    pub fn tensor_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Flat tensor offset of every point's cell.
    pub fn cell_offsets(&self) -> Vec<usize> {
        let st = strides(&self.dims);
        let mut out = vec![0usize; self.n];
        for (k, s) in st.iter().enumerate() {
            for (o, &b) in out.iter_mut().zip(self.row(k)) {
                *o += b as usize * s;
            }
        }
        out
    }

    /// Unscaled local sums of `weights` over the cells.
    pub fn scatter(&self, weights: &[f64]) -> LocalSumTensor {
        scatter(&self.dims, &self.cell_offsets(), weights)
    }
}

pub(crate) fn scatter(dims: &[usize], offsets: &[usize], weights: &[f64]) -> LocalSumTensor {
    let mut t = LocalSumTensor::zeros(dims.to_vec());
    for (&o, &w) in offsets.iter().zip(weights) {
        t.data[o] += w;
    }
    t
}

fn check_shapes(sample: &Sample, grid: &RectilinearGrid, delta: &DeltaVector) -> Result<()> {
    if grid.dim() != sample.dim() {
        return Err(Error::Shape {
            expected: sample.dim(),
            got: grid.dim(),
        });
    }
    if delta.dim() != sample.dim() {
        return Err(Error::Shape {
            expected: sample.dim(),
            got: delta.dim(),
        });
    }
    Ok(())
}

/// Sort-and-walk binning of one coordinate column.
pub(crate) fn bins_by_sorting(x: &[f64], z: &[f64], plus: bool) -> Vec<u32> {
    let mut order: Vec<(f64, u32)> = x.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    order.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coordinates"));
    let mut out = vec![0u32; x.len()];
    let m = z.len();
    let mut zi = 0usize;
    for &(v, i) in &order {
        if plus {
            while zi < m && v > z[zi] {
                zi += 1;
            }
        } else {
            while zi < m && v >= z[zi] {
                zi += 1;
            }
        }
        out[i as usize] = zi as u32;
    }
    out
}

/// Mesh-division binning: `ceil((x - z_0)/dz)` for `+1`, `floor(..) + 1` for
/// `-1`, clamped to `[0, M]`, then nudged against the stored knots so that
/// rounding in the division can never disagree with the direct comparisons.
pub(crate) fn bins_by_division(x: &[f64], z: &[f64], mesh: f64, plus: bool) -> Vec<u32> {
    x.iter().map(|&v| bin_by_division(v, z, mesh, plus) as u32).collect()
}

#[inline]
fn bin_by_division(v: f64, z: &[f64], mesh: f64, plus: bool) -> usize {
    let m = z.len();
    // truncation lands within one knot of the bin; the walks below finish it
    let q = (v - z[0]) / mesh;
    let mut b = (q as isize).saturating_add(1).clamp(0, m as isize) as usize;
    if plus {
        while b > 0 && v <= z[b - 1] {
            b -= 1;
        }
        while b < m && v > z[b] {
            b += 1;
        }
    } else {
        while b > 0 && v < z[b - 1] {
            b -= 1;
        }
        while b < m && v >= z[b] {
            b += 1;
        }
    }
    b
}

fn uniform_mesh(grid: &RectilinearGrid, k: usize) -> Result<f64> {
    match (grid.knots(k).len(), grid.mesh(k)) {
        (1, _) => Ok(1.0),
        (_, Some(m)) => Ok(m),
        (_, None) => Err(Error::Precondition(format!("grid dimension {k} is not uniform"))),
    }
}

/// Local sums via per-dimension sorting, `O(dN log N + M)`.
pub fn local_sums_sorted(
    sample: &Sample,
    grid: &RectilinearGrid,
    delta: &DeltaVector,
) -> Result<LocalSumTensor> {
    Ok(IndexMatrix::sorted(sample, grid, delta)?.scatter(sample.weights()))
}

/// Local sums via mesh division on a uniform grid, `O(dN + M)`.
///
/// Bins, cell offsets and the scatter are fused into one pass over the
/// points, so no index matrix is materialized.
pub fn local_sums_uniform(
    sample: &Sample,
    grid: &RectilinearGrid,
    delta: &DeltaVector,
) -> Result<LocalSumTensor> {
    check_shapes(sample, grid, delta)?;
    let d = sample.dim();
    let meshes = (0..d).map(|k| uniform_mesh(grid, k)).collect::<Result<Vec<_>>>()?;
    let dims: Vec<usize> = grid.shape().iter().map(|m| m + 1).collect();
    let st = strides(&dims);
    let plus: Vec<bool> = (0..d).map(|k| delta.is_plus(k)).collect();
    let cols: Vec<&[f64]> = (0..d).map(|k| sample.column(k)).collect();
    let mut t = LocalSumTensor::zeros(dims);
    for (i, &w) in sample.weights().iter().enumerate() {
        let mut off = 0;
        for k in 0..d {
            off += bin_by_division(cols[k][i], grid.knots(k), meshes[k], plus[k]) * st[k];
        }
        t.data[off] += w;
    }
    Ok(t)
}

/// Local sums by mesh division on uniform grids, by sorting otherwise.
pub fn local_sums(sample: &Sample, grid: &RectilinearGrid, delta: &DeltaVector) -> Result<LocalSumTensor> {
    if grid.is_uniform() {
        local_sums_uniform(sample, grid, delta)
    } else {
        local_sums_sorted(sample, grid, delta)
    }
}

/// Index matrix using mesh division when the grid allows it.
pub fn index_matrix(
    sample: &Sample,
    grid: &RectilinearGrid,
    delta: &DeltaVector,
) -> Result<IndexMatrix> {
    if grid.is_uniform() {
        IndexMatrix::uniform(sample, grid, delta)
    } else {
        IndexMatrix::sorted(sample, grid, delta)
    }
}
