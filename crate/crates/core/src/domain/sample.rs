use crate::domain::rng::NormalStream;
use crate::error::{Error, Result};

/// A weighted point cloud of `N` points in `d` dimensions.
///
/// Coordinates are stored column-major, one contiguous slice per dimension.
/// The single weight vector plays the role of the response `y` for
/// distribution functions and of the kernel weights `w` for density
/// estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    coords: Vec<f64>,
    weights: Vec<f64>,
    n: usize,
    d: usize,
    tied_dim: Option<usize>,
}

impl Sample {
    /// Builds a sample from `N` rows of length `d`.
    pub fn from_rows(rows: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Validation("sample has no points".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::Validation("points have zero dimensions".into()));
        }
        let n = rows.len();
        let mut coords = vec![0.0; n * d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape {
                    expected: d,
                    got: row.len(),
                });
            }
            for (k, &v) in row.iter().enumerate() {
                coords[k * n + i] = v;
            }
        }
        Self::from_flat_columns(coords, n, d, weights)
    }

    /// Builds a sample from `d` coordinate columns of equal length.
    pub fn from_columns(columns: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Validation("points have zero dimensions".into()));
        }
        let n = columns[0].len();
        let d = columns.len();
        let mut coords = Vec::with_capacity(n * d);
        for col in columns {
            if col.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    got: col.len(),
                });
            }
            coords.extend_from_slice(&col);
        }
        Self::from_flat_columns(coords, n, d, weights)
    }

    /// Same as [`Sample::from_rows`] with unit weights.
    pub fn unweighted(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(rows, vec![1.0; rows.len()])
    }

    fn from_flat_columns(coords: Vec<f64>, n: usize, d: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("sample has no points".into()));
        }
        if weights.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: weights.len(),
            });
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite coordinate at point {}, dimension {}",
                pos % n,
                pos / n
            )));
        }
        if let Some(i) = weights.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite weight at point {i}")));
        }
        let tied_dim = (0..d).find(|&k| has_ties(&coords[k * n..(k + 1) * n]));
        Ok(Self {
            coords,
            weights,
            n,
            d,
            tied_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.coords[k * self.n..(k + 1) * self.n]
    }

    pub fn coord(&self, i: usize, k: usize) -> f64 {
        self.coords[k * self.n + i]
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.d).map(|k| self.coord(i, k)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// True when every dimension holds `N` pairwise distinct values.
    pub fn is_distinct_per_dimension(&self) -> bool {
        self.tied_dim.is_none()
    }

    /// First dimension containing a repeated value, if any.
    pub fn tied_dimension(&self) -> Option<usize> {
        self.tied_dim
    }

    pub fn min_max(&self, k: usize) -> (f64, f64) {
        self.column(k)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Same points with a new weight vector.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                got: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite weight at point {i}")));
        }
        Ok(Self {
            weights,
            ..self.clone()
        })
    }

    /// Point reflection `x -> -x`, weights unchanged.
    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    /// Applies the linear map `x -> A x` to every point (`A` given row-major, `d x d`).
    pub fn transformed(&self, a: &[f64]) -> Result<Self> {
        let d = self.d;
        if a.len() != d * d {
            return Err(Error::Shape {
                expected: d * d,
                got: a.len(),
            });
        }
        let mut coords = vec![0.0; self.n * d];
        for i in 0..self.n {
            for r in 0..d {
                let mut acc = 0.0;
                for c in 0..d {
                    acc += a[r * d + c] * self.coord(i, c);
                }
                coords[r * self.n + i] = acc;
            }
        }
        Self::from_flat_columns(coords, self.n, d, self.weights.clone())
    }
}

fn has_ties(col: &[f64]) -> bool {
    let mut sorted = col.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Checks shapes and finiteness and records the distinct-per-dimension flag.
pub fn validate_sample(points: &[Vec<f64>], weights: &[f64]) -> Result<Sample> {
    Sample::from_rows(points, weights.to_vec())
}

/// `n` independent standard normal points in `d` dimensions with unit weights.
///
/// Coordinates are drawn point by point, dimension fastest, from
/// [`NormalStream`]; the result is a pure function of `(n, d, seed)`.
pub fn generate_gaussian_sample(n: usize, d: usize, seed: u64) -> Result<Sample> {
    if n == 0 || d == 0 {
        return Err(Error::Parameter(format!(
            "sample size and dimension must be positive (n={n}, d={d})"
        )));
    }
    let mut stream = NormalStream::new(seed);
    let mut coords = vec![0.0; n * d];
    for i in 0..n {
        for k in 0..d {
            coords[k * n + i] = stream.next_normal();
        }
    }
    Sample::from_flat_columns(coords, n, d, vec![1.0; n])
}
