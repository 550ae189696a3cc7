use crate::domain::sample::Sample;
use crate::error::{Error, Result};

const UNIFORM_REL_TOL: f64 = 1e-9;

/// Cartesian product of per-dimension, strictly increasing knot vectors.
///
/// Grid points are enumerated in lexicographic order with the last
/// dimension varying fastest. The sentinels `-inf` / `+inf` that bracket
/// each knot vector are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct RectilinearGrid {
    knots: Vec<Vec<f64>>,
    mesh: Vec<Option<f64>>,
}

impl RectilinearGrid {
    pub fn new(knots: Vec<Vec<f64>>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Validation("grid has zero dimensions".into()));
        }
        let mut mesh = Vec::with_capacity(knots.len());
        for (k, z) in knots.iter().enumerate() {
            if z.is_empty() {
                return Err(Error::Validation(format!("grid dimension {k} has no knots")));
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "grid dimension {k} has a non-finite knot"
                )));
            }
            if let Some(j) = z.windows(2).position(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!(
                    "grid knots must strictly increase: dimension {k}, knots {j} and {}",
                    j + 1
                )));
            }
            mesh.push(detect_mesh(z));
        }
        Ok(Self { knots, mesh })
    }

    pub fn dim(&self) -> usize {
        self.knots.len()
    }

    pub fn knots(&self, k: usize) -> &[f64] {
        &self.knots[k]
    }

    pub fn all_knots(&self) -> &[Vec<f64>] {
        &self.knots
    }

    /// Mesh width of dimension `k` when its knots are equally spaced.
    pub fn mesh(&self, k: usize) -> Option<f64> {
        self.mesh[k]
    }

    /// Single-knot dimensions count as uniform.
    pub fn is_uniform(&self) -> bool {
        self.knots
            .iter()
            .zip(&self.mesh)
            .all(|(z, m)| z.len() == 1 || m.is_some())
    }

    pub fn shape(&self) -> Vec<usize> {
        self.knots.iter().map(Vec::len).collect()
    }

    /// Total number of grid points `M`.
    pub fn len(&self) -> usize {
        self.knots.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the grid point with lexicographic rank `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let mut rem = flat;
        for k in (0..self.dim()).rev() {
            let m = self.knots[k].len();
            out[k] = self.knots[k][rem % m];
            rem /= m;
        }
        out
    }

    /// All grid points as rows, lexicographic order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Knots mapped by `z -> -z` and reversed, so they still increase.
    pub fn negated(&self) -> Self {
        let knots = self
            .knots
            .iter()
            .map(|z| z.iter().rev().map(|v| -v).collect())
            .collect();
        Self::new(knots).expect("negation preserves strict monotonicity")
    }

    /// Every knot of dimension `k` shifted by `offset`.
    pub fn shifted(&self, k: usize, offset: f64) -> Result<Self> {
        let mut knots = self.knots.clone();
        for v in &mut knots[k] {
            *v += offset;
        }
        Self::new(knots)
    }
}

fn detect_mesh(z: &[f64]) -> Option<f64> {
    if z.len() < 2 {
        return None;
    }
    let step = (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64;
    let tol = UNIFORM_REL_TOL * step;
    z.windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= tol)
        .then_some(step)
}

/// Equally spaced knots spanning `[min_k, max_k]` of the sample in every dimension.
///
/// The first and last knot are the sample extremes exactly.
pub fn build_grid_auto(sample: &Sample, counts: &[usize]) -> Result<RectilinearGrid> {
    if counts.len() != sample.dim() {
        return Err(Error::Shape {
            expected: sample.dim(),
            got: counts.len(),
        });
    }
    let mut knots = Vec::with_capacity(counts.len());
    for (k, &m) in counts.iter().enumerate() {
        if m < 2 {
            return Err(Error::Parameter(format!(
                "grid needs at least 2 knots per dimension, got {m} in dimension {k}"
            )));
        }
        let (lo, hi) = sample.min_max(k);
        if lo == hi {
            return Err(Error::DegenerateRange { dim: k, value: lo });
        }
        let step = (hi - lo) / (m - 1) as f64;
        let mut z: Vec<f64> = (0..m).map(|j| lo + j as f64 * step).collect();
        z[m - 1] = hi;
        if z.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DegenerateRange { dim: k, value: lo });
        }
        knots.push(z);
    }
    RectilinearGrid::new(knots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_grid_on_unit_range() {
        let s = Sample::unweighted(&[vec![0.0], vec![0.3], vec![1.0]]).unwrap();
        let g = build_grid_auto(&s, &[3]).unwrap();
        assert_eq!(g.knots(0), &[0.0, 0.5, 1.0]);
        assert_eq!(g.mesh(0), Some(0.5));
        assert!(g.is_uniform());
    }

    #[test]
    fn auto_grid_hits_extremes_exactly() {
        let s = crate::generate_gaussian_sample(1000, 3, 5).unwrap();
        let g = build_grid_auto(&s, &[7, 13, 2]).unwrap();
        for k in 0..3 {
            let (lo, hi) = s.min_max(k);
            assert_eq!(g.knots(k)[0], lo);
            assert_eq!(*g.knots(k).last().unwrap(), hi);
        }
        assert_eq!(g.len(), 7 * 13 * 2);
    }

    #[test]
    fn auto_grid_rejects_bad_counts() {
        let s = Sample::unweighted(&[vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            build_grid_auto(&s, &[1, 4]),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(build_grid_auto(&s, &[3]), Err(Error::Shape { .. })));
    }

    #[test]
    fn auto_grid_rejects_zero_range() {
        let s = Sample::unweighted(&[vec![2.0, 0.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            build_grid_auto(&s, &[3, 3]),
            Err(Error::DegenerateRange { dim: 0, .. })
        ));
    }

    #[test]
    fn knots_must_increase() {
        assert!(RectilinearGrid::new(vec![vec![0.0, 0.0]]).is_err());
        assert!(RectilinearGrid::new(vec![vec![1.0, 0.5]]).is_err());
        assert!(RectilinearGrid::new(vec![vec![]]).is_err());
        assert!(RectilinearGrid::new(vec![vec![0.0, f64::NAN]]).is_err());
    }

    #[test]
    fn non_uniform_mesh_detected() {
        let g = RectilinearGrid::new(vec![vec![0.0, 1.0, 3.0], vec![5.0]]).unwrap();
        assert_eq!(g.mesh(0), None);
        assert!(!g.is_uniform());
        assert_eq!(g.shape(), vec![3, 1]);
    }

    #[test]
    fn points_are_lexicographic_last_fastest() {
        let g = RectilinearGrid::new(vec![vec![0.0, 1.0], vec![10.0, 20.0, 30.0]]).unwrap();
        assert_eq!(g.point(0), vec![0.0, 10.0]);
        assert_eq!(g.point(1), vec![0.0, 20.0]);
        assert_eq!(g.point(3), vec![1.0, 10.0]);
        assert_eq!(g.negated().knots(1), &[-30.0, -20.0, -10.0]);
    }
}
