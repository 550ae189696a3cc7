//! Multilinear interpolation of grid-aligned results.

use std::time::Instant;

use rayon::prelude::*;

use crate::domain::{Alignment, EvalResult, RectilinearGrid};
use crate::error::{Error, Result};
use crate::histogram::strides;

/// Tensor-product linear interpolation of `values` at `queries`.
///
/// Coordinates outside the knot range are clamped to the nearest boundary
/// knot; the number of queries that needed clamping is reported in
/// `meta.clamped`.
pub fn multilinear_interp(
    grid: &RectilinearGrid,
    values: &EvalResult,
    queries: &[Vec<f64>],
) -> Result<EvalResult> {
    if values.alignment != Alignment::Grid {
        return Err(Error::Precondition(format!(
            "interpolation needs grid-aligned values, got {:?}",
            values.alignment
        )));
    }
    if values.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let d = grid.dim();
    if let Some(q) = queries.iter().find(|q| q.len() != d) {
        return Err(Error::Shape {
            expected: d,
            got: q.len(),
        });
    }
    let start = Instant::now();
    let st = strides(&grid.shape());
    let out: Vec<(f64, bool)> = queries
        .par_iter()
        .map(|q| interp_one(grid, &values.values, &st, q))
        .collect();
    let clamped = out.iter().filter(|(_, c)| *c).count();
    let mut res = EvalResult::new(
        out.into_iter().map(|(v, _)| v).collect(),
        Alignment::Queries,
        "interp",
        start.elapsed().as_secs_f64(),
    );
    res.meta.clamped = Some(clamped);
    Ok(res)
}

fn interp_one(grid: &RectilinearGrid, values: &[f64], st: &[usize], q: &[f64]) -> (f64, bool) {
    let d = grid.dim();
    let mut base = 0;
    let mut cells = Vec::with_capacity(d);
    let mut clamped = false;
    for (k, &x) in q.iter().enumerate() {
        let z = grid.knots(k);
        let m = z.len();
        let x = if x < z[0] || x > z[m - 1] || x.is_nan() {
            clamped = true;
            if x > z[m - 1] {
                z[m - 1]
            } else {
                z[0]
            }
        } else {
            x
        };
        if m == 1 {
            cells.push(None);
            continue;
        }
        let i = z.partition_point(|&v| v <= x).saturating_sub(1).min(m - 2);
        let t = (x - z[i]) / (z[i + 1] - z[i]);
        base += i * st[k];
        cells.push(Some((st[k], t)));
    }
    let mut acc = 0.0;
    for corner in 0..1usize << d {
        let mut w = 1.0;
        let mut offset = base;
        for (k, cell) in cells.iter().enumerate() {
            let up = corner >> k & 1 == 1;
            match cell {
                None if up => {
                    w = 0.0;
                }
                None => {}
                Some((s, t)) => {
                    if up {
                        w *= t;
                        offset += s;
                    } else {
                        w *= 1.0 - t;
                    }
                }
            }
        }
        if w != 0.0 {
            acc += w * values[offset];
        }
    }
    (acc, clamped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_grid(grid: &RectilinearGrid, f: impl Fn(&[f64]) -> f64) -> EvalResult {
        let v = grid.points().iter().map(|p| f(p)).collect();
        EvalResult::new(v, Alignment::Grid, "test", 0.0)
    }

    #[test]
    fn midpoint_1d() {
        let g = RectilinearGrid::new(vec![vec![0.0, 1.0]]).unwrap();
        let v = EvalResult::new(vec![0.0, 1.0], Alignment::Grid, "t", 0.0);
        let r = multilinear_interp(&g, &v, &[vec![0.5]]).unwrap();
        assert_eq!(r.values, vec![0.5]);
        assert_eq!(r.meta.clamped, Some(0));
    }

    #[test]
    fn bilinear_exact_on_linear() {
        let g = RectilinearGrid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let v = on_grid(&g, |z| 2.0 * z[0] + 3.0 * z[1]);
        let r = multilinear_interp(&g, &v, &[vec![0.25, 0.75]]).unwrap();
        assert!((r.values[0] - 2.75).abs() < 1e-15);
    }

    #[test]
    fn nodes_reproduced_bitwise() {
        let g = RectilinearGrid::new(vec![vec![-1.0, 0.3, 2.0, 2.5], vec![0.0, 0.1, 0.7], vec![4.0]]).unwrap();
        let v = on_grid(&g, |z| (z[0] * 1.7).sin() + z[1].powi(3) / 3.0 + z[2]);
        let r = multilinear_interp(&g, &v, &g.points()).unwrap();
        assert_eq!(r.values, v.values);
    }

    #[test]
    fn multilinear_exact_inside_hull() {
        let g = RectilinearGrid::new(vec![vec![0.0, 0.5, 2.0], vec![-1.0, 1.0], vec![0.0, 0.25, 1.0]]).unwrap();
        let f = |z: &[f64]| 1.0 + z[0] - 2.0 * z[1] + 0.5 * z[2] + z[0] * z[1] * z[2];
        let v = on_grid(&g, f);
        let qs = vec![vec![0.3, 0.2, 0.6], vec![1.9, -0.9, 0.1], vec![0.5, 1.0, 0.25]];
        let r = multilinear_interp(&g, &v, &qs).unwrap();
        for (q, got) in qs.iter().zip(&r.values) {
            assert!((got - f(q)).abs() < 1e-14);
        }
    }

    #[test]
    fn clamps_outside_hull() {
        let g = RectilinearGrid::new(vec![vec![0.0, 1.0]]).unwrap();
        let v = EvalResult::new(vec![2.0, 5.0], Alignment::Grid, "t", 0.0);
        let r = multilinear_interp(&g, &v, &[vec![-3.0], vec![7.0], vec![1.0]]).unwrap();
        assert_eq!(r.values, vec![2.0, 5.0, 5.0]);
        assert_eq!(r.meta.clamped, Some(2));
    }

    #[test]
    fn rejects_misaligned_values() {
        let g = RectilinearGrid::new(vec![vec![0.0, 1.0]]).unwrap();
        let v = EvalResult::new(vec![0.0, 1.0], Alignment::Sample, "t", 0.0);
        assert!(matches!(multilinear_interp(&g, &v, &[vec![0.5]]), Err(Error::Precondition(_))));
        let short = EvalResult::new(vec![0.0], Alignment::Grid, "t", 0.0);
        assert!(matches!(multilinear_interp(&g, &short, &[vec![0.5]]), Err(Error::Shape { .. })));
    }
}
