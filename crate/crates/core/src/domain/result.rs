/// What the entries of an [`EvalResult`] are attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Grid points, lexicographic order, last dimension fastest.
    Grid,
    /// Sample points, input order.
    Sample,
    /// Arbitrary query points, in the order given.
    Queries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub method: String,
    pub seconds: f64,
    /// Queries clamped into the grid hull by interpolation.
    pub clamped: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub values: Vec<f64>,
    pub alignment: Alignment,
    pub meta: Metadata,
}

impl EvalResult {
    pub fn new(values: Vec<f64>, alignment: Alignment, method: &str, seconds: f64) -> Self {
        Self {
            values,
            alignment,
            meta: Metadata {
                method: method.to_string(),
                seconds,
                clamped: None,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute entry-wise difference; `None` on length mismatch.
    pub fn max_abs_diff(&self, other: &EvalResult) -> Option<f64> {
        (self.len() == other.len()).then(|| max_abs_diff(&self.values, &other.values))
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
