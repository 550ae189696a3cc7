use crate::error::{Error, Result};

/// Sign vector choosing, per dimension, `<=` (`+1`) or `<` (`-1`).
///
/// The 2^d vectors are indexed by a bit mask where bit `k` is set when
/// `signs[k] == -1`; iterating indices in increasing order gives the fixed
/// summation order used everywhere a sum over all sign vectors is formed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeltaVector(Vec<i8>);

impl DeltaVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Validation("sign vector is empty".into()));
        }
        if let Some(k) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Validation(format!(
                "sign vector entry {k} is {}, expected -1 or +1",
                signs[k]
            )));
        }
        Ok(Self(signs))
    }

    pub fn all_plus(d: usize) -> Self {
        Self(vec![1; d])
    }

    pub fn all_minus(d: usize) -> Self {
        Self(vec![-1; d])
    }

    pub fn from_index(index: usize, d: usize) -> Self {
        Self((0..d).map(|k| if index >> k & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0, |acc, (k, _)| acc | 1 << k)
    }

    /// Every sign vector of length `d`, in index order.
    pub fn all(d: usize) -> impl Iterator<Item = DeltaVector> {
        (0..1usize << d).map(move |i| Self::from_index(i, d))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn sign(&self, k: usize) -> f64 {
        f64::from(self.0[k])
    }

    pub fn is_plus(&self, k: usize) -> bool {
        self.0[k] > 0
    }

    pub fn is_all_plus(&self) -> bool {
        self.0.iter().all(|&s| s > 0)
    }

    /// Product of all signs.
    pub fn parity(&self) -> f64 {
        if self.0.iter().filter(|&&s| s < 0).count() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Generalized inequality `x <=_delta z`, component-wise.
    pub fn dominated(&self, x: &[f64], z: &[f64]) -> bool {
        self.0
            .iter()
            .zip(x.iter().zip(z))
            .all(|(&s, (&a, &b))| if s > 0 { a <= b } else { a < b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_other_values() {
        assert!(DeltaVector::new(vec![1, 0]).is_err());
        assert!(DeltaVector::new(vec![2]).is_err());
        assert!(DeltaVector::new(vec![]).is_err());
        assert!(DeltaVector::new(vec![-1, 1]).is_ok());
    }

    #[test]
    fn index_round_trips() {
        for d in 1..6 {
            for (i, delta) in DeltaVector::all(d).enumerate() {
                assert_eq!(delta.index(), i);
                assert_eq!(DeltaVector::from_index(i, d), delta);
            }
        }
        assert_eq!(DeltaVector::new(vec![1, -1, -1]).unwrap().index(), 6);
    }

    #[test]
    fn strictness_follows_sign() {
        let plus = DeltaVector::all_plus(2);
        let minus = DeltaVector::all_minus(2);
        assert!(plus.dominated(&[0.5, 0.1], &[0.5, 0.5]));
        assert!(!minus.dominated(&[0.5, 0.1], &[0.5, 0.5]));
        assert_eq!(minus.parity(), 1.0);
        assert_eq!(DeltaVector::new(vec![1, -1]).unwrap().parity(), -1.0);
    }
}
