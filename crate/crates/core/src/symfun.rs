//! Multi-index combinatorics and elementary symmetric functions.
//!
//! The functions here are generic over the scalar so the same code runs in
//! `f64` on production paths and in exact integer or rational arithmetic in
//! the test suites.

use std::ops::{Add, Deref, Mul};

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector `γ` with `‖γ‖ = Σ γᵢ` and `γ* = max γᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_entry(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `γ! = Π γᵢ!`
    pub fn factorial(&self) -> u128 {
        self.0.iter().map(|&g| factorial(g)).product()
    }

    /// `x^γ`
    pub fn monomial<T>(&self, x: &[T]) -> T
    where
        T: Clone + One + Mul<Output = T>,
    {
        debug_assert_eq!(x.len(), self.0.len());
        let mut acc = T::one();
        for (xi, &g) in x.iter().zip(&self.0) {
            for _ in 0..g {
                acc = acc * xi.clone();
            }
        }
        acc
    }

    /// Entries as scalars, for evaluating symmetric functions of `γ` itself.
    pub fn as_scalars<T: From<u32>>(&self) -> Vec<T> {
        self.0.iter().map(|&g| T::from(g)).collect()
    }

    /// Every multi-index of length `len` with `‖γ‖ = norm`, in lexicographic
    /// order (largest first entry first).
    pub fn all_with_norm(len: usize, norm: u32) -> Vec<MultiIndex> {
        fn rec(len: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == len {
                prefix.push(remaining);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for g in (0..=remaining).rev() {
                prefix.push(g);
                rec(len, remaining - g, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if norm == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(len, norm, &mut Vec::with_capacity(len), &mut out);
        out
    }
}

fn factorial(k: u32) -> u128 {
    (1..=k as u128).product()
}

/// Finite real vector `x ∈ ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::precondition(format!("non-finite entry {bad}")));
        }
        Ok(RealVector(entries))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// The vector `xᵢ` obtained by deleting coordinate `i`.
pub fn deleted<T: Clone>(x: &[T], i: usize) -> Vec<T> {
    x.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| v.clone())
        .collect()
}

/// Multinomial coefficient `k!/γ!`, exact for `k ≤ 20`.
pub fn multinomial(k: u32, gamma: &MultiIndex) -> Result<u64> {
    if gamma.norm() != k {
        return Err(Error::precondition(format!(
            "multinomial: |gamma| = {} but k = {k}",
            gamma.norm()
        )));
    }
    if k > 20 {
        return Err(Error::precondition("multinomial: k > 20 overflows u64"));
    }
    // Product of binomials C(γ₁+…+γᵢ, γᵢ) keeps every intermediate exact.
    let mut acc: u128 = 1;
    let mut running = 0u32;
    for &g in gamma.entries() {
        for j in 1..=g {
            running += 1;
            acc = acc * running as u128 / j as u128;
        }
    }
    Ok(acc as u64)
}

/// `(σ_{0,n}, …, σ_{n,n})` by accumulating the coefficients of `Π (t + xᵢ)`.
pub fn sigma_all<T>(x: &[T]) -> Vec<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    let mut coeffs = vec![T::zero(); x.len() + 1];
    coeffs[0] = T::one();
    for (m, xi) in x.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            coeffs[k] = coeffs[k].clone() + xi.clone() * coeffs[k - 1].clone();
        }
    }
    coeffs
}

/// `σ_{k,n}(x)`; zero when `k > n`.
pub fn sigma<T>(k: usize, x: &[T]) -> T
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    if k > x.len() {
        return T::zero();
    }
    // Same accumulation as `sigma_all`, truncated at degree k.
    let mut coeffs = vec![T::zero(); k + 1];
    coeffs[0] = T::one();
    for (m, xi) in x.iter().enumerate() {
        for j in (1..=k.min(m + 1)).rev() {
            coeffs[j] = coeffs[j].clone() + xi.clone() * coeffs[j - 1].clone();
        }
    }
    coeffs[k].clone()
}

/// `(Σᵢ σ_{k,n−1}(xᵢ), (n−k)·σ_{k,n}(x))`; the two sides are equal.
pub fn identity_sum_sides<T>(k: usize, x: &[T]) -> Result<(T, T)>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + From<u32>,
{
    let n = x.len();
    if k > n {
        return Err(Error::precondition(format!("identity_sum_sides: k = {k} > n = {n}")));
    }
    let mut left = T::zero();
    for i in 0..n {
        left = left + sigma(k, &deleted(x, i));
    }
    let right = T::from((n - k) as u32) * sigma(k, x);
    Ok((left, right))
}

/// `(3 (Σxᵢ²)(Σxᵢ), (Σxᵢ)³ + 2 Σxᵢ³)` for strictly positive `x`; left ≤ right.
pub fn sums_inequality_sides<T>(x: &[T]) -> Result<(T, T)>
where
    T: Clone + Zero + One + PartialOrd + Add<Output = T> + Mul<Output = T> + From<u32>,
{
    if x.iter().any(|v| *v <= T::zero()) {
        return Err(Error::precondition("sums inequality needs strictly positive entries"));
    }
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    let mut s3 = T::zero();
    for v in x {
        let sq = v.clone() * v.clone();
        s1 = s1 + v.clone();
        s3 = s3 + sq.clone() * v.clone();
        s2 = s2 + sq;
    }
    let left = T::from(3) * s2 * s1.clone();
    let right = s1.clone() * s1.clone() * s1 + T::from(2) * s3;
    Ok((left, right))
}

/// `((k+1) σ_{k+1,n}(γ), (σ_{1,n}(γ) − k) σ_{k,n}(γ))`, exact in integers;
/// left ≤ right for every multi-index.
pub fn gamma_inequality_sides(k: usize, gamma: &MultiIndex) -> (i128, i128) {
    let g: Vec<i128> = gamma.entries().iter().map(|&v| v as i128).collect();
    let left = (k as i128 + 1) * sigma(k + 1, &g);
    let right = (sigma(1, &g) - k as i128) * sigma(k, &g);
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(3, &MultiIndex::new(vec![1, 1, 1])).unwrap(), 6);
        assert_eq!(multinomial(3, &MultiIndex::new(vec![3, 0])).unwrap(), 1);
        assert_eq!(multinomial(4, &MultiIndex::new(vec![2, 2])).unwrap(), 6);
        assert_eq!(
            multinomial(20, &MultiIndex::new(vec![1; 20])).unwrap(),
            2_432_902_008_176_640_000
        );
    }

    #[test]
    fn multinomial_norm_mismatch() {
        assert!(matches!(
            multinomial(4, &MultiIndex::new(vec![1, 1])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(2, &[1.0, 1.0, 1.0]), 3.0);
        assert_eq!(sigma(2, &[1.0, 2.0, 3.0, 4.0]), 35.0);
        assert_eq!(sigma(5, &[7.0, 8.0, 9.0]), 0.0);
        assert_eq!(sigma(0, &[7.0, 8.0, 9.0]), 1.0);
    }

    #[test]
    fn sigma_all_examples() {
        assert_eq!(sigma_all(&[1i64, 2, 3]), vec![1, 6, 11, 6]);
        assert_eq!(sigma_all(&[0i64, 0, 0, 0]), vec![1, 0, 0, 0, 0]);
        assert_eq!(sigma_all(&[1i64]), vec![1, 1]);
    }

    #[test]
    fn identity_sum_examples() {
        assert_eq!(identity_sum_sides(1, &[1i64, 2, 3]).unwrap(), (12, 12));
        assert_eq!(identity_sum_sides(0, &[1i64, 2, 3]).unwrap(), (3, 3));
        assert_eq!(identity_sum_sides(3, &[1i64, 2, 3]).unwrap(), (0, 0));
        assert!(identity_sum_sides(4, &[1i64, 2, 3]).is_err());
    }

    #[test]
    fn sums_inequality_examples() {
        assert_eq!(sums_inequality_sides(&[1i64, 2, 3]).unwrap(), (252, 288));
        assert_eq!(sums_inequality_sides(&[1i64, 1]).unwrap(), (12, 12));
        // 3·3·3 = 27 on the left; 27 + 2·3 = 33 on the right.
        assert_eq!(sums_inequality_sides(&[1i64, 1, 1]).unwrap(), (27, 33));
        assert!(sums_inequality_sides(&[1i64, 0, 2]).is_err());
    }

    #[test]
    fn gamma_inequality_examples() {
        assert_eq!(gamma_inequality_sides(0, &MultiIndex::new(vec![1, 1, 1])), (3, 3));
        assert_eq!(gamma_inequality_sides(1, &MultiIndex::new(vec![2, 1, 0])), (4, 6));
        assert_eq!(gamma_inequality_sides(3, &MultiIndex::new(vec![1, 1, 1])), (0, 0));
    }

    #[test]
    fn multi_index_enumeration_counts() {
        // C(norm + len − 1, len − 1)
        assert_eq!(MultiIndex::all_with_norm(3, 3).len(), 10);
        assert_eq!(MultiIndex::all_with_norm(4, 4).len(), 35);
        assert_eq!(MultiIndex::all_with_norm(1, 5), vec![MultiIndex::new(vec![5])]);
        let g = MultiIndex::new(vec![2, 0, 3]);
        assert_eq!(g.norm(), 5);
        assert_eq!(g.max_entry(), 3);
        assert_eq!(g.factorial(), 12);
    }

    #[test]
    fn real_vector_rejects_nan() {
        assert!(RealVector::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(&*RealVector::new(vec![1.0, 2.0]).unwrap(), &[1.0, 2.0]);
    }
}
