//! Multi-indices, compositions, subsets and the difference product `Δ`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::scaled::ScaledComplex;

/// An ordered tuple of naturals `μ = (μ₁,…,μ_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex {
    parts: Vec<usize>,
}

impl MultiIndex {
    pub fn new(parts: Vec<usize>) -> Self {
        Self { parts }
    }

    pub fn zeros(m: usize) -> Self {
        Self { parts: vec![0; m] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `|μ| = μ₁ + ⋯ + μ_m`.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Componentwise `self ≤ other`; false when lengths differ.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.len() == other.len() && self.parts.iter().zip(&other.parts).all(|(a, b)| a <= b)
    }

    /// Number of indices in the box `μ ≤ self`.
    pub fn box_size(&self) -> usize {
        self.parts.iter().map(|a| a + 1).product()
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(parts: Vec<usize>) -> Self {
        Self::new(parts)
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.parts[i]
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for MultiIndex {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        trimmed
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(MultiIndex::new)
    }
}

/// Lazily enumerates every `μ ∈ Nᵐ` with `|μ| = N`, lexicographically
/// descending: `(N,0,…,0)` first, `(0,…,0,N)` last.
#[derive(Clone, Debug)]
pub struct Compositions {
    current: Option<Vec<usize>>,
}

pub fn compositions(m: usize, n: usize) -> Compositions {
    let current = if m == 0 {
        (n == 0).then(Vec::new)
    } else {
        let mut first = vec![0; m];
        first[0] = n;
        Some(first)
    };
    Compositions { current }
}

impl Iterator for Compositions {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let out = self.current.take()?;
        let m = out.len();
        if m >= 2 {
            if let Some(i) = (0..m - 1).rev().find(|&i| out[i] > 0) {
                let mut next = out.clone();
                let tail: usize = next[i + 1..].iter().sum();
                next[i] -= 1;
                next[i + 1] = tail + 1;
                next[i + 2..].iter_mut().for_each(|p| *p = 0);
                self.current = Some(next);
            }
        }
        Some(MultiIndex::new(out))
    }
}

/// Every `μ` with `|μ| ≤ N`, grouped by increasing weight.
pub fn compositions_up_to(m: usize, n: usize) -> impl Iterator<Item = MultiIndex> {
    (0..=n).flat_map(move |d| compositions(m, d))
}

/// Lazily enumerates the box `{μ : μ ≤ α}` in lexicographic order, last
/// coordinate fastest.
#[derive(Clone, Debug)]
pub struct BoxIter {
    bound: Vec<usize>,
    current: Option<Vec<usize>>,
}

pub fn box_indices(alpha: &MultiIndex) -> BoxIter {
    BoxIter {
        bound: alpha.parts().to_vec(),
        current: Some(vec![0; alpha.len()]),
    }
}

impl Iterator for BoxIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let out = self.current.take()?;
        let mut next = out.clone();
        for i in (0..next.len()).rev() {
            if next[i] < self.bound[i] {
                next[i] += 1;
                self.current = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(MultiIndex::new(out))
    }
}

/// Lazily enumerates the `d`-subsets of `{0,…,M−1}` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Subsets {
    m: usize,
    current: Option<Vec<usize>>,
}

pub fn subsets(m: usize, d: usize) -> Subsets {
    Subsets {
        m,
        current: (d <= m).then(|| (0..d).collect()),
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let d = out.len();
        if let Some(i) = (0..d).rev().find(|&i| out[i] < self.m - d + i) {
            let mut next = out.clone();
            next[i] += 1;
            for j in i + 1..d {
                next[j] = next[j - 1] + 1;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// `Δ(x) = ∏_{i<j} [x_i − x_j]`.
pub fn delta_product(spec: &KernelSpec, x: &[Complex64]) -> Result<ScaledComplex> {
    let mut p = ScaledComplex::ONE;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            p *= spec.bracket(x[i] - x[j])?;
        }
    }
    Ok(p)
}

/// `(αx, (α choose 2))` with `αx = Σ α_i x_i` and `(α choose 2) = Σ α_i(α_i−1)/2`.
pub fn index_functionals(alpha: &MultiIndex, x: &[Complex64]) -> Result<(Complex64, u64)> {
    if alpha.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: alpha.len(),
            found: x.len(),
        });
    }
    let dot = alpha
        .parts()
        .iter()
        .zip(x)
        .map(|(&a, &xi)| xi * a as f64)
        .sum();
    let binom = alpha.parts().iter().map(|&a| (a * a.saturating_sub(1) / 2) as u64).sum();
    Ok((dot, binom))
}

/// Binomial coefficient, exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
