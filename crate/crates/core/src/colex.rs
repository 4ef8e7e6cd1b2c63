//! Colexicographic indexing of `k`-subsets of `[n] = {1, …, n}`.
//!
//! A subset `{s_1 < … < s_k}` has 0-based rank `Σ_j C(s_j − 1, j)`. Subsets
//! are compared by their largest differing element, so `{1,2} < {1,3} <
//! {2,3} < {1,4} < …`.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Rank of a strictly increasing, 1-based subset.
pub fn rank(subset: &[usize]) -> usize {
    subset
        .iter()
        .enumerate()
        .map(|(j, &s)| binomial(s - 1, j + 1))
        .sum()
}

pub fn unrank(mut index: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for j in (1..=k).rev() {
        // largest c with C(c, j) <= index
        let mut c = j - 1;
        while binomial(c + 1, j) <= index {
            c += 1;
        }
        index -= binomial(c, j);
        out[j - 1] = c + 1;
    }
    out
}

/// Iterator over all `k`-subsets of `[n]` in colex order.
#[derive(Debug, Clone)]
pub struct Subsets {
    n: usize,
    current: Option<Vec<usize>>,
}

pub fn subsets(n: usize, k: usize) -> Subsets {
    let current = (k <= n).then(|| (1..=k).collect());
    Subsets { n, current }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut j = 0;
        while j < k {
            let limit = if j + 1 < k { next[j + 1] } else { self.n + 1 };
            if next[j] + 1 < limit {
                next[j] += 1;
                for (t, slot) in next.iter_mut().enumerate().take(j) {
                    *slot = t + 1;
                }
                self.current = Some(next);
                break;
            }
            j += 1;
        }
        Some(out)
    }
}

/// Sorts a sequence of distinct labels, returning the sign of the sorting
/// permutation, or `None` if a label repeats.
pub fn sort_with_sign(seq: &[usize]) -> Option<(Vec<usize>, i8)> {
    let mut v = seq.to_vec();
    let mut sign = 1i8;
    // insertion sort; the swap count parity is the permutation sign
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Values indexed by the `k`-subsets of `[n]`, stored in colex order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetVector<T> {
    n: usize,
    k: usize,
    values: Vec<T>,
}

impl<T> SubsetVector<T> {
    pub fn new(n: usize, k: usize, values: Vec<T>) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidParameters(format!(
                "subset size {k} exceeds ground set size {n}"
            )));
        }
        let expected = binomial(n, k);
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "C({n},{k}) = {expected} entries expected, got {}",
                values.len()
            )));
        }
        Ok(Self { n, k, values })
    }

    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let values = subsets(n, k).map(|s| f(&s)).collect();
        Self { n, k, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Entry for a sorted subset.
    pub fn get(&self, subset: &[usize]) -> &T {
        debug_assert_eq!(subset.len(), self.k);
        debug_assert!(subset.windows(2).all(|w| w[0] < w[1]));
        &self.values[rank(subset)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &T)> {
        subsets(self.n, self.k).zip(self.values.iter())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> SubsetVector<U> {
        SubsetVector {
            n: self.n,
            k: self.k,
            values: self.values.iter().map(f).collect(),
        }
    }
}
