use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::WeightedTree;
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// Largest denominator used when drawing edge weights.
const WEIGHT_DENOMINATOR: i64 = 4;

/// Seeded random binary tree on `n >= 3` leaves.
///
/// The topology grows from the 3-leaf star by attaching each new leaf to the
/// midpoint of a uniformly chosen edge, which is uniform over unrooted binary
/// topologies. Weights are `lo + (hi - lo) * m / d` with `d` in `1..=4`.
pub fn random_tree(n: usize, seed: u64, lo: &Rational, hi: &Rational) -> Result<WeightedTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree_with_rng(&mut rng, n, lo, hi)
}

pub fn random_tree_with_rng<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    lo: &Rational,
    hi: &Rational,
) -> Result<WeightedTree> {
    if n < 3 {
        return Err(Error::OutOfRange {
            what: "leaf count",
            value: n,
            min: 3,
            max: usize::MAX,
        });
    }
    if *lo <= Rational::zero() || hi < lo {
        return Err(Error::InvalidRange(format!(
            "[{}, {}]",
            format_rational(lo),
            format_rational(hi)
        )));
    }
    // leaf with label i is vertex i - 1; internal vertices follow
    let center = n;
    let mut edges: Vec<(usize, usize)> = vec![(center, 0), (center, 1), (center, 2)];
    let mut next_vertex = n + 1;
    for leaf in 3..n {
        let pick = rng.random_range(0..edges.len());
        let (u, v) = edges[pick];
        let mid = next_vertex;
        next_vertex += 1;
        edges[pick] = (u, mid);
        edges.push((mid, v));
        edges.push((mid, leaf));
    }
    let span = hi - lo;
    let weighted = edges
        .into_iter()
        .map(|(u, v)| {
            let den = rng.random_range(1..=WEIGHT_DENOMINATOR);
            let num = rng.random_range(0..=den);
            let w = lo + &span * Rational::new(num.into(), den.into());
            (u, v, w)
        })
        .collect();
    WeightedTree::new(next_vertex, weighted, (0..n).collect())
}
