//! Dissimilarity maps on pairs and on `r`-subsets of leaves: tree metrics,
//! the four-point test, the cyclic-order formula for Steiner weights, and
//! exact reconstruction of the realizing tree.

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::colex::{subsets, SubsetVector};
use crate::error::{Error, Result};
use crate::rational::{half, Rational};
use crate::treecore::WeightedTree;

/// Largest subset size accepted by [`phi_r`]; the cyclic enumeration costs
/// `(r - 1)! / 2` tours per subset.
pub const MAX_CYCLIC_R: usize = 8;

/// Nonnegative values on unordered leaf pairs, stored in colex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DissimilarityMap(SubsetVector<Rational>);

/// Nonnegative values on `r`-subsets of leaves, stored in colex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RDissimilarityMap(SubsetVector<Rational>);

fn check_nonnegative(values: &[Rational]) -> Result<()> {
    match values.iter().position(|v| v.is_negative()) {
        Some(i) => Err(Error::InvalidParameters(format!("entry {i} is negative"))),
        None => Ok(()),
    }
}

impl DissimilarityMap {
    pub fn new(n: usize, values: Vec<Rational>) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange {
                what: "leaf count",
                value: n,
                min: 2,
                max: usize::MAX,
            });
        }
        check_nonnegative(&values)?;
        Ok(Self(SubsetVector::new(n, 2, values)?))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn values(&self) -> &[Rational] {
        self.0.values()
    }

    pub fn as_subset_vector(&self) -> &SubsetVector<Rational> {
        &self.0
    }

    /// `D(i, j)` for labels in `1..=n`; zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Rational {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Rational::zero(),
            std::cmp::Ordering::Less => self.0.get(&[i, j]).clone(),
            std::cmp::Ordering::Greater => self.0.get(&[j, i]).clone(),
        }
    }

    fn at(&self, i: usize, j: usize) -> &Rational {
        if i < j {
            self.0.get(&[i, j])
        } else {
            self.0.get(&[j, i])
        }
    }

    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        Self::new(self.n(), self.values().iter().map(|v| v * factor).collect())
    }
}

impl RDissimilarityMap {
    pub fn new(n: usize, r: usize, values: Vec<Rational>) -> Result<Self> {
        check_nonnegative(&values)?;
        Ok(Self(SubsetVector::new(n, r, values)?))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn r(&self) -> usize {
        self.0.k()
    }

    pub fn values(&self) -> &[Rational] {
        self.0.values()
    }

    pub fn get(&self, subset: &[usize]) -> &Rational {
        self.0.get(subset)
    }

    pub fn as_subset_vector(&self) -> &SubsetVector<Rational> {
        &self.0
    }
}

impl From<DissimilarityMap> for RDissimilarityMap {
    fn from(d: DissimilarityMap) -> Self {
        Self(d.0)
    }
}

/// The tree metric: `D(i, j)` is the path length between leaves `i` and `j`.
pub fn pairwise_map(tree: &WeightedTree) -> DissimilarityMap {
    let n = tree.n();
    let leaves: Vec<usize> = (1..=n).map(|l| tree.leaf_vertex(l).unwrap()).collect();
    let values = subsets(n, 2)
        .map(|s| tree.vertex_distance(leaves[s[0] - 1], leaves[s[1] - 1]))
        .collect();
    DissimilarityMap::new(n, values).expect("path lengths are nonnegative")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FourPointVerdict {
    pub pass: bool,
    /// First violating `(i, j, k, l)` in lexicographic order.
    pub witness: Option<[usize; 4]>,
}

/// Whether `x, y, z` have their maximum at least twice.
fn max_twice(x: &Rational, y: &Rational, z: &Rational) -> bool {
    let m = x.max(y).max(z);
    [x, y, z].iter().filter(|v| **v == m).count() >= 2
}

/// Four-point condition over all quadruples of labels, repeats included:
/// the largest of `D(i,j)+D(k,l)`, `D(i,k)+D(j,l)`, `D(i,l)+D(j,k)` must be
/// attained at least twice.
pub fn four_point_check(d: &DissimilarityMap) -> FourPointVerdict {
    let n = d.n();
    let zero = Rational::zero();
    let table: Vec<Vec<&Rational>> = (1..=n)
        .map(|i| (1..=n).map(|j| if i == j { &zero } else { d.at(i, j) }).collect())
        .collect();
    let at = |i: usize, j: usize| table[i - 1][j - 1];
    for (i, j, k, l) in itertools::iproduct!(1..=n, 1..=n, 1..=n, 1..=n) {
        let a = at(i, j) + at(k, l);
        let b = at(i, k) + at(j, l);
        let c = at(i, l) + at(j, k);
        if !max_twice(&a, &b, &c) {
            return FourPointVerdict {
                pass: false,
                witness: Some([i, j, k, l]),
            };
        }
    }
    FourPointVerdict {
        pass: true,
        witness: None,
    }
}

fn check_r(n: usize, r: usize, max: usize) -> Result<()> {
    if r < 2 || r > n.min(max) {
        return Err(Error::OutOfRange {
            what: "r",
            value: r,
            min: 2,
            max: n.min(max),
        });
    }
    Ok(())
}

/// Steiner weights: entry `S` is the total weight of the smallest subtree
/// spanning the leaves in `S`.
pub fn steiner_r_map(tree: &WeightedTree, r: usize) -> Result<RDissimilarityMap> {
    let n = tree.n();
    check_r(n, r, n)?;
    let all: Vec<Vec<usize>> = subsets(n, r).collect();
    let values = all
        .par_iter()
        .map(|s| tree.steiner_subtree(s).map(|st| st.weight().clone()))
        .collect::<Result<Vec<_>>>()?;
    RDissimilarityMap::new(n, r, values)
}

/// Half the length of the cheapest closed tour through `labels`, taken over
/// cyclic orders with reflections identified.
pub fn min_half_tour(d: &DissimilarityMap, labels: &[usize]) -> Rational {
    let (&anchor, rest) = labels.split_first().expect("nonempty subset");
    if rest.len() == 1 {
        return d.at(anchor, rest[0]).clone();
    }
    rest.iter()
        .copied()
        .permutations(rest.len())
        // a tour and its reversal have the same length
        .filter(|p| p[0] < p[p.len() - 1])
        .map(|p| {
            let mut total = d.at(anchor, p[0]) + d.at(p[p.len() - 1], anchor);
            for w in p.windows(2) {
                total += d.at(w[0], w[1]);
            }
            total
        })
        .min()
        .unwrap()
        * half()
}

/// The map `D -> D^r` given by half the minimum cyclic tour length.
pub fn phi_r(d: &DissimilarityMap, r: usize) -> Result<RDissimilarityMap> {
    let n = d.n();
    check_r(n, r, MAX_CYCLIC_R)?;
    if r == 2 {
        return Ok(d.clone().into());
    }
    let all: Vec<Vec<usize>> = subsets(n, r).collect();
    let values = all.par_iter().map(|s| min_half_tour(d, s)).collect();
    RDissimilarityMap::new(n, r, values)
}

/// Rebuilds the unique tree realizing an additive map.
///
/// Leaves are inserted one at a time. Leaf `k` attaches to the current tree
/// on the path from leaf 1 to the leaf `j` maximizing the Gromov product
/// `(D(1,j) + D(1,k) - D(j,k)) / 2`, at that distance from leaf 1.
pub fn reconstruct_tree(d: &DissimilarityMap) -> Result<WeightedTree> {
    let verdict = four_point_check(d);
    if let Some(w) = verdict.witness {
        return Err(Error::NotAdditive(w));
    }
    let n = d.n();
    let zero = Rational::zero();
    if !d.get(1, 2).is_positive() {
        return Err(Error::NonpositiveEdge { leaf: 2 });
    }
    let mut b = Builder {
        adjacency: vec![vec![1], vec![0]],
        weights: std::collections::BTreeMap::from([((0, 1), d.get(1, 2))]),
        leaf_vertex: vec![0, 1],
    };
    for k in 3..=n {
        let (best_j, depth) = (2..k)
            .map(|j| (j, (d.get(1, j) + d.get(1, k) - d.get(j, k)) * half()))
            .fold(None::<(usize, Rational)>, |acc, (j, g)| match acc {
                Some((_, ref best)) if *best >= g => acc,
                _ => Some((j, g)),
            })
            .unwrap();
        let pendant = d.get(1, k) - &depth;
        if !pendant.is_positive() || depth <= zero {
            return Err(Error::NonpositiveEdge { leaf: k });
        }
        let path = b.path(b.leaf_vertex[0], b.leaf_vertex[best_j - 1]);
        let mut walked = Rational::zero();
        let mut attach = None;
        for w in path.windows(2) {
            let len = b.weight(w[0], w[1]);
            let next = &walked + &len;
            if depth < next {
                let mid = b.add_vertex();
                b.remove_edge(w[0], w[1]);
                b.add_edge(w[0], mid, &depth - &walked);
                b.add_edge(mid, w[1], &next - &depth);
                attach = Some(mid);
                break;
            }
            if depth == next {
                if b.leaf_vertex.contains(&w[1]) {
                    return Err(Error::NonpositiveEdge { leaf: k });
                }
                attach = Some(w[1]);
                break;
            }
            walked = next;
        }
        let attach = attach.ok_or(Error::NonpositiveEdge { leaf: k })?;
        let leaf = b.add_vertex();
        b.add_edge(attach, leaf, pendant);
        b.leaf_vertex.push(leaf);
    }
    let vertex_count = b.adjacency.len();
    let edges = b.weights.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    let tree = WeightedTree::new(vertex_count, edges, b.leaf_vertex)?;
    debug_assert_eq!(&pairwise_map(&tree), d);
    Ok(tree)
}

struct Builder {
    adjacency: Vec<Vec<usize>>,
    weights: std::collections::BTreeMap<(usize, usize), Rational>,
    leaf_vertex: Vec<usize>,
}

impl Builder {
    fn add_vertex(&mut self) -> usize {
        self.adjacency.push(Vec::new());
        self.adjacency.len() - 1
    }

    fn add_edge(&mut self, u: usize, v: usize, w: Rational) {
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        self.weights.insert((u.min(v), u.max(v)), w);
    }

    fn remove_edge(&mut self, u: usize, v: usize) {
        self.adjacency[u].retain(|&x| x != v);
        self.adjacency[v].retain(|&x| x != u);
        self.weights.remove(&(u.min(v), u.max(v)));
    }

    fn weight(&self, u: usize, v: usize) -> Rational {
        self.weights[&(u.min(v), u.max(v))].clone()
    }

    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.adjacency.len()];
        let mut stack = vec![from];
        prev[from] = from;
        while let Some(x) = stack.pop() {
            if x == to {
                break;
            }
            for &y in &self.adjacency[x] {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    stack.push(y);
                }
            }
        }
        let mut path = vec![to];
        let mut x = to;
        while x != from {
            x = prev[x];
            path.push(x);
        }
        path.reverse();
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::treecore::{parse_newick, random_tree, trees_isomorphic};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn q4() -> WeightedTree {
        parse_newick("((1:1,2:1):1,3:1,4:1);").unwrap()
    }

    fn m4() -> DissimilarityMap {
        DissimilarityMap::new(4, ints(&[1, 2, 1, 1, 2, 1])).unwrap()
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(pairwise_map(&q4()).values(), ints(&[2, 3, 3, 3, 3, 2]).as_slice());
        let s3 = parse_newick("(1:1,2:1,3:1);").unwrap();
        assert_eq!(pairwise_map(&s3).values(), ints(&[2, 2, 2]).as_slice());
        let two = parse_newick("(1:1,2:1);").unwrap();
        assert_eq!(pairwise_map(&two).values(), ints(&[2]).as_slice());
    }

    #[test]
    fn four_point_examples() {
        assert_eq!(
            four_point_check(&pairwise_map(&q4())),
            FourPointVerdict { pass: true, witness: None }
        );
        assert_eq!(four_point_check(&m4()).witness, Some([1, 2, 3, 4]));
    }

    #[test]
    fn three_leaf_maps_pass_when_metric() {
        // every quadruple over {1,2,3} repeats an index and reduces to a
        // triangle inequality
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    let d = DissimilarityMap::new(3, ints(&[a, b, c])).unwrap();
                    let triangle = a <= b + c && b <= a + c && c <= a + b;
                    assert_eq!(four_point_check(&d).pass, triangle, "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn steiner_examples() {
        let t = q4();
        assert_eq!(steiner_r_map(&t, 3).unwrap().values(), ints(&[4, 4, 4, 4]).as_slice());
        assert_eq!(steiner_r_map(&t, 4).unwrap().values(), ints(&[5]).as_slice());
        assert_eq!(steiner_r_map(&t, 2).unwrap().values(), pairwise_map(&t).values());
        assert!(steiner_r_map(&t, 1).is_err());
        assert!(steiner_r_map(&t, 5).is_err());
    }

    #[test]
    fn phi_examples() {
        let d = pairwise_map(&q4());
        assert_eq!(phi_r(&d, 3).unwrap().get(&[1, 2, 3]), &int(4));
        assert_eq!(phi_r(&d, 4).unwrap().values(), ints(&[5]).as_slice());
        let s3 = pairwise_map(&parse_newick("(1:1,2:1,3:1);").unwrap());
        assert_eq!(phi_r(&s3, 3).unwrap().values(), ints(&[3]).as_slice());
        assert_eq!(phi_r(&d, 2).unwrap().values(), d.values());
        assert!(matches!(phi_r(&d, 5), Err(Error::OutOfRange { .. })));
        let big = pairwise_map(&random_tree(9, 1, &int(1), &int(2)).unwrap());
        assert!(matches!(phi_r(&big, 9), Err(Error::OutOfRange { max: 8, .. })));
        assert!(phi_r(&big, 8).is_ok());
    }

    #[test]
    fn tour_counts() {
        // number of tours examined is (r-1)!/2
        for r in 3..=6usize {
            let rest = r - 1;
            let count = (2..=r).permutations(rest).filter(|p| p[0] < p[rest - 1]).count();
            let fact: usize = (1..=rest).product();
            assert_eq!(count, fact / 2);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let t = q4();
        assert!(trees_isomorphic(&reconstruct_tree(&pairwise_map(&t)).unwrap(), &t));
        let two = reconstruct_tree(&DissimilarityMap::new(2, ints(&[2])).unwrap()).unwrap();
        assert_eq!(two.vertex_count(), 2);
        assert_eq!(two.edges()[0].weight, int(2));
        assert_eq!(reconstruct_tree(&m4()).unwrap_err(), Error::NotAdditive([1, 2, 3, 4]));
    }

    #[test]
    fn reconstruct_rejects_degenerate_branches() {
        // leaf 3 sits exactly on the 1-2 path
        let d = DissimilarityMap::new(3, ints(&[2, 1, 1])).unwrap();
        assert!(matches!(reconstruct_tree(&d), Err(Error::NonpositiveEdge { .. })));
        // two labels at the same point
        let d = DissimilarityMap::new(3, ints(&[0, 1, 1])).unwrap();
        assert!(matches!(reconstruct_tree(&d), Err(Error::NonpositiveEdge { .. })));
        // leaf 1's pendant has length zero
        let d = DissimilarityMap::new(3, ints(&[1, 1, 2])).unwrap();
        assert!(matches!(reconstruct_tree(&d), Err(Error::NonpositiveEdge { .. })));
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(DissimilarityMap::new(2, ints(&[-1])).is_err());
        assert!(DissimilarityMap::new(3, ints(&[1, 1])).is_err());
    }

    proptest! {
        #[test]
        fn tree_metrics_satisfy_four_points(n in 3usize..9, seed in any::<u64>()) {
            let t = random_tree(n, seed, &int(1), &int(10)).unwrap();
            prop_assert!(four_point_check(&pairwise_map(&t)).pass);
        }

        #[test]
        fn phi_scales_linearly(n in 3usize..7, seed in any::<u64>(), num in 1i64..20, den in 1i64..7) {
            let t = random_tree(n, seed, &int(1), &int(10)).unwrap();
            let d = pairwise_map(&t);
            let lambda = frac(num, den);
            let scaled = d.scaled(&lambda).unwrap();
            for r in 2..=n.min(5) {
                let base = phi_r(&d, r).unwrap();
                let expect: Vec<Rational> = base.values().iter().map(|v| v * &lambda).collect();
                let got = phi_r(&scaled, r).unwrap();
                prop_assert_eq!(got.values(), expect.as_slice());
            }
        }

        #[test]
        fn reconstruction_round_trips(n in 3usize..9, seed in any::<u64>()) {
            let t = random_tree(n, seed, &frac(1, 2), &int(5)).unwrap();
            let back = reconstruct_tree(&pairwise_map(&t)).unwrap();
            prop_assert!(trees_isomorphic(&back, &t));
            prop_assert_eq!(pairwise_map(&back), pairwise_map(&t));
        }
    }
}
