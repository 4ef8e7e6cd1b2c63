//! Special points of the tropical linear space of a tree and their
//! tightness analysis.
//!
//! For a tree `T` with Steiner map `D^r`, a point `x` is tested against the
//! inequalities `Σ_{i∈S} x_i >= D^r(S)` for every `r`-subset `S`. Points come
//! from internal vertices (leaf-to-vertex distances) and from leaf-free
//! subtrees `T'`, where coordinate `i` is the distance from leaf `i` to `T'`
//! plus `c(T')/r`, so every `r`-sum carries the total weight of `T'` once.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::colex::{subsets, SubsetVector};
use crate::dissim::RDissimilarityMap;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::treecore::{Subtree, WeightedTree};
use crate::tropcore::{extremum_achieved_twice, Convention, TropicalPlueckerVector, TropicalScalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Provenance {
    RootDepth { vertex: usize },
    Node { vertex: usize },
    Subtree { vertices: Vec<usize>, r: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidatePoint {
    pub n: usize,
    #[serde(with = "crate::rational::serde_str::vec")]
    pub coords: Vec<Rational>,
    pub provenance: Provenance,
}

fn check_r(n: usize, r: usize) -> Result<()> {
    if r < 2 || r > n {
        return Err(Error::OutOfRange { what: "r", value: r, min: 2, max: n });
    }
    Ok(())
}

/// Point of a leaf-free subtree: `w(i, T') + c(T') / r` for each leaf `i`.
pub fn subtree_point(tree: &WeightedTree, tp: &Subtree, r: usize) -> Result<CandidatePoint> {
    tp.check_hosted(tree)?;
    if let Some(&v) = tp.vertices().iter().find(|&&v| tree.is_leaf(v)) {
        return Err(Error::SubtreeContainsLeaf(v));
    }
    check_r(tree.n(), r)?;
    let share = tp.weight() / Rational::from_integer(r.into());
    let coords = (1..=tree.n())
        .map(|i| Ok(tree.distance_to_subtree(i, tp)?.distance + &share))
        .collect::<Result<_>>()?;
    Ok(CandidatePoint {
        n: tree.n(),
        coords,
        provenance: Provenance::Subtree {
            vertices: tp.vertices().iter().copied().collect(),
            r,
        },
    })
}

fn vertex_point(tree: &WeightedTree, vertex: usize) -> Result<Vec<Rational>> {
    if vertex >= tree.vertex_count() {
        return Err(Error::SubtreeNotHosted(format!("vertex {vertex} out of range")));
    }
    if tree.is_leaf(vertex) {
        return Err(Error::SubtreeContainsLeaf(vertex));
    }
    Ok(tree.leaf_distances(vertex))
}

/// Leaf depths below an internal vertex chosen as root.
pub fn root_depth_point(tree: &WeightedTree, root: usize) -> Result<CandidatePoint> {
    Ok(CandidatePoint {
        n: tree.n(),
        coords: vertex_point(tree, root)?,
        provenance: Provenance::RootDepth { vertex: root },
    })
}

/// One point per internal vertex, in vertex order. A two-leaf tree without
/// internal vertices yields none.
pub fn internal_node_points(tree: &WeightedTree, r: usize) -> Result<Vec<CandidatePoint>> {
    check_r(tree.n(), r)?;
    tree.internal_vertices()
        .map(|v| {
            Ok(CandidatePoint {
                n: tree.n(),
                coords: vertex_point(tree, v)?,
                provenance: Provenance::Node { vertex: v },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub verdict: bool,
    #[serde(with = "crate::rational::serde_str")]
    pub min_slack: Rational,
    /// Zero-slack subsets, colex order.
    pub tight_sets: Vec<Vec<usize>>,
    pub first_violation: Option<Vec<usize>>,
    #[serde(with = "crate::rational::serde_str::vec")]
    pub slacks: Vec<Rational>,
}

/// Slack `Σ_{i∈S} x_i - D^r(S)` for every `r`-subset.
pub fn slacks(x: &[Rational], dr: &RDissimilarityMap) -> Result<SubsetVector<Rational>> {
    if x.len() != dr.n() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, map has n = {}",
            x.len(),
            dr.n()
        )));
    }
    let all: Vec<Vec<usize>> = subsets(dr.n(), dr.r()).collect();
    let values = all
        .par_iter()
        .map(|s| s.iter().map(|&i| &x[i - 1]).sum::<Rational>() - dr.get(s))
        .collect();
    SubsetVector::new(dr.n(), dr.r(), values)
}

pub fn inequality_membership(x: &[Rational], dr: &RDissimilarityMap) -> Result<MembershipReport> {
    let s = slacks(x, dr)?;
    let min_slack = s.values().iter().min().cloned().unwrap_or_else(Rational::zero);
    let tight_sets = s.iter().filter(|(_, v)| v.is_zero()).map(|(set, _)| set).collect();
    let first_violation = s.iter().find(|(_, v)| v.is_negative()).map(|(set, _)| set);
    Ok(MembershipReport {
        verdict: !min_slack.is_negative(),
        min_slack,
        tight_sets,
        first_violation,
        slacks: s.into_values(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitReport {
    pub verdict: bool,
    pub convention: Convention,
    /// First `(k+1)`-subset, colex order, whose extremum is attained once.
    pub first_violation: Option<Vec<usize>>,
}

/// Tropical linear space membership: for every `(k+1)`-subset `S`, the
/// extremum over `i ∈ S` of `p(S \ i) + x_i` must be attained twice.
pub fn circuit_membership(
    p: &TropicalPlueckerVector,
    x: &[Rational],
    convention: Convention,
) -> Result<CircuitReport> {
    if x.len() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, vector has n = {}",
            x.len(),
            p.n()
        )));
    }
    if p.k() >= p.n() {
        return Err(Error::InvalidParameters(format!("need k < n, got k = {}", p.k())));
    }
    for s in subsets(p.n(), p.k() + 1) {
        let terms: Vec<TropicalScalar> = (0..s.len())
            .map(|drop| {
                let rest: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != drop).map(|(_, &v)| v).collect();
                p.get(&rest) + &TropicalScalar::Finite(x[s[drop] - 1].clone())
            })
            .collect();
        if !extremum_achieved_twice(&terms, convention)?.twice {
            return Ok(CircuitReport {
                verdict: false,
                convention,
                first_violation: Some(s),
            });
        }
    }
    Ok(CircuitReport {
        verdict: true,
        convention,
        first_violation: None,
    })
}

/// How the path interiors of the chosen leaves must avoid each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpretation {
    /// No vertex lies on two of the paths.
    Pairwise,
    /// No vertex lies on all of the paths.
    Common,
}

impl std::str::FromStr for Interpretation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairwise" => Ok(Interpretation::Pairwise),
            "common" => Ok(Interpretation::Common),
            other => Err(Error::Parse(format!("unknown interpretation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetReport {
    pub subset: Vec<usize>,
    pub contains_tprime: bool,
    /// Interior vertices of each leaf's path to `T'`, in subset order.
    pub interiors: Vec<Vec<usize>>,
    pub interpretation: Interpretation,
    pub disjoint: bool,
    pub predicted_tight: bool,
    pub actual_tight: bool,
    #[serde(with = "crate::rational::serde_str")]
    pub slack: Rational,
}

fn interiors_disjoint(interiors: &[Vec<usize>], interpretation: Interpretation) -> bool {
    match interpretation {
        Interpretation::Pairwise => {
            let mut seen = BTreeSet::new();
            interiors.iter().flatten().all(|v| seen.insert(*v))
        }
        Interpretation::Common => {
            let mut sets = interiors.iter().map(|i| i.iter().copied().collect::<BTreeSet<_>>());
            let first = sets.next().unwrap_or_default();
            sets.fold(first, |acc, s| &acc & &s).is_empty()
        }
    }
}

fn check_subset(n: usize, r: usize, subset: &[usize]) -> Result<()> {
    if subset.len() != r {
        return Err(Error::DimensionMismatch(format!("subset {subset:?} does not have {r} elements")));
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters(format!("subset {subset:?} is not strictly increasing")));
    }
    if let Some(&l) = subset.iter().find(|&&l| l == 0 || l > n) {
        return Err(Error::UnknownLabel(l));
    }
    Ok(())
}

struct FacetContext<'a> {
    tree: &'a WeightedTree,
    tp: &'a Subtree,
    point: CandidatePoint,
    paths: Vec<Vec<usize>>,
}

impl<'a> FacetContext<'a> {
    fn new(tree: &'a WeightedTree, tp: &'a Subtree, r: usize) -> Result<Self> {
        let point = subtree_point(tree, tp, r)?;
        let paths = (1..=tree.n())
            .map(|i| Ok(tree.distance_to_subtree(i, tp)?.interior))
            .collect::<Result<_>>()?;
        Ok(Self { tree, tp, point, paths })
    }

    fn report(&self, subset: &[usize], interpretation: Interpretation) -> Result<FacetReport> {
        let steiner = self.tree.steiner_subtree(subset)?;
        let contains_tprime = self.tp.is_subtree_of(&steiner);
        let interiors: Vec<Vec<usize>> = subset.iter().map(|&i| self.paths[i - 1].clone()).collect();
        let disjoint = interiors_disjoint(&interiors, interpretation);
        let sum: Rational = subset.iter().map(|&i| &self.point.coords[i - 1]).sum();
        let slack = sum - steiner.weight();
        Ok(FacetReport {
            subset: subset.to_vec(),
            contains_tprime,
            interiors,
            interpretation,
            disjoint,
            predicted_tight: contains_tprime && disjoint,
            actual_tight: slack.is_zero(),
            slack,
        })
    }
}

/// Compares the combinatorial tightness prediction for one subset with the
/// slack of the subtree point.
pub fn facet_condition(
    tree: &WeightedTree,
    tp: &Subtree,
    r: usize,
    subset: &[usize],
    interpretation: Interpretation,
) -> Result<FacetReport> {
    check_subset(tree.n(), r, subset)?;
    FacetContext::new(tree, tp, r)?.report(subset, interpretation)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetScan {
    pub point: CandidatePoint,
    pub reports: Vec<FacetReport>,
    /// Some subset is tight.
    pub on_facet: bool,
    /// Every report's prediction matches its slack.
    pub agreement: bool,
}

pub fn facet_scan(
    tree: &WeightedTree,
    tp: &Subtree,
    r: usize,
    interpretation: Interpretation,
) -> Result<FacetScan> {
    let ctx = FacetContext::new(tree, tp, r)?;
    let all: Vec<Vec<usize>> = subsets(tree.n(), r).collect();
    let reports = all
        .iter()
        .map(|s| ctx.report(s, interpretation))
        .collect::<Result<Vec<_>>>()?;
    Ok(FacetScan {
        on_facet: reports.iter().any(|r| r.actual_tight),
        agreement: reports.iter().all(|r| r.actual_tight == r.predicted_tight),
        point: ctx.point,
        reports,
    })
}
