//! Tropical scalars and polynomials, Plücker relations, and the classical
//! minor computations they tropicalize.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::colex::{sort_with_sign, subsets, SubsetVector};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

/// An exact rational, or the tropical zero `Infinite`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TropicalScalar {
    Finite(Rational),
    Infinite,
}

impl TropicalScalar {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            TropicalScalar::Finite(v) => Some(v),
            TropicalScalar::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, TropicalScalar::Infinite)
    }
}

impl From<Rational> for TropicalScalar {
    fn from(v: Rational) -> Self {
        TropicalScalar::Finite(v)
    }
}

/// Tropical multiplication: ordinary addition, absorbed by `Infinite`.
impl std::ops::Add for &TropicalScalar {
    type Output = TropicalScalar;

    fn add(self, rhs: &TropicalScalar) -> TropicalScalar {
        match (self, rhs) {
            (TropicalScalar::Finite(a), TropicalScalar::Finite(b)) => TropicalScalar::Finite(a + b),
            _ => TropicalScalar::Infinite,
        }
    }
}

impl std::ops::Neg for &TropicalScalar {
    type Output = TropicalScalar;

    fn neg(self) -> TropicalScalar {
        match self {
            TropicalScalar::Finite(a) => TropicalScalar::Finite(-a),
            TropicalScalar::Infinite => TropicalScalar::Infinite,
        }
    }
}

impl fmt::Display for TropicalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TropicalScalar::Finite(v) => f.write_str(&format_rational(v)),
            TropicalScalar::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for TropicalScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "∞" => Ok(TropicalScalar::Infinite),
            other => parse_rational(other).map(TropicalScalar::Finite),
        }
    }
}

impl Serialize for TropicalScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Which extremum a tropical sum takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Min,
    Max,
}

impl Convention {
    pub const BOTH: [Convention; 2] = [Convention::Min, Convention::Max];

    pub fn name(self) -> &'static str {
        match self {
            Convention::Min => "min",
            Convention::Max => "max",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Convention::Min),
            "max" => Ok(Convention::Max),
            other => Err(Error::Parse(format!("unknown convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extremum {
    #[serde(with = "crate::rational::serde_str")]
    pub value: Rational,
    /// Every index attaining the extremum, ascending.
    pub achievers: Vec<usize>,
    pub twice: bool,
}

/// Extremum of the finite values and whether it is attained at least twice.
pub fn extremum_achieved_twice(values: &[TropicalScalar], convention: Convention) -> Result<Extremum> {
    let finite = values.iter().enumerate().filter_map(|(i, v)| v.finite().map(|v| (i, v)));
    let best = match convention {
        Convention::Min => finite.clone().map(|(_, v)| v).min(),
        Convention::Max => finite.clone().map(|(_, v)| v).max(),
    }
    .ok_or(Error::AllInfinite)?
    .clone();
    let achievers: Vec<usize> = finite.filter(|(_, v)| **v == best).map(|(i, _)| i).collect();
    Ok(Extremum {
        twice: achievers.len() >= 2,
        value: best,
        achievers,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Monomial {
    /// Valuation of the coefficient.
    pub coefficient: TropicalScalar,
    pub exponent: Vec<u32>,
}

/// A polynomial in tropical form: the extremum of `coefficient + exponent · x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TropicalPolynomial {
    arity: usize,
    terms: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TropEval {
    #[serde(with = "crate::rational::serde_str")]
    pub value: Rational,
    pub achievers: Vec<usize>,
    pub on_hypersurface: bool,
}

impl TropicalPolynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        let arity = terms
            .first()
            .map(|t| t.exponent.len())
            .ok_or_else(|| Error::InvalidParameters("polynomial without terms".into()))?;
        if let Some(t) = terms.iter().find(|t| t.exponent.len() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: t.exponent.len(),
            });
        }
        if terms.iter().all(|t| t.coefficient.is_infinite()) {
            return Err(Error::AllInfinite);
        }
        Ok(Self { arity, terms })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    /// Evaluates the tropicalization at `x`; the point lies on the tropical
    /// hypersurface when the extremum is attained by two or more terms.
    pub fn eval(&self, x: &[Rational], convention: Convention) -> Result<TropEval> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        let values: Vec<TropicalScalar> = self
            .terms
            .iter()
            .map(|t| {
                let linear: Rational = t
                    .exponent
                    .iter()
                    .zip(x)
                    .map(|(&a, xi)| xi * Rational::from_integer(a.into()))
                    .sum();
                &t.coefficient + &TropicalScalar::Finite(linear)
            })
            .collect();
        let ext = extremum_achieved_twice(&values, convention)?;
        Ok(TropEval {
            value: ext.value,
            achievers: ext.achievers,
            on_hypersurface: ext.twice,
        })
    }
}

pub type TropicalPlueckerVector = SubsetVector<TropicalScalar>;

pub fn tropical_vector(p: &SubsetVector<Rational>) -> TropicalPlueckerVector {
    p.map(|v| TropicalScalar::Finite(v.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationFamily {
    /// `p(Sij)p(Skl) - p(Sik)p(Sjl) + p(Sil)p(Sjk)` for `|S| = k - 2`.
    ThreeTerm,
    /// One relation per `(k-1)`-sequence `I` and `(k+1)`-sequence `J`:
    /// `Σ_a (-1)^a p(I ∪ j_a) p(J \ j_a)`.
    Quadratic,
}

impl fmt::Display for RelationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationFamily::ThreeTerm => "three-term",
            RelationFamily::Quadratic => "quadratic",
        })
    }
}

impl FromStr for RelationFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three-term" => Ok(RelationFamily::ThreeTerm),
            "quadratic" => Ok(RelationFamily::Quadratic),
            other => Err(Error::Parse(format!("unknown relation family {other:?}"))),
        }
    }
}

/// Index data a relation was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationIndex {
    Quadratic { i_seq: Vec<usize>, j_seq: Vec<usize> },
    ThreeTerm { base: Vec<usize>, quad: [usize; 4] },
}

/// `sign · p(a) · p(b)` with `a`, `b` sorted `k`-subsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RelationTerm {
    pub sign: i8,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlueckerRelation {
    pub n: usize,
    pub k: usize,
    pub index: RelationIndex,
    pub terms: Vec<RelationTerm>,
}

fn term(sign: i8, a: &[usize], b: &[usize]) -> Option<RelationTerm> {
    let (a, sa) = sort_with_sign(a)?;
    let (b, sb) = sort_with_sign(b)?;
    Some(RelationTerm { sign: sign * sa * sb, a, b })
}

/// All relations of one family for `(n, k)`, in a fixed deterministic order.
///
/// Terms whose index lists repeat a label vanish (alternating coordinates)
/// and are dropped; surviving index lists are sorted and the permutation sign
/// folded into the term sign.
pub fn generate_plucker_relations(
    n: usize,
    k: usize,
    family: RelationFamily,
) -> Result<Vec<PlueckerRelation>> {
    if k < 1 || k >= n {
        return Err(Error::InvalidParameters(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    let mut out = Vec::new();
    match family {
        RelationFamily::Quadratic => {
            for i_seq in subsets(n, k - 1) {
                for j_seq in subsets(n, k + 1) {
                    let terms: Vec<RelationTerm> = (0..=k)
                        .filter_map(|a| {
                            let mut first = i_seq.clone();
                            first.push(j_seq[a]);
                            let second: Vec<usize> =
                                j_seq.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, &j)| j).collect();
                            // (-1)^a with a counted from 1
                            let sign = if a % 2 == 0 { -1 } else { 1 };
                            term(sign, &first, &second)
                        })
                        .collect();
                    if !terms.is_empty() {
                        out.push(PlueckerRelation {
                            n,
                            k,
                            index: RelationIndex::Quadratic { i_seq: i_seq.clone(), j_seq },
                            terms,
                        });
                    }
                }
            }
        }
        RelationFamily::ThreeTerm => {
            if k < 2 {
                return Err(Error::InvalidParameters(format!("three-term relations need k >= 2, got k={k}")));
            }
            // n = k + 1 leaves no quadruple outside a (k-2)-set: the family is empty
            for base in subsets(n, k - 2) {
                let rest: Vec<usize> = (1..=n).filter(|x| !base.contains(x)).collect();
                for q in rest.iter().copied().combinations(4) {
                    let (i, j, kk, l) = (q[0], q[1], q[2], q[3]);
                    let with = |x: usize, y: usize| {
                        let mut v = base.clone();
                        v.extend([x, y]);
                        v
                    };
                    let terms = [(1, (i, j), (kk, l)), (-1, (i, kk), (j, l)), (1, (i, l), (j, kk))]
                        .into_iter()
                        .map(|(s, (a1, a2), (b1, b2))| term(s, &with(a1, a2), &with(b1, b2)).unwrap())
                        .collect();
                    out.push(PlueckerRelation {
                        n,
                        k,
                        index: RelationIndex::ThreeTerm {
                            base: base.clone(),
                            quad: [i, j, kk, l],
                        },
                        terms,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn check_dims<T>(p: &SubsetVector<T>, rel: &PlueckerRelation) -> Result<()> {
    if p.n() != rel.n || p.k() != rel.k {
        return Err(Error::DimensionMismatch(format!(
            "vector is ({}, {}), relation is ({}, {})",
            p.n(),
            p.k(),
            rel.n,
            rel.k
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub holds: bool,
    pub term_values: Vec<TropicalScalar>,
    pub achievers: Vec<usize>,
}

/// Tropical check of one relation: the extremum of `p(a) + p(b)` over its
/// terms must be attained at least twice. A relation whose terms are all
/// infinite evaluates to the tropical zero and holds.
pub fn trop_relation_check(
    p: &TropicalPlueckerVector,
    rel: &PlueckerRelation,
    convention: Convention,
) -> Result<RelationCheck> {
    check_dims(p, rel)?;
    let term_values: Vec<TropicalScalar> = rel.terms.iter().map(|t| p.get(&t.a) + p.get(&t.b)).collect();
    match extremum_achieved_twice(&term_values, convention) {
        Ok(ext) => Ok(RelationCheck {
            holds: ext.twice,
            term_values,
            achievers: ext.achievers,
        }),
        Err(Error::AllInfinite) => Ok(RelationCheck {
            holds: true,
            term_values,
            achievers: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationOutcome {
    pub index: RelationIndex,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationFailure {
    pub index: RelationIndex,
    pub terms: Vec<RelationTerm>,
    pub term_values: Vec<TropicalScalar>,
    pub achievers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DressianReport {
    pub n: usize,
    pub k: usize,
    pub family: RelationFamily,
    pub convention: Convention,
    pub pass: bool,
    pub checked: usize,
    pub failed: usize,
    pub first_failure: Option<RelationFailure>,
    pub results: Vec<RelationOutcome>,
}

/// Checks every relation of `family` against `p`, in generation order.
pub fn dressian_report(
    p: &TropicalPlueckerVector,
    family: RelationFamily,
    convention: Convention,
) -> Result<DressianReport> {
    let relations = generate_plucker_relations(p.n(), p.k(), family)?;
    let checks = relations
        .par_iter()
        .map(|rel| trop_relation_check(p, rel, convention))
        .collect::<Result<Vec<_>>>()?;
    let first_failure = relations.iter().zip(&checks).find(|(_, c)| !c.holds).map(|(rel, c)| {
        RelationFailure {
            index: rel.index.clone(),
            terms: rel.terms.clone(),
            term_values: c.term_values.clone(),
            achievers: c.achievers.clone(),
        }
    });
    let failed = checks.iter().filter(|c| !c.holds).count();
    Ok(DressianReport {
        n: p.n(),
        k: p.k(),
        family,
        convention,
        pass: failed == 0,
        checked: checks.len(),
        failed,
        first_failure,
        results: relations
            .into_iter()
            .zip(checks)
            .map(|(rel, c)| RelationOutcome {
                index: rel.index,
                holds: c.holds,
            })
            .collect(),
    })
}

/// A dense matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || cols == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Rows scaled to integers, with the product of the scale factors.
    fn integral_rows(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut scale = BigInt::one();
        let rows = (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                scale *= &lcm;
                row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
            })
            .collect();
        (rows, scale)
    }
}

/// Determinant of a square integer matrix by fraction-free (Bareiss)
/// elimination; every division is exact.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let size = a.len();
    if size == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..size - 1 {
        if a[k][k].is_zero() {
            match (k + 1..size).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[size - 1][size - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// All maximal minors, indexed by column subsets in colex order.
pub fn pluecker_minors(m: &RationalMatrix) -> Result<SubsetVector<Rational>> {
    if m.rows > m.cols {
        return Err(Error::DimensionMismatch(format!(
            "{} rows exceed {} columns",
            m.rows, m.cols
        )));
    }
    let (rows, scale) = m.integral_rows();
    let all: Vec<Vec<usize>> = subsets(m.cols, m.rows).collect();
    let values = all
        .par_iter()
        .map(|cols| {
            let sub = rows
                .iter()
                .map(|row| cols.iter().map(|&c| row[c - 1].clone()).collect())
                .collect();
            Rational::new(bareiss_determinant(sub), scale.clone())
        })
        .collect();
    SubsetVector::new(m.cols, m.rows, values)
}

/// Whether `Σ sign · p(a) · p(b)` vanishes exactly.
pub fn classical_relation_check(p: &SubsetVector<Rational>, rel: &PlueckerRelation) -> Result<bool> {
    check_dims(p, rel)?;
    let total: Rational = rel
        .terms
        .iter()
        .map(|t| {
            let prod = p.get(&t.a) * p.get(&t.b);
            if t.sign < 0 {
                -prod
            } else {
                prod
            }
        })
        .sum();
    Ok(total.is_zero())
}

/// Two full-rank matrices span the same row space iff their minor vectors are
/// proportional.
pub fn same_rowspace_check(m1: &RationalMatrix, m2: &RationalMatrix) -> Result<bool> {
    if (m1.rows, m1.cols) != (m2.rows, m2.cols) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            m1.rows, m1.cols, m2.rows, m2.cols
        )));
    }
    let p1 = pluecker_minors(m1)?;
    let p2 = pluecker_minors(m2)?;
    if p1.values().iter().all(Zero::is_zero) || p2.values().iter().all(Zero::is_zero) {
        return Err(Error::RankDeficient);
    }
    let pivot = p1.values().iter().position(|v| !v.is_zero()).unwrap();
    if p2.values()[pivot].is_zero() {
        return Ok(false);
    }
    let ratio = &p1.values()[pivot] / &p2.values()[pivot];
    Ok(p1.values().iter().zip(p2.values()).all(|(a, b)| *a == &ratio * b))
}

pub fn format_scalars(values: &[TropicalScalar]) -> String {
    values.iter().map(ToString::to_string).join(" ")
}
