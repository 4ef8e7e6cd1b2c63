//! Plain-text file formats.
//!
//! * subset vectors: header `n k`, then `C(n, k)` entries in colex order
//!   (`a/b`, decimal, and for Plücker vectors also `inf`);
//! * matrices: header `r n`, then `r` rows of `n` rationals;
//! * points: header `n`, then `n` rationals.
//!
//! Tokens are whitespace separated; `#` starts a comment running to the end
//! of the line.

use itertools::Itertools;

use crate::colex::{binomial, SubsetVector};
use crate::dissim::{DissimilarityMap, RDissimilarityMap};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::tropcore::{RationalMatrix, TropicalPlueckerVector, TropicalScalar};

fn tokens(text: &str) -> Vec<&str> {
    text.lines()
        .flat_map(|line| line.split('#').next().unwrap().split_whitespace())
        .collect()
}

fn header(tokens: &[&str], count: usize) -> Result<Vec<usize>> {
    if tokens.len() < count {
        return Err(Error::Parse("missing header".into()));
    }
    tokens[..count]
        .iter()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header field {t:?}"))))
        .collect()
}

fn body<T>(tokens: &[&str], expected: usize, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    if tokens.len() != expected {
        return Err(Error::Parse(format!("expected {expected} entries, found {}", tokens.len())));
    }
    tokens.iter().map(|t| parse(t)).collect()
}

pub fn parse_subset_vector(text: &str) -> Result<SubsetVector<Rational>> {
    let t = tokens(text);
    let h = header(&t, 2)?;
    let (n, k) = (h[0], h[1]);
    if k > n {
        return Err(Error::Parse(format!("subset size {k} exceeds n = {n}")));
    }
    SubsetVector::new(n, k, body(&t[2..], binomial(n, k), parse_rational)?)
}

pub fn parse_dissimilarity(text: &str) -> Result<DissimilarityMap> {
    let v = parse_subset_vector(text)?;
    if v.k() != 2 {
        return Err(Error::Parse(format!("expected a pairwise map, header has r = {}", v.k())));
    }
    DissimilarityMap::new(v.n(), v.into_values())
}

pub fn parse_r_dissimilarity(text: &str) -> Result<RDissimilarityMap> {
    let v = parse_subset_vector(text)?;
    RDissimilarityMap::new(v.n(), v.k(), v.into_values())
}

pub fn parse_pluecker(text: &str) -> Result<TropicalPlueckerVector> {
    let t = tokens(text);
    let h = header(&t, 2)?;
    let (n, k) = (h[0], h[1]);
    if k > n {
        return Err(Error::Parse(format!("subset size {k} exceeds n = {n}")));
    }
    SubsetVector::new(n, k, body(&t[2..], binomial(n, k), str::parse::<TropicalScalar>)?)
}

pub fn parse_matrix(text: &str) -> Result<RationalMatrix> {
    let t = tokens(text);
    let h = header(&t, 2)?;
    let (rows, cols) = (h[0], h[1]);
    let values = body(&t[2..], rows * cols, parse_rational)?;
    if cols == 0 {
        return Err(Error::Parse("matrix without columns".into()));
    }
    RationalMatrix::new(values.chunks(cols).map(<[Rational]>::to_vec).collect())
}

pub fn parse_point(text: &str) -> Result<Vec<Rational>> {
    let t = tokens(text);
    let n = header(&t, 1)?[0];
    body(&t[1..], n, parse_rational)
}

pub fn format_rationals(values: &[Rational]) -> String {
    values.iter().map(format_rational).join(" ")
}

pub fn format_subset_vector(v: &SubsetVector<Rational>) -> String {
    format!("{} {}\n{}\n", v.n(), v.k(), format_rationals(v.values()))
}

pub fn format_pluecker(v: &TropicalPlueckerVector) -> String {
    format!("{} {}\n{}\n", v.n(), v.k(), v.values().iter().join(" "))
}

pub fn format_point(x: &[Rational]) -> String {
    format!("{}\n{}\n", x.len(), format_rationals(x))
}

pub fn format_matrix(m: &RationalMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        out.push_str(&format_rationals(m.row(r)));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn vector_file() {
        let v = parse_subset_vector("4 2  # D(Q4)\n2 3 3\n3 3 2\n").unwrap();
        assert_eq!(v.get(&[1, 3]), &int(3));
        assert_eq!(format_subset_vector(&v), "4 2\n2 3 3 3 3 2\n");
        assert!(parse_subset_vector("4 2\n1 2 3").is_err());
        assert!(parse_subset_vector("4 2\n1 2 3 4 5 x").is_err());
        assert!(parse_subset_vector("2 4\n").is_err());
        assert!(parse_subset_vector("").is_err());
    }

    #[test]
    fn dissimilarity_files() {
        let d = parse_dissimilarity("3 2\n1/2 0.5 1\n").unwrap();
        assert_eq!(d.get(1, 2), frac(1, 2));
        assert!(parse_dissimilarity("3 3\n1\n").is_err());
        assert!(parse_dissimilarity("2 2\n-1\n").is_err());
        assert_eq!(parse_r_dissimilarity("4 3\n4 4 4 4\n").unwrap().r(), 3);
    }

    #[test]
    fn pluecker_file() {
        let p = parse_pluecker("3 1\n0 inf -2/3\n").unwrap();
        assert_eq!(p.values()[1], TropicalScalar::Infinite);
        assert_eq!(format_pluecker(&p), "3 1\n0 inf -2/3\n");
    }

    #[test]
    fn matrix_and_point_files() {
        let m = parse_matrix("2 4\n1 0 1 1\n0 1 1 2\n").unwrap();
        assert_eq!(m.get(1, 3), &int(2));
        assert_eq!(format_matrix(&m), "2 4\n1 0 1 1\n0 1 1 2\n");
        assert!(parse_matrix("2 2\n1 2 3\n").is_err());
        let x = parse_point("4\n4/3 4/3 4/3 4/3\n").unwrap();
        assert_eq!(x, vec![frac(4, 3); 4]);
        assert_eq!(format_point(&x), "4\n4/3 4/3 4/3 4/3\n");
    }
}
