use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::Zero;

use super::WeightedTree;
use crate::error::{Error, Result};
use crate::rational::{format_rational, frac, parse_rational, Rational};

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    names: Vec<Option<String>>,
    edges: Vec<(usize, usize, Rational)>,
    leaves: BTreeMap<usize, usize>,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::NewickSyntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn token(&mut self, accept: impl Fn(u8) -> bool) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && accept(self.text[self.pos]) {
            self.pos += 1;
        }
        // accepted bytes are ASCII
        std::str::from_utf8(&self.text[start..self.pos]).unwrap()
    }

    fn node(&mut self) -> Result<usize> {
        let me = self.names.len();
        self.names.push(None);
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let mut children = 0;
                loop {
                    let child = self.node()?;
                    let weight = match self.length()? {
                        Some(w) => w,
                        None => return self.error("branch length expected"),
                    };
                    self.edges.push((me, child, weight));
                    children += 1;
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return self.error("expected ',' or ')'"),
                    }
                }
                if children < 2 {
                    return self.error("internal node needs at least two children");
                }
                let name = self.token(|b| {
                    !b.is_ascii_whitespace() && !matches!(b, b'(' | b')' | b',' | b':' | b';')
                });
                if !name.is_empty() {
                    self.names[me] = Some(name.to_string());
                }
            }
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                let digits = self.token(|b| b.is_ascii_digit());
                let label: usize = match digits.parse() {
                    Ok(l) => l,
                    Err(_) => {
                        self.pos = start;
                        return self.error("leaf label too large");
                    }
                };
                if self.leaves.insert(label, me).is_some() {
                    return Err(Error::DuplicateLabel(label));
                }
            }
            _ => return self.error("expected '(' or an integer leaf label"),
        }
        Ok(me)
    }

    fn length(&mut self) -> Result<Option<Rational>> {
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        let start = self.pos;
        let tok = self.token(|b| b.is_ascii_digit() || matches!(b, b'.' | b'/' | b'-' | b'+'));
        match parse_rational(tok) {
            Ok(w) => Ok(Some(w)),
            Err(_) => {
                self.pos = start;
                self.error(format!("invalid branch length {tok:?}"))
            }
        }
    }
}

/// Parses a Newick string with integer leaf labels `1..=n` and exact branch
/// lengths (`a/b` or finite decimals). A length on the root is ignored.
pub fn parse_newick(text: &str) -> Result<WeightedTree> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        names: Vec::new(),
        edges: Vec::new(),
        leaves: BTreeMap::new(),
    };
    p.node()?;
    p.length()?;
    if p.peek() != Some(b';') {
        return p.error("expected ';'");
    }
    p.pos += 1;
    if p.peek().is_some() {
        return p.error("trailing input after ';'");
    }
    let n = p.leaves.len();
    if let Some(missing) = (1..=n).find(|l| !p.leaves.contains_key(l)) {
        return Err(Error::MissingLabel(missing));
    }
    let leaf_vertices = p.leaves.values().copied().collect();
    WeightedTree::with_names(p.names, p.edges, leaf_vertices)
}

/// Writes a tree as Newick. Non-root degree-2 vertices are merged into a
/// single branch, which leaves the tree unchanged up to weighted isomorphism.
pub fn serialize_newick(tree: &WeightedTree) -> String {
    let internal = |v: usize| !tree.is_leaf(v);
    let root = (0..tree.vertex_count())
        .find(|&v| internal(v) && tree.degree(v) >= 3)
        .or_else(|| (0..tree.vertex_count()).find(|&v| internal(v)));
    let mut out = String::new();
    match root {
        Some(root) => {
            write_group(tree, root, None, &mut out);
        }
        None => {
            // two leaves joined by one edge
            let w = &tree.edge(0).weight * frac(1, 2);
            let w = format_rational(&w);
            write!(out, "(1:{w},2:{w})").unwrap();
        }
    }
    out.push(';');
    out
}

fn write_group(tree: &WeightedTree, v: usize, parent: Option<usize>, out: &mut String) {
    out.push('(');
    let mut first = true;
    for &(child, edge) in tree.neighbors(v) {
        if Some(child) == parent {
            continue;
        }
        if !first {
            out.push(',');
        }
        first = false;
        let mut weight = tree.edge(edge).weight.clone();
        let (mut prev, mut cur) = (v, child);
        while !tree.is_leaf(cur) && tree.degree(cur) == 2 {
            let &(next, e) = tree.neighbors(cur).iter().find(|(x, _)| *x != prev).unwrap();
            weight += &tree.edge(e).weight;
            prev = cur;
            cur = next;
        }
        match tree.label(cur) {
            Some(label) => write!(out, "{label}").unwrap(),
            None => write_group(tree, cur, Some(prev), out),
        }
        debug_assert!(weight > Rational::zero());
        write!(out, ":{}", format_rational(&weight)).unwrap();
    }
    out.push(')');
    if let Some(name) = tree.vertex_name(v) {
        out.push_str(name);
    }
}
