use std::collections::BTreeSet;

use serde::Serialize;

use super::WeightedTree;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A connected subgraph of a host tree, possibly a single vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subtree {
    vertices: BTreeSet<usize>,
    edges: BTreeSet<usize>,
    #[serde(with = "crate::rational::serde_str")]
    weight: Rational,
    #[serde(skip)]
    host: u64,
}

/// The unique shortest path from a leaf to a subtree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathToSubtree {
    #[serde(with = "crate::rational::serde_str")]
    pub distance: Rational,
    pub attachment: usize,
    /// Path vertices strictly between the leaf and the attachment vertex.
    pub interior: Vec<usize>,
}

impl Subtree {
    pub(super) fn from_parts(
        tree: &WeightedTree,
        vertices: BTreeSet<usize>,
        edges: BTreeSet<usize>,
    ) -> Self {
        let weight = edges.iter().map(|&e| &tree.edge(e).weight).sum();
        Self {
            vertices,
            edges,
            weight,
            host: tree.fingerprint(),
        }
    }

    /// The subtree induced by a vertex set, which must be nonempty and
    /// connected in `tree`.
    pub fn induced(tree: &WeightedTree, vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let vertices: BTreeSet<usize> = vertices.into_iter().collect();
        if vertices.is_empty() {
            return Err(Error::InvalidParameters("empty subtree".into()));
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= tree.vertex_count()) {
            return Err(Error::SubtreeNotHosted(format!("vertex {v} out of range")));
        }
        let edges: BTreeSet<usize> = tree
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| vertices.contains(&e.u) && vertices.contains(&e.v))
            .map(|(i, _)| i)
            .collect();
        if edges.len() + 1 != vertices.len() {
            return Err(Error::InvalidParameters(format!(
                "vertex set {vertices:?} is not connected"
            )));
        }
        Ok(Self::from_parts(tree, vertices, edges))
    }

    pub fn single(tree: &WeightedTree, v: usize) -> Result<Self> {
        Self::induced(tree, [v])
    }

    pub fn vertices(&self) -> &BTreeSet<usize> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<usize> {
        &self.edges
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    /// Total edge weight; zero for a single vertex.
    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    pub fn is_subtree_of(&self, other: &Subtree) -> bool {
        self.vertices.is_subset(&other.vertices) && self.edges.is_subset(&other.edges)
    }

    pub fn leaf_free(&self, tree: &WeightedTree) -> bool {
        self.vertices.iter().all(|&v| !tree.is_leaf(v))
    }

    /// Checks that this subtree is a connected subgraph of `tree`.
    pub fn check_hosted(&self, tree: &WeightedTree) -> Result<()> {
        if self.host != tree.fingerprint() {
            return Err(Error::SubtreeNotHosted("built on a different tree".into()));
        }
        for &e in &self.edges {
            let edge = tree.edge(e);
            if !self.vertices.contains(&edge.u) || !self.vertices.contains(&edge.v) {
                return Err(Error::SubtreeNotHosted(format!("edge {e} leaves the vertex set")));
            }
        }
        let weight: Rational = self.edges.iter().map(|&e| &tree.edge(e).weight).sum();
        if weight != self.weight {
            return Err(Error::SubtreeNotHosted("edge weights differ".into()));
        }
        Ok(())
    }
}

impl WeightedTree {
    /// Shortest path from leaf `label` to subtree `s`.
    pub fn distance_to_subtree(&self, label: usize, s: &Subtree) -> Result<PathToSubtree> {
        s.check_hosted(self)?;
        let source = self.leaf_vertex(label)?;
        let target = *s.vertices().iter().next().unwrap();
        // the first subtree vertex met on the way to any subtree vertex is
        // the attachment point
        let path = self.path_vertices(source, target);
        let hit = path.iter().position(|v| s.contains_vertex(*v)).unwrap();
        let attachment = path[hit];
        let interior = if hit == 0 {
            Vec::new()
        } else {
            path[1..hit].to_vec()
        };
        Ok(PathToSubtree {
            distance: self.vertex_distance(source, attachment),
            attachment,
            interior,
        })
    }
}

/// Every connected subgraph of `tree` that avoids all leaves, ordered by size
/// and then by sorted vertex list.
pub fn leaf_free_subtrees(tree: &WeightedTree) -> Vec<Subtree> {
    let internal: Vec<usize> = tree.internal_vertices().collect();
    let mut found: Vec<BTreeSet<usize>> = Vec::new();
    for &v in &internal {
        let ext: Vec<usize> = tree
            .neighbors(v)
            .iter()
            .map(|&(u, _)| u)
            .filter(|&u| u > v && !tree.is_leaf(u))
            .collect();
        extend(tree, v, BTreeSet::from([v]), ext, &mut found);
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    found
        .into_iter()
        .map(|vs| Subtree::induced(tree, vs).expect("enumerated sets are connected"))
        .collect()
}

// Connected-set enumeration with an extension list; each set is produced
// exactly once from its smallest vertex `root`.
fn extend(
    tree: &WeightedTree,
    root: usize,
    current: BTreeSet<usize>,
    mut extension: Vec<usize>,
    found: &mut Vec<BTreeSet<usize>>,
) {
    found.push(current.clone());
    while let Some(w) = extension.pop() {
        let mut next_ext = extension.clone();
        for &(u, _) in tree.neighbors(w) {
            if u > root
                && !tree.is_leaf(u)
                && !current.contains(&u)
                && !extension.contains(&u)
                && !tree.neighbors(u).iter().any(|(x, _)| current.contains(x))
            {
                next_ext.push(u);
            }
        }
        let mut grown = current.clone();
        grown.insert(w);
        extend(tree, root, grown, next_ext, found);
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{parse_newick, random_tree};
    use super::*;
    use crate::rational::int;

    #[test]
    fn distance_examples_on_q4() {
        let t = q4();
        let (a, b) = q4_hubs(&t);
        let sa = Subtree::single(&t, a).unwrap();
        let p = t.distance_to_subtree(3, &sa).unwrap();
        assert_eq!((p.distance, p.attachment, p.interior), (int(2), a, vec![b]));
        let p = t.distance_to_subtree(1, &sa).unwrap();
        assert_eq!((p.distance, p.attachment, p.interior), (int(1), a, vec![]));
        let ab = Subtree::induced(&t, [a, b]).unwrap();
        assert_eq!(ab.weight(), &int(1));
        let p = t.distance_to_subtree(1, &ab).unwrap();
        assert_eq!((p.distance, p.attachment, p.interior), (int(1), a, vec![]));
        let p = t.distance_to_subtree(4, &ab).unwrap();
        assert_eq!((p.distance, p.attachment), (int(1), b));
        assert_eq!(sa.weight(), &int(0));
    }

    #[test]
    fn leaf_inside_subtree_is_at_distance_zero() {
        let t = q4();
        let s = t.steiner_subtree(&[1, 3]).unwrap();
        let p = t.distance_to_subtree(1, &s).unwrap();
        assert_eq!(p.distance, int(0));
        assert_eq!(p.attachment, t.leaf_vertex(1).unwrap());
    }

    #[test]
    fn foreign_subtree_is_rejected() {
        let t = q4();
        let other = parse_newick("(1:1,2:1,3:1,4:1,5:1);").unwrap();
        let s = Subtree::single(&other, 0).unwrap();
        assert!(matches!(t.distance_to_subtree(1, &s), Err(Error::SubtreeNotHosted(_))));
        assert!(Subtree::induced(&t, [99]).is_err());
        let (a, _) = q4_hubs(&t);
        let l3 = t.leaf_vertex(3).unwrap();
        assert!(Subtree::induced(&t, [a, l3]).is_err());
    }

    #[test]
    fn enumerates_leaf_free_subtrees_of_q4() {
        let t = q4();
        let (a, b) = q4_hubs(&t);
        let all = leaf_free_subtrees(&t);
        let sets: Vec<Vec<usize>> = all.iter().map(|s| s.vertices().iter().copied().collect()).collect();
        let mut expected = vec![vec![a], vec![b], vec![a.min(b), a.max(b)]];
        expected.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
        assert_eq!(sets, expected);
    }

    /// Brute force over all subsets of internal vertices.
    fn brute_force_count(t: &WeightedTree) -> usize {
        let internal: Vec<usize> = t.internal_vertices().collect();
        (1u32..(1 << internal.len()))
            .filter(|mask| {
                let vs = internal.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &v)| v);
                Subtree::induced(t, vs).is_ok()
            })
            .count()
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for seed in 0..20 {
            for n in [3, 5, 7, 9] {
                let t = random_tree(n, seed, &int(1), &int(3)).unwrap();
                let all = leaf_free_subtrees(&t);
                assert_eq!(all.len(), brute_force_count(&t));
                let distinct: BTreeSet<_> = all.iter().map(|s| s.vertices().clone()).collect();
                assert_eq!(distinct.len(), all.len());
                assert!(all.iter().all(|s| s.leaf_free(&t)));
            }
        }
        // a path of internal vertices: 4 + 3 + 2 + 1 connected pieces
        let cat = parse_newick("(1:1,2:1,(3:1,(4:1,(5:1,6:1):1):1):1);").unwrap();
        assert_eq!(leaf_free_subtrees(&cat).len(), 10);
    }
}
