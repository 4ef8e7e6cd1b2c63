//! Positively weighted trees with leaves labelled `1..=n`, and the path and
//! Steiner-subtree queries built on them.

mod newick;
mod random;
mod subtree;

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{DefaultHasher, Hash, Hasher};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

pub use newick::{parse_newick, serialize_newick};
pub use random::{random_tree, random_tree_with_rng};
pub use subtree::{leaf_free_subtrees, PathToSubtree, Subtree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: Rational,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// A tree whose edges carry positive exact weights and whose degree-1
/// vertices are labelled bijectively by `1..=n`.
///
/// Vertices are opaque `usize` ids in `0..vertex_count()`. Degree-2 vertices
/// are allowed. Internally the tree is rooted at vertex 0 so that path
/// queries reduce to walking up to the lowest common ancestor.
#[derive(Debug, Clone)]
pub struct WeightedTree {
    names: Vec<Option<String>>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    leaves: Vec<usize>,
    labels: Vec<Option<usize>>,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    root_distance: Vec<Rational>,
    preorder: Vec<usize>,
    fingerprint: u64,
}

impl WeightedTree {
    /// Builds and validates a tree. `leaf_vertices[i]` is the vertex carrying
    /// label `i + 1`.
    pub fn new(
        vertex_count: usize,
        edges: Vec<(usize, usize, Rational)>,
        leaf_vertices: Vec<usize>,
    ) -> Result<Self> {
        Self::with_names(vec![None; vertex_count], edges, leaf_vertices)
    }

    pub fn with_names(
        names: Vec<Option<String>>,
        edges: Vec<(usize, usize, Rational)>,
        leaf_vertices: Vec<usize>,
    ) -> Result<Self> {
        let vertex_count = names.len();
        if vertex_count < 2 {
            return Err(Error::InvalidTree("a tree needs at least two vertices".into()));
        }
        if edges.len() + 1 != vertex_count {
            return Err(Error::InvalidTree(format!(
                "{} edges for {} vertices",
                edges.len(),
                vertex_count
            )));
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut stored = Vec::with_capacity(edges.len());
        for (id, (u, v, weight)) in edges.into_iter().enumerate() {
            if u >= vertex_count || v >= vertex_count || u == v {
                return Err(Error::InvalidTree(format!("bad edge ({u}, {v})")));
            }
            if weight <= Rational::zero() {
                return Err(Error::NonpositiveWeight(format_rational(&weight)));
            }
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
            stored.push(Edge { u, v, weight });
        }

        let mut parent = vec![None; vertex_count];
        let mut depth = vec![0; vertex_count];
        let mut root_distance = vec![Rational::zero(); vertex_count];
        let mut seen = vec![false; vertex_count];
        let mut preorder = Vec::with_capacity(vertex_count);
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            preorder.push(x);
            for &(y, e) in adjacency[x].iter().rev() {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    depth[y] = depth[x] + 1;
                    root_distance[y] = &root_distance[x] + &stored[e].weight;
                    stack.push(y);
                }
            }
        }
        if preorder.len() != vertex_count {
            return Err(Error::InvalidTree("graph is not connected".into()));
        }

        let mut labels = vec![None; vertex_count];
        for (i, &v) in leaf_vertices.iter().enumerate() {
            if v >= vertex_count {
                return Err(Error::InvalidTree(format!("leaf vertex {v} out of range")));
            }
            if labels[v].is_some() {
                return Err(Error::InvalidTree(format!("vertex {v} labelled twice")));
            }
            if adjacency[v].len() != 1 {
                return Err(Error::InvalidTree(format!(
                    "label {} sits on vertex {v} of degree {}",
                    i + 1,
                    adjacency[v].len()
                )));
            }
            labels[v] = Some(i + 1);
        }
        if let Some(v) = (0..vertex_count).find(|&v| adjacency[v].len() == 1 && labels[v].is_none())
        {
            return Err(Error::InvalidTree(format!("degree-1 vertex {v} has no label")));
        }

        let mut hasher = DefaultHasher::new();
        for e in &stored {
            (e.u, e.v, e.weight.numer(), e.weight.denom()).hash(&mut hasher);
        }
        leaf_vertices.hash(&mut hasher);
        let fingerprint = hasher.finish();

        Ok(Self {
            fingerprint,
            names,
            edges: stored,
            adjacency,
            leaves: leaf_vertices,
            labels,
            parent,
            depth,
            root_distance,
            preorder,
        })
    }

    /// Number of labelled leaves.
    pub fn n(&self) -> usize {
        self.leaves.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// `(neighbour, edge id)` pairs.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.labels[v].is_some()
    }

    pub fn label(&self, v: usize) -> Option<usize> {
        self.labels[v]
    }

    pub fn vertex_name(&self, v: usize) -> Option<&str> {
        self.names[v].as_deref()
    }

    pub fn leaf_vertex(&self, label: usize) -> Result<usize> {
        if label == 0 || label > self.n() {
            return Err(Error::UnknownLabel(label));
        }
        Ok(self.leaves[label - 1])
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(|&v| !self.is_leaf(v))
    }

    pub fn total_weight(&self) -> Rational {
        self.edges.iter().map(|e| &e.weight).sum()
    }

    /// Looks a vertex up by its Newick name, falling back to a numeric id.
    pub fn find_vertex(&self, key: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n.as_deref() == Some(key))
            .or_else(|| key.parse().ok().filter(|&v| v < self.vertex_count()))
    }

    /// Hash of the edge list and leaf assignment; identifies the host of a
    /// [`Subtree`].
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap().0;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap().0;
        }
        while a != b {
            a = self.parent[a].unwrap().0;
            b = self.parent[b].unwrap().0;
        }
        a
    }

    /// Vertex sequence of the unique path from `a` to `b`, both included.
    pub fn path_vertices(&self, a: usize, b: usize) -> Vec<usize> {
        let top = self.lca(a, b);
        let mut up = vec![a];
        let mut x = a;
        while x != top {
            x = self.parent[x].unwrap().0;
            up.push(x);
        }
        let mut down = Vec::new();
        let mut y = b;
        while y != top {
            down.push(y);
            y = self.parent[y].unwrap().0;
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Edge ids on the unique path from `a` to `b`.
    pub fn path_edges(&self, a: usize, b: usize) -> Vec<usize> {
        let top = self.lca(a, b);
        let mut out = Vec::new();
        for start in [a, b] {
            let mut x = start;
            while x != top {
                let (p, e) = self.parent[x].unwrap();
                out.push(e);
                x = p;
            }
        }
        out
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> Rational {
        let top = self.lca(a, b);
        &self.root_distance[a] + &self.root_distance[b] - &self.root_distance[top] * Rational::from_integer(2.into())
    }

    /// Sum of edge weights on the path between two leaves; 0 when `u == v`.
    pub fn path_weight(&self, u: usize, v: usize) -> Result<Rational> {
        let a = self.leaf_vertex(u)?;
        let b = self.leaf_vertex(v)?;
        Ok(self.vertex_distance(a, b))
    }

    /// Distances from every leaf (in label order) to vertex `v`.
    pub fn leaf_distances(&self, v: usize) -> Vec<Rational> {
        self.leaves.iter().map(|&l| self.vertex_distance(l, v)).collect()
    }

    /// Smallest subtree containing the given leaves.
    pub fn steiner_subtree(&self, labels: &[usize]) -> Result<Subtree> {
        let (&first, rest) = labels
            .split_first()
            .ok_or_else(|| Error::InvalidParameters("empty leaf set".into()))?;
        let anchor = self.leaf_vertex(first)?;
        let mut edges = BTreeSet::new();
        for &label in rest {
            let v = self.leaf_vertex(label)?;
            edges.extend(self.path_edges(anchor, v));
        }
        let mut vertices: BTreeSet<usize> = edges
            .iter()
            .flat_map(|&e| [self.edges[e].u, self.edges[e].v])
            .collect();
        vertices.insert(anchor);
        Ok(Subtree::from_parts(self, vertices, edges))
    }

    /// For every edge, the set of leaf labels on the side away from vertex 0.
    fn clade_labels(&self) -> Vec<(usize, BTreeSet<usize>)> {
        let mut below: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.vertex_count()];
        for &v in self.preorder.iter().rev() {
            if let Some(l) = self.labels[v] {
                below[v].insert(l);
            }
            if let Some((p, _)) = self.parent[v] {
                let mine = below[v].clone();
                below[p].extend(mine);
            }
        }
        self.preorder
            .iter()
            .filter_map(|&v| self.parent[v].map(|(_, e)| (e, below[v].clone())))
            .collect()
    }

    /// Leaf bipartitions with the total weight carried by each. Edges that
    /// induce the same split are exactly the chains through degree-2
    /// vertices, so summing them suppresses those vertices.
    pub fn split_weights(&self) -> BTreeMap<BTreeSet<usize>, Rational> {
        let all: BTreeSet<usize> = (1..=self.n()).collect();
        let mut out: BTreeMap<BTreeSet<usize>, Rational> = BTreeMap::new();
        for (e, side) in self.clade_labels() {
            let key = if side.contains(&1) {
                all.difference(&side).copied().collect()
            } else {
                side
            };
            *out.entry(key).or_insert_with(Rational::zero) += &self.edges[e].weight;
        }
        out
    }

    /// Copy of the tree with every edge weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| (e.u, e.v, &e.weight * factor))
            .collect();
        Self::with_names(self.names.clone(), edges, self.leaves.clone())
    }
}

/// True iff a label- and weight-preserving isomorphism exists once degree-2
/// vertices are suppressed.
pub fn trees_isomorphic(t1: &WeightedTree, t2: &WeightedTree) -> bool {
    t1.n() == t2.n() && t1.split_weights() == t2.split_weights()
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{frac, int};
    use proptest::prelude::*;

    #[test]
    fn q4_path_weights() {
        let t = q4();
        assert_eq!(t.path_weight(1, 2).unwrap(), int(2));
        assert_eq!(t.path_weight(1, 3).unwrap(), int(3));
        assert_eq!(t.path_weight(1, 1).unwrap(), int(0));
        assert_eq!(t.path_weight(1, 5), Err(Error::UnknownLabel(5)));
        assert_eq!(t.path_weight(0, 1), Err(Error::UnknownLabel(0)));
    }

    #[test]
    fn q4_steiner_subtrees() {
        let t = q4();
        let (a, b) = q4_hubs(&t);
        let s = t.steiner_subtree(&[1, 2, 3]).unwrap();
        assert_eq!(s.weight(), &int(4));
        assert_eq!(s.edges().len(), 4);
        assert!(s.contains_vertex(a) && s.contains_vertex(b));
        assert!(!s.contains_vertex(t.leaf_vertex(4).unwrap()));

        let all = t.steiner_subtree(&[1, 2, 3, 4]).unwrap();
        assert_eq!(all.weight(), &int(5));
        assert_eq!(all.edges().len(), 5);

        let single = t.steiner_subtree(&[1]).unwrap();
        assert_eq!(single.weight(), &int(0));
        assert_eq!(single.vertices().len(), 1);
        assert!(single.edges().is_empty());

        assert!(t.steiner_subtree(&[]).is_err());
        assert_eq!(t.steiner_subtree(&[1, 9]), Err(Error::UnknownLabel(9)));
    }

    #[test]
    fn isomorphism_ignores_vertex_names_and_order() {
        let t = q4();
        let renamed = parse_newick("(3:1,(2:1,1:1)x:1,4:1)root;").unwrap();
        assert!(trees_isomorphic(&t, &renamed));
        let heavier = parse_newick("((1:1,2:1):2,3:1,4:1);").unwrap();
        assert!(!trees_isomorphic(&t, &heavier));
        let swapped = parse_newick("((1:1,3:1):1,2:1,4:1);").unwrap();
        assert!(!trees_isomorphic(&t, &swapped));
        assert!(!trees_isomorphic(&t, &s3()));
    }

    #[test]
    fn isomorphism_suppresses_degree_two() {
        let t = q4();
        let subdivided = parse_newick("((1:1,2:1):1/2,(3:1,4:1):1/2);").unwrap();
        assert_eq!(subdivided.degree(0), 2);
        assert!(trees_isomorphic(&t, &subdivided));

        // same thing built by hand, with the degree-2 vertex away from the root
        let half = frac(1, 2);
        let built = WeightedTree::new(
            7,
            vec![
                (0, 1, int(1)),
                (0, 2, int(1)),
                (0, 6, half.clone()),
                (6, 3, half),
                (3, 4, int(1)),
                (3, 5, int(1)),
            ],
            vec![1, 2, 4, 5],
        )
        .unwrap();
        assert!(trees_isomorphic(&t, &built));
    }

    #[test]
    fn constructor_rejects_invalid_graphs() {
        let one = || int(1);
        // cycle plus isolated vertex
        assert!(WeightedTree::new(4, vec![(0, 1, one()), (1, 2, one()), (2, 0, one())], vec![]).is_err());
        // unlabelled leaf
        assert!(WeightedTree::new(3, vec![(0, 1, one()), (0, 2, one())], vec![1]).is_err());
        // label on an internal vertex
        assert!(WeightedTree::new(3, vec![(0, 1, one()), (0, 2, one())], vec![0, 1]).is_err());
        // zero weight
        assert_eq!(
            WeightedTree::new(2, vec![(0, 1, int(0))], vec![0, 1]).unwrap_err(),
            Error::NonpositiveWeight("0".into())
        );
        // a bare edge is a valid two-leaf tree
        let e = WeightedTree::new(2, vec![(0, 1, int(2))], vec![0, 1]).unwrap();
        assert_eq!(e.path_weight(1, 2).unwrap(), int(2));
    }

    fn path_edge_set(t: &WeightedTree, a: usize, b: usize) -> BTreeSet<usize> {
        t.path_edges(a, b).into_iter().collect()
    }

    proptest! {
        #[test]
        fn triangle_inequality_with_equality_on_path(n in 3usize..9, seed in any::<u64>(), u in 1usize..9, v in 1usize..9, w in 1usize..9) {
            let t = random_tree(n, seed, &int(1), &int(10)).unwrap();
            let (u, v, w) = ((u - 1) % n + 1, (v - 1) % n + 1, (w - 1) % n + 1);
            let uw = t.path_weight(u, w).unwrap();
            let uv = t.path_weight(u, v).unwrap();
            let vw = t.path_weight(v, w).unwrap();
            prop_assert!(uw <= &uv + &vw);
            let lv = t.leaf_vertex(v).unwrap();
            let on_path = t.path_vertices(t.leaf_vertex(u).unwrap(), t.leaf_vertex(w).unwrap()).contains(&lv);
            prop_assert_eq!(uw == &uv + &vw, on_path);
        }

        #[test]
        fn steiner_is_union_of_pairwise_paths(n in 3usize..9, seed in any::<u64>(), mask in 1u32..256) {
            let t = random_tree(n, seed, &int(1), &int(10)).unwrap();
            let labels: Vec<usize> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).take(6).collect();
            prop_assume!(!labels.is_empty());
            let s = t.steiner_subtree(&labels).unwrap();
            let mut oracle = BTreeSet::new();
            for (i, &x) in labels.iter().enumerate() {
                for &y in &labels[i + 1..] {
                    oracle.extend(path_edge_set(&t, t.leaf_vertex(x).unwrap(), t.leaf_vertex(y).unwrap()));
                }
            }
            prop_assert_eq!(s.edges(), &oracle);
        }

        #[test]
        fn newick_round_trip(n in 2usize..10, seed in any::<u64>()) {
            let t = if n == 2 {
                parse_newick("(1:3/2,2:1);").unwrap()
            } else {
                random_tree(n, seed, &frac(1, 3), &int(7)).unwrap()
            };
            let text = serialize_newick(&t);
            let back = parse_newick(&text).unwrap();
            prop_assert!(trees_isomorphic(&t, &back));
            prop_assert_eq!(serialize_newick(&back), text);
        }
    }
}
