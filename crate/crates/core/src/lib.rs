//! Exact-arithmetic toolkit connecting weighted phylogenetic trees with
//! tropical Grassmannians and tropical linear spaces.
//!
//! The pipeline runs from a positively weighted, leaf-labelled tree
//! ([`WeightedTree`]) to its pairwise metric ([`DissimilarityMap`]), the
//! Steiner-weight maps on `r`-subsets ([`RDissimilarityMap`]), tropical
//! Plücker relation checks ([`tropcore`]) and the special points of the
//! associated tropical linear space ([`tlspace`]). All arithmetic is over
//! arbitrary-precision rationals, so every "achieved at least twice" and
//! every tightness test is decided exactly.

pub mod colex;
pub mod dissim;
pub mod error;
pub mod io;
pub mod rational;
pub mod tlspace;
pub mod treecore;
pub mod tropcore;
pub mod verify;

pub use colex::SubsetVector;
pub use dissim::{
    four_point_check, pairwise_map, phi_r, reconstruct_tree, steiner_r_map, DissimilarityMap,
    FourPointVerdict, RDissimilarityMap,
};
pub use error::{Error, Result};
pub use rational::Rational;
pub use tlspace::{
    circuit_membership, facet_condition, facet_scan, inequality_membership, internal_node_points,
    root_depth_point, subtree_point, CandidatePoint, CircuitReport, FacetReport, FacetScan,
    Interpretation, MembershipReport, Provenance,
};
pub use treecore::{
    leaf_free_subtrees, parse_newick, random_tree, serialize_newick, trees_isomorphic,
    PathToSubtree, Subtree, WeightedTree,
};
pub use tropcore::{
    classical_relation_check, dressian_report, extremum_achieved_twice, generate_plucker_relations,
    pluecker_minors, same_rowspace_check, trop_relation_check, Convention, DressianReport,
    Extremum, PlueckerRelation, RationalMatrix, RelationFamily, TropicalPlueckerVector,
    TropicalPolynomial, TropicalScalar,
};
pub use verify::{run_verify, VerifyConfig, VerifyReport};
