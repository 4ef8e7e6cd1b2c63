use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("newick syntax error at byte {pos}: {msg}")]
    NewickSyntax { pos: usize, msg: String },
    #[error("duplicate leaf label {0}")]
    DuplicateLabel(usize),
    #[error("missing leaf label {0}")]
    MissingLabel(usize),
    #[error("nonpositive edge weight {0}")]
    NonpositiveWeight(String),
    #[error("unknown leaf label {0}")]
    UnknownLabel(usize),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("subtree is not hosted by this tree: {0}")]
    SubtreeNotHosted(String),
    #[error("subtree contains leaf vertex {0}")]
    SubtreeContainsLeaf(usize),
    #[error("{what} = {value} out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("invalid weight range: {0}")]
    InvalidRange(String),
    #[error("dissimilarity map is not additive: four-point condition fails at {0:?}")]
    NotAdditive([usize; 4]),
    #[error("additive map forces a nonpositive branch length while inserting leaf {leaf}")]
    NonpositiveEdge { leaf: usize },
    #[error("all values are tropically infinite")]
    AllInfinite,
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("matrix is not of full row rank")]
    RankDeficient,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
