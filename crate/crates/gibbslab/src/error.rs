//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, GibbsError>;

#[derive(Debug, Error)]
pub enum GibbsError {
    /// An enumeration or tree build would exceed the configured size limit.
    #[error("capacity exceeded: {what} requires {needed} states, limit is {limit}")]
    Capacity {
        what: String,
        needed: u128,
        limit: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {0} is not in the tree")]
    UnknownVertex(usize),

    #[error("sphere index {n} out of range (tree depth is {depth})")]
    SphereOutOfRange { n: usize, depth: usize },

    #[error("configuration supports overlap (vertex {0} assigned twice)")]
    OverlappingSupports(usize),

    #[error("configuration support mismatch: {0}")]
    SupportMismatch(String),

    #[error("boundary field has no value at vertex {0}")]
    MissingFieldValue(usize),

    #[error("tree too shallow: {0}")]
    ShallowTree(String),

    #[error("operation requires the two-point spin space {{-1, +1}}, got {0} values")]
    NonBinarySpinSpace(usize),

    #[error("operation requires the Ising interaction (product rho on {{-1, +1}})")]
    NotIsing,

    #[error("field value {0} does not match any spin value of a table-backed model")]
    FieldValueNotInSpinSpace(f64),

    #[error("vertex {vertex} has no successors at the truncation boundary")]
    LeafVertex { vertex: usize },

    #[error("model file is invalid: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GibbsError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            GibbsError::Capacity { .. } => 3,
            _ => 2,
        }
    }
}
