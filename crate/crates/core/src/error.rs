use thiserror::Error;

use crate::set::PlayerSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid cost function: {0}")]
    InvalidCost(String),

    #[error("invalid game model: {0}")]
    InvalidModel(String),

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),

    #[error("unknown resource `{0}`")]
    UnknownResource(String),

    #[error("arity mismatch: cost function has arity {arity}, got {what}")]
    ArityMismatch { arity: usize, what: String },

    #[error("invalid weight system: {0}")]
    InvalidWeights(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("permutation enumeration over {size} users exceeds the cap of {cap}")]
    PermutationCap { size: usize, cap: usize },

    #[error("profile space of {profiles} exceeds the enumeration cap of {cap}")]
    CapExceeded { profiles: String, cap: u64 },

    #[error("share table has no entry for user set {0:?} and no fallback protocol")]
    NoTableEntry(PlayerSet),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("more than {cap} simple paths between `{from}` and `{to}`")]
    PathCap { from: String, to: String, cap: usize },

    #[error("invalid gadget parameters: {0}")]
    InvalidGadget(String),

    #[error("protocol shares are not monotone on the constant-cost edge")]
    NonMonotoneShares,
}

impl Error {
    /// True for errors raised by the profile-space enumeration cap.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::PathCap { .. } | Error::PermutationCap { .. }
        )
    }
}
