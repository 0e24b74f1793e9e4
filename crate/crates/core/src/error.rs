use thiserror::Error;

use crate::game::SscWitness;
use crate::polymatroid::RankViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank table has {found} entries, expected 2^{m} = {expected}")]
    MalformedRank {
        m: usize,
        expected: usize,
        found: usize,
    },

    #[error("{0} resources exceed the supported maximum of {max}", max = crate::polymatroid::MAX_RESOURCES)]
    TooManyResources(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("demand {demand} exceeds capacity f(R) = {capacity}")]
    InfeasibleTruncation { demand: u64, capacity: u64 },

    #[error("enumeration exceeds the cap of {cap} items")]
    EnumerationTooLarge { cap: u64 },

    #[error("element ({resource}, {position}) is not in the chain poset")]
    InvalidElement { resource: usize, position: u64 },

    #[error("table of length {len} is too short, need at least {needed} entries")]
    TableTooShort { needed: usize, len: usize },

    #[error("cost evaluated at load {index} beyond table of length {len}")]
    TableOverflow { index: u64, len: usize },

    #[error("cost table decreases at index {index} ({before} > {after})")]
    CostDecrease {
        index: usize,
        before: u64,
        after: u64,
    },

    #[error("weights not admissible on resource {resource}: w({position}) > w({next})", next = position + 1)]
    NotAdmissible { resource: usize, position: u64 },

    #[error("weights missing for resource {resource}: have {have}, need {need}")]
    MissingWeights {
        resource: usize,
        have: usize,
        need: u64,
    },

    #[error("player {player}: rank function violates {violation}")]
    InvalidRank {
        player: usize,
        violation: RankViolation,
    },

    #[error("player {player}, resource {resource}: cost not {u}-truncated strongly semi-convex, witness {witness}")]
    CostNotSemiConvex {
        player: usize,
        resource: usize,
        u: u64,
        witness: SscWitness,
    },

    #[error("player {player}: cost table on resource {resource} decreases at index {index}")]
    CostNotMonotone {
        player: usize,
        resource: usize,
        index: usize,
    },

    #[error("player {player}: demand {demand} exceeds f(R) = {capacity}")]
    InfeasibleDemand {
        player: usize,
        demand: u64,
        capacity: u64,
    },

    #[error("player {player}: {reason}")]
    InvalidProfile { player: usize, reason: String },

    #[error("arithmetic overflow")]
    Overflow,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("instance generation gave up after {attempts} attempts")]
    GenerationExhausted { attempts: usize },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid document at {path}: {message}")]
    Document { path: String, message: String },
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Internal,
    Usage,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Contract(_) | Error::Invariant(_) | Error::Overflow => ErrorClass::Internal,
            Error::EnumerationTooLarge { .. } | Error::GenerationExhausted { .. } => {
                ErrorClass::Usage
            }
            _ => ErrorClass::Validation,
        }
    }
}
