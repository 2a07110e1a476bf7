use thiserror::Error;

pub type Result<T, E = WeError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeError {
    #[error("no evolvable layers")]
    NoEvolvableLayers,

    #[error("invalid layer spec for layer {layer_id}: {reason}")]
    InvalidLayer { layer_id: usize, reason: String },

    #[error("unknown layer {0}")]
    UnknownLayer(usize),

    #[error("filter {filter} out of range for layer {layer_id} with {count} filters")]
    FilterOutOfRange {
        layer_id: usize,
        filter: usize,
        count: usize,
    },

    #[error("layer {layer_id} expects {expected} elements, got {actual}")]
    ElementCount {
        layer_id: usize,
        expected: usize,
        actual: usize,
    },

    #[error("empty score group")]
    EmptyGroup,

    #[error("score for {layer_id}/{filter} is not part of the supplied group")]
    ScoreNotInGroup { layer_id: usize, filter: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shape mismatch between filters: {0}")]
    ShapeMismatch(String),

    #[error("empty slice")]
    EmptySlice,

    #[error("epoch {epoch} outside schedule range [{first}, {last}]")]
    EpochOutOfRange {
        epoch: usize,
        first: usize,
        last: usize,
    },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dominant pool of layer {layer_id} group {group} has {available} filters, need {needed}")]
    DominantPoolTooSmall {
        layer_id: usize,
        group: usize,
        available: usize,
        needed: usize,
    },

    #[error("a weight-evolution hook is already attached")]
    AlreadyAttached,

    #[error("unknown hook handle {0}")]
    UnknownHook(u64),

    #[error("parameter store: {0}")]
    Store(String),

    #[error("evolution aborted ({cause}); rollback failed: {rollback}")]
    RollbackFailed { cause: Box<WeError>, rollback: Box<WeError> },

    #[error("report i/o: {0}")]
    Io(String),
}
