use crate::recovery::RepairMove;

/// Errors shared across the crate. Solver verdicts that are ordinary
/// outcomes (an instance being infeasible, for example) are returned as
/// values, not through this type; see `oracle::Verdict`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance generation failed after {attempts} consecutive rejected samples")]
    GenerationFailed { attempts: u32 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("AV {av} has no feasible facility")]
    AvInfeasible { av: usize },

    #[error("search budget exhausted after {visited} nodes")]
    OracleLimit { visited: u64 },

    #[error("window of {len} slots exceeds the exhaustive-search bound of {bound}")]
    WindowTooLarge { len: u32, bound: u32 },

    #[error("repair failed at facility {facility}, slot {slot}: {detail}")]
    RecoveryFailed {
        facility: usize,
        slot: u32,
        detail: String,
        moves: Vec<RepairMove>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
