use thiserror::Error;

use crate::grid::CellAddress;

/// Errors raised by grid construction, function algebra and the decompositions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("address {address} exceeds the depth limit {limit}")]
    DepthLimit { address: CellAddress, limit: usize },
    #[error("address {0} does not name a cell of the grid")]
    UnknownCell(CellAddress),
    #[error("children of {parent} do not tile it: {detail}")]
    PartitionGap { parent: CellAddress, detail: String },
    #[error("child {child} has measure ratio {ratio} outside (0,1)")]
    RatioViolation { child: CellAddress, ratio: String },
    #[error("measure mismatch at {address}: {detail}")]
    MeasureMismatch { address: CellAddress, detail: String },
    #[error("support cells {0} and {1} overlap")]
    OverlappingSupport(CellAddress, CellAddress),
    #[error("operation needs a binary grid, found branching {0}")]
    NotBinary(usize),
    #[error("operation needs the triadic grid")]
    NotTriadic,
    #[error("cell enumeration guard exceeded: {0} cells")]
    Guard(u64),
    #[error("exotic selection infeasible: {required} needed, limit {limit}")]
    SelectionInfeasible { required: usize, limit: usize },
    #[error("value is not exactly representable: {0}")]
    NotExact(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Resource guards (depth, enumeration size, selection depth) as opposed to bad input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(
            self,
            Error::DepthLimit { .. } | Error::Guard(_) | Error::SelectionInfeasible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
