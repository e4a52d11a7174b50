//! Constructive decompositions: `k0`, hull families, interval ladders, maximal-cell
//! decompositions of indicators and Cantor complements, and atom transfer between grids.

mod cantor;
mod families;
mod k0;
mod transfer;

pub use cantor::{cantor_complement_decomposition, AhlforsSet, CantorReport, CANTOR_CELL_GUARD};
pub use families::{
    fitted_decay_ratio, indicator_decomposition, interval_partition_families, maximal_families, FamilyLadder,
    IndicatorDecomposition, Target,
};
pub(crate) use k0::{k0_nadic_scaled, nadic_cell_at};
pub use k0::{hull_families, k0_of_interval, k0_within, HullFamilies, IntervalQuery, K0};
pub use transfer::{atom_transfer, transfer_norm_bound, AtomTransfer};
