//! Exact and certified arithmetic: radicals over the rationals and rational enclosures.

mod enclosure;
mod factor;
mod real;
mod surd;

pub use enclosure::{decimal_string, pow_positive, Enclosure, WORK_PREC};
pub(crate) use enclosure::log2_estimate;
pub use factor::factor;
pub use real::Real;
pub use surd::{Radical, Surd};
