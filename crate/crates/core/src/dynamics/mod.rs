//! Right-hand sides of the forward population dynamics and the backward
//! value dynamics for every model variant.

mod drift;
mod grid;
mod sirsd;
mod structured;

pub use drift::{belief_drift, DriftKind, DriftSpec};
pub use grid::Grid;
pub use sirsd::{mfg_sirsd_value_rhs, sirsd_rhs, sirsd_value_rhs_with_policy, SirsdState, SirsdValues};
pub use structured::{
    band_densities, interface_flux, structured_forward_rhs, structured_value_rhs, structured_value_rhs_with_policy,
    BandLayout,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("band count m must be at least 1, got {0}")]
    TooFewBands(usize),
    #[error("Lax-Friedrichs coefficient {alpha} is below the drift magnitude {max_drift}")]
    AlphaTooSmall { alpha: f64, max_drift: f64 },
    #[error("invalid Lax-Friedrichs coefficient {0}")]
    InvalidAlpha(f64),
}
