//! Mean-field-game epidemic models with immunity structure.
//!
//! Rational noninfected individuals pick their daily contact rate to trade
//! social utility against infection risk. Four model variants share one
//! solver:
//!
//! * SIRSD with myopic contacts (no game),
//! * MFG-SIRSD with instantaneous, observed loss of immunity,
//! * observable waning immunity on a band grid over `p ∈ [0, 1]`,
//! * unobserved disappearing immunity, where `p` is a Bayesian belief.
//!
//! Nash equilibria are computed as solutions of a forward-backward boundary
//! value problem, optionally with a finite set of uncertain horizons.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod dynamics;
pub mod game;
pub mod horizon;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod scenarios;

pub use model::{ContactRate, EpiParams, HealthStatus, ModelParams, Penalties, UtilityParams};
