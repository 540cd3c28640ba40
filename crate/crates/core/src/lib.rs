//! Steady-state and two-time photon–phonon statistics of a driven
//! optomechanical cavity with quadratic (two-phonon) coupling.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod cli;
pub mod correlations;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod regression;
pub mod steady;
pub mod sweep;
pub mod weakdrive;

pub use correlations::{g2_zero, record, CorrelationKind, CorrelationRecord};
pub use error::{Error, Result};
pub use hilbert::{CsOperator, Ladders, TruncatedSpace};
pub use model::{build_h_eff, build_liouvillian, derive_effective, j_opt, EffectiveParams, PhysicalParams};
pub use regression::{g2_tau, propagate, CorrelationSeries, PropagationMethod};
pub use steady::{steady_state, DensityMatrix};
