//! Direct measurement of the Wigner function by photon counting.
//!
//! The Wigner function at a phase-space point is the expectation value of the
//! displaced photon-number parity operator. This crate simulates that scheme
//! end to end:
//!
//! * [`fock`]: truncated Fock-space states, displacement operators, parity and
//!   an exact two-mode beam-splitter reference model.
//! * [`quasiprob`]: closed-form s-ordered quasidistributions, the mapping from
//!   detection losses to the ordering parameter and the mode-mismatch envelope.
//! * [`experiment`]: exact photon statistics seen by a lossy detector behind
//!   the displacing beam splitter, and the parity-sum estimator applied to them.
//! * [`estimator`]: finite counting runs sampled from those statistics.
//! * [`scan`]: polar-grid scans, serialization and estimator-vs-oracle reports.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod experiment;
pub mod fock;
pub mod io;
mod par;
pub mod quadrature;
pub mod quasiprob;
pub mod scan;

pub use error::{Error, Result};
pub use estimator::{
    estimate_parity, repeat_study, sample_counts, CountHistogram, CountingConfig, ParityEstimate,
    RepeatSummary,
};
pub use experiment::{
    bs_approximation_error, displaced_statistics, loss_transform, parity_sum, LossChannel,
};
pub use fock::{
    apply_displacement, coherent_state, displacement_matrix, parity_expectation,
    photon_statistics, two_mode_bs_oracle, wigner_point, DensityMatrix, FockCutoff, PhasePoint,
    PhotonStatistics, StateVector,
};
pub use quasiprob::{
    analytic_quasidist, mode_mismatch_envelope, normalization_check, predicted_p, s_from_losses,
    ChannelParams, OrderingParam, PhaseNoiseModel, SignalSpec,
};
pub use scan::{
    build_polar_grid, compare_scan, run_scan, run_scan_with, ComparisonReport, Execution,
    PolarGrid, ScanRecord, ScanResult,
};

pub use num_complex::Complex64;

/// 2/π, the value of the parity-sum estimator for the vacuum at the origin.
pub const TWO_OVER_PI: f64 = std::f64::consts::FRAC_2_PI;
