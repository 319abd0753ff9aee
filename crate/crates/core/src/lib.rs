//! Phase statistics for the planar rotor and the harmonic oscillator.
//!
//! States are finite Fourier expansions on the circle ([`modes`]). The phase
//! uncertainty is the windowed variance of `θ` minimized over the window
//! origin ([`phase_stats`]), and it obeys a modified uncertainty relation with
//! the angular momentum ([`relations`]). [`series`] and [`bases`] cover the
//! regularized delta-function series and the half-circle bases of the
//! oscillator.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bases;
pub mod cli;
pub mod error;
pub mod modes;
pub mod phase_stats;
pub(crate) mod quadrature;
pub mod relations;
pub mod series;

pub use error::{PhaseError, Result};
pub use modes::{
    density_from_state, eval_wavefunction, make_coherent_phase_state, make_coherent_state, make_number_state,
    make_rotor_wavepacket, make_two_mode_superposition, make_two_peak_density, project_nonnegative, Complex,
    ModeExpansion, PhaseDensity, Truncation,
};
pub use phase_stats::{
    extremality_residual, find_extrema, grid_oracle, phase_uncertainty, windowed_stats, ExtremumKind, PhaseProfile,
    PhaseSource, UncertaintyResult, WindowedStats,
};
pub use quadrature::gauss_legendre;
pub use relations::{check_relation_at, check_relation_min, momentum_stats, MomentumStats, RelationReport};
