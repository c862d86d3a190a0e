//! Geometric phases of a precessing spin-1/2 in a polarized neutron
//! interferometer.
//!
//! The crate computes diagonal and off-diagonal phases from the 2×2 operator
//! algebra, checks them against Poincaré-sphere solid angles, synthesizes
//! interferograms with imperfect polarization, reduced contrast and counting
//! noise, and recovers phases from them by least-squares sinusoid fits.

pub mod beamline;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod phases;
pub mod spinor;

pub use beamline::{
    h_beam_intensity, mixed_intensity, o_beam_intensity, o_beam_intensity_closed_form,
    synthesize_interferogram, synthesize_pair, Beam, BeamConfig, Interferogram,
};
pub use error::{Error, Result};
pub use fit::{
    fit_sinusoid, measure_shift, phase_shift, visibility_curve, ShiftMeasurement, SinusoidFit,
    K_SIGMA,
};
pub use geometry::{
    direct_evolution_loop, geodesic_arc, loop_solid_angle, off_diagonal_loop,
    phase_from_solid_angle, precession_trajectory, to_bloch, Arc, ArcKind, BlochLoop, BlochVector,
    DEFAULT_SAMPLES,
};
pub use phases::{
    dynamical_phase, generalized_bp_phase, off_diagonal_phase, pancharatnam_phase_hbeam, phase_of,
    Branch, Path, PhaseResult, EPSILON_UNDEFINED,
};
pub use spinor::{
    basis_transform, conjugate_evolution, make_plus_state, orthogonal, precession_unitary,
    projector, Operator2, PolarAngle, RotationAngle, Spinor,
};

/// Version tag written into every JSON document this crate produces.
pub const SCHEMA_VERSION: u32 = 1;
