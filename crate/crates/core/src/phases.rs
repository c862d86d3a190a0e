//! Diagonal, off-diagonal and dynamical phases of a precessing spin-1/2.
//!
//! All phases are reported in degrees on `(−180°, 180°]`, with `+180°` as the
//! representative of a sign flip. A phase whose underlying complex number has
//! modulus below [`EPSILON_UNDEFINED`] is reported with `defined = false`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spinor::{
    make_plus_state, orthogonal, precession_unitary, projector, Operator2, PolarAngle,
    RotationAngle,
};

/// Modulus below which the phase of a complex number is considered undefined.
pub const EPSILON_UNDEFINED: f64 = 1e-9;

/// Maps any angle in degrees onto `(−180, 180]`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Shortest signed distance `a − b` on the circle, in degrees.
pub fn angular_difference(a: f64, b: f64) -> f64 {
    normalize_degrees(a - b)
}

/// A phase together with the modulus of the complex number it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    /// Degrees in `(−180, 180]`. Meaningless when `defined` is false.
    pub value: f64,
    pub defined: bool,
    pub magnitude: f64,
}

impl PhaseResult {
    pub fn undefined(magnitude: f64) -> Self {
        PhaseResult {
            value: 0.0,
            defined: false,
            magnitude,
        }
    }

    /// Distance to `target` in degrees, or `None` if the phase is undefined.
    pub fn distance_to(&self, target: f64) -> Option<f64> {
        self.defined
            .then(|| angular_difference(self.value, target).abs())
    }
}

/// `Φ(z) = z/|z|`, expressed as an angle.
pub fn phase_of(z: Complex64) -> PhaseResult {
    let magnitude = z.norm();
    let value = normalize_degrees(z.arg().to_degrees());
    PhaseResult {
        value,
        defined: magnitude >= EPSILON_UNDEFINED,
        magnitude,
    }
}

/// `⟨Ψ+|U|Ψ−⟩⟨Ψ−|U|Ψ+⟩` for an arbitrary 2×2 evolution `u`.
pub fn off_diagonal_product(theta: PolarAngle, u: &Operator2) -> Complex64 {
    let plus = make_plus_state(theta);
    let minus = orthogonal(&plus);
    u.matrix_element(&plus, &minus) * u.matrix_element(&minus, &plus)
}

/// Off-diagonal geometric phase of the `|Ψ±⟩` pair under ẑ-precession by `alpha`.
///
/// The dynamical phases of the two states cancel in the product, so the
/// result is `180°` whenever the cross matrix elements do not vanish.
pub fn off_diagonal_phase(theta: PolarAngle, alpha: RotationAngle) -> PhaseResult {
    phase_of(off_diagonal_product(theta, &precession_unitary(alpha)))
}

/// Which of the two orthogonal states a dynamical phase belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// The two interferometer arms of the direct-evolution picture: arm I applies
/// `U⁻¹`, arm II applies `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Path {
    I,
    II,
}

impl Path {
    /// Reversing the precession on `|Ψ+⟩` accumulates the same dynamical
    /// phase as forward precession of `|Ψ−⟩`.
    pub fn branch(self) -> Branch {
        match self {
            Path::I => Branch::Minus,
            Path::II => Branch::Plus,
        }
    }
}

/// Dynamical phase `±(α/2)·cos θ` in degrees, from `(α/2)·⟨σ_z⟩` of the
/// selected branch state.
pub fn dynamical_phase(theta: PolarAngle, alpha: RotationAngle, branch: Branch) -> f64 {
    let plus = make_plus_state(theta);
    let state = match branch {
        Branch::Plus => plus,
        Branch::Minus => orthogonal(&plus),
    };
    let sigma_z = state.up().norm_sqr() - state.down().norm_sqr();
    alpha.degrees() / 2.0 * sigma_z
}

pub fn path_dynamical_phase(theta: PolarAngle, alpha: RotationAngle, path: Path) -> f64 {
    dynamical_phase(theta, alpha, path.branch())
}

/// Diagonal phase seen by the unanalyzed beam: the phase of
/// `⟨Ψ+|U(2α)|Ψ+⟩ = cos α + i·cos θ·sin α`. The beam that skips spin
/// analysis compares `U` against `U⁻¹`, hence the doubled angle.
pub fn pancharatnam_phase_hbeam(theta: PolarAngle, alpha: RotationAngle) -> PhaseResult {
    phase_of(hbeam_overlap(theta, alpha))
}

pub(crate) fn hbeam_overlap(theta: PolarAngle, alpha: RotationAngle) -> Complex64 {
    let plus = make_plus_state(theta);
    let doubled = RotationAngle::from_degrees(2.0 * alpha.degrees())
        .expect("finite angle doubled stays finite");
    precession_unitary(doubled).matrix_element(&plus, &plus)
}

/// `⟨Ψ_I|Ψ_II⟩` with `Ψ_I = P(Ψ−)U⁻¹Ψ+` and `Ψ_II = P(Ψ−)UΨ+`.
pub fn direct_overlap(theta: PolarAngle, alpha: RotationAngle) -> Complex64 {
    let plus = make_plus_state(theta);
    let analyzer = projector(&orthogonal(&plus));
    let u = precession_unitary(alpha);
    let u_inv = precession_unitary(-alpha);
    let psi_i = (analyzer * u_inv).apply(&plus.ket());
    let psi_ii = (analyzer * u).apply(&plus.ket());
    psi_i.inner(&psi_ii)
}

/// Geometric part of the direct two-arm evolution: the phase of
/// `⟨Ψ_I|Ψ_II⟩` with the arms' dynamical phases removed.
///
/// Evaluates to `180° + α·cos θ`. Adding back `Φ_D^I − Φ_D^II` recovers the
/// raw overlap phase (see [`direct_decomposition`]).
pub fn generalized_bp_phase(theta: PolarAngle, alpha: RotationAngle) -> PhaseResult {
    let overlap = phase_of(direct_overlap(theta, alpha));
    if !overlap.defined {
        return overlap;
    }
    let dynamical =
        path_dynamical_phase(theta, alpha, Path::I) - path_dynamical_phase(theta, alpha, Path::II);
    PhaseResult {
        value: normalize_degrees(overlap.value - dynamical),
        ..overlap
    }
}

/// `γ^BP + Φ_D^I − Φ_D^II`, which should reproduce the off-diagonal phase.
pub fn direct_decomposition(theta: PolarAngle, alpha: RotationAngle) -> PhaseResult {
    let bp = generalized_bp_phase(theta, alpha);
    if !bp.defined {
        return bp;
    }
    let total = bp.value + path_dynamical_phase(theta, alpha, Path::I)
        - path_dynamical_phase(theta, alpha, Path::II);
    PhaseResult {
        value: normalize_degrees(total),
        ..bp
    }
}
