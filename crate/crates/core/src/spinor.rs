//! Spin-1/2 states and 2×2 operators.
//!
//! Angles cross the API boundary in degrees and are converted to radians
//! internally. States are built in the real-component form
//! `|Ψ+⟩ = (cos θ/2, sin θ/2)`; no further gauge fixing is applied.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for algebraic identities between 2×2 complex matrices.
pub const ALGEBRA_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Polar angle of the incident polarization measured from +z, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PolarAngle(f64);

impl PolarAngle {
    pub fn from_degrees(deg: f64) -> Result<Self> {
        if deg.is_finite() && (0.0..=180.0).contains(&deg) {
            Ok(PolarAngle(deg))
        } else {
            Err(Error::InvalidPolarAngle(deg))
        }
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

impl TryFrom<f64> for PolarAngle {
    type Error = Error;
    fn try_from(deg: f64) -> Result<Self> {
        PolarAngle::from_degrees(deg)
    }
}

impl From<PolarAngle> for f64 {
    fn from(a: PolarAngle) -> f64 {
        a.0
    }
}

/// Spinor precession angle `α = ω_L t`, in degrees. Any finite value is
/// allowed; negative angles and angles beyond a full turn are meaningful for
/// spin-1/2 (the state is 720° periodic).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RotationAngle(f64);

impl RotationAngle {
    pub fn from_degrees(deg: f64) -> Result<Self> {
        if deg.is_finite() {
            Ok(RotationAngle(deg))
        } else {
            Err(Error::InvalidRotationAngle(deg))
        }
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// True when the angle is a whole number of turns, within `tol` degrees.
    pub fn is_full_turn(self, tol: f64) -> bool {
        let r = self.0.rem_euclid(360.0);
        r < tol || 360.0 - r < tol
    }
}

impl Neg for RotationAngle {
    type Output = RotationAngle;
    fn neg(self) -> RotationAngle {
        RotationAngle(-self.0)
    }
}

impl TryFrom<f64> for RotationAngle {
    type Error = Error;
    fn try_from(deg: f64) -> Result<Self> {
        RotationAngle::from_degrees(deg)
    }
}

impl From<RotationAngle> for f64 {
    fn from(a: RotationAngle) -> f64 {
        a.0
    }
}

/// An unnormalized complex 2-vector. Produced by applying projectors or by
/// superposing evolved states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket(pub [Complex64; 2]);

impl Ket {
    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn scale(&self, c: Complex64) -> Ket {
        Ket([self.0[0] * c, self.0[1] * c])
    }
}

impl Add for Ket {
    type Output = Ket;
    fn add(self, rhs: Ket) -> Ket {
        Ket([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Ket {
    type Output = Ket;
    fn sub(self, rhs: Ket) -> Ket {
        Ket([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

/// A normalized spin-1/2 state `up·|+z⟩ + down·|−z⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    up: Complex64,
    down: Complex64,
}

impl Spinor {
    /// Builds a spinor from arbitrary amplitudes, normalizing them.
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let norm = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::ZeroSpinor);
        }
        Ok(Spinor {
            up: up / norm,
            down: down / norm,
        })
    }

    pub fn spin_up() -> Self {
        Spinor {
            up: ONE,
            down: ZERO,
        }
    }

    pub fn spin_down() -> Self {
        Spinor {
            up: ZERO,
            down: ONE,
        }
    }

    pub fn up(&self) -> Complex64 {
        self.up
    }

    pub fn down(&self) -> Complex64 {
        self.down
    }

    pub fn ket(&self) -> Ket {
        Ket([self.up, self.down])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.ket().inner(&other.ket())
    }

    /// Applies a unitary. The caller is responsible for `u` being unitary;
    /// non-unitary operators should go through [`Operator2::apply`].
    pub fn evolve(&self, u: &Operator2) -> Spinor {
        let Ket([up, down]) = u.apply(&self.ket());
        Spinor { up, down }
    }
}

impl Neg for Spinor {
    type Output = Spinor;
    fn neg(self) -> Spinor {
        Spinor {
            up: -self.up,
            down: -self.down,
        }
    }
}

impl fmt::Display for Spinor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.up, self.down)
    }
}

/// A complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2 {
    m: [[Complex64; 2]; 2],
}

impl Operator2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Operator2 { m }
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Operator2 {
            m: [
                [Complex64::from(m[0][0]), Complex64::from(m[0][1])],
                [Complex64::from(m[1][0]), Complex64::from(m[1][1])],
            ],
        }
    }

    pub fn identity() -> Self {
        Operator2 {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    pub fn diagonal(a: Complex64, d: Complex64) -> Self {
        Operator2 {
            m: [[a, ZERO], [ZERO, d]],
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Operator2 {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Operator2 {
            m: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Matrix inverse, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det.norm() < f64::EPSILON {
            return None;
        }
        let m = &self.m;
        Some(Operator2 {
            m: [
                [m[1][1] / det, -m[0][1] / det],
                [-m[1][0] / det, m[0][0] / det],
            ],
        })
    }

    pub fn apply(&self, v: &Ket) -> Ket {
        let m = &self.m;
        Ket([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    /// ⟨a|self|b⟩
    pub fn matrix_element(&self, a: &Spinor, b: &Spinor) -> Complex64 {
        a.ket().inner(&self.apply(&b.ket()))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Operator2, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.dagger() * *self).approx_eq(&Operator2::identity(), tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.dagger(), tol)
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (*self * *self).approx_eq(self, tol)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let m = &self.m;
        Operator2 {
            m: [[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]],
        }
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Operator2 { m }
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        let mut m = self.m;
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell += rhs.m[r][c];
            }
        }
        Operator2 { m }
    }
}

impl Mul<Ket> for Operator2 {
    type Output = Ket;
    fn mul(self, rhs: Ket) -> Ket {
        self.apply(&rhs)
    }
}

/// `|Ψ+⟩ = (cos θ/2, sin θ/2)`, the incident polarization tilted by θ from +z.
pub fn make_plus_state(theta: PolarAngle) -> Spinor {
    let half = theta.radians() / 2.0;
    Spinor {
        up: Complex64::from(half.cos()),
        down: Complex64::from(half.sin()),
    }
}

/// The orthogonal spinor `(−conj(down), conj(up))`. For `|Ψ+⟩` this is
/// `|Ψ−⟩ = (−sin θ/2, cos θ/2)`.
pub fn orthogonal(s: &Spinor) -> Spinor {
    Spinor {
        up: -s.down.conj(),
        down: s.up.conj(),
    }
}

/// Larmor precession about +z: `diag(e^{iα/2}, e^{−iα/2})`.
pub fn precession_unitary(alpha: RotationAngle) -> Operator2 {
    let half = alpha.radians() / 2.0;
    Operator2::diagonal(Complex64::cis(half), Complex64::cis(-half))
}

/// `|s⟩⟨s|`, an ideal spin analyzer passing `s`.
pub fn projector(s: &Spinor) -> Operator2 {
    let (u, d) = (s.up, s.down);
    Operator2 {
        m: [[u * u.conj(), u * d.conj()], [d * u.conj(), d * d.conj()]],
    }
}

/// Real rotation taking the `|Ψ±⟩` basis onto `|±z⟩`.
pub fn basis_transform(theta: PolarAngle) -> Operator2 {
    let half = theta.radians() / 2.0;
    let (s, c) = half.sin_cos();
    Operator2::from_real([[c, s], [-s, c]])
}

/// `U′ = T·U(α)·T⁻¹`, the precession written in the `|Ψ±⟩` basis.
pub fn conjugate_evolution(theta: PolarAngle, alpha: RotationAngle) -> Operator2 {
    let t = basis_transform(theta);
    // T is real orthogonal, so T⁻¹ = Tᵀ.
    t * precession_unitary(alpha) * t.transpose()
}
