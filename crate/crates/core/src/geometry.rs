//! Poincaré-sphere picture of the spinor evolutions.
//!
//! States map to unit vectors; precessions trace latitude circles and spin
//! analysis traces geodesics. A closed loop built from these arcs encloses a
//! solid angle Ω whose half is the geometric phase.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinor::{
    make_plus_state, orthogonal, precession_unitary, PolarAngle, RotationAngle, Spinor,
};

/// Default number of waypoints per arc.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Endpoint matching tolerance for arcs in a loop.
pub const ENDPOINT_TOL: f64 = 1e-9;

/// `a·b` at or below `−1 + ANTIPODAL_TOL` has no unique geodesic.
pub const ANTIPODAL_TOL: f64 = 1e-9;

const COINCIDENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Normalizes `(x, y, z)` onto the unit sphere. Panics on the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let v = BlochVector { x, y, z };
        let n = v.norm();
        assert!(n > 0.0 && n.is_finite(), "cannot normalize {v}");
        v * (1.0 / n)
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &BlochVector) -> BlochVector {
        BlochVector {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, o: &BlochVector) -> f64 {
        (*self - *o).norm()
    }

    /// Great-circle angle to `o`, in radians.
    pub fn angle_to(&self, o: &BlochVector) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector {
            x: self.x + o.x,
            y: self.y + o.y,
            z: self.z + o.z,
        }
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector {
            x: self.x - o.x,
            y: self.y - o.y,
            z: self.z - o.z,
        }
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, k: f64) -> BlochVector {
        BlochVector {
            x: self.x * k,
            y: self.y * k,
            z: self.z * k,
        }
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Expectation value of the Pauli vector in state `s`.
pub fn to_bloch(s: &Spinor) -> BlochVector {
    let cross = s.up().conj() * s.down();
    BlochVector {
        x: 2.0 * cross.re,
        y: 2.0 * cross.im,
        z: s.up().norm_sqr() - s.down().norm_sqr(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcKind {
    Trajectory,
    Geodesic,
}

impl ArcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArcKind::Trajectory => "trajectory",
            ArcKind::Geodesic => "geodesic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub start: BlochVector,
    pub end: BlochVector,
    pub kind: ArcKind,
    /// Ordered samples including both endpoints. A zero-length geodesic has a
    /// single waypoint.
    pub waypoints: Vec<BlochVector>,
}

impl Arc {
    fn from_waypoints(kind: ArcKind, waypoints: Vec<BlochVector>) -> Self {
        Arc {
            start: waypoints[0],
            end: *waypoints.last().expect("non-empty"),
            kind,
            waypoints,
        }
    }

    pub fn reversed(&self) -> Arc {
        let mut waypoints = self.waypoints.clone();
        waypoints.reverse();
        Arc::from_waypoints(self.kind, waypoints)
    }

    pub fn is_point(&self) -> bool {
        self.waypoints.len() == 1
    }
}

/// Path traced by `state` while precessing about +z through `alpha`,
/// sampled at `n_samples` equally spaced precession angles.
pub fn trajectory_of(state: &Spinor, alpha: RotationAngle, n_samples: usize) -> Result<Arc> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: n_samples,
        });
    }
    let last = (n_samples - 1) as f64;
    let waypoints = (0..n_samples)
        .map(|k| {
            let step = RotationAngle::from_degrees(alpha.degrees() * k as f64 / last)
                .expect("finite fraction of a finite angle");
            to_bloch(&state.evolve(&precession_unitary(step)))
        })
        .collect();
    Ok(Arc::from_waypoints(ArcKind::Trajectory, waypoints))
}

/// Latitude arc `z = cos θ` swept by `|Ψ+⟩` under precession `alpha`.
pub fn precession_trajectory(
    theta: PolarAngle,
    alpha: RotationAngle,
    n_samples: usize,
) -> Result<Arc> {
    trajectory_of(&make_plus_state(theta), alpha, n_samples)
}

/// Minor great-circle arc from `a` to `b` by spherical linear interpolation.
pub fn geodesic_arc(a: BlochVector, b: BlochVector, n_samples: usize) -> Result<Arc> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: n_samples,
        });
    }
    let dot = a.dot(&b);
    if dot <= -1.0 + ANTIPODAL_TOL {
        return Err(Error::AntipodalPoints { dot });
    }
    let sin_omega = a.cross(&b).norm();
    if sin_omega < COINCIDENT_TOL && dot > 0.0 {
        return Ok(Arc::from_waypoints(ArcKind::Geodesic, vec![a]));
    }
    let omega = sin_omega.atan2(dot);
    let last = (n_samples - 1) as f64;
    let mut waypoints: Vec<BlochVector> = (0..n_samples)
        .map(|k| {
            let t = k as f64 / last;
            let v = a * ((1.0 - t) * omega).sin() + b * (t * omega).sin();
            v * (1.0 / v.norm())
        })
        .collect();
    // Pin the endpoints exactly so loops close without drift.
    waypoints[0] = a;
    waypoints[n_samples - 1] = b;
    Ok(Arc::from_waypoints(ArcKind::Geodesic, waypoints))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochLoop {
    pub arcs: Vec<Arc>,
    pub closed: bool,
}

impl BlochLoop {
    /// Chains `arcs`, requiring each arc to start where the previous ended.
    pub fn from_arcs(arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::OpenLoop { gap: f64::INFINITY });
        }
        for pair in arcs.windows(2) {
            let gap = pair[0].end.distance(&pair[1].start);
            if gap > ENDPOINT_TOL {
                return Err(Error::OpenLoop { gap });
            }
        }
        let closed = arcs[arcs.len() - 1].end.distance(&arcs[0].start) <= ENDPOINT_TOL;
        Ok(BlochLoop { arcs, closed })
    }

    pub fn reversed(&self) -> BlochLoop {
        BlochLoop {
            arcs: self.arcs.iter().rev().map(Arc::reversed).collect(),
            closed: self.closed,
        }
    }

    /// Polygon vertices with shared endpoints listed once; the closing vertex
    /// is not repeated.
    pub fn vertices(&self) -> Vec<BlochVector> {
        let mut out = Vec::new();
        for arc in &self.arcs {
            let n = arc.waypoints.len();
            out.extend_from_slice(&arc.waypoints[..n.saturating_sub(1)]);
        }
        out
    }
}

/// Maps a solid angle onto `(−2π, 2π]`. A loop splitting the sphere into two
/// equal halves is reported as `+2π`.
pub fn normalize_solid_angle(omega: f64) -> f64 {
    let r = omega.rem_euclid(4.0 * PI);
    let r = if r > 2.0 * PI { r - 4.0 * PI } else { r };
    if (r + 2.0 * PI).abs() < 1e-9 {
        2.0 * PI
    } else {
        r
    }
}

/// Picks a fan apex whose antipode stays as far as possible from every
/// vertex, so no fan triangle degenerates.
fn fan_apex(vertices: &[BlochVector]) -> BlochVector {
    let sum = vertices.iter().fold(
        BlochVector {
            x: 0.0,
            y: 0.0,
            z: 0.0,
        },
        |acc, v| acc + *v,
    );
    let mut candidates = Vec::with_capacity(15);
    if sum.norm() > 1e-6 * vertices.len() as f64 {
        candidates.push(sum * (1.0 / sum.norm()));
    }
    for (x, y, z) in [
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
        (1.0, 1.0, 1.0),
        (1.0, -1.0, 1.0),
        (-1.0, 1.0, 1.0),
        (1.0, 1.0, -1.0),
    ] {
        let v = BlochVector::new(x, y, z);
        candidates.push(v);
        candidates.push(-v);
    }
    let clearance = |p: &BlochVector| {
        vertices
            .iter()
            .map(|v| (*v + *p).norm())
            .fold(f64::INFINITY, f64::min)
    };
    candidates
        .into_iter()
        .map(|p| (clearance(&p), p))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p)
        .expect("candidate list is non-empty")
}

/// Signed spherical excess of the triangle (apex, a, b); positive when the
/// triangle runs counter-clockwise seen from outside the sphere.
fn triangle_excess(apex: &BlochVector, a: &BlochVector, b: &BlochVector) -> f64 {
    let triple = apex.dot(&a.cross(b));
    let denom = 1.0 + apex.dot(a) + apex.dot(b) + a.dot(b);
    2.0 * triple.atan2(denom)
}

/// Signed solid angle enclosed by a closed loop, normalized to `(−2π, 2π]`.
///
/// The loop is treated as the geodesic polygon through all of its waypoints;
/// the excess is accumulated over a fan of triangles from a common apex.
/// Counter-clockwise loops (seen from outside) are positive.
pub fn loop_solid_angle(lp: &BlochLoop) -> Result<f64> {
    if !lp.closed {
        let gap = lp.arcs[lp.arcs.len() - 1].end.distance(&lp.arcs[0].start);
        return Err(Error::OpenLoop { gap });
    }
    let vertices = lp.vertices();
    if vertices.len() < 3 {
        return Ok(0.0);
    }
    let apex = fan_apex(&vertices);
    let n = vertices.len();
    let total: f64 = (0..n)
        .map(|i| triangle_excess(&apex, &vertices[i], &vertices[(i + 1) % n]))
        .sum();
    Ok(normalize_solid_angle(total))
}

/// Geometric phase `Ω/2` in degrees for a solid angle in steradians.
pub fn phase_from_solid_angle(omega: f64) -> f64 {
    crate::phases::normalize_degrees((omega / 2.0).to_degrees())
}

fn undefined_if_antipodal(err: Error) -> Error {
    match err {
        Error::AntipodalPoints { dot } => Error::UndefinedLoop(format!(
            "required geodesic joins antipodal states (a·b = {dot})"
        )),
        other => other,
    }
}

/// The loop Γ₊ → G₊₋ → Γ₋ → G₋₊ traced by `|Ψ±⟩` under precession `alpha`
/// and closed by geodesics between the final state of one spinor and the
/// initial state of the other.
pub fn off_diagonal_loop(
    theta: PolarAngle,
    alpha: RotationAngle,
    n_samples: usize,
) -> Result<BlochLoop> {
    if alpha.is_full_turn(ANTIPODAL_TOL) {
        return Err(Error::UndefinedLoop(
            "precession by a whole number of turns leaves no off-diagonal element".into(),
        ));
    }
    let plus = make_plus_state(theta);
    let minus = orthogonal(&plus);
    let gamma_plus = trajectory_of(&plus, alpha, n_samples)?;
    let gamma_minus = trajectory_of(&minus, alpha, n_samples)?;
    let g_plus_minus = geodesic_arc(gamma_plus.end, gamma_minus.start, n_samples)
        .map_err(undefined_if_antipodal)?;
    let g_minus_plus = geodesic_arc(gamma_minus.end, gamma_plus.start, n_samples)
        .map_err(undefined_if_antipodal)?;
    BlochLoop::from_arcs(vec![gamma_plus, g_plus_minus, gamma_minus, g_minus_plus])
}

/// The two-arm loop: arm II precesses `|Ψ+⟩` by `+alpha` (Γ_II) and is then
/// projected onto `|Ψ−⟩` (G_II); the loop returns along arm I, which
/// precesses by `−alpha` (Γ_I, G_I), traversed backwards.
///
/// With this traversal the enclosed solid angle is `2π + 2α·cos θ` (mod 4π).
pub fn direct_evolution_loop(
    theta: PolarAngle,
    alpha: RotationAngle,
    n_samples: usize,
) -> Result<BlochLoop> {
    let plus = make_plus_state(theta);
    let target = to_bloch(&orthogonal(&plus));
    let gamma_i = trajectory_of(&plus, -alpha, n_samples)?;
    let gamma_ii = trajectory_of(&plus, alpha, n_samples)?;
    let g_i = geodesic_arc(gamma_i.end, target, n_samples).map_err(undefined_if_antipodal)?;
    let g_ii = geodesic_arc(gamma_ii.end, target, n_samples).map_err(undefined_if_antipodal)?;
    BlochLoop::from_arcs(vec![gamma_ii, g_ii, g_i.reversed(), gamma_i.reversed()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn th(d: f64) -> PolarAngle {
        PolarAngle::from_degrees(d).unwrap()
    }

    fn al(d: f64) -> RotationAngle {
        RotationAngle::from_degrees(d).unwrap()
    }

    fn v(x: f64, y: f64, z: f64) -> BlochVector {
        BlochVector::new(x, y, z)
    }

    fn close(a: &BlochVector, b: &BlochVector, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    /// Difference of two solid angles modulo 4π.
    fn omega_gap(a: f64, b: f64) -> f64 {
        normalize_solid_angle(a - b)
            .abs()
            .min((normalize_solid_angle(a - b) - 4.0 * PI).abs())
    }

    #[test]
    fn to_bloch_examples() {
        assert!(close(
            &to_bloch(&Spinor::spin_up()),
            &v(0.0, 0.0, 1.0),
            1e-15
        ));
        let s = make_plus_state(th(90.0));
        assert!(close(&to_bloch(&s), &v(1.0, 0.0, 0.0), 1e-15));
    }

    #[test]
    fn trajectory_examples() {
        let arc = precession_trajectory(th(90.0), al(180.0), 5).unwrap();
        assert_eq!(arc.kind, ArcKind::Trajectory);
        assert!(arc.waypoints.iter().all(|w| w.z.abs() < 1e-12));
        assert!(close(&arc.end, &-arc.start, 1e-12));

        let arc = precession_trajectory(th(60.0), al(225.0), 64).unwrap();
        assert!(arc.waypoints.iter().all(|w| (w.z - 0.5).abs() < 1e-12));

        let arc = precession_trajectory(th(60.0), al(0.0), 8).unwrap();
        assert_eq!(arc.start, arc.end);

        assert!(matches!(
            precession_trajectory(th(60.0), al(10.0), 1),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn geodesic_examples() {
        let a = v(0.0, 0.0, 1.0);
        let arc = geodesic_arc(a, a, 16).unwrap();
        assert!(arc.is_point());

        let arc = geodesic_arc(a, v(1.0, 0.0, 0.0), 9).unwrap();
        assert_eq!(arc.kind, ArcKind::Geodesic);
        for w in &arc.waypoints {
            assert!(w.y.abs() < 1e-15 && w.x >= 0.0 && w.z >= -1e-15);
            assert!((w.norm() - 1.0).abs() < 1e-12);
        }
        let mid = arc.waypoints[4];
        assert!(close(&mid, &v(1.0, 0.0, 1.0), 1e-12));

        assert!(matches!(
            geodesic_arc(a, v(0.0, 0.0, -1.0), 4),
            Err(Error::AntipodalPoints { .. })
        ));
    }

    #[test]
    fn solid_angle_examples() {
        let (z, x, y) = (v(0.0, 0.0, 1.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        let octant = BlochLoop::from_arcs(vec![
            geodesic_arc(z, x, 64).unwrap(),
            geodesic_arc(x, y, 64).unwrap(),
            geodesic_arc(y, z, 64).unwrap(),
        ])
        .unwrap();
        assert!((loop_solid_angle(&octant).unwrap() - PI / 2.0).abs() < 1e-12);

        // Equator traversed once (counter-clockwise about +z).
        let east = v(0.0, -1.0, 0.0);
        let equator = BlochLoop::from_arcs(vec![
            geodesic_arc(x, y, 32).unwrap(),
            geodesic_arc(y, -x, 32).unwrap(),
            geodesic_arc(-x, east, 32).unwrap(),
            geodesic_arc(east, x, 32).unwrap(),
        ])
        .unwrap();
        assert!((loop_solid_angle(&equator).unwrap() - 2.0 * PI).abs() < 1e-12);

        let open = BlochLoop::from_arcs(vec![geodesic_arc(z, x, 8).unwrap()]).unwrap();
        assert!(!open.closed);
        assert!(matches!(
            loop_solid_angle(&open),
            Err(Error::OpenLoop { .. })
        ));
    }

    #[test]
    fn broken_chain_rejected() {
        let (z, x, y) = (v(0.0, 0.0, 1.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        let err = BlochLoop::from_arcs(vec![
            geodesic_arc(z, x, 8).unwrap(),
            geodesic_arc(y, z, 8).unwrap(),
        ]);
        assert!(matches!(err, Err(Error::OpenLoop { .. })));
    }

    #[test]
    fn off_diagonal_loop_special_case_collapses_geodesics() {
        let lp = off_diagonal_loop(th(90.0), al(180.0), 64).unwrap();
        assert!(lp.closed);
        assert!(lp.arcs[1].is_point() && lp.arcs[3].is_point());
        assert!((loop_solid_angle(&lp).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn off_diagonal_loop_is_half_sphere() {
        for (t, a) in [(90.0, 90.0), (60.0, 225.0), (30.0, -67.5), (135.0, 45.0)] {
            let lp = off_diagonal_loop(th(t), al(a), DEFAULT_SAMPLES).unwrap();
            let omega = loop_solid_angle(&lp).unwrap();
            assert!(omega_gap(omega, 2.0 * PI) < 1e-4, "θ={t} α={a}: Ω={omega}");
        }
    }

    #[test]
    fn off_diagonal_loop_undefined_for_full_turn() {
        for a in [0.0, 360.0, -720.0] {
            assert!(matches!(
                off_diagonal_loop(th(90.0), al(a), 16),
                Err(Error::UndefinedLoop(_))
            ));
        }
    }

    #[test]
    fn direct_loop_examples() {
        for a in [45.0, 90.0, -180.0, 225.0] {
            let lp = direct_evolution_loop(th(90.0), al(a), 512).unwrap();
            assert!(omega_gap(loop_solid_angle(&lp).unwrap(), 2.0 * PI) < 1e-9);
        }
        let lp = direct_evolution_loop(th(60.0), al(90.0), DEFAULT_SAMPLES).unwrap();
        let omega = loop_solid_angle(&lp).unwrap();
        assert!(omega_gap(omega, 2.0 * PI + PI / 2.0) < 1e-4, "Ω = {omega}");
        assert!((phase_from_solid_angle(omega) + 135.0).abs() < 0.01);

        assert!(matches!(
            direct_evolution_loop(th(60.0), al(0.0), 16),
            Err(Error::UndefinedLoop(_))
        ));
    }

    #[test]
    fn direct_loop_converges() {
        let (t, a) = (60.0_f64, 135.0_f64);
        let exact = 2.0 * PI + 2.0 * a.to_radians() * t.to_radians().cos();
        let mut previous = f64::INFINITY;
        for n in [8, 16, 32, 64, 128] {
            let lp = direct_evolution_loop(th(t), al(a), n).unwrap();
            let err = omega_gap(loop_solid_angle(&lp).unwrap(), exact);
            assert!(err * 2.0 <= previous, "n = {n}: {err} vs {previous}");
            previous = err;
        }
    }

    proptest! {
        #[test]
        fn orthogonal_spinor_is_antipodal(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64) {
            prop_assume!(a * a + b * b + c * c + d * d > 1e-3);
            let s = Spinor::new(num_complex::Complex64::new(a, b), num_complex::Complex64::new(c, d)).unwrap();
            let p = to_bloch(&s);
            prop_assert!((p.norm() - 1.0).abs() < 1e-12);
            prop_assert!(close(&to_bloch(&orthogonal(&s)), &-p, 1e-12));
        }

        #[test]
        fn geodesic_waypoints_on_great_circle(
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in -1.0..1.0f64,
            bx in -1.0..1.0f64, by in -1.0..1.0f64, bz in -1.0..1.0f64,
        ) {
            let an = (ax * ax + ay * ay + az * az).sqrt();
            let bn = (bx * bx + by * by + bz * bz).sqrt();
            prop_assume!(an > 1e-2 && bn > 1e-2);
            let (a, b) = (v(ax, ay, az), v(bx, by, bz));
            prop_assume!(a.dot(&b) > -0.999);
            let arc = geodesic_arc(a, b, 33).unwrap();
            let normal = a.cross(&b);
            for w in &arc.waypoints {
                prop_assert!((w.norm() - 1.0).abs() < 1e-12);
                if normal.norm() > 1e-6 {
                    prop_assert!(w.dot(&normal).abs() / normal.norm() < 1e-9);
                }
            }
        }

        #[test]
        fn reversal_negates_solid_angle(
            pts in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 3..7)
        ) {
            let vs: Vec<BlochVector> = pts
                .iter()
                .filter(|(x, y, z)| x * x + y * y + z * z > 1e-2)
                .map(|&(x, y, z)| v(x, y, z))
                .collect();
            prop_assume!(vs.len() >= 3);
            let n = vs.len();
            let arcs: Result<Vec<Arc>> = (0..n).map(|i| geodesic_arc(vs[i], vs[(i + 1) % n], 16)).collect();
            prop_assume!(arcs.is_ok());
            let lp = BlochLoop::from_arcs(arcs.unwrap()).unwrap();
            let forward = loop_solid_angle(&lp).unwrap();
            let backward = loop_solid_angle(&lp.reversed()).unwrap();
            prop_assert!(omega_gap(forward, -backward) < 1e-9);
        }

        #[test]
        fn off_diagonal_loop_half_sphere_everywhere(theta in 5.0..175.0f64, alpha in -400.0..400.0f64) {
            prop_assume!(!al(alpha).is_full_turn(5.0));
            let lp = off_diagonal_loop(th(theta), al(alpha), 256).unwrap();
            prop_assert!(omega_gap(loop_solid_angle(&lp).unwrap(), 2.0 * PI) < 1e-6);
        }
    }
}
