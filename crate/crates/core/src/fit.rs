//! Least-squares sinusoid fits `I(χ) = A + B·cos(χ − φ)`.
//!
//! The model is fitted in its linear form `A + P·cos χ + Q·sin χ`, so the fit
//! is a single 3×3 solve with no starting values. Poisson-count data are
//! weighted by `1/max(counts, 1)`; expectation data are fitted unweighted and
//! their uncertainties come from the residual scatter.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::beamline::{
    chi_grid, synthesize_interferogram, synthesize_pair, Beam, BeamConfig, Interferogram,
};
use crate::error::{Error, Result};
use crate::phases::{normalize_degrees, PhaseResult, EPSILON_UNDEFINED};
use crate::spinor::{PolarAngle, RotationAngle};

/// An oscillation counts as present when its amplitude exceeds this many
/// standard errors.
pub const K_SIGMA: f64 = 3.0;

/// Smallest eigenvalue ratio of the normal matrix accepted as non-degenerate.
const CONDITION_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    /// φ in degrees on `(−180, 180]`.
    #[serde(rename = "phase_deg")]
    pub phase: f64,
    pub visibility: f64,
    /// 1σ uncertainty of φ in degrees.
    #[serde(rename = "phase_sigma_deg")]
    pub phase_uncertainty: f64,
    pub oscillating: bool,
    #[serde(skip)]
    pub amplitude_uncertainty: f64,
}

impl SinusoidFit {
    /// Model value at `chi_deg`.
    pub fn evaluate(&self, chi_deg: f64) -> f64 {
        self.offset + self.amplitude * (chi_deg - self.phase).to_radians().cos()
    }
}

/// Fits `g` with the weighting implied by its data kind.
pub fn fit_sinusoid(g: &Interferogram) -> Result<SinusoidFit> {
    fit_points(&g.chi, &g.intensity, g.is_counts())
}

/// Fits raw `(χ, y)` samples. With `counts = true` the values are treated as
/// Poisson counts with variance `max(y, 1)`.
pub fn fit_points(chi: &[f64], y: &[f64], counts: bool) -> Result<SinusoidFit> {
    if chi.len() != y.len() {
        return Err(Error::LengthMismatch {
            chi: chi.len(),
            intensity: y.len(),
        });
    }
    let n = chi.len();
    if n < 4 {
        return Err(Error::InsufficientData(n));
    }

    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    let rows: Vec<Vector3<f64>> = chi
        .iter()
        .map(|c| {
            let (s, co) = c.to_radians().sin_cos();
            Vector3::new(1.0, co, s)
        })
        .collect();
    let weights: Vec<f64> = y
        .iter()
        .map(|&v| if counts { 1.0 / v.max(1.0) } else { 1.0 })
        .collect();
    for ((x, &w), &v) in rows.iter().zip(&weights).zip(y) {
        normal += x * x.transpose() * w;
        rhs += x * (w * v);
    }

    let eigen = normal.symmetric_eigen().eigenvalues;
    let (lo, hi) = (eigen.min(), eigen.max());
    if !(hi > 0.0 && lo / hi > CONDITION_FLOOR) {
        return Err(Error::DegenerateGrid);
    }
    let inverse = normal.try_inverse().ok_or(Error::DegenerateGrid)?;
    let beta = inverse * rhs;

    let covariance = if counts {
        inverse
    } else {
        let rss: f64 = rows
            .iter()
            .zip(y)
            .map(|(x, v)| (v - x.dot(&beta)).powi(2))
            .sum();
        let dof = (n - 3) as f64;
        inverse * (rss / dof)
    };

    let (offset, p, q) = (beta[0], beta[1], beta[2]);
    let amplitude = p.hypot(q);
    let phase = normalize_degrees(q.atan2(p).to_degrees());
    let (var_p, var_q, cov_pq) = (covariance[(1, 1)], covariance[(2, 2)], covariance[(1, 2)]);

    let (amplitude_uncertainty, phase_uncertainty) = if amplitude > 0.0 {
        let b2 = amplitude * amplitude;
        let var_b = (p * p * var_p + q * q * var_q + 2.0 * p * q * cov_pq) / b2;
        let var_phi = (q * q * var_p + p * p * var_q - 2.0 * p * q * cov_pq) / (b2 * b2);
        (var_b.max(0.0).sqrt(), var_phi.max(0.0).sqrt().to_degrees())
    } else {
        (((var_p + var_q) / 2.0).max(0.0).sqrt(), 180.0)
    };

    let scale = y.iter().fold(offset.abs(), |m, v| m.max(v.abs()));
    let oscillating =
        amplitude > K_SIGMA * amplitude_uncertainty && amplitude > EPSILON_UNDEFINED * scale;
    let visibility = if offset > 0.0 {
        amplitude / offset
    } else {
        0.0
    };

    Ok(SinusoidFit {
        offset,
        amplitude,
        phase,
        visibility,
        phase_uncertainty,
        oscillating,
        amplitude_uncertainty,
    })
}

/// Phase of `fit` relative to `reference`. Undefined unless both fits show
/// an oscillation.
pub fn phase_shift(fit: &SinusoidFit, reference: &SinusoidFit) -> PhaseResult {
    if !(fit.oscillating && reference.oscillating) {
        return PhaseResult::undefined(fit.amplitude);
    }
    PhaseResult {
        value: normalize_degrees(fit.phase - reference.phase),
        defined: true,
        magnitude: fit.amplitude,
    }
}

/// Combined 1σ uncertainty of a phase shift, in degrees.
pub fn shift_uncertainty(fit: &SinusoidFit, reference: &SinusoidFit) -> f64 {
    fit.phase_uncertainty.hypot(reference.phase_uncertainty)
}

/// A rotated interferogram measured against its rotators-off reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMeasurement {
    pub rotated: Interferogram,
    pub reference: Interferogram,
    pub rotated_fit: SinusoidFit,
    pub reference_fit: SinusoidFit,
    pub shift: PhaseResult,
    pub shift_uncertainty: f64,
    /// True when the reference phase was taken from the noise-free
    /// `f → 1` limit because a fully polarized O-beam reference carries no
    /// flux.
    pub reference_from_limit: bool,
}

/// Synthesizes the rotated/reference pair for `config`, fits both and
/// reports the phase shift.
pub fn measure_shift(config: &BeamConfig, beam: Beam, grid: &[f64]) -> Result<ShiftMeasurement> {
    let (rotated, reference) = synthesize_pair(config, beam, grid)?;
    let rotated_fit = fit_sinusoid(&rotated)?;
    let mut reference_fit = fit_sinusoid(&reference)?;
    let mut reference_from_limit = false;
    if !reference_fit.oscillating {
        if let Some(limit) = reference.config.zero_flux_limit(beam) {
            let ideal = synthesize_interferogram(&limit.with_seed(None), beam, grid)?;
            reference_fit = fit_sinusoid(&ideal)?;
            reference_from_limit = true;
        }
    }
    let shift = phase_shift(&rotated_fit, &reference_fit);
    Ok(ShiftMeasurement {
        shift_uncertainty: shift_uncertainty(&rotated_fit, &reference_fit),
        rotated,
        reference,
        rotated_fit,
        reference_fit,
        shift,
        reference_from_limit,
    })
}

/// The χ grid used when none is given: two fringes, 32 points.
pub fn default_chi_grid() -> Vec<f64> {
    chi_grid(0.0, 720.0, 32).expect("static grid is valid")
}

/// Visibility of `beam` for configuration `config`, from a noise-free
/// synthesis and fit.
///
/// A fully polarized O-beam whose analyzer receives no flux (α ≡ 0 mod 360°)
/// has no pattern of its own; it is reported with the visibility of its
/// `f → 1` limit, where only the orthogonal admixture reaches the detector.
pub fn fitted_visibility(config: &BeamConfig, beam: Beam, grid: &[f64]) -> Result<f64> {
    let config = config.with_seed(None);
    let fit = fit_sinusoid(&synthesize_interferogram(&config, beam, grid)?)?;
    if fit.offset <= EPSILON_UNDEFINED * config.mean_counts {
        if let Some(limit) = config.zero_flux_limit(beam) {
            let fit = fit_sinusoid(&synthesize_interferogram(&limit, beam, grid)?)?;
            return Ok(fit.visibility);
        }
    }
    Ok(fit.visibility)
}

/// `(α, visibility)` for each α, starting from the ideal configuration.
pub fn visibility_curve(theta: PolarAngle, beam: Beam, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let base = BeamConfig::ideal(theta, RotationAngle::from_degrees(0.0)?);
    visibility_curve_for(&base, beam, alphas, &default_chi_grid())
}

/// Like [`visibility_curve`], with polarization, contrast and grid taken from
/// `base`.
pub fn visibility_curve_for(
    base: &BeamConfig,
    beam: Beam,
    alphas: &[f64],
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    alphas
        .iter()
        .map(|&a| {
            let config = base.with_alpha(RotationAngle::from_degrees(a)?);
            Ok((a, fitted_visibility(&config, beam, grid)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phases::{angular_difference, pancharatnam_phase_hbeam};
    use proptest::prelude::*;

    fn th(d: f64) -> PolarAngle {
        PolarAngle::from_degrees(d).unwrap()
    }

    fn al(d: f64) -> RotationAngle {
        RotationAngle::from_degrees(d).unwrap()
    }

    fn fit_of(cfg: &BeamConfig, beam: Beam) -> SinusoidFit {
        fit_sinusoid(&synthesize_interferogram(cfg, beam, &default_chi_grid()).unwrap()).unwrap()
    }

    #[test]
    fn ideal_o_beam_recovers_pi() {
        let fit = fit_of(&BeamConfig::ideal(th(90.0), al(180.0)), Beam::O);
        assert!(angular_difference(fit.phase, 180.0).abs() < 1e-10);
        assert!((fit.visibility - 1.0).abs() < 1e-10);
        assert!((fit.offset - 2.0).abs() < 1e-10 && (fit.amplitude - 2.0).abs() < 1e-10);
        assert!(fit.oscillating);
    }

    #[test]
    fn flat_data_does_not_oscillate() {
        let chi = default_chi_grid();
        let fit = fit_points(&chi, &vec![5.0; chi.len()], false).unwrap();
        assert!(fit.amplitude < 1e-12 && !fit.oscillating);
        let fit = fit_points(&chi, &vec![0.0; chi.len()], false).unwrap();
        assert!(!fit.oscillating && fit.visibility == 0.0);
        let fit = fit_points(&chi, &vec![200.0; chi.len()], true).unwrap();
        assert!(!fit.oscillating);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            fit_points(&[0.0, 90.0, 180.0], &[1.0, 2.0, 3.0], false),
            Err(Error::InsufficientData(3))
        );
        assert_eq!(
            fit_points(&[0.0, 360.0, 720.0, 1080.0], &[1.0, 2.0, 3.0, 4.0], false),
            Err(Error::DegenerateGrid)
        );
    }

    #[test]
    fn phase_shift_examples() {
        let mk = |phase: f64, oscillating: bool| SinusoidFit {
            offset: 2.0,
            amplitude: 1.0,
            phase,
            visibility: 0.5,
            phase_uncertainty: 1.0,
            oscillating,
            amplitude_uncertainty: 0.01,
        };
        let s = phase_shift(&mk(170.0, true), &mk(-10.0, true));
        assert!(s.defined && s.value == 180.0);
        assert!(!phase_shift(&mk(170.0, false), &mk(-10.0, true)).defined);
        assert!(!phase_shift(&mk(170.0, true), &mk(-10.0, false)).defined);
        let a = mk(33.0, true);
        assert_eq!(phase_shift(&a, &a).value, 0.0);
    }

    #[test]
    fn hbeam_shift_matches_pancharatnam_phase() {
        let cfg = BeamConfig::ideal(th(60.0), al(60.0));
        let (rot, reference) = synthesize_pair(&cfg, Beam::H, &default_chi_grid()).unwrap();
        let shift = phase_shift(
            &fit_sinusoid(&rot).unwrap(),
            &fit_sinusoid(&reference).unwrap(),
        );
        assert!((shift.value - 40.893394649130904).abs() < 1e-9);
        let expected = pancharatnam_phase_hbeam(th(60.0), al(60.0));
        assert!((shift.value - expected.value).abs() < 1e-9);
    }

    #[test]
    fn ideal_o_beam_shift_uses_polarization_limit() {
        let cfg = BeamConfig::ideal(th(90.0), al(-180.0));
        let m = measure_shift(&cfg, Beam::O, &default_chi_grid()).unwrap();
        assert!(m.reference_from_limit);
        assert!(m.shift.distance_to(180.0).unwrap() < 1e-9);

        let m = measure_shift(&cfg.with_polarization(0.87), Beam::O, &default_chi_grid()).unwrap();
        assert!(!m.reference_from_limit);
        assert!(m.shift.distance_to(180.0).unwrap() < 1e-9);
    }

    #[test]
    fn unanalyzed_null_gives_undefined_shift() {
        let m = measure_shift(
            &BeamConfig::ideal(th(90.0), al(90.0)),
            Beam::H,
            &default_chi_grid(),
        )
        .unwrap();
        assert!(!m.rotated_fit.oscillating && !m.shift.defined);
    }

    #[test]
    fn visibility_curve_examples() {
        let h = visibility_curve(th(90.0), Beam::H, &[90.0, 180.0, 67.0]).unwrap();
        assert!(h[0].1.abs() < 1e-9);
        assert!((h[1].1 - 1.0).abs() < 1e-9);
        assert!((h[2].1 - 67f64.to_radians().cos().abs()).abs() < 1e-9);
        let o = visibility_curve(th(90.0), Beam::O, &[67.0, 90.0, 180.0, 0.0]).unwrap();
        for (a, v) in o {
            assert!((v - 1.0).abs() < 1e-9, "α = {a}: {v}");
        }
    }

    const THETAS: [f64; 4] = [30.0, 60.0, 90.0, 135.0];
    const ALPHAS: [f64; 10] = [
        45.0, -45.0, 67.5, -67.5, 90.0, -90.0, 180.0, -180.0, 225.0, -225.0,
    ];

    /// Analytic `(A, B, φ)` for the ideal pure-state beams.
    fn analytic(theta: f64, alpha: f64, beam: Beam) -> (f64, f64, f64) {
        let (t, a) = (theta.to_radians(), alpha.to_radians());
        match beam {
            Beam::O => {
                let m = 2.0 * (t.sin() * (a / 2.0).sin()).powi(2);
                (m, m, 180.0)
            }
            Beam::H => {
                let (re, im) = (a.cos(), t.cos() * a.sin());
                (2.0, 2.0 * re.hypot(im), im.atan2(re).to_degrees())
            }
        }
    }

    #[test]
    fn noise_free_round_trip_on_measurement_grid() {
        for &t in &THETAS {
            for &a in &ALPHAS {
                for beam in [Beam::O, Beam::H] {
                    let fit = fit_of(&BeamConfig::ideal(th(t), al(a)), beam);
                    let (offset, amplitude, phase) = analytic(t, a, beam);
                    let scale = offset.max(amplitude);
                    assert!(
                        (fit.offset - offset).abs() <= 1e-9 * scale,
                        "θ={t} α={a} {beam:?}"
                    );
                    assert!((fit.amplitude - amplitude).abs() <= 1e-9 * scale);
                    if amplitude > 1e-6 {
                        assert!(angular_difference(fit.phase, phase).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn phase_bias_shrinks_with_counts() {
        let cfg = BeamConfig::ideal(th(60.0), al(135.0)).with_polarization(0.9);
        let truth = fit_of(&cfg, Beam::O).phase;
        let grid = default_chi_grid();
        let mut spreads = Vec::new();
        for counts in [50.0, 500.0, 5000.0] {
            let errs: Vec<f64> = (0..200)
                .map(|seed| {
                    let g = synthesize_interferogram(
                        &cfg.with_counts(counts).with_seed(Some(seed)),
                        Beam::O,
                        &grid,
                    )
                    .unwrap();
                    angular_difference(fit_sinusoid(&g).unwrap().phase, truth)
                })
                .collect();
            let bias = errs.iter().sum::<f64>() / errs.len() as f64;
            let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
            spreads.push((bias.abs(), rms));
        }
        assert!(spreads[0].1 > spreads[1].1 && spreads[1].1 > spreads[2].1);
        assert!(spreads[2].0 < 0.1, "{spreads:?}");
    }

    proptest! {
        #[test]
        fn recovers_arbitrary_sinusoid(
            offset in 1.0..100.0f64,
            vis in 0.05..1.0f64,
            phase in -179.0..180.0f64,
            shift_turns in -3i32..3,
        ) {
            let chi: Vec<f64> = default_chi_grid().iter().map(|c| c + 360.0 * shift_turns as f64).collect();
            let y: Vec<f64> = chi
                .iter()
                .map(|c| offset + offset * vis * (c - phase).to_radians().cos())
                .collect();
            let fit = fit_points(&chi, &y, false).unwrap();
            prop_assert!((fit.offset - offset).abs() < 1e-10 * offset);
            prop_assert!((fit.amplitude - offset * vis).abs() < 1e-10 * offset);
            prop_assert!(angular_difference(fit.phase, phase).abs() < 1e-9);
            prop_assert!((fit.visibility - vis).abs() < 1e-10);
        }

        #[test]
        fn shift_is_antisymmetric(a in -180.0..180.0f64, b in -180.0..180.0f64) {
            let mk = |phase: f64| SinusoidFit {
                offset: 1.0, amplitude: 0.5, phase, visibility: 0.5,
                phase_uncertainty: 0.1, oscillating: true, amplitude_uncertainty: 0.01,
            };
            let ab = phase_shift(&mk(a), &mk(b)).value;
            let ba = phase_shift(&mk(b), &mk(a)).value;
            prop_assert!(angular_difference(ab, -ba).abs() < 1e-9);
        }
    }
}
