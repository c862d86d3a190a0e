//! Two-path interferometer with spin rotators `U⁻¹` and `U` in the arms.
//!
//! The forward (O) beam passes a spin analyzer projecting onto the nominal
//! `|Ψ−⟩`; the reflected (H) beam is counted without analysis. Imperfect
//! incident polarization is an incoherent mixture of `|Ψ+⟩` and `|Ψ−⟩`, and
//! instrument contrast scales the oscillating part of the signal.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phases::EPSILON_UNDEFINED;
use crate::spinor::{
    make_plus_state, orthogonal, precession_unitary, projector, Operator2, PolarAngle,
    RotationAngle, Spinor,
};

/// Output port of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Beam {
    /// Forward beam, spin-analyzed. Shows the off-diagonal phase.
    O,
    /// Reflected beam, no spin analysis. Shows the diagonal phase of `U(2α)`.
    H,
}

impl Beam {
    pub fn as_str(self) -> &'static str {
        match self {
            Beam::O => "o",
            Beam::H => "h",
        }
    }
}

impl std::str::FromStr for Beam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "o" => Ok(Beam::O),
            "h" => Ok(Beam::H),
            other => Err(Error::InvalidConfig(format!("unknown beam {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub theta: PolarAngle,
    pub alpha: RotationAngle,
    /// Fraction of the desired `|Ψ+⟩` component in the incident beam.
    pub polarization_fraction: f64,
    /// Multiplicative attenuation of the oscillation amplitude.
    pub instrument_contrast: f64,
    /// Expected counts at unit relative intensity.
    pub mean_counts: f64,
    pub noise_seed: Option<u64>,
}

impl BeamConfig {
    /// Fully polarized, perfect contrast, unit counts, noise-free.
    pub fn ideal(theta: PolarAngle, alpha: RotationAngle) -> Self {
        BeamConfig {
            theta,
            alpha,
            polarization_fraction: 1.0,
            instrument_contrast: 1.0,
            mean_counts: 1.0,
            noise_seed: None,
        }
    }

    pub fn with_polarization(mut self, f: f64) -> Self {
        self.polarization_fraction = f;
        self
    }

    pub fn with_contrast(mut self, c: f64) -> Self {
        self.instrument_contrast = c;
        self
    }

    pub fn with_counts(mut self, mean_counts: f64) -> Self {
        self.mean_counts = mean_counts;
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.noise_seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: RotationAngle) -> Self {
        self.alpha = alpha;
        self
    }

    /// Same apparatus with the spin rotators switched off.
    pub fn reference(&self) -> Self {
        self.with_alpha(RotationAngle::from_degrees(0.0).expect("zero is finite"))
    }

    /// For a fully polarized O-beam whose analyzer receives no flux, the
    /// configuration reproducing the pattern of the `f → 1` limit: only the
    /// orthogonal admixture reaches the detector, so its pattern is that of
    /// `f = 0`. `None` in every other case.
    pub fn zero_flux_limit(&self, beam: Beam) -> Option<BeamConfig> {
        let flux = (self.theta.radians().sin() * (self.alpha.radians() / 2.0).sin()).powi(2);
        (beam == Beam::O && self.polarization_fraction == 1.0 && flux < EPSILON_UNDEFINED)
            .then(|| self.with_polarization(0.0))
    }

    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.polarization_fraction) {
            return Err(Error::InvalidConfig(format!(
                "polarization_fraction {} outside [0, 1]",
                self.polarization_fraction
            )));
        }
        if !unit.contains(&self.instrument_contrast) {
            return Err(Error::InvalidConfig(format!(
                "instrument_contrast {} outside [0, 1]",
                self.instrument_contrast
            )));
        }
        if !(self.mean_counts.is_finite() && self.mean_counts >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mean_counts {} must be finite and non-negative",
                self.mean_counts
            )));
        }
        Ok(())
    }
}

/// Intensity `‖e^{iχ}·A|ψ⟩ + B|ψ⟩‖²` for incident state `incident`, with
/// `A = P·U⁻¹` and `B = P·U` when an analyzer `P` is present, otherwise
/// `A = U⁻¹`, `B = U`.
pub fn arm_intensity(
    incident: &Spinor,
    analyzer: Option<&Operator2>,
    alpha: RotationAngle,
    chi_deg: f64,
) -> f64 {
    let forward = precession_unitary(alpha);
    let backward = precession_unitary(-alpha);
    let (a, b) = match analyzer {
        Some(p) => (*p * backward, *p * forward),
        None => (backward, forward),
    };
    let psi = incident.ket();
    let shifted = a.apply(&psi).scale(Complex64::cis(chi_deg.to_radians()));
    (shifted + b.apply(&psi)).norm_sqr()
}

fn analyzer_for(beam: Beam, theta: PolarAngle) -> Option<Operator2> {
    match beam {
        Beam::O => Some(projector(&orthogonal(&make_plus_state(theta)))),
        Beam::H => None,
    }
}

/// Spin-analyzed O-beam intensity for a pure `|Ψ+⟩`, evaluated from the
/// operators.
pub fn o_beam_intensity(theta: PolarAngle, alpha: RotationAngle, chi_deg: f64) -> f64 {
    let analyzer = analyzer_for(Beam::O, theta);
    arm_intensity(&make_plus_state(theta), analyzer.as_ref(), alpha, chi_deg)
}

/// `2·sin²θ·sin²(α/2)·(1 + cos(χ − 180°))`.
pub fn o_beam_intensity_closed_form(theta: PolarAngle, alpha: RotationAngle, chi_deg: f64) -> f64 {
    let s = theta.radians().sin() * (alpha.radians() / 2.0).sin();
    2.0 * s * s * (1.0 + (chi_deg - 180.0).to_radians().cos())
}

/// Unanalyzed H-beam intensity for a pure `|Ψ+⟩`.
pub fn h_beam_intensity(theta: PolarAngle, alpha: RotationAngle, chi_deg: f64) -> f64 {
    arm_intensity(&make_plus_state(theta), None, alpha, chi_deg)
}

/// Relative intensity for a partially polarized beam with reduced contrast.
///
/// The incident state is `f·|Ψ+⟩⟨Ψ+| + (1−f)·|Ψ−⟩⟨Ψ−|`; both components
/// pass the identical apparatus. The oscillating part of the mixture is
/// then scaled by `instrument_contrast` about its χ-average.
pub fn mixed_intensity(config: &BeamConfig, beam: Beam, chi_deg: f64) -> f64 {
    let plus = make_plus_state(config.theta);
    let minus = orthogonal(&plus);
    let analyzer = analyzer_for(beam, config.theta);
    let f = config.polarization_fraction;
    let mix = |chi: f64| {
        let mut total = 0.0;
        if f > 0.0 {
            total += f * arm_intensity(&plus, analyzer.as_ref(), config.alpha, chi);
        }
        if f < 1.0 {
            total += (1.0 - f) * arm_intensity(&minus, analyzer.as_ref(), config.alpha, chi);
        }
        total
    };
    let value = mix(chi_deg);
    if config.instrument_contrast == 1.0 {
        return value;
    }
    // The signal is a pure first harmonic in χ, so the mean of two opposite
    // points is its offset.
    let mean = 0.5 * (value + mix(chi_deg + 180.0));
    (mean + config.instrument_contrast * (value - mean)).max(0.0)
}

/// `n` equally spaced χ values from `start` (inclusive) to `end` (exclusive).
pub fn chi_grid(start: f64, end: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(start.is_finite() && end.is_finite()) || end <= start {
        return Err(Error::InvalidConfig(format!(
            "χ grid needs end > start and at least one point (start {start}, end {end}, n {n})"
        )));
    }
    let step = (end - start) / n as f64;
    Ok((0..n).map(|k| start + step * k as f64).collect())
}

/// Sampled interferogram: intensity (or counts) versus χ in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interferogram {
    pub chi: Vec<f64>,
    pub intensity: Vec<f64>,
    pub beam: Beam,
    pub config: BeamConfig,
}

impl Interferogram {
    pub fn new(chi: Vec<f64>, intensity: Vec<f64>, beam: Beam, config: BeamConfig) -> Result<Self> {
        if chi.len() != intensity.len() {
            return Err(Error::LengthMismatch {
                chi: chi.len(),
                intensity: intensity.len(),
            });
        }
        validate_grid(&chi)?;
        if let Some((index, &value)) = intensity
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidIntensity { index, value });
        }
        Ok(Interferogram {
            chi,
            intensity,
            beam,
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    /// True when the values are Poisson counts rather than expectations.
    pub fn is_counts(&self) -> bool {
        self.config.noise_seed.is_some()
    }
}

pub(crate) fn validate_grid(chi: &[f64]) -> Result<()> {
    if let Some(i) = chi.iter().position(|c| !c.is_finite()) {
        return Err(Error::UnorderedGrid(i));
    }
    if let Some(i) = chi.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::UnorderedGrid(i + 1));
    }
    Ok(())
}

/// Stream identifiers keep the rotated and reference draws independent.
const STREAM_ROTATED: u64 = 0;
const STREAM_REFERENCE: u64 = 1;

fn poisson_draw(seed: u64, stream: u64, index: usize, expectation: f64) -> f64 {
    if expectation <= 0.0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 48) | index as u64);
    Poisson::new(expectation)
        .expect("positive finite expectation")
        .sample(&mut rng)
}

fn synthesize_stream(
    config: &BeamConfig,
    beam: Beam,
    chi_grid: &[f64],
    stream: u64,
) -> Result<Interferogram> {
    config.validate()?;
    validate_grid(chi_grid)?;
    let intensity = chi_grid
        .iter()
        .enumerate()
        .map(|(i, &chi)| {
            let expected = config.mean_counts * mixed_intensity(config, beam, chi);
            match config.noise_seed {
                Some(seed) => poisson_draw(seed, stream, i, expected),
                None => expected,
            }
        })
        .collect();
    Interferogram::new(chi_grid.to_vec(), intensity, beam, *config)
}

/// Expected counts `mean_counts × mixed_intensity` on `chi_grid`, replaced by
/// Poisson draws when the config carries a seed. Each point's draw depends
/// only on `(seed, index)`.
pub fn synthesize_interferogram(
    config: &BeamConfig,
    beam: Beam,
    chi_grid: &[f64],
) -> Result<Interferogram> {
    synthesize_stream(config, beam, chi_grid, STREAM_ROTATED)
}

/// Rotated interferogram together with its rotators-off reference on the
/// same grid. The reference draws from an independent noise stream.
pub fn synthesize_pair(
    config: &BeamConfig,
    beam: Beam,
    chi_grid: &[f64],
) -> Result<(Interferogram, Interferogram)> {
    let rotated = synthesize_stream(config, beam, chi_grid, STREAM_ROTATED)?;
    let reference = synthesize_stream(&config.reference(), beam, chi_grid, STREAM_REFERENCE)?;
    Ok((rotated, reference))
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

    #[test]
    fn o_beam_examples() {
        assert!((o_beam_intensity(th(90.0), al(180.0), 180.0) - 4.0).abs() < 1e-12);
        assert!(o_beam_intensity(th(90.0), al(180.0), 0.0).abs() < 1e-12);
        for chi in [0.0, 33.0, 180.0, 271.0] {
            assert!(o_beam_intensity(th(90.0), al(0.0), chi).abs() < 1e-12);
        }
    }

    #[test]
    fn h_beam_examples() {
        for chi in [0.0, 45.0, 90.0, 200.0] {
            assert!((h_beam_intensity(th(90.0), al(90.0), chi) - 2.0).abs() < 1e-12);
        }
        assert!(h_beam_intensity(th(90.0), al(180.0), 0.0).abs() < 1e-12);
        assert!((h_beam_intensity(th(37.0), al(0.0), 0.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn full_polarization_is_pure_state() {
        for beam in [Beam::O, Beam::H] {
            let cfg = BeamConfig::ideal(th(60.0), al(135.0));
            for chi in [0.0, 10.0, 95.0, 300.0] {
                let pure = match beam {
                    Beam::O => o_beam_intensity(th(60.0), al(135.0), chi),
                    Beam::H => h_beam_intensity(th(60.0), al(135.0), chi),
                };
                assert_eq!(mixed_intensity(&cfg, beam, chi), pure);
            }
        }
    }

    #[test]
    fn contrast_scales_oscillation_about_mean() {
        let cfg = BeamConfig::ideal(th(90.0), al(180.0)).with_contrast(0.64);
        // Pure signal 2·(1 − cos χ): mean 2, amplitude 2.
        assert!((mixed_intensity(&cfg, Beam::O, 0.0) - (2.0 - 2.0 * 0.64)).abs() < 1e-12);
        assert!((mixed_intensity(&cfg, Beam::O, 180.0) - (2.0 + 2.0 * 0.64)).abs() < 1e-12);
        assert!((mixed_intensity(&cfg, Beam::O, 90.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let base = BeamConfig::ideal(th(90.0), al(90.0));
        assert!(base.validate().is_ok());
        assert!(base.with_polarization(1.1).validate().is_err());
        assert!(base.with_contrast(-0.1).validate().is_err());
        assert!(base.with_counts(-1.0).validate().is_err());
        assert!(base.with_counts(f64::NAN).validate().is_err());
    }

    #[test]
    fn synthesis_modes() {
        let grid = chi_grid(0.0, 720.0, 32).unwrap();
        assert_eq!(grid.len(), 32);
        assert_eq!(grid[1], 22.5);

        let cfg = BeamConfig::ideal(th(90.0), al(180.0)).with_counts(0.0);
        let g = synthesize_interferogram(&cfg, Beam::O, &grid).unwrap();
        assert!(g.intensity.iter().all(|&v| v == 0.0));
        let g = synthesize_interferogram(&cfg.with_seed(Some(3)), Beam::O, &grid).unwrap();
        assert!(g.intensity.iter().all(|&v| v == 0.0));

        let cfg = BeamConfig::ideal(th(90.0), al(180.0)).with_counts(100.0);
        let g = synthesize_interferogram(&cfg, Beam::O, &grid).unwrap();
        for (chi, v) in g.chi.iter().zip(&g.intensity) {
            assert!((v - 100.0 * o_beam_intensity(th(90.0), al(180.0), *chi)).abs() < 1e-9);
        }

        let noisy = cfg.with_seed(Some(42));
        let a = synthesize_interferogram(&noisy, Beam::H, &grid).unwrap();
        let b = synthesize_interferogram(&noisy, Beam::H, &grid).unwrap();
        assert_eq!(a, b);
        assert!(a.intensity.iter().all(|v| v.fract() == 0.0));
        let c = synthesize_interferogram(&noisy.with_seed(Some(43)), Beam::H, &grid).unwrap();
        assert_ne!(a.intensity, c.intensity);
    }

    #[test]
    fn noise_is_order_independent() {
        let grid = chi_grid(0.0, 720.0, 32).unwrap();
        let cfg = BeamConfig::ideal(th(60.0), al(90.0))
            .with_counts(500.0)
            .with_seed(Some(9));
        let full = synthesize_interferogram(&cfg, Beam::H, &grid).unwrap();
        let tail = synthesize_interferogram(&cfg, Beam::H, &grid[..10]).unwrap();
        assert_eq!(&full.intensity[..10], &tail.intensity[..]);
    }

    #[test]
    fn pair_reference_has_rotators_off() {
        let grid = chi_grid(0.0, 720.0, 16).unwrap();
        let cfg = BeamConfig::ideal(th(60.0), al(90.0)).with_counts(10.0);
        let (rot, reference) = synthesize_pair(&cfg, Beam::H, &grid).unwrap();
        assert_eq!(rot.config.alpha.degrees(), 90.0);
        assert_eq!(reference.config.alpha.degrees(), 0.0);
        assert!((reference.intensity[0] - 40.0).abs() < 1e-9);
    }

    #[test]
    fn grid_and_interferogram_validation() {
        let cfg = BeamConfig::ideal(th(90.0), al(90.0));
        assert!(matches!(
            Interferogram::new(vec![0.0, 0.0], vec![1.0, 1.0], Beam::O, cfg),
            Err(Error::UnorderedGrid(1))
        ));
        assert!(matches!(
            Interferogram::new(vec![0.0, 1.0], vec![1.0], Beam::O, cfg),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Interferogram::new(vec![0.0, 1.0], vec![1.0, -2.0], Beam::O, cfg),
            Err(Error::InvalidIntensity { index: 1, .. })
        ));
        assert!(chi_grid(10.0, 0.0, 4).is_err());
        assert!(chi_grid(0.0, 10.0, 0).is_err());
    }

    #[test]
    fn o_beam_amplitude_peaks_at_half_turn() {
        let amplitude = |a: f64| o_beam_intensity(th(60.0), al(a), 180.0);
        let mut previous = amplitude(180.0);
        for a in (181..360).map(f64::from) {
            let now = amplitude(a);
            assert!(now < previous, "α = {a}");
            previous = now;
        }
        let mut previous = amplitude(180.0);
        for a in (1..180).rev().map(f64::from) {
            let now = amplitude(a);
            assert!(now < previous, "α = {a}");
            previous = now;
        }
    }

    #[test]
    fn poisson_mean_converges() {
        let expectation = 37.5;
        let n = 20_000;
        let draws: Vec<f64> = (0..n)
            .map(|i| poisson_draw(123, 0, i, expectation))
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let std_err = (expectation / n as f64).sqrt();
        assert!((mean - expectation).abs() < 3.0 * std_err, "mean {mean}");
    }

    proptest! {
        #[test]
        fn operator_and_closed_form_agree(theta in 0.0..=180.0f64, alpha in -720.0..720.0f64, chi in -720.0..720.0f64) {
            let op = o_beam_intensity(th(theta), al(alpha), chi);
            let closed = o_beam_intensity_closed_form(th(theta), al(alpha), chi);
            prop_assert!((op - closed).abs() < 1e-12);
        }

        #[test]
        fn h_beam_matches_overlap_form(theta in 0.0..=180.0f64, alpha in -720.0..720.0f64, chi in -720.0..720.0f64) {
            let overlap = crate::phases::hbeam_overlap(th(theta), al(alpha));
            let expected = 2.0 + 2.0 * (Complex64::cis(-chi.to_radians()) * overlap).re;
            prop_assert!((h_beam_intensity(th(theta), al(alpha), chi) - expected).abs() < 1e-12);
        }

        #[test]
        fn mixture_is_non_negative(
            theta in 0.0..=180.0f64, alpha in -360.0..360.0f64, chi in 0.0..360.0f64,
            f in 0.0..=1.0f64, c in 0.0..=1.0f64,
        ) {
            let cfg = BeamConfig::ideal(th(theta), al(alpha)).with_polarization(f).with_contrast(c);
            prop_assert!(mixed_intensity(&cfg, Beam::O, chi) >= 0.0);
            prop_assert!(mixed_intensity(&cfg, Beam::H, chi) >= 0.0);
        }
    }
}
