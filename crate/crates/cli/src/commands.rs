use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use geophase_core::beamline::chi_grid;
use geophase_core::fit::{fit_points, fitted_visibility, shift_uncertainty};
use geophase_core::geometry::normalize_solid_angle;
use geophase_core::io::{
    loop_to_csv, read_interferogram, write_interferogram, LoadedInterferogram,
};
use geophase_core::phases::angular_difference;
use geophase_core::{
    direct_evolution_loop, fit_sinusoid, generalized_bp_phase, loop_solid_angle, measure_shift,
    off_diagonal_loop, off_diagonal_phase, phase_from_solid_angle, phase_shift,
    synthesize_interferogram, Beam, BeamConfig, BlochLoop, Error, PhaseResult, PolarAngle,
    RotationAngle, SinusoidFit, SCHEMA_VERSION,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    ChiArgs, ConfigArgs, EraserArgs, FitArgs, Format, GeometryArgs, InterferogramArgs, NoiseArgs,
    PhaseSweepArgs, TableOutput,
};
use crate::CliError;

type CliResult<T = ()> = Result<T, CliError>;

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn data(e: Error) -> CliError {
    CliError::Data(e.to_string())
}

fn polar(deg: f64) -> CliResult<PolarAngle> {
    PolarAngle::from_degrees(deg).map_err(usage)
}

fn rotation(deg: f64) -> CliResult<RotationAngle> {
    RotationAngle::from_degrees(deg).map_err(usage)
}

fn grid(chi: &ChiArgs) -> CliResult<Vec<f64>> {
    if chi.chi_steps < 4 {
        return Err(CliError::Usage(format!(
            "--chi-steps must be at least 4 to fit a sinusoid, got {}",
            chi.chi_steps
        )));
    }
    chi_grid(chi.chi_start, chi.chi_end, chi.chi_steps).map_err(usage)
}

fn config(
    theta: PolarAngle,
    alpha: RotationAngle,
    c: &ConfigArgs,
    noise: Option<&NoiseArgs>,
) -> CliResult<BeamConfig> {
    let mut cfg = BeamConfig::ideal(theta, alpha)
        .with_polarization(c.pol_fraction)
        .with_contrast(c.contrast);
    if let Some(n) = noise {
        cfg = cfg.with_counts(n.counts).with_seed(n.seed);
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult {
    match out {
        Some(path) => write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("standard output: {e}"))),
    }
}

fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn defined_value(p: &PhaseResult) -> Option<f64> {
    p.defined.then_some(p.value)
}

#[derive(Serialize)]
struct GridSpec {
    start_deg: f64,
    end_deg: f64,
    steps: usize,
}

impl From<&ChiArgs> for GridSpec {
    fn from(c: &ChiArgs) -> Self {
        GridSpec {
            start_deg: c.chi_start,
            end_deg: c.chi_end,
            steps: c.chi_steps,
        }
    }
}

#[derive(Serialize)]
struct ShiftReport {
    value_deg: Option<f64>,
    defined: bool,
    sigma_deg: Option<f64>,
}

impl ShiftReport {
    fn new(shift: &PhaseResult, sigma: f64) -> Self {
        ShiftReport {
            value_deg: defined_value(shift),
            defined: shift.defined,
            sigma_deg: shift.defined.then_some(sigma),
        }
    }
}

// ---------------------------------------------------------------- phase-sweep

#[derive(Serialize)]
struct Fitted {
    fitted_phase_deg: Option<f64>,
    fitted_defined: bool,
    fitted_phase_sigma_deg: Option<f64>,
}

#[derive(Serialize)]
struct SweepRow {
    theta_deg: f64,
    alpha_deg: f64,
    gamma_off_deg: Option<f64>,
    defined: bool,
    magnitude: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    fitted: Option<Fitted>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    schema_version: u32,
    command: &'static str,
    beam: Beam,
    polarization_fraction: f64,
    instrument_contrast: f64,
    mean_counts: f64,
    noise_seed: Option<u64>,
    chi_grid: GridSpec,
    rows: &'a [SweepRow],
}

pub fn phase_sweep(a: &PhaseSweepArgs, stdout: &mut dyn Write) -> CliResult {
    let chi = grid(&a.chi)?;
    let beam: Beam = a.beam.into();
    let mut points = Vec::with_capacity(a.thetas.len() * a.alphas.len());
    for &t in &a.thetas {
        for &al in &a.alphas {
            points.push(config(polar(t)?, rotation(al)?, &a.config, Some(&a.noise))?);
        }
    }
    let with_fit = a.config.pol_fraction < 1.0;

    let rows = points
        .par_iter()
        .map(|cfg| {
            let gamma = off_diagonal_phase(cfg.theta, cfg.alpha);
            let fitted = if with_fit {
                let m = measure_shift(cfg, beam, &chi).map_err(data)?;
                Some(Fitted {
                    fitted_phase_deg: defined_value(&m.shift),
                    fitted_defined: m.shift.defined,
                    fitted_phase_sigma_deg: m.shift.defined.then_some(m.shift_uncertainty),
                })
            } else {
                None
            };
            Ok(SweepRow {
                theta_deg: cfg.theta.degrees(),
                alpha_deg: cfg.alpha.degrees(),
                gamma_off_deg: defined_value(&gamma),
                defined: gamma.defined,
                magnitude: gamma.magnitude,
                fitted,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let text = match a.output.format {
        Format::Json => to_json(&SweepReport {
            schema_version: SCHEMA_VERSION,
            command: "phase-sweep",
            beam,
            polarization_fraction: a.config.pol_fraction,
            instrument_contrast: a.config.contrast,
            mean_counts: a.noise.counts,
            noise_seed: a.noise.seed,
            chi_grid: (&a.chi).into(),
            rows: &rows,
        }),
        Format::Csv => {
            let mut s = String::from("theta_deg,alpha_deg,gamma_off_deg,defined,magnitude");
            if with_fit {
                s.push_str(",fitted_phase_deg,fitted_defined,fitted_phase_sigma_deg");
            }
            s.push('\n');
            for r in &rows {
                let _ = write!(
                    s,
                    "{},{},{},{},{}",
                    r.theta_deg,
                    r.alpha_deg,
                    cell(r.gamma_off_deg),
                    r.defined,
                    r.magnitude
                );
                if let Some(f) = &r.fitted {
                    let _ = write!(
                        s,
                        ",{},{},{}",
                        cell(f.fitted_phase_deg),
                        f.fitted_defined,
                        cell(f.fitted_phase_sigma_deg)
                    );
                }
                s.push('\n');
            }
            s
        }
    };
    emit(&text, table_out(&a.output), stdout)
}

fn table_out(o: &TableOutput) -> Option<&Path> {
    o.out.as_deref()
}

// -------------------------------------------------------------- interferogram

#[derive(Serialize)]
struct InterferogramReport {
    schema_version: u32,
    command: &'static str,
    beam: Beam,
    config: BeamConfig,
    chi_grid: GridSpec,
    rotated_csv: &'static str,
    reference_csv: &'static str,
    rotated: SinusoidFit,
    reference: SinusoidFit,
    reference_from_limit: bool,
    oscillating: bool,
    phase_shift: ShiftReport,
}

pub fn interferogram(a: &InterferogramArgs, stdout: &mut dyn Write) -> CliResult {
    let chi = grid(&a.chi)?;
    let beam: Beam = a.beam.into();
    let cfg = config(
        polar(a.theta)?,
        rotation(a.alpha)?,
        &a.config,
        Some(&a.noise),
    )?;
    let m = measure_shift(&cfg, beam, &chi).map_err(data)?;

    ensure_dir(&a.out)?;
    let io_err = |e: Error| CliError::Data(e.to_string());
    write_interferogram(&m.rotated, &a.out.join("rotated.csv")).map_err(io_err)?;
    write_interferogram(&m.reference, &a.out.join("reference.csv")).map_err(io_err)?;

    let report = to_json(&InterferogramReport {
        schema_version: SCHEMA_VERSION,
        command: "interferogram",
        beam,
        config: cfg,
        chi_grid: (&a.chi).into(),
        rotated_csv: "rotated.csv",
        reference_csv: "reference.csv",
        rotated: m.rotated_fit,
        reference: m.reference_fit,
        reference_from_limit: m.reference_from_limit,
        oscillating: m.rotated_fit.oscillating,
        phase_shift: ShiftReport::new(&m.shift, m.shift_uncertainty),
    });
    write_file(&a.out.join("fit_report.json"), &report)?;
    emit(&report, None, stdout)
}

// --------------------------------------------------------------------- eraser

#[derive(Serialize)]
struct EraserRow {
    theta_deg: f64,
    alpha_deg: f64,
    visibility_o: f64,
    visibility_h: f64,
}

#[derive(Serialize)]
struct EraserReport<'a> {
    schema_version: u32,
    command: &'static str,
    polarization_fraction: f64,
    instrument_contrast: f64,
    chi_grid: GridSpec,
    rows: &'a [EraserRow],
}

pub fn eraser(a: &EraserArgs, stdout: &mut dyn Write) -> CliResult {
    let chi = grid(&a.chi)?;
    let theta = polar(a.theta)?;
    let configs = a
        .alphas
        .iter()
        .map(|&al| config(theta, rotation(al)?, &a.config, None))
        .collect::<CliResult<Vec<_>>>()?;
    let rows = configs
        .par_iter()
        .map(|cfg| {
            Ok(EraserRow {
                theta_deg: cfg.theta.degrees(),
                alpha_deg: cfg.alpha.degrees(),
                visibility_o: fitted_visibility(cfg, Beam::O, &chi).map_err(data)?,
                visibility_h: fitted_visibility(cfg, Beam::H, &chi).map_err(data)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let text = match a.output.format {
        Format::Json => to_json(&EraserReport {
            schema_version: SCHEMA_VERSION,
            command: "eraser",
            polarization_fraction: a.config.pol_fraction,
            instrument_contrast: a.config.contrast,
            chi_grid: (&a.chi).into(),
            rows: &rows,
        }),
        Format::Csv => {
            let mut s = String::from("theta_deg,alpha_deg,visibility_o,visibility_h\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    r.theta_deg, r.alpha_deg, r.visibility_o, r.visibility_h
                );
            }
            s
        }
    };
    emit(&text, table_out(&a.output), stdout)
}

// ------------------------------------------------------------- geometry-check

#[derive(Serialize)]
struct LoopReport {
    defined: bool,
    reason: Option<String>,
    omega_sr: Option<f64>,
    expected_omega_sr: f64,
    omega_discrepancy_sr: Option<f64>,
    half_omega_deg: Option<f64>,
    algebraic_phase_deg: Option<f64>,
    phase_discrepancy_deg: Option<f64>,
    waypoints_csv: Option<String>,
}

#[derive(Serialize)]
struct GeometryReport {
    schema_version: u32,
    command: &'static str,
    theta_deg: f64,
    alpha_deg: f64,
    samples: usize,
    off_diagonal: LoopReport,
    direct: LoopReport,
}

/// `|a − b|` with the difference reduced modulo 4π.
fn omega_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(4.0 * PI);
    d.min(4.0 * PI - d)
}

fn loop_report(
    built: Result<BlochLoop, Error>,
    expected_omega: f64,
    algebraic: PhaseResult,
    csv_name: &str,
    out: Option<&Path>,
) -> CliResult<LoopReport> {
    let undefined = |reason: String| LoopReport {
        defined: false,
        reason: Some(reason),
        omega_sr: None,
        expected_omega_sr: expected_omega,
        omega_discrepancy_sr: None,
        half_omega_deg: None,
        algebraic_phase_deg: defined_value(&algebraic),
        phase_discrepancy_deg: None,
        waypoints_csv: None,
    };
    let lp = match built {
        Ok(lp) => lp,
        Err(Error::UndefinedLoop(reason)) => return Ok(undefined(reason)),
        Err(e @ Error::TooFewSamples { .. }) => return Err(usage(e)),
        Err(e) => return Err(data(e)),
    };
    let omega = match loop_solid_angle(&lp) {
        Ok(o) => o,
        Err(Error::UndefinedLoop(reason)) => return Ok(undefined(reason)),
        Err(e) => return Err(data(e)),
    };
    let half = phase_from_solid_angle(omega);
    let waypoints_csv = match out {
        Some(dir) => {
            write_file(&dir.join(csv_name), &loop_to_csv(&lp))?;
            Some(csv_name.to_string())
        }
        None => None,
    };
    Ok(LoopReport {
        defined: true,
        reason: None,
        omega_sr: Some(omega),
        expected_omega_sr: expected_omega,
        omega_discrepancy_sr: Some(omega_gap(omega, expected_omega)),
        half_omega_deg: Some(half),
        algebraic_phase_deg: defined_value(&algebraic),
        phase_discrepancy_deg: algebraic
            .defined
            .then(|| angular_difference(half, algebraic.value).abs()),
        waypoints_csv,
    })
}

pub fn geometry_check(a: &GeometryArgs, stdout: &mut dyn Write) -> CliResult {
    let theta = polar(a.theta)?;
    let alpha = rotation(a.alpha)?;
    if a.samples < 2 {
        return Err(CliError::Usage(format!(
            "--samples must be at least 2, got {}",
            a.samples
        )));
    }
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
    }
    let out = a.out.as_deref();
    let off_diagonal = loop_report(
        off_diagonal_loop(theta, alpha, a.samples),
        2.0 * PI,
        off_diagonal_phase(theta, alpha),
        "off_diagonal_loop.csv",
        out,
    )?;
    let direct = loop_report(
        direct_evolution_loop(theta, alpha, a.samples),
        normalize_solid_angle(2.0 * PI + 2.0 * alpha.radians() * theta.radians().cos()),
        generalized_bp_phase(theta, alpha),
        "direct_loop.csv",
        out,
    )?;
    let report = to_json(&GeometryReport {
        schema_version: SCHEMA_VERSION,
        command: "geometry-check",
        theta_deg: theta.degrees(),
        alpha_deg: alpha.degrees(),
        samples: a.samples,
        off_diagonal,
        direct,
    });
    if let Some(dir) = out {
        write_file(&dir.join("geometry_report.json"), &report)?;
    }
    emit(&report, None, stdout)
}

// ------------------------------------------------------------------------ fit

#[derive(Serialize)]
struct FitReport {
    schema_version: u32,
    command: &'static str,
    input: String,
    reference: String,
    counts_weighting: bool,
    input_fit: SinusoidFit,
    reference_fit: SinusoidFit,
    reference_from_limit: bool,
    phase_shift: ShiftReport,
}

fn load(path: &Path) -> CliResult<LoadedInterferogram> {
    read_interferogram(path).map_err(data)
}

fn fit_loaded(l: &LoadedInterferogram) -> CliResult<SinusoidFit> {
    match l.to_interferogram() {
        Some(g) => fit_sinusoid(&g.map_err(data)?).map_err(data),
        None => fit_points(&l.table.chi, &l.table.counts, l.is_counts()).map_err(data),
    }
}

pub fn fit(a: &FitArgs, stdout: &mut dyn Write) -> CliResult {
    let input = load(&a.input)?;
    let reference = load(&a.reference)?;
    let input_fit = fit_loaded(&input)?;
    let mut reference_fit = fit_loaded(&reference)?;

    // A fully polarized O-beam reference carries no flux; its phase comes
    // from the noise-free f → 1 limit when the sidecar says so.
    let mut reference_from_limit = false;
    if !reference_fit.oscillating {
        if let Some(limit) = reference
            .sidecar
            .as_ref()
            .and_then(|s| s.config.zero_flux_limit(s.beam).map(|c| (c, s.beam)))
        {
            let (cfg, beam) = limit;
            let ideal = synthesize_interferogram(&cfg.with_seed(None), beam, &reference.table.chi)
                .map_err(data)?;
            reference_fit = fit_sinusoid(&ideal).map_err(data)?;
            reference_from_limit = true;
        }
    }

    let shift = phase_shift(&input_fit, &reference_fit);
    let report = to_json(&FitReport {
        schema_version: SCHEMA_VERSION,
        command: "fit",
        input: a.input.display().to_string(),
        reference: a.reference.display().to_string(),
        counts_weighting: input.is_counts(),
        input_fit,
        reference_fit,
        reference_from_limit,
        phase_shift: ShiftReport::new(&shift, shift_uncertainty(&input_fit, &reference_fit)),
    });
    emit(&report, a.out.as_deref(), stdout)
}
