//! On-disk formats.
//!
//! * Interferogram CSV: header `chi_deg,counts`, one row per grid point.
//!   Values are written with the shortest representation that parses back
//!   to the identical `f64`.
//! * Interferogram sidecar JSON: beam label and the full [`BeamConfig`].
//! * Loop waypoint CSV: `arc_index,kind,x,y,z`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beamline::{Beam, BeamConfig, Interferogram};
use crate::error::{Error, Result};
use crate::geometry::BlochLoop;
use crate::SCHEMA_VERSION;

pub const INTERFEROGRAM_HEADER: &str = "chi_deg,counts";
pub const LOOP_HEADER: &str = "arc_index,kind,x,y,z";

pub fn interferogram_to_csv(g: &Interferogram) -> String {
    let mut out = String::with_capacity(32 * (g.len() + 1));
    out.push_str(INTERFEROGRAM_HEADER);
    out.push('\n');
    for (chi, v) in g.chi.iter().zip(&g.intensity) {
        out.push_str(&format!("{chi},{v}\n"));
    }
    out
}

/// Parsed `chi_deg,counts` table.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferogramTable {
    pub chi: Vec<f64>,
    pub counts: Vec<f64>,
}

impl InterferogramTable {
    /// True when every value is a non-negative integer.
    pub fn looks_like_counts(&self) -> bool {
        self.counts.iter().all(|v| v.fract() == 0.0)
    }
}

pub fn parse_interferogram_csv(text: &str) -> Result<InterferogramTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == INTERFEROGRAM_HEADER => {}
        Some((i, header)) => {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected header {INTERFEROGRAM_HEADER:?}, found {header:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    let mut table = InterferogramTable {
        chi: Vec::new(),
        counts: Vec::new(),
    };
    for (i, line) in lines {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad {what} {s:?}: {e}"),
            })
        };
        let chi = parse(fields[0], "chi_deg")?;
        let value = parse(fields[1], "counts")?;
        if !chi.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("chi_deg must be finite, got {chi}"),
            });
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("counts must be finite and non-negative, got {value}"),
            });
        }
        if let Some(&prev) = table.chi.last() {
            if chi <= prev {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("chi_deg must increase strictly ({chi} after {prev})"),
                });
            }
        }
        table.chi.push(chi);
        table.counts.push(value);
    }
    Ok(table)
}

/// Metadata written next to every synthesized interferogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferogramSidecar {
    pub schema_version: u32,
    pub beam: Beam,
    pub config: BeamConfig,
}

impl InterferogramSidecar {
    pub fn for_interferogram(g: &Interferogram) -> Self {
        InterferogramSidecar {
            schema_version: SCHEMA_VERSION,
            beam: g.beam,
            config: g.config,
        }
    }
}

/// `foo.csv` → `foo.json`
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV and its JSON sidecar.
pub fn write_interferogram(g: &Interferogram, csv_path: &Path) -> Result<()> {
    fs::write(csv_path, interferogram_to_csv(g))?;
    let sidecar = serde_json::to_string_pretty(&InterferogramSidecar::for_interferogram(g))
        .map_err(|e| Error::Io(e.to_string()))?;
    fs::write(sidecar_path(csv_path), sidecar + "\n")?;
    Ok(())
}

/// A CSV table plus its sidecar when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedInterferogram {
    pub table: InterferogramTable,
    pub sidecar: Option<InterferogramSidecar>,
}

impl LoadedInterferogram {
    /// Whether the values should be fitted as Poisson counts. Without a
    /// sidecar, integer-valued data are taken to be counts.
    pub fn is_counts(&self) -> bool {
        match &self.sidecar {
            Some(s) => s.config.noise_seed.is_some(),
            None => self.table.looks_like_counts(),
        }
    }

    /// Rebuilds the full interferogram; requires the sidecar.
    pub fn to_interferogram(&self) -> Option<Result<Interferogram>> {
        self.sidecar.as_ref().map(|s| {
            Interferogram::new(
                self.table.chi.clone(),
                self.table.counts.clone(),
                s.beam,
                s.config,
            )
        })
    }
}

pub fn read_interferogram(csv_path: &Path) -> Result<LoadedInterferogram> {
    let text = fs::read_to_string(csv_path)
        .map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
    let table = parse_interferogram_csv(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", csv_path.display()),
        },
        other => other,
    })?;
    let side = sidecar_path(csv_path);
    let sidecar = if side.exists() {
        let text = fs::read_to_string(&side)?;
        let sidecar: InterferogramSidecar = serde_json::from_str(&text)
            .map_err(|e| Error::Io(format!("{}: {e}", side.display())))?;
        sidecar.config.validate()?;
        Some(sidecar)
    } else {
        None
    };
    Ok(LoadedInterferogram { table, sidecar })
}

pub fn loop_to_csv(lp: &BlochLoop) -> String {
    let mut out = String::from(LOOP_HEADER);
    out.push('\n');
    for (i, arc) in lp.arcs.iter().enumerate() {
        for w in &arc.waypoints {
            out.push_str(&format!(
                "{i},{},{},{},{}\n",
                arc.kind.as_str(),
                w.x,
                w.y,
                w.z
            ));
        }
    }
    out
}
