//! Benchmarks for `geophase-core`. Run with `cargo bench -p geophase-bench`.

use geophase_core::{PolarAngle, RotationAngle};

/// The (θ, α) grid of the measurement series, in degrees.
pub const MEASUREMENT_GRID_THETA: [f64; 4] = [30.0, 60.0, 90.0, 135.0];
pub const MEASUREMENT_GRID_ALPHA: [f64; 9] =
    [45.0, 67.5, -67.5, 90.0, -90.0, 180.0, -180.0, 225.0, -225.0];

pub fn grid_points() -> Vec<(PolarAngle, RotationAngle)> {
    MEASUREMENT_GRID_THETA
        .iter()
        .flat_map(|&t| {
            MEASUREMENT_GRID_ALPHA.iter().map(move |&a| {
                (
                    PolarAngle::from_degrees(t).expect("valid polar angle"),
                    RotationAngle::from_degrees(a).expect("finite"),
                )
            })
        })
        .collect()
}
