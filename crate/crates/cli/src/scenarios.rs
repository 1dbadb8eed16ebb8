//! Fixed scenario matrices for the figure-reproduction suites, plus the run
//! manifest that pins every input of a batch run.

use std::path::PathBuf;

use springhop_core::dynamics::JumpScenario;
use springhop_core::{EARTH_GRAVITY, MARS_GRAVITY};

use crate::output::fmt_f64;

/// The six (torque saturation Nm, squat deg) pairs the vertical- and
/// forward-jump suites share.
pub const SUITE_PAIRS: [(f64, f64); 6] = [
    (14.4, 90.0),
    (18.0, 90.0),
    (21.6, 90.0),
    (18.0, 115.0),
    (22.5, 120.0),
    (24.8, 120.0),
];

/// The four Earth hardware-experiment settings.
pub const EXPERIMENT_PAIRS: [(f64, f64); 4] =
    [(14.4, 90.0), (18.0, 90.0), (21.6, 90.0), (18.0, 115.0)];

/// Batch suites reproducing the reference figures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SuiteName {
    /// Vertical jumps, six torque/squat settings, Earth and Mars.
    #[value(name = "fig5_vertical")]
    Fig5Vertical,
    /// 30-degree forward jumps, six torque/squat settings, Earth and Mars.
    #[value(name = "fig6_forward")]
    Fig6Forward,
    /// The four Earth settings matching the hardware experiments.
    #[value(name = "fig8_experiments")]
    Fig8Experiments,
}

impl SuiteName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Fig5Vertical => "fig5_vertical",
            SuiteName::Fig6Forward => "fig6_forward",
            SuiteName::Fig8Experiments => "fig8_experiments",
        }
    }
}

/// Everything that determines a suite run's outputs. Runs are seed-free:
/// the same manifest always produces byte-identical files.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub suite: SuiteName,
    /// Where the robot build came from (config path or "builtin").
    pub design_reference: String,
    pub out_dir: PathBuf,
    /// Restrict the matrix to one gravity (m/s^2) if set.
    pub gravity_filter: Option<f64>,
    /// Seed-free determinism marker; always true for this engine.
    pub deterministic: bool,
}

/// One named row of a suite matrix.
#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub name: String,
    pub scenario: JumpScenario,
}

fn gravity_name(gravity: f64) -> String {
    if gravity == EARTH_GRAVITY {
        "earth".to_string()
    } else if gravity == MARS_GRAVITY {
        "mars".to_string()
    } else {
        format!("g{}", fmt_f64(gravity))
    }
}

fn row_name(suite: SuiteName, gravity: f64, torque: f64, squat_deg: f64) -> String {
    format!(
        "{}_{}_{}Nm_{}deg",
        suite.as_str(),
        gravity_name(gravity),
        fmt_f64(torque),
        fmt_f64(squat_deg)
    )
}

/// The fixed scenario matrix for a suite, optionally filtered to one
/// gravity. Row order is part of the file format: gravities in the listed
/// order, then the pair order above.
pub fn suite_matrix(suite: SuiteName, gravity_filter: Option<f64>) -> Vec<SuiteRow> {
    let mut rows = Vec::new();
    let (gravities, pairs, pitch): (&[f64], &[(f64, f64)], f64) = match suite {
        SuiteName::Fig5Vertical => (&[EARTH_GRAVITY, MARS_GRAVITY], &SUITE_PAIRS, 0.0),
        SuiteName::Fig6Forward => (
            &[EARTH_GRAVITY, MARS_GRAVITY],
            &SUITE_PAIRS,
            30f64.to_radians(),
        ),
        SuiteName::Fig8Experiments => (&[EARTH_GRAVITY], &EXPERIMENT_PAIRS, 0.0),
    };
    for &gravity in gravities {
        if let Some(filter) = gravity_filter {
            if (gravity - filter).abs() > 1e-9 {
                continue;
            }
        }
        for &(torque, squat_deg) in pairs {
            let scenario = JumpScenario::forward(gravity, torque, squat_deg.to_radians(), pitch);
            rows.push(SuiteRow {
                name: row_name(suite, gravity, torque, squat_deg),
                scenario,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_suite_is_six_pairs_in_both_gravities() {
        let rows = suite_matrix(SuiteName::Fig5Vertical, None);
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.scenario.pitch == 0.0));
        assert_eq!(rows[0].name, "fig5_vertical_earth_14.4Nm_90deg");
        assert_eq!(rows[6].name, "fig5_vertical_mars_14.4Nm_90deg");
        assert!(rows[..6].iter().all(|r| r.scenario.gravity == EARTH_GRAVITY));
        assert!(rows[6..].iter().all(|r| r.scenario.gravity == MARS_GRAVITY));
    }

    #[test]
    fn forward_suite_pitches_thirty_degrees() {
        let rows = suite_matrix(SuiteName::Fig6Forward, None);
        assert_eq!(rows.len(), 12);
        assert!(rows
            .iter()
            .all(|r| (r.scenario.pitch - 30f64.to_radians()).abs() < 1e-12));
    }

    #[test]
    fn experiments_suite_is_four_earth_rows() {
        let rows = suite_matrix(SuiteName::Fig8Experiments, None);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.scenario.gravity == EARTH_GRAVITY));
        assert_eq!(rows[3].name, "fig8_experiments_earth_18Nm_115deg");
    }

    #[test]
    fn gravity_filter_can_empty_the_matrix() {
        let rows = suite_matrix(SuiteName::Fig8Experiments, Some(MARS_GRAVITY));
        assert!(rows.is_empty());
        let rows = suite_matrix(SuiteName::Fig5Vertical, Some(MARS_GRAVITY));
        assert_eq!(rows.len(), 6);
    }
}
