//! Command implementations: each maps a validated configuration onto the
//! simulation/optimization library and writes deterministic files.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use springhop_core::actuation::static_torque_sweep;
use springhop_core::dynamics::{simulate_jump_with, JumpResult, JumpScenario, Tolerances};
use springhop_core::kinematics::{workspace_sweep, SweepOptions};
use springhop_core::optimizer::{
    evaluate_cell, select_design, DesignGrid, DesignSpace, GridAxis, Selection,
};
use springhop_core::EARTH_GRAVITY;

use crate::config::{write_config, ConfigError, ConfigFile, LoadedConfig};
use crate::output::{
    fmt_f64, write_events_csv, write_grid_csv, write_statics_csv, write_summary_csv,
    write_trajectory_csv, write_workspace_csv, SummaryRow,
};
use crate::plot::{render_summary_plot, render_trajectory_plot};
use crate::scenarios::{suite_matrix, RunManifest, SuiteRow};

/// Command failures, each carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("no feasible design in the searched grid")]
    NoFeasibleDesign,
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::NoFeasibleDesign => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

fn run_scenario(cfg: &LoadedConfig, scenario: &JumpScenario) -> Result<JumpResult, CliError> {
    simulate_jump_with(
        &cfg.design,
        scenario,
        &cfg.contact,
        &cfg.gains,
        Tolerances::default(),
    )
    .map_err(|e| CliError::Simulation(e.to_string()))
}

fn summary_row(name: &str, scenario: &JumpScenario, result: &JumpResult) -> SummaryRow {
    SummaryRow {
        scenario: name.to_string(),
        gravity: scenario.gravity,
        torque_saturation: scenario.torque_saturation,
        squat_deg: scenario.squat_angle.to_degrees(),
        pitch_deg: scenario.pitch.to_degrees(),
        body_apex: result.body_apex,
        paw_clearance: result.paw_clearance,
        liftoff_speed: result.liftoff_speed,
        range: result.range,
        peak_torque: result.peak_stance_torque,
        no_liftoff: result.no_liftoff,
    }
}

fn print_result(name: &str, result: &JumpResult) {
    println!(
        "{name}: body apex {:.4} m, paw clearance {:.4} m{}{}{}",
        result.body_apex,
        result.paw_clearance,
        result
            .liftoff_speed
            .map(|v| format!(", liftoff {v:.3} m/s"))
            .unwrap_or_default(),
        result
            .range
            .map(|r| format!(", range {r:.3} m"))
            .unwrap_or_default(),
        if result.no_liftoff { " (no liftoff)" } else { "" },
    );
}

/// `sim`: one configured scenario, written as trajectory + events CSV.
pub fn cmd_sim(
    cfg: &LoadedConfig,
    scenario_name: Option<&str>,
    gravity_override: Option<f64>,
    out_dir: &Path,
    csv_only: bool,
) -> Result<(), CliError> {
    let named = match scenario_name {
        Some(name) => cfg
            .scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| {
                let known: Vec<&str> = cfg.scenarios.iter().map(|s| s.name.as_str()).collect();
                CliError::Config(ConfigError::ConfigInvariant(format!(
                    "scenario \"{name}\" not found; configured: {known:?}"
                )))
            })?,
        None => cfg.scenarios.first().ok_or_else(|| {
            CliError::Config(ConfigError::ConfigInvariant(
                "config defines no scenarios; add a [[scenario]] block".into(),
            ))
        })?,
    };
    let mut scenario = named.scenario;
    if let Some(g) = gravity_override {
        scenario.gravity = g;
        scenario
            .validate(&cfg.design.motor)
            .map_err(|e| CliError::Config(ConfigError::ConfigInvariant(e.to_string())))?;
    }
    let result = run_scenario(cfg, &scenario)?;
    write_file(
        out_dir,
        &format!("{}_trajectory.csv", named.name),
        &write_trajectory_csv(&result.trajectory),
    )?;
    write_file(
        out_dir,
        &format!("{}_events.csv", named.name),
        &write_events_csv(&result.events),
    )?;
    if !csv_only {
        write_file(
            out_dir,
            &format!("{}_height.svg", named.name),
            &render_trajectory_plot(&result.trajectory),
        )?;
    }
    print_result(&named.name, &result);
    println!(
        "energy residual {:.2e} of peak kinetic; files in {}",
        result.energy.relative_residual,
        out_dir.display()
    );
    Ok(())
}

/// `suite`: the fixed scenario matrix of a figure, run in parallel, with
/// per-run CSVs and one summary CSV (+ SVG unless csv_only).
pub fn cmd_suite(
    cfg: &LoadedConfig,
    manifest: &RunManifest,
    csv_only: bool,
) -> Result<(), CliError> {
    let rows = suite_matrix(manifest.suite, manifest.gravity_filter);
    let results: Vec<(SuiteRow, JumpResult)> = rows
        .into_par_iter()
        .map(|row| run_scenario(cfg, &row.scenario).map(|r| (row, r)))
        .collect::<Result<_, _>>()?;

    let mut summary = Vec::with_capacity(results.len());
    for (row, result) in &results {
        write_file(
            &manifest.out_dir,
            &format!("{}_trajectory.csv", row.name),
            &write_trajectory_csv(&result.trajectory),
        )?;
        write_file(
            &manifest.out_dir,
            &format!("{}_events.csv", row.name),
            &write_events_csv(&result.events),
        )?;
        summary.push(summary_row(&row.name, &row.scenario, result));
        print_result(&row.name, result);
    }
    let summary_csv = write_summary_csv(&summary);
    let name = manifest.suite.as_str();
    write_file(&manifest.out_dir, &format!("{name}_summary.csv"), &summary_csv)?;
    if !csv_only {
        let svg = render_summary_plot(&summary_csv)
            .map_err(|e| CliError::Io(e.to_string()))?;
        write_file(&manifest.out_dir, &format!("{name}_summary.svg"), &svg)?;
    }
    println!(
        "{name}: {} scenario(s), design from {}, deterministic = {} -> {}",
        summary.len(),
        manifest.design_reference,
        manifest.deterministic,
        manifest.out_dir.display()
    );
    Ok(())
}

/// The grid-search scenario: the squat-to-120-degrees protocol at 22.5 Nm,
/// matching the design-search conditions.
pub fn optimizer_scenario(gravity: f64) -> JumpScenario {
    JumpScenario::vertical(gravity, 22.5, 120f64.to_radians())
}

/// `optimize`: parallel grid search + robust selection.
pub fn cmd_optimize(
    cfg: &LoadedConfig,
    gravity: f64,
    space: &DesignSpace,
    k_window: f64,
    torque_headroom: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let scenario = optimizer_scenario(gravity);
    // Grid stiffness values are equivalent-frame; evaluate_cell swaps the
    // base design's spring constant cell by cell.
    let base = cfg.design;

    let l1s = space.l1.samples();
    let l3s = space.l3.samples();
    let ks = space.stiffness.samples();
    let mut coords = Vec::with_capacity(space.cell_count());
    for &l1 in &l1s {
        for &l3 in &l3s {
            for &k in &ks {
                coords.push((l1, l3, k));
            }
        }
    }
    let cells: Vec<_> = coords
        .into_par_iter()
        .map(|(l1, l3, k)| evaluate_cell(&base, &scenario, l1, l3, k))
        .collect();
    let grid = DesignGrid::from_cells(cells, &scenario);

    write_file(out_dir, "grid.csv", &write_grid_csv(&grid))?;
    println!(
        "grid: {} cells, {} feasible, gravity {} m/s^2",
        grid.cells.len(),
        grid.feasible_count(),
        fmt_f64(gravity)
    );

    let selection =
        select_design(&grid, k_window, torque_headroom).map_err(|_| CliError::NoFeasibleDesign)?;
    write_file(out_dir, "selection.csv", &selection_csv(&selection))?;
    let r = &selection.robust;
    println!(
        "robust pick: l1 {:.3} m, l3 {:.3} m, k {:.0} N/m -> apex {:.4} m (worst in window {:.4} m, l1/l3 {:.3})",
        fmt_f64(r.l1),
        fmt_f64(r.l3),
        fmt_f64(r.stiffness),
        r.body_apex,
        selection.robust_apex,
        r.l1 / r.l3
    );
    let raw = &selection.raw;
    println!(
        "raw argmax:  l1 {:.3} m, l3 {:.3} m, k {:.0} N/m -> apex {:.4} m",
        fmt_f64(raw.l1),
        fmt_f64(raw.l3),
        fmt_f64(raw.stiffness),
        raw.body_apex
    );
    Ok(())
}

fn selection_csv(selection: &Selection) -> String {
    let mut out = String::from("kind,l1_m,l3_m,k_N_m,body_apex_m,windowed_min_apex_m\n");
    out.push_str(&format!(
        "robust,{},{},{},{},{}\n",
        fmt_f64(selection.robust.l1),
        fmt_f64(selection.robust.l3),
        fmt_f64(selection.robust.stiffness),
        fmt_f64(selection.robust.body_apex),
        fmt_f64(selection.robust_apex),
    ));
    out.push_str(&format!(
        "raw,{},{},{},{},\n",
        fmt_f64(selection.raw.l1),
        fmt_f64(selection.raw.l3),
        fmt_f64(selection.raw.stiffness),
        fmt_f64(selection.raw.body_apex),
    ));
    out
}

/// The coarse 5x5x5 space used for quick searches.
pub fn coarse_space() -> DesignSpace {
    DesignSpace {
        l1: GridAxis::new(0.10, 0.30, 0.05),
        l3: GridAxis::new(0.15, 0.45, 0.075),
        stiffness: GridAxis::new(600.0, 1000.0, 100.0),
    }
}

/// `workspace`: reachable paw cloud under the hardware motor limits.
pub fn cmd_workspace(
    cfg: &LoadedConfig,
    full_cloud: bool,
    increment_deg: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    if !(increment_deg > 0.0) {
        return Err(CliError::Config(ConfigError::ConfigInvariant(
            "workspace increment must be positive".into(),
        )));
    }
    let cloud = workspace_sweep(
        (-157f64.to_radians(), 160f64.to_radians()),
        (20f64.to_radians(), 337f64.to_radians()),
        (-70f64.to_radians(), 180f64.to_radians()),
        2.5f64.to_radians(),
        &cfg.design.geometry,
        SweepOptions {
            planar_increment: increment_deg.to_radians(),
            boundary_only: !full_cloud,
        },
    );
    write_file(out_dir, "workspace.csv", &write_workspace_csv(&cloud))?;
    println!(
        "workspace: {} points ({}), hip {:.1} to {:.1} deg",
        cloud.points.len(),
        if full_cloud { "full cloud" } else { "boundary only" },
        cloud.hip_range.0.to_degrees(),
        cloud.hip_range.1.to_degrees()
    );
    Ok(())
}

/// `statics`: symmetric hold-torque sweep with resting poses reported.
pub fn cmd_statics(cfg: &LoadedConfig, gravity: f64, out_dir: &Path) -> Result<(), CliError> {
    let samples = static_torque_sweep(
        &cfg.design,
        gravity,
        0.0,
        120f64.to_radians(),
        0.5f64.to_radians(),
    );
    write_file(out_dir, "statics.csv", &write_statics_csv(&samples))?;
    println!(
        "statics: {} poses at gravity {} m/s^2",
        samples.len(),
        fmt_f64(gravity)
    );
    // Resting poses: torque zero crossings while the spring is engaged.
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.spring_tension > 0.0 && b.spring_tension > 0.0 && a.tau1 * b.tau1 < 0.0 {
            let t = a.tau1 / (a.tau1 - b.tau1);
            let alpha = a.alpha + t * (b.alpha - a.alpha);
            println!("resting pose near {:.2} deg (motor torque crosses zero)", alpha.to_degrees());
        }
    }
    Ok(())
}

/// `calibrate`: secant iteration on motor viscous damping to land the
/// reference (18 Nm, 115 deg, Earth) jump on the target apex.
pub fn cmd_calibrate(
    cfg: &LoadedConfig,
    file: &ConfigFile,
    target_apex: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let scenario = JumpScenario::vertical(EARTH_GRAVITY, 18.0, 115f64.to_radians());
    let apex_at = |damping: f64| -> Result<f64, CliError> {
        let mut design = cfg.design;
        design.motor.viscous_damping = damping;
        simulate_jump_with(
            &design,
            &scenario,
            &cfg.contact,
            &cfg.gains,
            Tolerances::default(),
        )
        .map(|r| r.body_apex)
        .map_err(|e| CliError::Simulation(e.to_string()))
    };

    let mut d0 = (cfg.design.motor.viscous_damping - 0.1).max(0.0);
    let mut d1 = cfg.design.motor.viscous_damping + 0.1;
    let mut f0 = apex_at(d0)? - target_apex;
    let mut f1 = apex_at(d1)? - target_apex;
    println!("calibrating viscous damping to apex {target_apex} m:");
    println!("  damping {d0:.4} -> apex {:.4}", f0 + target_apex);
    println!("  damping {d1:.4} -> apex {:.4}", f1 + target_apex);
    let mut best = (d1, f1);
    for _ in 0..12 {
        if (f1 - f0).abs() < 1e-12 {
            break;
        }
        let d2 = (d1 - f1 * (d1 - d0) / (f1 - f0)).max(0.0);
        let f2 = apex_at(d2)? - target_apex;
        println!("  damping {d2:.4} -> apex {:.4}", f2 + target_apex);
        if f2.abs() < best.1.abs() {
            best = (d2, f2);
        }
        d0 = d1;
        f0 = f1;
        d1 = d2;
        f1 = f2;
        if f1.abs() < 5e-5 {
            break;
        }
    }
    let (damping, err) = best;
    println!(
        "calibrated viscous damping: {damping:.4} N m s/rad (apex error {:+.2e} m)",
        err
    );
    let mut calibrated = file.clone();
    calibrated.motor.viscous_damping_Nms = damping;
    let text = write_config(&calibrated);
    crate::config::parse_config(&text)?; // the written file must round-trip
    let path = write_file(out_dir, "calibrated.toml", &text)?;
    println!("wrote {}", path.display());
    Ok(())
}
