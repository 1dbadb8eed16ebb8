//! Deterministic CSV emission. Every writer returns the full file as a
//! `String` built from the same in-memory values in the same order, so
//! repeated runs produce byte-identical output.

use std::fmt::Write as _;

use springhop_core::actuation::StaticsSample;
use springhop_core::dynamics::{Event, TrajectorySample};
use springhop_core::kinematics::WorkspaceCloud;
use springhop_core::optimizer::DesignGrid;

pub const TRAJECTORY_HEADER: &str =
    "t_s,x_b_m,z_b_m,vz_b_m_s,alpha1_deg,alpha2_deg,tau1_Nm,tau2_Nm,spring_N,contact_N,phase";
pub const EVENTS_HEADER: &str = "event,t_s,z_b_m";
pub const GRID_HEADER: &str =
    "l1_m,l3_m,k_N_m,gravity_m_s2,body_apex_m,paw_clearance_m,feasible,reason,squat_torque_peak_Nm";
pub const WORKSPACE_HEADER: &str = "hip_deg,x_m,y_m,z_m";
pub const STATICS_HEADER: &str = "alpha_deg,tau1_Nm,tau2_Nm,spring_N";
pub const SUMMARY_HEADER: &str = "scenario,gravity_m_s2,torque_saturation_Nm,squat_deg,pitch_deg,\
     body_apex_m,paw_clearance_m,liftoff_speed_m_s,range_m,peak_torque_Nm,no_liftoff";

/// Shortest exact decimal representation (Rust's float `Display`; never
/// scientific notation, round-trips bit-exactly).
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Plain decimal with 9 significant digits.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (8 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

/// One scenario's outcome line in a suite summary.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub scenario: String,
    pub gravity: f64,
    pub torque_saturation: f64,
    pub squat_deg: f64,
    pub pitch_deg: f64,
    pub body_apex: f64,
    pub paw_clearance: f64,
    pub liftoff_speed: Option<f64>,
    pub range: Option<f64>,
    pub peak_torque: f64,
    pub no_liftoff: bool,
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_trajectory_csv(samples: &[TrajectorySample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.x_b),
            fmt_f64(s.z_b),
            fmt_f64(s.vz_b),
            fmt_f64(s.alpha1.to_degrees()),
            fmt_f64(s.alpha2.to_degrees()),
            fmt_f64(s.tau1),
            fmt_f64(s.tau2),
            fmt_f64(s.spring_force),
            fmt_f64(s.contact_normal),
            s.phase.as_str(),
        );
    }
    out
}

pub fn write_events_csv(events: &[Event]) -> String {
    let mut out = String::new();
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(out, "{},{},{}", e.kind.as_str(), fmt_f64(e.t), fmt_f64(e.z_b));
    }
    out
}

pub fn write_grid_csv(grid: &DesignGrid) -> String {
    let mut out = String::with_capacity(64 * (grid.cells.len() + 1));
    out.push_str(GRID_HEADER);
    out.push('\n');
    for c in &grid.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(c.l1),
            fmt_f64(c.l3),
            fmt_f64(c.stiffness),
            fmt_f64(grid.gravity),
            fmt_f64(c.body_apex),
            fmt_f64(c.paw_clearance),
            c.feasible,
            c.reason.map(|r| r.as_str()).unwrap_or(""),
            fmt_f64(c.squat_torque_peak),
        );
    }
    out
}

pub fn write_workspace_csv(cloud: &WorkspaceCloud) -> String {
    let mut out = String::with_capacity(48 * (cloud.points.len() + 1));
    out.push_str(WORKSPACE_HEADER);
    out.push('\n');
    for p in &cloud.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig9(p.hip.to_degrees()),
            fmt_sig9(p.x),
            fmt_sig9(p.y),
            fmt_sig9(p.z),
        );
    }
    out
}

pub fn write_statics_csv(samples: &[StaticsSample]) -> String {
    let mut out = String::new();
    out.push_str(STATICS_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig9(s.alpha.to_degrees()),
            fmt_sig9(s.tau1),
            fmt_sig9(s.tau2),
            fmt_sig9(s.spring_tension),
        );
    }
    out
}

pub fn write_summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            fmt_f64(r.gravity),
            fmt_f64(r.torque_saturation),
            fmt_f64(r.squat_deg),
            fmt_f64(r.pitch_deg),
            fmt_f64(r.body_apex),
            fmt_f64(r.paw_clearance),
            opt(r.liftoff_speed),
            opt(r.range),
            fmt_f64(r.peak_torque),
            r.no_liftoff,
        );
    }
    out
}
