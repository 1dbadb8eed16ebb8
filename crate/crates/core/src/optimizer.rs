//! Grid search over leg-link lengths and spring stiffness: every cell is
//! screened statically, simulated with the full jump protocol, and labeled
//! feasible or not; a robust selection then picks the design whose
//! worst-case apex over a stiffness window is best.

#[allow(unused_imports)]
use crate::math::*;

use alloc::vec::Vec;

use crate::actuation::{series_equivalent, static_hold_torque};
use crate::dynamics::{
    simulate_jump, JumpResult, JumpScenario, RobotDesign, ScenarioError, SpringInterpretation,
};
use crate::kinematics::{ControlAngles, LegGeometry};

/// Static-screen sweep step (rad, 0.5 degrees).
const SCREEN_SWEEP_STEP: f64 = 0.008726646259971648;

/// Cells whose static torque demand exceeds the saturation by more than
/// this factor are rejected without simulating: the hold is dynamic, so a
/// modest transient overshoot of the static demand can still be driven, but
/// beyond it the squat can neither be held nor left.
const SCREEN_TORQUE_MARGIN: f64 = 1.25;

/// A thrust that times out with every hip still within this of the squat
/// (rad, 15 degrees) counts as a failed stand-up rather than a mere missing
/// liftoff.
const STANDUP_FOLD_MARGIN: f64 = 0.2617993877991494;

/// One inclusive sampling axis `start, start + step, ..., end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(start: f64, end: f64, step: f64) -> Self {
        GridAxis { start, end, step }
    }

    /// Number of samples on the axis, both endpoints included.
    pub fn count(&self) -> usize {
        if !(self.step > 0.0) || self.end < self.start {
            return 1;
        }
        ((self.end - self.start) / self.step + 1e-9) as usize + 1
    }

    /// The sample values, endpoints included.
    pub fn samples(&self) -> Vec<f64> {
        let n = self.count();
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// The searched design space: hip-link length, calf-link length, and
/// equivalent spring stiffness. Legs stay symmetric (l2 = l1, l4 = l3) and
/// the hip spacing l0 is fixed by the chassis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignSpace {
    /// Hip-link length axis (m).
    pub l1: GridAxis,
    /// Calf-link length axis (m).
    pub l3: GridAxis,
    /// Spring stiffness axis (N/m), read under the scenario's spring
    /// interpretation.
    pub stiffness: GridAxis,
}

impl Default for DesignSpace {
    fn default() -> Self {
        DesignSpace {
            l1: GridAxis::new(0.10, 0.30, 0.02),
            l3: GridAxis::new(0.15, 0.45, 0.03),
            stiffness: GridAxis::new(600.0, 1000.0, 50.0),
        }
    }
}

impl DesignSpace {
    /// Total number of grid cells.
    pub fn cell_count(&self) -> usize {
        self.l1.count() * self.l3.count() * self.stiffness.count()
    }
}

/// Why a grid cell cannot be built or jumped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfeasibleReason {
    /// Closure unsolvable already at the stand pose.
    ClosureInfeasible,
    /// The squat pose (or an angle on the way down) is unreachable, by
    /// geometry or by the controller.
    SquatUnreachable,
    /// Static torque demand over the squat sweep exceeds the saturation by
    /// more than the screening margin.
    SpringExceedsTorque,
    /// Thrust timed out with the legs still folded near the squat.
    StandupFailed,
    /// The protocol ran but the ground never unloaded.
    NoLiftoff,
}

impl InfeasibleReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            InfeasibleReason::ClosureInfeasible => "closure_infeasible",
            InfeasibleReason::SquatUnreachable => "squat_unreachable",
            InfeasibleReason::SpringExceedsTorque => "spring_exceeds_torque",
            InfeasibleReason::StandupFailed => "standup_failed",
            InfeasibleReason::NoLiftoff => "no_liftoff",
        }
    }
}

impl core::fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one grid cell. Screened-out cells carry zero apex and
/// clearance; simulated no-liftoff cells carry the standing height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellResult {
    pub l1: f64,
    pub l3: f64,
    /// Stiffness axis value (N/m), as configured.
    pub stiffness: f64,
    pub body_apex: f64,
    pub paw_clearance: f64,
    /// Largest static torque magnitude over the stand-to-squat sweep (N m).
    pub squat_torque_peak: f64,
    pub feasible: bool,
    pub reason: Option<InfeasibleReason>,
}

/// A full evaluated grid with the scenario facts selection needs.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignGrid {
    /// Cells sorted by (l1, l3, stiffness).
    pub cells: Vec<CellResult>,
    pub gravity: f64,
    pub torque_saturation: f64,
}

impl DesignGrid {
    /// Assembles a grid from cells evaluated in any order (e.g. in
    /// parallel); sorting makes the result independent of that order.
    pub fn from_cells(mut cells: Vec<CellResult>, scenario: &JumpScenario) -> Self {
        cells.sort_by(|a, b| {
            (a.l1, a.l3, a.stiffness)
                .partial_cmp(&(b.l1, b.l3, b.stiffness))
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        DesignGrid {
            cells,
            gravity: scenario.gravity,
            torque_saturation: scenario.torque_saturation,
        }
    }

    pub fn feasible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.feasible).count()
    }
}

/// Evaluates one design cell: builds the symmetric-leg geometry, screens the
/// static stand-to-squat torque demand, and runs the jump protocol. Never
/// fails; every failure mode becomes an infeasibility label.
pub fn evaluate_cell(
    base: &RobotDesign,
    scenario: &JumpScenario,
    l1: f64,
    l3: f64,
    stiffness: f64,
) -> CellResult {
    let infeasible = |reason, peak| CellResult {
        l1,
        l3,
        stiffness,
        body_apex: 0.0,
        paw_clearance: 0.0,
        squat_torque_peak: peak,
        feasible: false,
        reason: Some(reason),
    };

    let mut design = *base;
    design.geometry = match LegGeometry::new(base.geometry.l0, l1, l1, l3, l3) {
        Ok(g) => g,
        Err(_) => return infeasible(InfeasibleReason::ClosureInfeasible, 0.0),
    };
    // Resolve the interpretation here so the static screen and the
    // simulation see the same equivalent spring.
    design.spring.stiffness = match scenario.spring_interpretation {
        SpringInterpretation::Equivalent => stiffness,
        SpringInterpretation::Physical => series_equivalent(stiffness),
    };
    let mut scenario = *scenario;
    scenario.spring_interpretation = SpringInterpretation::Equivalent;

    // Static screen over the descent.
    let g_eff = scenario.gravity * scenario.pitch.cos();
    let stand = scenario.timings.stand_angle;
    let sweep_len = ((scenario.squat_angle - stand) / SCREEN_SWEEP_STEP).ceil() as usize + 1;
    let mut peak = 0.0f64;
    for i in 0..sweep_len {
        let alpha = (stand + i as f64 * SCREEN_SWEEP_STEP).min(scenario.squat_angle);
        match static_hold_torque(ControlAngles::symmetric(alpha), &design, g_eff) {
            Ok((tau1, tau2)) => peak = peak.max(tau1.abs()).max(tau2.abs()),
            Err(_) if i == 0 => return infeasible(InfeasibleReason::ClosureInfeasible, peak),
            Err(_) => return infeasible(InfeasibleReason::SquatUnreachable, peak),
        }
    }
    let saturation = scenario.torque_saturation.min(base.motor.max_torque);
    if peak > SCREEN_TORQUE_MARGIN * saturation {
        return infeasible(InfeasibleReason::SpringExceedsTorque, peak);
    }

    let result = match simulate_jump(&design, &scenario) {
        Ok(r) => r,
        Err(_) => return infeasible(InfeasibleReason::StandupFailed, peak),
    };
    if let Some(reason) = infeasibility_from(&result, scenario.squat_angle) {
        return CellResult {
            body_apex: result.body_apex,
            paw_clearance: result.paw_clearance,
            ..infeasible(reason, peak)
        };
    }
    CellResult {
        l1,
        l3,
        stiffness,
        body_apex: result.body_apex,
        paw_clearance: result.paw_clearance,
        squat_torque_peak: peak,
        feasible: true,
        reason: None,
    }
}

/// Classifies a completed protocol run that still fails the cell.
fn infeasibility_from(result: &JumpResult, squat_angle: f64) -> Option<InfeasibleReason> {
    if !result.squat_reached {
        return Some(InfeasibleReason::SquatUnreachable);
    }
    if result.no_liftoff {
        let still_folded = result
            .trajectory
            .last()
            .map(|s| s.alpha1.max(s.alpha2) > squat_angle - STANDUP_FOLD_MARGIN)
            .unwrap_or(true);
        return Some(if still_folded {
            InfeasibleReason::StandupFailed
        } else {
            InfeasibleReason::NoLiftoff
        });
    }
    None
}

/// Evaluates every cell of the design space in a fixed order.
pub fn grid_search(
    base: &RobotDesign,
    scenario: &JumpScenario,
    space: &DesignSpace,
) -> Result<DesignGrid, ScenarioError> {
    scenario.validate(&base.motor)?;
    let mut cells = Vec::with_capacity(space.cell_count());
    for l1 in space.l1.samples() {
        for l3 in space.l3.samples() {
            for k in space.stiffness.samples() {
                cells.push(evaluate_cell(base, scenario, l1, l3, k));
            }
        }
    }
    Ok(DesignGrid::from_cells(cells, scenario))
}

/// One picked design point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignPick {
    pub l1: f64,
    pub l3: f64,
    pub stiffness: f64,
    pub body_apex: f64,
}

/// Robust and raw winners of a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    /// Best worst-case design: maximizes the minimum apex over the
    /// stiffness window, among feasible cells with static-torque headroom.
    pub robust: DesignPick,
    /// The minimum apex over the robust winner's stiffness window.
    pub robust_apex: f64,
    /// Plain argmax of the apex over all feasible cells.
    pub raw: DesignPick,
}

/// No cell was feasible (or none passed the torque-headroom filter).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoFeasibleDesign;

impl core::fmt::Display for NoFeasibleDesign {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "no feasible design in the searched grid")
    }
}

impl core::error::Error for NoFeasibleDesign {}

/// Default stiffness window for [`select_design`] (N/m): springs of the
/// catalog neighborhood a builder might substitute.
pub const DEFAULT_K_WINDOW: f64 = 100.0;

/// Default torque headroom for [`select_design`]: keep the static squat
/// demand at or below 80% of saturation everywhere in the window.
pub const DEFAULT_TORQUE_HEADROOM: f64 = 0.2;

/// Picks a design from an evaluated grid.
///
/// A cell is a candidate when its whole stiffness window is trustworthy:
/// the grid must actually cover `[k - k_window, k + k_window]` for its
/// geometry (no one-sided edge windows), and every cell in that window must
/// be feasible with its peak static squat torque at or below
/// `(1 - torque_headroom) * saturation`. Each candidate is scored by the
/// worst apex in its window and the best worst-case wins; ties fall to the
/// higher nominal apex, then to the smaller l1, l3, and stiffness, so the
/// result is deterministic. With a zero window and zero headroom this
/// degenerates to the plain apex argmax. The unconditional argmax over all
/// feasible cells is reported alongside.
pub fn select_design(
    grid: &DesignGrid,
    k_window: f64,
    torque_headroom: f64,
) -> Result<Selection, NoFeasibleDesign> {
    let pick = |c: &CellResult| DesignPick {
        l1: c.l1,
        l3: c.l3,
        stiffness: c.stiffness,
        body_apex: c.body_apex,
    };

    let raw = grid
        .cells
        .iter()
        .filter(|c| c.feasible)
        .max_by(|a, b| {
            a.body_apex
                .partial_cmp(&b.body_apex)
                .unwrap_or(core::cmp::Ordering::Equal)
                // Prefer smaller geometry on exact ties, deterministically.
                .then_with(|| {
                    (b.l1, b.l3, b.stiffness)
                        .partial_cmp(&(a.l1, a.l3, a.stiffness))
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
        })
        .ok_or(NoFeasibleDesign)?;

    // Stiffness coverage per geometry column, so edge cells cannot claim
    // robustness over stiffnesses the grid never evaluated.
    let mut columns: alloc::collections::BTreeMap<(u64, u64), (f64, f64)> =
        alloc::collections::BTreeMap::new();
    for c in &grid.cells {
        let entry = columns
            .entry((c.l1.to_bits(), c.l3.to_bits()))
            .or_insert((c.stiffness, c.stiffness));
        entry.0 = entry.0.min(c.stiffness);
        entry.1 = entry.1.max(c.stiffness);
    }

    let torque_limit = (1.0 - torque_headroom) * grid.torque_saturation;
    let slack = 1e-9 * k_window.max(1.0);
    let mut best: Option<(f64, &CellResult)> = None;
    'cells: for cell in grid.cells.iter().filter(|c| c.feasible) {
        let (col_lo, col_hi) = columns[&(cell.l1.to_bits(), cell.l3.to_bits())];
        if col_lo > cell.stiffness - k_window + slack
            || col_hi < cell.stiffness + k_window - slack
        {
            continue; // window extends past the evaluated axis
        }
        let mut windowed_worst = f64::INFINITY;
        for other in grid.cells.iter().filter(|o| {
            o.l1 == cell.l1
                && o.l3 == cell.l3
                && (o.stiffness - cell.stiffness).abs() <= k_window + slack
        }) {
            if !other.feasible || other.squat_torque_peak > torque_limit {
                continue 'cells; // a plausible spring swap breaks the design
            }
            windowed_worst = windowed_worst.min(other.body_apex);
        }
        let better = match best {
            None => true,
            Some((best_worst, best_cell)) => {
                windowed_worst > best_worst
                    || (windowed_worst == best_worst && cell.body_apex > best_cell.body_apex)
                    || (windowed_worst == best_worst
                        && cell.body_apex == best_cell.body_apex
                        && (cell.l1, cell.l3, cell.stiffness)
                            < (best_cell.l1, best_cell.l3, best_cell.stiffness))
            }
        };
        if better {
            best = Some((windowed_worst, cell));
        }
    }
    let (robust_apex, robust) = best.ok_or(NoFeasibleDesign)?;
    Ok(Selection {
        robust: pick(robust),
        robust_apex,
        raw: pick(raw),
    })
}
