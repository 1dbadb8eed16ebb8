//! The grid search rejects some design cells from static torque analysis
//! alone, without running the jump protocol: any cell whose static hold
//! torque along the descent exceeds the saturation limit by a margin is
//! assumed unable to jump. That threshold is a heuristic, so this test
//! spot-checks a 5% random sample of the torque-rejected cells against the
//! full protocol. (Cells rejected for closure reasons need no such check:
//! their commanded pose sequence leaves the reachable workspace, so the
//! protocol cannot complete it by construction.)

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use springhop_core::actuation::series_equivalent;
use springhop_core::dynamics::{simulate_jump, JumpScenario, RobotDesign, SpringInterpretation};
use springhop_core::kinematics::LegGeometry;
use springhop_core::optimizer::{evaluate_cell, DesignSpace, InfeasibleReason};
use springhop_core::MARS_GRAVITY;

fn design_for_cell(base: &RobotDesign, scenario: &JumpScenario, l1: f64, l3: f64, k: f64) -> Option<RobotDesign> {
    // Rebuild the cell's design exactly as the grid evaluation does.
    let mut design = *base;
    design.geometry = LegGeometry::new(base.geometry.l0, l1, l1, l3, l3).ok()?;
    design.spring.stiffness = match scenario.spring_interpretation {
        SpringInterpretation::Equivalent => k,
        SpringInterpretation::Physical => series_equivalent(k),
    };
    Some(design)
}

#[test]
fn torque_screened_cells_also_fail_the_full_protocol() {
    let base = RobotDesign::default();
    let scenario = JumpScenario::vertical(MARS_GRAVITY, 22.5, 120f64.to_radians());
    let space = DesignSpace::default();

    // Label every cell; keep the ones the torque screen rejected.
    let mut screened = Vec::new();
    for l1 in space.l1.samples() {
        for l3 in space.l3.samples() {
            for k in space.stiffness.samples() {
                let cell = evaluate_cell(&base, &scenario, l1, l3, k);
                if cell.reason == Some(InfeasibleReason::SpringExceedsTorque) {
                    screened.push((l1, l3, k));
                }
            }
        }
    }
    assert!(
        screened.len() > 50,
        "the torque screen should reject a meaningful share of the default grid, got {}",
        screened.len()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0x5c2e);
    screened.shuffle(&mut rng);
    let sample = screened.len().div_ceil(20); // 5% of the rejected cells

    for &(l1, l3, k) in screened.iter().take(sample) {
        let Some(design) = design_for_cell(&base, &scenario, l1, l3, k) else {
            continue; // not even constructible: trivially fails
        };
        let mut sc = scenario;
        sc.spring_interpretation = SpringInterpretation::Equivalent;

        match simulate_jump(&design, &sc) {
            Err(_) => {} // protocol aborts: the cell fails outright
            Ok(r) => assert!(
                !r.squat_reached || r.no_liftoff,
                "cell l1={l1:.2} l3={l3:.2} k={k}: statically rejected but the \
                 full protocol jumped (apex {:.3} m)",
                r.body_apex
            ),
        }
    }
}

#[test]
fn workspace_leaving_design_errors_out_instead_of_hanging() {
    // This cell is rejected statically because its commanded squat leaves the
    // solvable workspace. Simulated raw, the leg grinds against the closure
    // boundary and adaptive steps collapse; the run must be cut off by the
    // evaluation budget (or another integration error), not hang.
    let base = RobotDesign::default();
    let scenario = JumpScenario::vertical(MARS_GRAVITY, 22.5, 120f64.to_radians());
    let cell = evaluate_cell(&base, &scenario, 0.14, 0.18, 850.0);
    assert_eq!(cell.reason, Some(InfeasibleReason::SquatUnreachable));

    let design = design_for_cell(&base, &scenario, 0.14, 0.18, 850.0).unwrap();
    let result = simulate_jump(&design, &scenario);
    assert!(result.is_err(), "expected an error, got {result:?}");
}
