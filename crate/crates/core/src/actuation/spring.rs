//! Tension-only extension spring acting between the two knee joints.

#[allow(unused_imports)]
use crate::math::*;

use crate::kinematics::{knee_points, ControlAngles, LegGeometry};
use crate::linalg::Vec2;

/// Equivalent single spring between the knees. The hardware mounts two equal
/// springs in series along the knee-to-knee line; the simulation replaces the
/// pair with one spring of half the physical rate (see [`series_equivalent`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpringConfig {
    /// Equivalent stiffness of the knee-to-knee spring (N/m).
    pub stiffness: f64,
    /// Natural length; the spring is slack below it (m).
    pub natural_length: f64,
}

impl Default for SpringConfig {
    fn default() -> Self {
        SpringConfig {
            stiffness: 435.0,
            natural_length: 0.200,
        }
    }
}

/// Stiffness of two equal springs in series: half of each.
pub fn series_equivalent(physical_stiffness: f64) -> f64 {
    physical_stiffness / 2.0
}

/// Spring tension at the given knee separation; zero when slack, never
/// compressive.
pub fn spring_tension(knee_distance: f64, spring: &SpringConfig) -> f64 {
    (spring.stiffness * (knee_distance - spring.natural_length)).max(0.0)
}

/// Generalized spring torques on the two driven hip angles, baseline frame
/// (`d(potential)/d(theta_i)` negated).
///
/// For symmetric poses the pair is antisymmetric (`tau1 = -tau2`): the spring
/// pulls both knees toward the centerline, which turns the two baseline-frame
/// hip angles in opposite directions.
pub fn spring_joint_torques(
    angles: ControlAngles,
    geom: &LegGeometry,
    spring: &SpringConfig,
) -> (f64, f64) {
    let (k1, k2) = knee_points(angles, geom);
    let separation = k2 - k1;
    let d = separation.norm();
    let tension = spring_tension(d, spring);
    if tension == 0.0 || d == 0.0 {
        return (0.0, 0.0);
    }
    let line = separation.scale(1.0 / d);

    // d(d)/d(theta_i) through the knee points: K1 moves with theta1 only,
    // K2 with theta2 only. d(d)/dK1 = -line, d(d)/dK2 = +line.
    let theta = crate::kinematics::control_to_kinematic(angles);
    let dk1_dtheta1 = Vec2::unit_perp(theta.theta1).scale(geom.l1);
    let dk2_dtheta2 = Vec2::unit_perp(theta.theta2).scale(geom.l2);
    let dd_dtheta1 = -line.dot(dk1_dtheta1);
    let dd_dtheta2 = line.dot(dk2_dtheta2);

    (-tension * dd_dtheta1, -tension * dd_dtheta2)
}
