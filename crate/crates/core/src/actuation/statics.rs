//! Static hold-torque analysis: what each motor of one leg must output to
//! keep a symmetric grounded stance at a given pose.

#[allow(unused_imports)]
use crate::math::*;

use crate::actuation::spring_tension;
use crate::dynamics::RobotDesign;
use crate::kinematics::{
    closure_rate_map, knee_distance, Branch, ControlAngles,
    JointConfiguration, KinematicsError,
};
use alloc::vec::Vec;

/// One row of a static sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticsSample {
    /// Symmetric control angle (rad).
    pub alpha: f64,
    /// Hold torques in the control frame (N m), motors 1 and 2 of one leg.
    pub tau1: f64,
    pub tau2: f64,
    /// Spring tension at the pose (N).
    pub spring_tension: f64,
}

/// Motor torques (control frame) holding the pose statically, paw grounded,
/// with this leg carrying half the robot's weight.
///
/// Computed as the gradient of the total potential (gravity of body share and
/// link masses riding on the grounded leg, plus spring) over the control
/// angles. Positive torque pushes the hip link outward (toward deeper squat).
pub fn static_hold_torque(
    angles: ControlAngles,
    design: &RobotDesign,
    gravity: f64,
) -> Result<(f64, f64), KinematicsError> {
    let geom = &design.geometry;
    let config = JointConfiguration::from_control(angles, geom, Branch::Minus)?;
    let gamma = closure_rate_map(&config, geom)?;
    let masses = &design.masses;

    // z-gradients over (theta1, theta2) of each moving point in the baseline
    // frame. Columns of gamma: d(theta3, theta4)/d(theta1, theta2).
    let c1 = config.theta1.cos();
    let c2 = config.theta2.cos();
    let c3 = config.theta3.cos();
    let c4 = config.theta4.cos();

    let hip1_mid = [0.5 * geom.l1 * c1, 0.0];
    let hip2_mid = [0.0, 0.5 * geom.l2 * c2];
    let calf3_mid = [
        geom.l1 * c1 + 0.5 * geom.l3 * c3 * gamma.col0.x,
        0.5 * geom.l3 * c3 * gamma.col1.x,
    ];
    let calf4_mid = [
        0.5 * geom.l4 * c4 * gamma.col0.z,
        geom.l2 * c2 + 0.5 * geom.l4 * c4 * gamma.col1.z,
    ];
    let paw = [
        geom.l1 * c1 + geom.l3 * c3 * gamma.col0.x,
        geom.l3 * c3 * gamma.col1.x,
    ];

    // Paw pinned to ground: body height rises as -paw_z, carrying the body
    // share and every link mass; link midpoints add their motion relative to
    // the body.
    let riding = masses.body_share_per_leg() + masses.leg;
    let m_hip = masses.hip_link_mass();
    let m_calf = masses.calf_link_mass();

    let mut grad = [0.0f64; 2];
    for i in 0..2 {
        let links = m_hip * (hip1_mid[i] + hip2_mid[i]) + m_calf * (calf3_mid[i] + calf4_mid[i]);
        grad[i] = gravity * (links - riding * paw[i]);
    }

    // Spring potential gradient: tension * d(knee distance)/d(theta).
    let d = knee_distance(angles, geom);
    let tension = spring_tension(d, &design.spring);
    if tension > 0.0 {
        let (k1, k2) = crate::kinematics::knee_points(angles, geom);
        let line = (k2 - k1).scale(1.0 / d);
        let dk1 = crate::linalg::Vec2::unit_perp(config.theta1).scale(geom.l1);
        let dk2 = crate::linalg::Vec2::unit_perp(config.theta2).scale(geom.l2);
        grad[0] += tension * (-line.dot(dk1));
        grad[1] += tension * line.dot(dk2);
    }

    // Control frame: alpha1 = -90deg - theta1 flips the first gradient.
    Ok((-grad[0], grad[1]))
}

/// Sweeps [`static_hold_torque`] over symmetric poses from `alpha_start` to
/// `alpha_end` (rad) in `step` increments; unreachable poses are skipped.
pub fn static_torque_sweep(
    design: &RobotDesign,
    gravity: f64,
    alpha_start: f64,
    alpha_end: f64,
    step: f64,
) -> Vec<StaticsSample> {
    let mut out = Vec::new();
    if !(step > 0.0) || alpha_end < alpha_start {
        return out;
    }
    let count = ((alpha_end - alpha_start) / step + 1e-9).floor() as usize;
    for i in 0..=count {
        let alpha = alpha_start + i as f64 * step;
        let angles = ControlAngles::symmetric(alpha);
        let Ok((tau1, tau2)) = static_hold_torque(angles, design, gravity) else {
            continue;
        };
        let tension = spring_tension(knee_distance(angles, &design.geometry), &design.spring);
        out.push(StaticsSample {
            alpha,
            tau1,
            tau2,
            spring_tension: tension,
        });
    }
    out
}
