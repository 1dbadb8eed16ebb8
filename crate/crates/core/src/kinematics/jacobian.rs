//! Velocity-level kinematics: passive-joint rate map and paw Jacobian.

#[allow(unused_imports)]
use crate::math::*;

use super::{JointConfiguration, KinematicsError, LegGeometry};
use crate::linalg::{Mat2, Vec2};

/// Relative threshold on the passive-joint Jacobian determinant below which
/// the configuration counts as singular (calf links colinear).
const SINGULARITY_TOL: f64 = 1e-9;

/// Rate map of the dependent calf angles: column `j` holds
/// `d(theta3, theta4)/d(theta_{j+1})` as `(x = dtheta3, z = dtheta4)`.
///
/// Derived from the loop constraint
/// `K1(theta1) + l3*u(theta3) - K2(theta2) - l4*u(theta4) = 0`
/// by the implicit function theorem.
pub fn closure_rate_map(
    config: &JointConfiguration,
    geom: &LegGeometry,
) -> Result<Mat2, KinematicsError> {
    // d(constraint)/d(theta3, theta4) and /d(theta1, theta2).
    let phi_v = Mat2::from_cols(
        Vec2::unit_perp(config.theta3).scale(geom.l3),
        Vec2::unit_perp(config.theta4).scale(-geom.l4),
    );
    let phi_u = Mat2::from_cols(
        Vec2::unit_perp(config.theta1).scale(geom.l1),
        Vec2::unit_perp(config.theta2).scale(-geom.l2),
    );

    if phi_v.det().abs() < SINGULARITY_TOL * geom.l3 * geom.l4 {
        return Err(KinematicsError::SingularConfiguration {
            theta3: config.theta3,
            theta4: config.theta4,
        });
    }

    let col0 = phi_v.solve(-phi_u.col0).expect("determinant checked above");
    let col1 = phi_v.solve(-phi_u.col1).expect("determinant checked above");
    Ok(Mat2::from_cols(col0, col1))
}

/// Paw-velocity Jacobian `d(x_p, z_p)/d(theta1, theta2)` with the passive
/// angles eliminated through the closure.
pub fn paw_jacobian(
    config: &JointConfiguration,
    geom: &LegGeometry,
) -> Result<Mat2, KinematicsError> {
    let gamma = closure_rate_map(config, geom)?;
    let calf_dir = Vec2::unit_perp(config.theta3).scale(geom.l3);
    // p = K1(theta1) + l3*u(theta3), theta3 = theta3(theta1, theta2).
    let d_theta1 = Vec2::unit_perp(config.theta1).scale(geom.l1) + calf_dir.scale(gamma.col0.x);
    let d_theta2 = calf_dir.scale(gamma.col1.x);
    Ok(Mat2::from_cols(d_theta1, d_theta2))
}
