//! Position-level solve of the five-bar loop closure.

#[allow(unused_imports)]
use crate::math::*;

use super::{control_to_kinematic, Branch, ControlAngles, KinematicsError, LegGeometry};
use crate::linalg::Vec2;
use core::f64::consts::PI;

/// Relative tolerance for clamping the arcsine argument in the calf-angle
/// recovery; violations beyond it are reported as unreachable.
const ASIN_CLAMP_TOL: f64 = 1e-12;

/// A solved closure: both driven hip angles plus the dependent calf angles,
/// all in the baseline frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointConfiguration {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub branch: Branch,
}

impl JointConfiguration {
    /// Solves the closure for the given hip angles.
    pub fn solve(
        theta1: f64,
        theta2: f64,
        geom: &LegGeometry,
        branch: Branch,
    ) -> Result<Self, KinematicsError> {
        let (theta3, theta4) = solve_closure(theta1, theta2, geom, branch)?;
        Ok(JointConfiguration {
            theta1,
            theta2,
            theta3,
            theta4,
            branch,
        })
    }

    /// Convenience solve from control angles.
    pub fn from_control(
        angles: ControlAngles,
        geom: &LegGeometry,
        branch: Branch,
    ) -> Result<Self, KinematicsError> {
        let k = control_to_kinematic(angles);
        Self::solve(k.theta1, k.theta2, geom, branch)
    }

    /// Distance between the two chain evaluations of the paw point; near zero
    /// for a valid configuration.
    pub fn closure_residual(&self, geom: &LegGeometry) -> f64 {
        let via_first = knee1(self.theta1, geom) + Vec2::unit(self.theta3).scale(geom.l3);
        let via_second = knee2(self.theta2, geom) + Vec2::unit(self.theta4).scale(geom.l4);
        (via_first - via_second).norm()
    }
}

fn knee1(theta1: f64, geom: &LegGeometry) -> Vec2 {
    Vec2::unit(theta1).scale(geom.l1)
}

fn knee2(theta2: f64, geom: &LegGeometry) -> Vec2 {
    Vec2::new(geom.l0, 0.0) + Vec2::unit(theta2).scale(geom.l2)
}

/// Knee positions (motor-1 chain, motor-2 chain) in the baseline frame.
pub fn knee_points(angles: ControlAngles, geom: &LegGeometry) -> (Vec2, Vec2) {
    let k = control_to_kinematic(angles);
    (knee1(k.theta1, geom), knee2(k.theta2, geom))
}

/// Knee-to-knee separation; the spring acts along this line.
///
/// For symmetric poses (`alpha1 == alpha2` with `l1 == l2`) this reduces to
/// `l0 + 2*l1*sin(alpha)`.
pub fn knee_distance(angles: ControlAngles, geom: &LegGeometry) -> f64 {
    let (k1, k2) = knee_points(angles, geom);
    (k2 - k1).norm()
}

/// Solves the loop closure for the dependent calf angles `(theta3, theta4)`.
///
/// The closure condition reduces to `b*cos(theta4) + a*sin(theta4) = -c`,
/// solved by the half-angle substitution `t = tan(theta4/2)`:
/// `t = (a +- sqrt(a^2 + b^2 - c^2)) / (b - c)`.
/// When `b - c` vanishes (theta4 near pi) the cotangent substitution
/// `u = 1/t = (+-sqrt(..) - a) / (b + c)` covers the pose; only if both
/// denominators vanish is the equation degenerate.
pub fn solve_closure(
    theta1: f64,
    theta2: f64,
    geom: &LegGeometry,
    branch: Branch,
) -> Result<(f64, f64), KinematicsError> {
    let LegGeometry { l0, l1, l2, l3, l4 } = *geom;
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();

    let a = 2.0 * l4 * l2 * s2 - 2.0 * l1 * l4 * s1;
    let b = 2.0 * l4 * l0 - 2.0 * l1 * l4 * c1 + 2.0 * l4 * l2 * c2;
    let c = l0 * l0 + l1 * l1 + l2 * l2 - l3 * l3 + l4 * l4
        - 2.0 * l1 * l2 * s1 * s2
        - 2.0 * l1 * l0 * c1
        + 2.0 * l2 * l0 * c2
        - 2.0 * l1 * l2 * c1 * c2;

    let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
    let mut disc = a * a + b * b - c * c;
    if disc < 0.0 {
        if disc > -1e-12 * scale * scale {
            disc = 0.0;
        } else {
            return Err(KinematicsError::UnreachableConfiguration { theta1, theta2 });
        }
    }
    let root = disc.sqrt();
    let signed_root = match branch {
        Branch::Plus => root,
        Branch::Minus => -root,
    };

    let den_tan = b - c;
    let den_cot = b + c;
    let theta4 = if den_tan.abs() > 1e-10 * scale {
        2.0 * ((a + signed_root) / den_tan).atan()
    } else if den_cot.abs() > 1e-10 * scale {
        // cot form; 2*atan(1/u) folds u = 0 to theta4 = pi via atan(inf).
        let u = (signed_root - a) / den_cot;
        normalize_angle(2.0 * (1.0 / u).atan())
    } else {
        return Err(KinematicsError::DegenerateDenominator { theta1, theta2 });
    };

    // Calf angle on the motor-1 chain from the z closure component (clamped
    // arcsine), with the x component resolving the arcsine ambiguity.
    let sin3_raw = (l4 * theta4.sin() + l2 * s2 - l1 * s1) / l3;
    if sin3_raw.abs() > 1.0 + ASIN_CLAMP_TOL {
        return Err(KinematicsError::UnreachableConfiguration { theta1, theta2 });
    }
    let sin3 = sin3_raw.clamp(-1.0, 1.0);
    let cos3 = (l0 + l2 * c2 + l4 * theta4.cos() - l1 * c1) / l3;
    let theta3 = sin3.atan2(cos3);

    Ok((theta3, theta4))
}

fn normalize_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(2.0 * PI);
    wrapped - PI
}

/// Paw position in the baseline frame, evaluated along the motor-1 chain.
///
/// Both chain evaluations agree to the closure residual, which
/// [`JointConfiguration::closure_residual`] exposes for validation.
pub fn paw_position(config: &JointConfiguration, geom: &LegGeometry) -> Vec2 {
    knee1(config.theta1, geom) + Vec2::unit(config.theta3).scale(geom.l3)
}

/// Height of the hip axle above the ground when the paw rests on it, i.e.
/// the negated paw depth of the lower-branch solution at these angles.
pub fn standing_height(
    angles: ControlAngles,
    geom: &LegGeometry,
) -> Result<f64, KinematicsError> {
    let config = JointConfiguration::from_control(angles, geom, Branch::Minus)?;
    Ok(-paw_position(&config, geom).z)
}
