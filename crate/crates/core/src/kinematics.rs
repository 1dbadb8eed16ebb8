//! Closed-chain kinematics of the diamond five-bar leg.
//!
//! The linkage: a fixed baseline `l0` between the two motor axes, hip links
//! `l1`, `l2` driven by the motors, and calf links `l3`, `l4` meeting at the
//! paw. Working frame ("baseline frame"): motor 1 at the origin, motor 2 at
//! `(l0, 0)`, +z up, angles `theta` measured from the +x axis.
//!
//! Control angles `alpha` measure each hip link's deviation from straight
//! down, positive spreading the knees outward; see [`control_to_kinematic`].

mod closure;
mod jacobian;
mod workspace;

pub use closure::{
    knee_distance, knee_points, paw_position, solve_closure, standing_height, JointConfiguration,
};
pub use jacobian::{closure_rate_map, paw_jacobian};
pub use workspace::{
    motor1_to_alpha, motor2_to_alpha, workspace_sweep, CloudPoint, SweepOptions, WorkspaceCloud,
};

use core::f64::consts::FRAC_PI_2;

/// Link lengths of one five-bar leg, in meters.
///
/// `l0` is the baseline (motor-to-motor), `l1`/`l2` the hip links on motors 1
/// and 2, `l3`/`l4` the calf links closing at the paw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegGeometry {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

impl LegGeometry {
    /// Validates positive lengths and that the straight-down pose closes.
    pub fn new(l0: f64, l1: f64, l2: f64, l3: f64, l4: f64) -> Result<Self, KinematicsError> {
        let geom = LegGeometry { l0, l1, l2, l3, l4 };
        for (value, name) in [(l0, "l0"), (l1, "l1"), (l2, "l2"), (l3, "l3"), (l4, "l4")] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(KinematicsError::NonPositiveLength { name, value });
            }
        }
        let down = control_to_kinematic(ControlAngles::symmetric(0.0));
        solve_closure(down.theta1, down.theta2, &geom, Branch::Minus)?;
        Ok(geom)
    }
}

impl Default for LegGeometry {
    /// Reference leg used by the bundled robot config.
    fn default() -> Self {
        LegGeometry {
            l0: 0.09,
            l1: 0.18,
            l2: 0.18,
            l3: 0.30,
            l4: 0.30,
        }
    }
}

/// Hip-link deviations from straight down, radians, positive spreading the
/// knees outward. The jump protocol commands these directly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlAngles {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl ControlAngles {
    pub fn new(alpha1: f64, alpha2: f64) -> Self {
        ControlAngles { alpha1, alpha2 }
    }

    pub fn symmetric(alpha: f64) -> Self {
        ControlAngles {
            alpha1: alpha,
            alpha2: alpha,
        }
    }
}

/// Hip-link angles in the baseline frame (from the +x axis).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KinematicAngles {
    pub theta1: f64,
    pub theta2: f64,
}

/// Exact affine map from control to baseline-frame angles.
///
/// Straight down is `theta = -90 deg` for both hips; spreading outward turns
/// motor 1 negative (`theta1 = -90deg - alpha1`) and motor 2 positive
/// (`theta2 = alpha2 - 90deg`).
pub fn control_to_kinematic(angles: ControlAngles) -> KinematicAngles {
    KinematicAngles {
        theta1: -FRAC_PI_2 - angles.alpha1,
        theta2: angles.alpha2 - FRAC_PI_2,
    }
}

/// Inverse of [`control_to_kinematic`]; the round trip is exact.
pub fn kinematic_to_control(angles: KinematicAngles) -> ControlAngles {
    ControlAngles {
        alpha1: -FRAC_PI_2 - angles.theta1,
        alpha2: angles.theta2 + FRAC_PI_2,
    }
}

/// Sign choice in the half-angle closure solve.
///
/// `Minus` selects the diamond configuration with the paw below the knee line
/// (knees spread away from the leg centerline); `Plus` is the mirrored branch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Branch {
    Plus,
    #[default]
    Minus,
}

/// Errors from the closed-chain solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KinematicsError {
    /// A link length was zero, negative, or non-finite.
    NonPositiveLength { name: &'static str, value: f64 },
    /// No closure exists for the commanded hip angles.
    UnreachableConfiguration { theta1: f64, theta2: f64 },
    /// Both half-angle denominators vanished; the closure equation is
    /// degenerate for this pose.
    DegenerateDenominator { theta1: f64, theta2: f64 },
    /// The passive-joint Jacobian is rank deficient (calf links colinear);
    /// velocities and dynamics are undefined here.
    SingularConfiguration { theta3: f64, theta4: f64 },
}

impl core::fmt::Display for KinematicsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KinematicsError::NonPositiveLength { name, value } => {
                write!(f, "link length {name} must be positive, got {value}")
            }
            KinematicsError::UnreachableConfiguration { theta1, theta2 } => write!(
                f,
                "no five-bar closure for hip angles ({theta1:.6}, {theta2:.6}) rad"
            ),
            KinematicsError::DegenerateDenominator { theta1, theta2 } => write!(
                f,
                "degenerate closure equation at hip angles ({theta1:.6}, {theta2:.6}) rad"
            ),
            KinematicsError::SingularConfiguration { theta3, theta4 } => write!(
                f,
                "singular configuration: calf links colinear (theta3 {theta3:.6}, theta4 {theta4:.6} rad)"
            ),
        }
    }
}

impl core::error::Error for KinematicsError {}
