//! Planar multibody dynamics of the biped: body plus two closed-chain legs,
//! penalty ground contact, an adaptive Runge-Kutta integrator with event
//! detection, and the scripted squat-and-thrust jump protocol.

#[allow(unused_imports)]
use crate::math::*;

mod contact;
mod integrator;
mod model;
mod protocol;

pub use contact::{contact_force, ContactModel};
pub use integrator::{Dp45, IntegrationError, IntegratorStats, OdeSystem, Tolerances};
pub use model::{
    dynamics_derivative, gravity_potential, integrate_fixed_torque, kinetic_energy, paw_state,
    spring_potential, BodyState, DerivativeOutput, DynamicsInput, EnergyFlows, FullState,
    LegState,
};
pub use protocol::{
    simulate_forward_jump, simulate_jump, simulate_jump_with, EnergyAudit, Event, EventKind,
    JumpError, JumpResult, JumpScenario, Phase, ProtocolTimings, ScenarioError,
    SpringInterpretation, TrajectorySample,
};

use crate::actuation::{MotorConfig, SpringConfig};
use crate::kinematics::LegGeometry;

/// Lumped mass distribution. Each leg's mass is split between a share fixed
/// at the hip axle (motor stators and brackets, riding with the body) and
/// point masses at the midpoints of the hip and calf link pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassModel {
    /// Electronics, battery, and frame mass carried on the body (kg).
    pub electronics: f64,
    /// Mass of one complete leg (kg).
    pub leg: f64,
    /// Fraction of a leg's mass fixed at the hip axle.
    pub hip_axis_frac: f64,
    /// Fraction of a leg's mass in the two hip links combined.
    pub hip_link_frac: f64,
    /// Fraction of a leg's mass in the two calf links combined.
    pub calf_link_frac: f64,
}

impl Default for MassModel {
    fn default() -> Self {
        Self {
            electronics: 1.3,
            leg: 3.3,
            hip_axis_frac: 0.35,
            hip_link_frac: 0.25,
            calf_link_frac: 0.40,
        }
    }
}

impl MassModel {
    /// Total robot mass (kg).
    pub fn total(&self) -> f64 {
        self.electronics + 2.0 * self.leg
    }

    /// Mass lumped at the body reference point: electronics plus both legs'
    /// hip-axle shares (kg).
    pub fn body_lump(&self) -> f64 {
        self.electronics + 2.0 * self.hip_axis_frac * self.leg
    }

    /// Half the electronics mass: the body share one leg carries in a
    /// symmetric stance (kg).
    pub fn body_share_per_leg(&self) -> f64 {
        0.5 * self.electronics
    }

    /// Point mass at the midpoint of one hip link (kg).
    pub fn hip_link_mass(&self) -> f64 {
        0.5 * self.hip_link_frac * self.leg
    }

    /// Point mass at the midpoint of one calf link (kg).
    pub fn calf_link_mass(&self) -> f64 {
        0.5 * self.calf_link_frac * self.leg
    }

    /// Checks positivity and that the per-leg fractions sum to one.
    pub fn validate(&self) -> Result<(), MassModelError> {
        if !(self.electronics > 0.0 && self.leg > 0.0) {
            return Err(MassModelError::NonPositiveMass);
        }
        let fracs = [self.hip_axis_frac, self.hip_link_frac, self.calf_link_frac];
        if fracs.iter().any(|f| !(*f >= 0.0)) {
            return Err(MassModelError::NonPositiveMass);
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MassModelError::FractionsNotUnit { sum });
        }
        Ok(())
    }
}

/// Validation failures for [`MassModel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassModelError {
    NonPositiveMass,
    FractionsNotUnit { sum: f64 },
}

impl core::fmt::Display for MassModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::NonPositiveMass => write!(f, "masses and fractions must be positive"),
            Self::FractionsNotUnit { sum } => {
                write!(f, "leg mass fractions must sum to 1, got {sum}")
            }
        }
    }
}

impl core::error::Error for MassModelError {}

/// Complete physical description of one robot build: geometry, masses,
/// knee spring, actuators, and passive-joint friction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotDesign {
    pub geometry: LegGeometry,
    pub masses: MassModel,
    pub spring: SpringConfig,
    pub motor: MotorConfig,
    /// Viscous friction at each passive bearing (knees and paw pivot),
    /// N m s/rad on the relative joint rate. Tuned, not measured.
    pub joint_friction: f64,
}

impl Default for RobotDesign {
    fn default() -> Self {
        Self {
            geometry: LegGeometry::default(),
            masses: MassModel::default(),
            spring: SpringConfig::default(),
            motor: MotorConfig::default(),
            joint_friction: 0.02,
        }
    }
}
