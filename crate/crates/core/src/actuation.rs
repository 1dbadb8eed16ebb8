//! Actuation: the knee-to-knee extension spring, the geared motors with their
//! PID position loops, and static hold-torque analysis.

mod pid;
mod spring;
mod statics;

pub use pid::{pid_torque, pid_torque_with_feedforward, PidGains, PidState};
pub use spring::{series_equivalent, spring_joint_torques, spring_tension, SpringConfig};
pub use statics::{static_hold_torque, static_torque_sweep, StaticsSample};

/// Geared motor parameters; torques are joint-side (after the gearbox).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorConfig {
    /// Peak torque the motor can physically produce (N m).
    pub max_torque: f64,
    /// Commanded torque cap for the scenario, at or below `max_torque` (N m).
    pub torque_saturation: f64,
    /// Gearbox reduction; informational, the reflected quantities below are
    /// already joint-side.
    pub gear_ratio: f64,
    /// Viscous damping at the joint (N m s/rad). Lumped fit covering gearbox,
    /// winding, and cable losses; calibrated against hardware jumps.
    pub viscous_damping: f64,
    /// Rotor inertia reflected through the gearbox onto the joint (kg m^2).
    pub reflected_inertia: f64,
}

impl Default for MotorConfig {
    fn default() -> Self {
        MotorConfig {
            max_torque: 24.8,
            torque_saturation: 24.8,
            gear_ratio: 10.0,
            viscous_damping: 0.35,
            reflected_inertia: 0.05,
        }
    }
}
