//! Discrete PID position loop, one instance per motor.

#[allow(unused_imports)]
use crate::math::*;

use super::MotorConfig;

/// PID gains shared by all four motors, torque units on the output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PidGains {
    /// Proportional gain (N m / rad).
    pub kp: f64,
    /// Integral gain (N m / (rad s)).
    pub ki: f64,
    /// Derivative gain on the measured rate (N m s / rad).
    pub kd: f64,
    /// Clamp on the integral term's torque contribution (N m); anti-windup.
    pub integral_limit: f64,
    /// Control loop rate (Hz); torques are zero-order-held between ticks.
    pub control_rate: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        PidGains {
            kp: 120.0,
            ki: 40.0,
            kd: 0.8,
            integral_limit: 8.0,
            control_rate: 500.0,
        }
    }
}

impl PidGains {
    pub fn tick_period(&self) -> f64 {
        1.0 / self.control_rate
    }
}

/// Per-motor controller memory.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PidState {
    /// Accumulated error integral (rad s).
    pub integral: f64,
}

impl PidState {
    /// Warm start so the loop opens holding `torque` through the integral
    /// term; avoids the sag transient when the sim starts in equilibrium.
    pub fn holding(torque: f64, gains: &PidGains) -> Self {
        if gains.ki == 0.0 {
            return PidState::default();
        }
        let torque = torque.clamp(-gains.integral_limit, gains.integral_limit);
        PidState {
            integral: torque / gains.ki,
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }
}

/// One PID tick: updates `state` and returns the commanded torque.
///
/// Derivative acts on the measured rate (no setpoint kick), the integral term
/// clamps at `integral_limit` (anti-windup), and the output clamps at the
/// motor's torque saturation.
pub fn pid_torque(
    setpoint: f64,
    measured: f64,
    measured_rate: f64,
    state: &mut PidState,
    gains: &PidGains,
    motor: &MotorConfig,
) -> f64 {
    pid_torque_with_feedforward(setpoint, measured, measured_rate, 0.0, state, gains, motor)
}

/// [`pid_torque`] plus a model-based feedforward torque added before the
/// saturation clamp. Feeding the static hold torque of the commanded pose
/// removes the steady-state burden from the integral term, so the loop
/// tracks poses whose hold demand approaches saturation.
pub fn pid_torque_with_feedforward(
    setpoint: f64,
    measured: f64,
    measured_rate: f64,
    feedforward: f64,
    state: &mut PidState,
    gains: &PidGains,
    motor: &MotorConfig,
) -> f64 {
    let error = setpoint - measured;
    state.integral += error * gains.tick_period();

    let mut integral_term = gains.ki * state.integral;
    if integral_term.abs() > gains.integral_limit {
        integral_term = gains.integral_limit.copysign(integral_term);
        if gains.ki != 0.0 {
            state.integral = integral_term / gains.ki;
        }
    }

    let raw = feedforward + gains.kp * error + integral_term - gains.kd * measured_rate;
    raw.clamp(-motor.torque_saturation, motor.torque_saturation)
}
