//! Scripted squat-and-thrust jump: settle at the stand pose, ramp into a
//! squat, hold, command the stand pose back at saturated torque, detect
//! liftoff, and fly ballistically until touchdown.
//!
//! Control runs on a fixed 500 Hz grid (zero-order hold between ticks)
//! interleaved with adaptive integration; liftoff, apex, and touchdown are
//! localized by bisection on the integrator's dense output. Body positions
//! are reported in world coordinates with heights measured at the motor-2
//! axis; for pitched (forward-jump) scenarios the stance model runs in a
//! thrust-aligned frame under the reduced gravity component and rotates to
//! world coordinates at liftoff.

#[allow(unused_imports)]
use crate::math::*;

use alloc::vec;
use alloc::vec::Vec;

use super::contact::ContactModel;
use super::integrator::{Dp45, IntegrationError, IntegratorStats, OdeSystem, Tolerances};
use super::model::{
    dynamics_derivative, gravity_potential, kinetic_energy, pack_state, paw_state,
    spring_potential, state_derivative, unpack_state, BodyState, DynamicsInput, EnergyFlows,
    FullState, LegState, FLOW_DIM, STATE_DIM,
};
use super::RobotDesign;
use crate::actuation::{
    pid_torque_with_feedforward, series_equivalent, spring_tension, static_hold_torque,
    MotorConfig, PidGains, PidState,
};
use crate::kinematics::{
    knee_distance, paw_position, standing_height, Branch, ControlAngles, JointConfiguration,
};

/// Time constant of the first-order leg servo toward the hold pose in
/// flight (s); the body stays strictly ballistic.
const SERVO_SETTLE_TIME: f64 = 0.04;

/// Bisection window for event times (s).
const EVENT_TIME_TOL: f64 = 1e-9;

/// A squat counts as reached when every hip angle is within this of the
/// commanded squat at the end of the hold (rad); about 2 degrees.
const SQUAT_REACH_TOL: f64 = 0.035;

/// Mechanical stop of the hip joints (rad, 120 degrees).
const MAX_SQUAT_ANGLE: f64 = 2.0943951023931953;

/// Largest supported thrust-frame tilt (rad, 45 degrees).
const MAX_PITCH: f64 = 0.7853981633974483;

/// Hard cap on derivative evaluations per jump. A legitimate run uses a few
/// tens of thousands, so this is over two hundred times the worst observed
/// count; reaching it means step control has collapsed (typically the leg
/// grinding against a workspace boundary) and sim time is advancing orders
/// of magnitude slower than wall time. The run is cut off with
/// [`JumpError::Stalled`] instead of burning unbounded compute.
const DERIVATIVE_EVAL_BUDGET: u64 = 5_000_000;

/// Protocol phase, in fixed order; CSV rows carry the lowercase name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Stand,
    SquatRamp,
    Hold,
    Thrust,
    Flight,
    Landed,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Stand => "stand",
            Phase::SquatRamp => "squat_ramp",
            Phase::Hold => "hold",
            Phase::Thrust => "thrust",
            Phase::Flight => "flight",
            Phase::Landed => "landed",
        }
    }
}

impl core::fmt::Display for Phase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hybrid-dynamics events localized to [`EVENT_TIME_TOL`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Total ground normal force reached zero during thrust.
    Liftoff,
    /// Body vertical velocity crossed zero in flight.
    Apex,
    /// Paw height crossed zero falling.
    Touchdown,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Liftoff => "liftoff",
            EventKind::Apex => "apex",
            EventKind::Touchdown => "touchdown",
        }
    }
}

impl core::fmt::Display for EventKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One localized event with the body height (motor-2 axis, world) at it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub z_b: f64,
}

/// How a configured spring stiffness is to be read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpringInterpretation {
    /// The stiffness is already the single equivalent knee-to-knee spring.
    #[default]
    Equivalent,
    /// The stiffness is one physical spring of the series pair; the
    /// equivalent spring has half this stiffness.
    Physical,
}

impl SpringInterpretation {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpringInterpretation::Equivalent => "equivalent",
            SpringInterpretation::Physical => "physical",
        }
    }
}

/// Fixed protocol timings (s) and the stand setpoint (rad).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolTimings {
    /// Settling time at the stand setpoint before the squat ramp.
    pub stand_settle: f64,
    /// Duration of the linear setpoint ramp into the squat.
    pub squat_ramp: f64,
    /// Hold time at the squat before the jump command.
    pub squat_hold: f64,
    /// Give-up time waiting for liftoff after the jump command.
    pub thrust_timeout: f64,
    /// Give-up time waiting for touchdown.
    pub flight_timeout: f64,
    /// Stand/hold hip angle (rad); the knee spring just engages here.
    pub stand_angle: f64,
}

impl Default for ProtocolTimings {
    fn default() -> Self {
        ProtocolTimings {
            stand_settle: 1.0,
            squat_ramp: 1.3,
            squat_hold: 0.5,
            thrust_timeout: 2.0,
            flight_timeout: 30.0,
            stand_angle: 0.3054326190990077, // 17.5 degrees
        }
    }
}

/// One jump experiment: environment, torque budget, squat depth, and thrust
/// direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpScenario {
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
    /// Commanded torque cap (N m), at or below the motor's maximum.
    pub torque_saturation: f64,
    /// Squat hip angle (rad), up to the 120-degree stop.
    pub squat_angle: f64,
    /// Tilt of the thrust frame from vertical (rad); 0 jumps straight up.
    pub pitch: f64,
    /// Optional asymmetric thrust: offsets the two motor setpoints of each
    /// leg by +-half this angle (rad) during thrust, with the body laterally
    /// free. Alternative forward-jump mechanism; mutually exclusive with
    /// `pitch`.
    pub thrust_setpoint_offset: f64,
    /// How `spring.stiffness` in the design is to be read.
    pub spring_interpretation: SpringInterpretation,
    pub timings: ProtocolTimings,
}

impl JumpScenario {
    /// Straight-up jump.
    pub fn vertical(gravity: f64, torque_saturation: f64, squat_angle: f64) -> Self {
        JumpScenario {
            gravity,
            torque_saturation,
            squat_angle,
            pitch: 0.0,
            thrust_setpoint_offset: 0.0,
            spring_interpretation: SpringInterpretation::Equivalent,
            timings: ProtocolTimings::default(),
        }
    }

    /// Forward jump with the thrust frame tilted by `pitch` from vertical.
    pub fn forward(gravity: f64, torque_saturation: f64, squat_angle: f64, pitch: f64) -> Self {
        JumpScenario {
            pitch,
            ..Self::vertical(gravity, torque_saturation, squat_angle)
        }
    }

    /// Checks ranges against the motor's hard limits.
    pub fn validate(&self, motor: &MotorConfig) -> Result<(), ScenarioError> {
        if !(self.gravity > 0.0) || !self.gravity.is_finite() {
            return Err(ScenarioError::GravityOutOfRange { value: self.gravity });
        }
        if !(self.torque_saturation > 0.0)
            || self.torque_saturation > motor.max_torque * (1.0 + 1e-12)
        {
            return Err(ScenarioError::TorqueSaturationOutOfRange {
                value: self.torque_saturation,
                max: motor.max_torque,
            });
        }
        let t = &self.timings;
        if !(self.squat_angle > t.stand_angle) || self.squat_angle > MAX_SQUAT_ANGLE + 1e-12 {
            return Err(ScenarioError::SquatAngleOutOfRange {
                value: self.squat_angle,
                min: t.stand_angle,
                max: MAX_SQUAT_ANGLE,
            });
        }
        if !(self.pitch.abs() <= MAX_PITCH) {
            return Err(ScenarioError::PitchOutOfRange { value: self.pitch });
        }
        if self.pitch != 0.0 && self.thrust_setpoint_offset != 0.0 {
            return Err(ScenarioError::TiltAndOffsetExclusive);
        }
        for (name, value, strict) in [
            ("stand_settle", t.stand_settle, false),
            ("squat_ramp", t.squat_ramp, true),
            ("squat_hold", t.squat_hold, false),
            ("thrust_timeout", t.thrust_timeout, true),
            ("flight_timeout", t.flight_timeout, true),
            ("stand_angle", t.stand_angle, true),
        ] {
            let bad = !value.is_finite() || value < 0.0 || (strict && value == 0.0);
            if bad {
                return Err(ScenarioError::TimingOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

/// Scenario validation failures, each naming the violated bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScenarioError {
    GravityOutOfRange { value: f64 },
    TorqueSaturationOutOfRange { value: f64, max: f64 },
    SquatAngleOutOfRange { value: f64, min: f64, max: f64 },
    PitchOutOfRange { value: f64 },
    /// Tilted thrust frame and asymmetric setpoints cannot be combined.
    TiltAndOffsetExclusive,
    TimingOutOfRange { name: &'static str, value: f64 },
}

impl core::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ScenarioError::GravityOutOfRange { value } => {
                write!(f, "gravity must be positive and finite, got {value}")
            }
            ScenarioError::TorqueSaturationOutOfRange { value, max } => {
                write!(f, "torque saturation {value} N m outside (0, {max}]")
            }
            ScenarioError::SquatAngleOutOfRange { value, min, max } => write!(
                f,
                "squat angle {value} rad outside ({min}, {max}] (stand setpoint to 120-degree stop)"
            ),
            ScenarioError::PitchOutOfRange { value } => {
                write!(f, "pitch {value} rad outside +-45 degrees")
            }
            ScenarioError::TiltAndOffsetExclusive => write!(
                f,
                "pitch and thrust_setpoint_offset are mutually exclusive forward-jump mechanisms"
            ),
            ScenarioError::TimingOutOfRange { name, value } => {
                write!(f, "timing {name} = {value} s is out of range")
            }
        }
    }
}

impl core::error::Error for ScenarioError {}

/// Jump simulation failures.
#[derive(Clone, Debug, PartialEq)]
pub enum JumpError {
    Scenario(ScenarioError),
    Integration(IntegrationError),
    /// The run exhausted its derivative-evaluation budget: adaptive steps
    /// collapsed (e.g. against a workspace boundary) so far that finishing
    /// the protocol would take effectively unbounded wall time.
    Stalled { t: f64, evals: u64 },
}

impl From<ScenarioError> for JumpError {
    fn from(e: ScenarioError) -> Self {
        JumpError::Scenario(e)
    }
}

impl From<IntegrationError> for JumpError {
    fn from(e: IntegrationError) -> Self {
        JumpError::Integration(e)
    }
}

impl From<crate::kinematics::KinematicsError> for JumpError {
    fn from(e: crate::kinematics::KinematicsError) -> Self {
        JumpError::Integration(IntegrationError::Kinematics(e))
    }
}

impl core::fmt::Display for JumpError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            JumpError::Scenario(e) => write!(f, "invalid scenario: {e}"),
            JumpError::Integration(e) => write!(f, "integration failed: {e}"),
            JumpError::Stalled { t, evals } => write!(
                f,
                "simulation stalled at t = {t:.6} s after {evals} derivative evaluations"
            ),
        }
    }
}

impl core::error::Error for JumpError {}

/// One 500 Hz trajectory row. World coordinates; `z_b` at the motor-2 axis,
/// `x_b` at the hip-axis midpoint; angles and torques are leg 0's (the legs
/// are commanded identically).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x_b: f64,
    pub z_b: f64,
    pub vz_b: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub spring_force: f64,
    /// Total clamped normal force over both paws (N).
    pub contact_normal: f64,
    pub phase: Phase,
}

/// Work-energy bookkeeping over the stance window (start to liftoff, or to
/// the end of thrust when liftoff never happens). All joules.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyAudit {
    pub delta_kinetic: f64,
    pub delta_gravity: f64,
    pub delta_spring: f64,
    pub work_motor: f64,
    pub work_contact: f64,
    pub dissipated_bearing: f64,
    pub dissipated_damping: f64,
    /// Largest kinetic energy seen at a control tick.
    pub peak_kinetic: f64,
    /// (dKE + dPE) - (work in - dissipation); zero for exact integration.
    pub residual: f64,
    /// |residual| / peak_kinetic.
    pub relative_residual: f64,
}

/// Everything a jump produced. Heights are world coordinates above ground,
/// measured at the motor-2 axis.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpResult {
    /// Peak body height; standing height if liftoff never happened.
    pub body_apex: f64,
    /// Max paw height above ground during flight with the legs at the hold
    /// pose; 0 without liftoff.
    pub paw_clearance: f64,
    /// Body height over the paws at the stand pose (design frame).
    pub stand_height: f64,
    /// Whether every hip reached the commanded squat by the end of the hold.
    pub squat_reached: bool,
    /// Set when the thrust window expired without the ground unloading.
    pub no_liftoff: bool,
    pub liftoff_time: Option<f64>,
    pub liftoff_height: Option<f64>,
    /// World liftoff velocity (vx, vz), m/s.
    pub liftoff_velocity: Option<(f64, f64)>,
    pub liftoff_speed: Option<f64>,
    pub apex_time: Option<f64>,
    pub touchdown_time: Option<f64>,
    /// Horizontal distance traveled at touchdown (m).
    pub range: Option<f64>,
    /// Largest commanded torque magnitude during stance (N m).
    pub peak_stance_torque: f64,
    pub energy: EnergyAudit,
    pub events: Vec<Event>,
    pub trajectory: Vec<TrajectorySample>,
    pub stats: IntegratorStats,
}

/// Runs the jump protocol with default ground, controller gains, and
/// integrator tolerances.
pub fn simulate_jump(design: &RobotDesign, scenario: &JumpScenario) -> Result<JumpResult, JumpError> {
    simulate_jump_with(
        design,
        scenario,
        &ContactModel::default(),
        &PidGains::default(),
        Tolerances::default(),
    )
}

/// [`simulate_jump`] for pitched scenarios; same engine, named for intent.
pub fn simulate_forward_jump(
    design: &RobotDesign,
    scenario: &JumpScenario,
) -> Result<JumpResult, JumpError> {
    simulate_jump(design, scenario)
}

/// Runs the jump protocol with explicit ground model, PID gains, and
/// integrator tolerances.
pub fn simulate_jump_with(
    design: &RobotDesign,
    scenario: &JumpScenario,
    ground: &ContactModel,
    gains: &PidGains,
    tol: Tolerances,
) -> Result<JumpResult, JumpError> {
    scenario.validate(&design.motor)?;
    let mut design = *design;
    if scenario.spring_interpretation == SpringInterpretation::Physical {
        design.spring.stiffness = series_equivalent(design.spring.stiffness);
    }

    let stand_pose = ControlAngles::symmetric(scenario.timings.stand_angle);
    let stand_height = standing_height(stand_pose, &design.geometry)?;
    let motor_cap = MotorConfig {
        torque_saturation: scenario.torque_saturation.min(design.motor.max_torque),
        ..design.motor
    };
    let g_eff = scenario.gravity * scenario.pitch.cos();
    let dt = gains.tick_period();

    let mut driver = Driver {
        design,
        scenario,
        ground,
        gains,
        tol,
        motor_cap,
        dt,
        g_eff,
        sinp: scenario.pitch.sin(),
        cosp: scenario.pitch.cos(),
        trajectory: Vec::new(),
        events: Vec::new(),
        stats: IntegratorStats::default(),
        peak_kinetic: 0.0,
        peak_stance_torque: 0.0,
    };

    // Start in static contact: body settled by the weight's penetration.
    let penetration = design.masses.total() * g_eff / (2.0 * ground.stiffness);
    let state0 = FullState {
        body: BodyState {
            x: 0.0,
            z: stand_height - penetration,
            vx: 0.0,
            vz: 0.0,
        },
        legs: [LegState::resting(scenario.timings.stand_angle); 2],
    };

    let outcome = driver.stance(&state0)?;
    let stand_world = stand_height * driver.cosp;

    let Some(liftoff) = outcome.liftoff else {
        let audit = driver.audit(&state0, &outcome.final_state, &outcome.final_flows)?;
        return Ok(JumpResult {
            body_apex: driver.report_z(stand_world),
            paw_clearance: 0.0,
            stand_height,
            squat_reached: outcome.squat_reached,
            no_liftoff: true,
            liftoff_time: None,
            liftoff_height: None,
            liftoff_velocity: None,
            liftoff_speed: None,
            apex_time: None,
            touchdown_time: None,
            range: None,
            peak_stance_torque: driver.peak_stance_torque,
            energy: audit,
            events: driver.events,
            trajectory: driver.trajectory,
            stats: driver.stats,
        });
    };

    driver.peak_kinetic = driver
        .peak_kinetic
        .max(kinetic_energy(&liftoff.state, &driver.design)?);
    let audit = driver.audit(&state0, &liftoff.state, &liftoff.flows)?;

    // Rotate the thrust-frame liftoff state into world coordinates.
    let (xw, zw) = driver.world_vec(liftoff.state.body.x, liftoff.state.body.z);
    let (vxw, vzw) = driver.world_vec(liftoff.state.body.vx, liftoff.state.body.vz);
    driver.events.push(Event {
        kind: EventKind::Liftoff,
        t: liftoff.t,
        z_b: driver.report_z(zw),
    });
    let flight_y0 = [
        xw,
        zw,
        vxw,
        vzw,
        liftoff.state.legs[0].alpha1,
        liftoff.state.legs[0].alpha2,
        liftoff.state.legs[1].alpha1,
        liftoff.state.legs[1].alpha2,
    ];
    driver.push_flight_sample(liftoff.t, &flight_y0, Phase::Flight);

    let flight = driver.flight(liftoff.t, &flight_y0)?;
    let (apex_time, apex_z_hip) = flight.apex.unwrap_or((liftoff.t, zw));

    driver
        .events
        .sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap_or(core::cmp::Ordering::Equal));

    Ok(JumpResult {
        body_apex: driver.report_z(apex_z_hip),
        paw_clearance: apex_z_hip - stand_world,
        stand_height,
        squat_reached: outcome.squat_reached,
        no_liftoff: false,
        liftoff_time: Some(liftoff.t),
        liftoff_height: Some(driver.report_z(zw)),
        liftoff_velocity: Some((vxw, vzw)),
        liftoff_speed: Some((vxw * vxw + vzw * vzw).sqrt()),
        apex_time: Some(apex_time),
        touchdown_time: flight.touchdown.map(|(t, _)| t),
        range: flight.touchdown.map(|(_, x)| x),
        peak_stance_torque: driver.peak_stance_torque,
        energy: audit,
        events: driver.events,
        trajectory: driver.trajectory,
        stats: driver.stats,
    })
}

/// Stance-phase ODE: full grounded model, torques held between ticks.
struct StanceSystem {
    design: RobotDesign,
    input: DynamicsInput,
}

impl OdeSystem for StanceSystem {
    fn dim(&self) -> usize {
        STATE_DIM + FLOW_DIM
    }

    fn eval(&mut self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), IntegrationError> {
        state_derivative(y, &self.design, &self.input, dydt)?;
        Ok(())
    }
}

/// Flight-phase ODE: strictly ballistic body, legs servo to the hold pose
/// with no reaction on the body. Layout `[x, z, vx, vz, a1L, a2L, a1R, a2R]`.
struct FlightSystem {
    gravity: f64,
    setpoint: f64,
}

impl OdeSystem for FlightSystem {
    fn dim(&self) -> usize {
        8
    }

    fn eval(&mut self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), IntegrationError> {
        dydt[0] = y[2];
        dydt[1] = y[3];
        dydt[2] = 0.0;
        dydt[3] = -self.gravity;
        for i in 4..8 {
            dydt[i] = (self.setpoint - y[i]) / SERVO_SETTLE_TIME;
        }
        Ok(())
    }
}

/// Total unclamped normal force at a packed stance state; the liftoff event
/// function.
fn stance_raw_normal(
    y: &[f64],
    design: &RobotDesign,
    ground: &ContactModel,
) -> Result<f64, IntegrationError> {
    let (state, _) = unpack_state(y);
    let mut total = 0.0;
    for leg in &state.legs {
        let (pos, vel) = paw_state(&state.body, leg, &design.geometry)?;
        total += ground.raw_normal(pos.z, vel.z);
    }
    Ok(total)
}

/// Lowest paw height above ground at a flight state, with the body frame
/// tilted by the scenario pitch; the touchdown event function.
fn flight_paw_z(
    y: &[f64],
    design: &RobotDesign,
    sinp: f64,
    cosp: f64,
) -> Result<f64, IntegrationError> {
    let geom = &design.geometry;
    let mut lowest = f64::INFINITY;
    for leg in 0..2 {
        let angles = ControlAngles::new(y[4 + 2 * leg], y[5 + 2 * leg]);
        let config = JointConfiguration::from_control(angles, geom, Branch::Minus)?;
        let paw = paw_position(&config, geom);
        let fx = paw.x - 0.5 * geom.l0;
        let z = y[1] - fx * sinp + paw.z * cosp;
        if z < lowest {
            lowest = z;
        }
    }
    Ok(lowest)
}

/// Tick schedule of the stance phases, all boundaries on the control grid.
struct TickSchedule {
    ramp_start: usize,
    hold_start: usize,
    thrust_start: usize,
    end: usize,
}

impl TickSchedule {
    fn new(timings: &ProtocolTimings, dt: f64) -> Self {
        let ticks = |span: f64| (span / dt).round() as usize;
        let ramp_start = ticks(timings.stand_settle);
        let hold_start = ramp_start + ticks(timings.squat_ramp).max(1);
        let thrust_start = hold_start + ticks(timings.squat_hold);
        let end = thrust_start + ticks(timings.thrust_timeout).max(1);
        TickSchedule {
            ramp_start,
            hold_start,
            thrust_start,
            end,
        }
    }

    fn phase_at(&self, tick: usize) -> Phase {
        if tick < self.ramp_start {
            Phase::Stand
        } else if tick < self.hold_start {
            Phase::SquatRamp
        } else if tick < self.thrust_start {
            Phase::Hold
        } else {
            Phase::Thrust
        }
    }

    /// Setpoints for the two motors of each leg at this tick.
    fn setpoints_at(&self, tick: usize, scenario: &JumpScenario) -> (f64, f64) {
        let stand = scenario.timings.stand_angle;
        match self.phase_at(tick) {
            Phase::Stand => (stand, stand),
            Phase::SquatRamp => {
                let frac = (tick - self.ramp_start) as f64
                    / (self.hold_start - self.ramp_start) as f64;
                let sp = stand + (scenario.squat_angle - stand) * frac;
                (sp, sp)
            }
            Phase::Hold => (scenario.squat_angle, scenario.squat_angle),
            _ => {
                let half = 0.5 * scenario.thrust_setpoint_offset;
                (stand + half, stand - half)
            }
        }
    }
}

struct Liftoff {
    t: f64,
    state: FullState,
    flows: EnergyFlows,
}

struct StanceOutcome {
    liftoff: Option<Liftoff>,
    squat_reached: bool,
    final_state: FullState,
    final_flows: EnergyFlows,
}

struct FlightOutcome {
    /// (time, hip-axis world height).
    apex: Option<(f64, f64)>,
    /// (time, hip-axis world x).
    touchdown: Option<(f64, f64)>,
}

struct Driver<'a> {
    design: RobotDesign,
    scenario: &'a JumpScenario,
    ground: &'a ContactModel,
    gains: &'a PidGains,
    tol: Tolerances,
    motor_cap: MotorConfig,
    dt: f64,
    g_eff: f64,
    sinp: f64,
    cosp: f64,
    trajectory: Vec<TrajectorySample>,
    events: Vec<Event>,
    stats: IntegratorStats,
    peak_kinetic: f64,
    peak_stance_torque: f64,
}

impl Driver<'_> {
    /// Errors out once the whole run's derivative evaluations (phases already
    /// absorbed into `self.stats` plus the active integrator's) exceed the
    /// budget. Called between accepted steps; a single step is internally
    /// bounded by the rejection floor.
    fn check_budget(&self, active: IntegratorStats, t: f64) -> Result<(), JumpError> {
        let evals = self.stats.derivative_evals + active.derivative_evals;
        if evals > DERIVATIVE_EVAL_BUDGET {
            return Err(JumpError::Stalled { t, evals });
        }
        Ok(())
    }

    /// Rotates a thrust-frame vector into world coordinates.
    fn world_vec(&self, fx: f64, fz: f64) -> (f64, f64) {
        (
            fx * self.cosp + fz * self.sinp,
            -fx * self.sinp + fz * self.cosp,
        )
    }

    /// World height of the motor-2 axis given the hip-axis-midpoint height.
    fn report_z(&self, z_hip: f64) -> f64 {
        z_hip - 0.5 * self.design.geometry.l0 * self.sinp
    }

    fn stance(&mut self, state0: &FullState) -> Result<StanceOutcome, JumpError> {
        let sched = TickSchedule::new(&self.scenario.timings, self.dt);
        // The static hold torque of the commanded pose is fed forward, so
        // the integrators start cold and only ever carry disturbances.
        let mut pid = [PidState::default(); 4];

        let sys = StanceSystem {
            design: self.design,
            input: DynamicsInput {
                torques: [0.0; 4],
                gravity: self.g_eff,
                contact: Some(*self.ground),
                lock_lateral: true,
            },
        };
        let y0 = pack_state(state0, &EnergyFlows::default());
        let mut dp = Dp45::new(sys, 0.0, &y0, self.tol);
        self.trajectory.reserve(sched.end + 64);

        let offset_mode = self.scenario.thrust_setpoint_offset != 0.0;
        let mut liftoff = None;
        let mut squat_reached = false;

        'ticks: for tick in 0..sched.end {
            let t_now = tick as f64 * self.dt;
            let phase = sched.phase_at(tick);
            let (sp1, sp2) = sched.setpoints_at(tick, self.scenario);
            let (state, _) = unpack_state(dp.y());

            if tick == sched.thrust_start {
                squat_reached = state.legs.iter().all(|l| {
                    (l.alpha1 - self.scenario.squat_angle).abs() < SQUAT_REACH_TOL
                        && (l.alpha2 - self.scenario.squat_angle).abs() < SQUAT_REACH_TOL
                });
            }

            // Model feedforward at the commanded pose; zero if that pose is
            // outside the workspace (the PID then works alone).
            let (ff1, ff2) =
                static_hold_torque(ControlAngles::new(sp1, sp2), &self.design, self.g_eff)
                    .unwrap_or((0.0, 0.0));
            let torques = [
                pid_torque_with_feedforward(sp1, state.legs[0].alpha1, state.legs[0].rate1, ff1, &mut pid[0], self.gains, &self.motor_cap),
                pid_torque_with_feedforward(sp2, state.legs[0].alpha2, state.legs[0].rate2, ff2, &mut pid[1], self.gains, &self.motor_cap),
                pid_torque_with_feedforward(sp1, state.legs[1].alpha1, state.legs[1].rate1, ff1, &mut pid[2], self.gains, &self.motor_cap),
                pid_torque_with_feedforward(sp2, state.legs[1].alpha2, state.legs[1].rate2, ff2, &mut pid[3], self.gains, &self.motor_cap),
            ];
            for tq in torques {
                self.peak_stance_torque = self.peak_stance_torque.max(tq.abs());
            }

            self.push_stance_sample(t_now, &state, torques, phase)?;
            self.peak_kinetic = self
                .peak_kinetic
                .max(kinetic_energy(&state, &self.design)?);

            {
                let input = &mut dp.system_mut().input;
                input.torques = torques;
                input.lock_lateral = !(offset_mode && phase == Phase::Thrust);
            }
            dp.invalidate_first_stage();

            let t_next = (tick + 1) as f64 * self.dt;
            if phase == Phase::Thrust {
                let mut g_prev = stance_raw_normal(dp.y(), &self.design, self.ground)?;
                while dp.step(t_next)? {
                    self.check_budget(dp.stats(), dp.t())?;
                    let g_now = stance_raw_normal(dp.y(), &self.design, self.ground)?;
                    if g_prev > 0.0 && g_now <= 0.0 {
                        let (seg_lo, _) = dp.last_span();
                        let design = self.design;
                        let ground = *self.ground;
                        let t_star = dp.locate_falling_zero(
                            |_, y| stance_raw_normal(y, &design, &ground),
                            seg_lo,
                            dp.t(),
                            EVENT_TIME_TOL,
                        )?;
                        let mut y_star = vec![0.0; STATE_DIM + FLOW_DIM];
                        dp.dense_eval(t_star, &mut y_star);
                        let (state, flows) = unpack_state(&y_star);
                        liftoff = Some(Liftoff {
                            t: t_star,
                            state,
                            flows,
                        });
                        break 'ticks;
                    }
                    g_prev = g_now;
                }
            } else {
                while dp.step(t_next)? {
                    self.check_budget(dp.stats(), dp.t())?;
                }
            }
        }

        self.stats.absorb(dp.stats());
        let (final_state, final_flows) = unpack_state(dp.y());
        Ok(StanceOutcome {
            liftoff,
            squat_reached,
            final_state,
            final_flows,
        })
    }

    fn flight(&mut self, t_lift: f64, y0: &[f64; 8]) -> Result<FlightOutcome, JumpError> {
        let sys = FlightSystem {
            gravity: self.scenario.gravity,
            setpoint: self.scenario.timings.stand_angle,
        };
        let mut dp = Dp45::new(sys, t_lift, y0, self.tol);
        let t_end = t_lift + self.scenario.timings.flight_timeout;

        let mut apex: Option<(f64, f64)> = None;
        let mut touchdown: Option<(f64, f64)> = None;
        if y0[3] <= 0.0 {
            apex = Some((t_lift, y0[1]));
            self.events.push(Event {
                kind: EventKind::Apex,
                t: t_lift,
                z_b: self.report_z(y0[1]),
            });
        }

        let mut vz_prev = y0[3];
        let mut pz_prev = flight_paw_z(y0, &self.design, self.sinp, self.cosp)?;
        let mut next_tick = (t_lift / self.dt).floor() * self.dt + self.dt;
        let mut scratch = [0.0f64; 8];

        while dp.t() < t_end {
            if !dp.step(t_end)? {
                break;
            }
            self.check_budget(dp.stats(), dp.t())?;
            let (seg_lo, seg_hi) = dp.last_span();

            let vz_now = dp.y()[3];
            if apex.is_none() && vz_prev > 0.0 && vz_now <= 0.0 {
                let t_apex =
                    dp.locate_falling_zero(|_, y| Ok(y[3]), seg_lo, seg_hi, EVENT_TIME_TOL)?;
                dp.dense_eval(t_apex, &mut scratch);
                apex = Some((t_apex, scratch[1]));
                self.events.push(Event {
                    kind: EventKind::Apex,
                    t: t_apex,
                    z_b: self.report_z(scratch[1]),
                });
            }

            let pz_now = flight_paw_z(dp.y(), &self.design, self.sinp, self.cosp)?;
            if touchdown.is_none() && pz_prev > 0.0 && pz_now <= 0.0 {
                let design = self.design;
                let (sinp, cosp) = (self.sinp, self.cosp);
                let t_td = dp.locate_falling_zero(
                    |_, y| flight_paw_z(y, &design, sinp, cosp),
                    seg_lo,
                    seg_hi,
                    EVENT_TIME_TOL,
                )?;
                dp.dense_eval(t_td, &mut scratch);
                touchdown = Some((t_td, scratch[0]));
                self.events.push(Event {
                    kind: EventKind::Touchdown,
                    t: t_td,
                    z_b: self.report_z(scratch[1]),
                });
            }

            let sample_limit = touchdown.map(|(t, _)| t).unwrap_or(seg_hi);
            while next_tick <= sample_limit + 1e-15 {
                dp.dense_eval(next_tick, &mut scratch);
                let row = scratch;
                self.push_flight_sample(next_tick, &row, Phase::Flight);
                next_tick += self.dt;
            }

            if let Some((t_td, _)) = touchdown {
                dp.dense_eval(t_td, &mut scratch);
                let row = scratch;
                self.push_flight_sample(t_td, &row, Phase::Landed);
                break;
            }
            vz_prev = vz_now;
            pz_prev = pz_now;
        }

        self.stats.absorb(dp.stats());
        Ok(FlightOutcome { apex, touchdown })
    }

    fn push_stance_sample(
        &mut self,
        t: f64,
        state: &FullState,
        torques: [f64; 4],
        phase: Phase,
    ) -> Result<(), JumpError> {
        let input = DynamicsInput {
            torques,
            gravity: self.g_eff,
            contact: Some(*self.ground),
            lock_lateral: true,
        };
        let out = dynamics_derivative(state, &self.design, &input)?;
        let (xw, zw) = self.world_vec(state.body.x, state.body.z);
        let (_, vzw) = self.world_vec(state.body.vx, state.body.vz);
        self.trajectory.push(TrajectorySample {
            t,
            x_b: xw,
            z_b: self.report_z(zw),
            vz_b: vzw,
            alpha1: state.legs[0].alpha1,
            alpha2: state.legs[0].alpha2,
            tau1: torques[0],
            tau2: torques[1],
            spring_force: out.spring_tension[0],
            contact_normal: out.contact_normal[0] + out.contact_normal[1],
            phase,
        });
        Ok(())
    }

    fn push_flight_sample(&mut self, t: f64, y: &[f64; 8], phase: Phase) {
        let angles = ControlAngles::new(y[4], y[5]);
        let spring_force =
            spring_tension(knee_distance(angles, &self.design.geometry), &self.design.spring);
        self.trajectory.push(TrajectorySample {
            t,
            x_b: y[0],
            z_b: self.report_z(y[1]),
            vz_b: y[3],
            alpha1: y[4],
            alpha2: y[5],
            tau1: 0.0,
            tau2: 0.0,
            spring_force,
            contact_normal: 0.0,
            phase,
        });
    }

    fn audit(
        &self,
        s0: &FullState,
        s1: &FullState,
        flows: &EnergyFlows,
    ) -> Result<EnergyAudit, JumpError> {
        let delta_kinetic = kinetic_energy(s1, &self.design)? - kinetic_energy(s0, &self.design)?;
        let delta_gravity = gravity_potential(s1, &self.design, self.g_eff)?
            - gravity_potential(s0, &self.design, self.g_eff)?;
        let delta_spring = spring_potential(s1, &self.design) - spring_potential(s0, &self.design);
        let supplied = flows.work_motor + flows.work_contact
            - flows.dissipated_bearing
            - flows.dissipated_damping;
        let residual = (delta_kinetic + delta_gravity + delta_spring) - supplied;
        Ok(EnergyAudit {
            delta_kinetic,
            delta_gravity,
            delta_spring,
            work_motor: flows.work_motor,
            work_contact: flows.work_contact,
            dissipated_bearing: flows.dissipated_bearing,
            dissipated_damping: flows.dissipated_damping,
            peak_kinetic: self.peak_kinetic,
            residual,
            relative_residual: residual.abs() / self.peak_kinetic.max(1e-12),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MassModel;
    use crate::{EARTH_GRAVITY, MARS_GRAVITY};

    fn reference_design() -> RobotDesign {
        RobotDesign::default()
    }

    fn reference_scenario() -> JumpScenario {
        JumpScenario::vertical(EARTH_GRAVITY, 18.0, 115.0f64.to_radians())
    }

    #[test]
    fn reference_jump_lifts_off_with_ordered_events() {
        let result = simulate_jump(&reference_design(), &reference_scenario()).unwrap();
        assert!(!result.no_liftoff);
        assert!(result.squat_reached, "squat never reached");
        let t_lift = result.liftoff_time.unwrap();
        let t_apex = result.apex_time.unwrap();
        let t_td = result.touchdown_time.unwrap();
        assert!(
            t_lift < t_apex && t_apex < t_td,
            "event order: {t_lift} {t_apex} {t_td}"
        );
        assert!(result.body_apex > result.stand_height);
        assert!(result.paw_clearance > 0.0);
        // Events sorted and matching the times reported.
        let kinds: Vec<_> = result.events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            [EventKind::Liftoff, EventKind::Apex, EventKind::Touchdown]
        );
        // Trajectory times strictly increase and phases never regress.
        let order = |p: Phase| match p {
            Phase::Stand => 0,
            Phase::SquatRamp => 1,
            Phase::Hold => 2,
            Phase::Thrust => 3,
            Phase::Flight => 4,
            Phase::Landed => 5,
        };
        for pair in result.trajectory.windows(2) {
            assert!(pair[0].t < pair[1].t);
            assert!(order(pair[0].phase) <= order(pair[1].phase));
        }
    }

    #[test]
    fn flight_is_exactly_ballistic_from_liftoff() {
        let result = simulate_jump(&reference_design(), &reference_scenario()).unwrap();
        let (_, vz) = result.liftoff_velocity.unwrap();
        let gain = result.body_apex - result.liftoff_height.unwrap();
        let expected = vz * vz / (2.0 * EARTH_GRAVITY);
        assert!(
            (gain - expected).abs() < 1e-6,
            "gain {gain} vs ballistic {expected}"
        );
    }

    #[test]
    fn stance_energy_audit_closes() {
        let result = simulate_jump(&reference_design(), &reference_scenario()).unwrap();
        let audit = result.energy;
        assert!(audit.peak_kinetic > 1.0, "peak KE {}", audit.peak_kinetic);
        assert!(
            audit.relative_residual < 5e-3,
            "audit residual {} ({} relative)",
            audit.residual,
            audit.relative_residual
        );
        assert!(audit.dissipated_bearing >= 0.0 && audit.dissipated_damping >= 0.0);
        assert!(audit.work_motor > 0.0);
    }

    #[test]
    fn mars_outjumps_earth_with_the_same_design() {
        let design = reference_design();
        let earth = simulate_jump(&design, &reference_scenario()).unwrap();
        let mars_scenario = JumpScenario {
            gravity: MARS_GRAVITY,
            ..reference_scenario()
        };
        let mars = simulate_jump(&design, &mars_scenario).unwrap();
        assert!(mars.body_apex > earth.body_apex + 0.3);
    }

    #[test]
    fn feeble_torque_reports_no_liftoff_without_error() {
        let scenario = JumpScenario::vertical(EARTH_GRAVITY, 2.0, 115.0f64.to_radians());
        let result = simulate_jump(&reference_design(), &scenario).unwrap();
        assert!(result.no_liftoff);
        assert!(result.liftoff_time.is_none());
        assert_eq!(result.paw_clearance, 0.0);
        assert!((result.body_apex - result.stand_height).abs() < 1e-12);
        assert!(result.events.is_empty());
    }

    #[test]
    fn pitched_jump_travels_forward_and_flies_ballistically() {
        let design = reference_design();
        let scenario = JumpScenario::forward(
            MARS_GRAVITY,
            24.8,
            120.0f64.to_radians(),
            30.0f64.to_radians(),
        );
        let result = simulate_forward_jump(&design, &scenario).unwrap();
        assert!(!result.no_liftoff);
        let (vx, vz) = result.liftoff_velocity.unwrap();
        assert!(vx > 0.5, "forward velocity {vx}");
        // Liftoff velocity points along the thrust axis by construction.
        assert!((vx / vz - scenario.pitch.tan()).abs() < 1e-12);
        let range = result.range.unwrap();
        let t_td = result.touchdown_time.unwrap();
        let t_lift = result.liftoff_time.unwrap();
        // Horizontal flight is unaccelerated: range matches vx * dt plus the
        // liftoff offset.
        let x_lift = result
            .trajectory
            .iter()
            .find(|s| s.phase == Phase::Flight)
            .unwrap()
            .x_b;
        assert!(
            (range - (x_lift + vx * (t_td - t_lift))).abs() < 1e-6,
            "range {range}"
        );
        assert!(range > 1.0);
    }

    #[test]
    fn zero_pitch_forward_jump_is_the_vertical_jump() {
        let design = reference_design();
        let vertical = simulate_jump(&design, &reference_scenario()).unwrap();
        let forward = simulate_forward_jump(
            &design,
            &JumpScenario::forward(EARTH_GRAVITY, 18.0, 115.0f64.to_radians(), 0.0),
        )
        .unwrap();
        assert_eq!(vertical.body_apex, forward.body_apex);
        assert_eq!(vertical.liftoff_time, forward.liftoff_time);
    }

    #[test]
    fn asymmetric_thrust_setpoints_drive_lateral_motion() {
        let design = reference_design();
        let mut scenario = JumpScenario::vertical(EARTH_GRAVITY, 24.8, 115.0f64.to_radians());
        scenario.thrust_setpoint_offset = 0.25;
        let result = simulate_jump(&design, &scenario).unwrap();
        assert!(!result.no_liftoff);
        let (vx, _) = result.liftoff_velocity.unwrap();
        assert!(vx.abs() > 0.01, "lateral velocity {vx}");
    }

    #[test]
    fn scenario_validation_names_the_violated_bound() {
        let motor = MotorConfig::default();
        let mut s = reference_scenario();
        s.squat_angle = 130.0f64.to_radians();
        assert!(matches!(
            s.validate(&motor),
            Err(ScenarioError::SquatAngleOutOfRange { .. })
        ));
        let mut s = reference_scenario();
        s.torque_saturation = 30.0;
        assert!(matches!(
            s.validate(&motor),
            Err(ScenarioError::TorqueSaturationOutOfRange { .. })
        ));
        let mut s = reference_scenario();
        s.pitch = 1.0;
        assert!(matches!(
            s.validate(&motor),
            Err(ScenarioError::PitchOutOfRange { .. })
        ));
        let mut s = reference_scenario();
        s.pitch = 0.3;
        s.thrust_setpoint_offset = 0.1;
        assert!(matches!(
            s.validate(&motor),
            Err(ScenarioError::TiltAndOffsetExclusive)
        ));
    }

    #[test]
    fn tighter_tolerances_agree_on_the_apex() {
        let design = reference_design();
        let scenario = reference_scenario();
        let coarse = simulate_jump_with(
            &design,
            &scenario,
            &ContactModel::default(),
            &PidGains::default(),
            Tolerances::default(),
        )
        .unwrap();
        let fine = simulate_jump_with(
            &design,
            &scenario,
            &ContactModel::default(),
            &PidGains::default(),
            Tolerances::default().halved(),
        )
        .unwrap();
        assert!(
            (coarse.body_apex - fine.body_apex).abs() < 1e-4,
            "apexes {} vs {}",
            coarse.body_apex,
            fine.body_apex
        );
    }

    #[test]
    fn physical_spring_interpretation_halves_the_equivalent_stiffness() {
        let mut design = reference_design();
        design.spring.stiffness = 870.0;
        let mut scenario = reference_scenario();
        scenario.spring_interpretation = SpringInterpretation::Physical;
        let physical = simulate_jump(&design, &scenario).unwrap();

        let mut halved = reference_design();
        halved.spring.stiffness = 435.0;
        let equivalent = simulate_jump(&halved, &reference_scenario()).unwrap();
        assert_eq!(physical.body_apex, equivalent.body_apex);
    }

    #[test]
    fn mass_model_drives_the_penetration_depth() {
        // The first trajectory sample starts at the static penetration for
        // the configured total mass.
        let design = RobotDesign {
            masses: MassModel {
                electronics: 2.0,
                ..MassModel::default()
            },
            ..reference_design()
        };
        let result = simulate_jump(&design, &reference_scenario()).unwrap();
        let first = result.trajectory.first().unwrap();
        let expected_total = design.masses.total() * EARTH_GRAVITY;
        assert!(
            (first.contact_normal - expected_total).abs() < 1e-6,
            "initial support {} vs weight {expected_total}",
            first.contact_normal
        );
    }
}
