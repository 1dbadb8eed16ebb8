//! Equations of motion for the body-plus-two-legs assembly in minimal
//! coordinates `(x_b, z_b, alpha1_L, alpha2_L, alpha1_R, alpha2_R)`.
//!
//! Each closed-chain leg is reduced through its loop constraint: the calf
//! angles and their rates follow from the hip angles via the closure rate
//! map, so link midpoint masses contribute configuration-dependent Jacobians
//! and centripetal bias terms rather than extra coordinates. Forces applied:
//! gravity, motor torques with viscous damping and reflected rotor inertia,
//! knee spring, passive-bearing friction, and paw contact.

#[allow(unused_imports)]
use crate::math::*;

use super::contact::contact_force;
use super::integrator::{Dp45, IntegrationError, IntegratorStats, OdeSystem, Tolerances};
use super::{ContactModel, RobotDesign};
use crate::actuation::{spring_joint_torques, spring_tension};
use crate::kinematics::{
    knee_distance, paw_position, Branch, ControlAngles, JointConfiguration, KinematicsError,
    LegGeometry,
};
use crate::linalg::{solve_in_place, Mat2, Vec2};
use core::f64::consts::FRAC_PI_2;

/// Planar body reference state: position of the hip axle midpoint and its
/// velocity, world (or thrust-frame) coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BodyState {
    pub x: f64,
    pub z: f64,
    pub vx: f64,
    pub vz: f64,
}

/// One leg's actuated coordinates and rates (control frame).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LegState {
    pub alpha1: f64,
    pub alpha2: f64,
    pub rate1: f64,
    pub rate2: f64,
}

impl LegState {
    pub fn angles(&self) -> ControlAngles {
        ControlAngles::new(self.alpha1, self.alpha2)
    }

    /// At rest at a symmetric pose.
    pub fn resting(alpha: f64) -> Self {
        Self {
            alpha1: alpha,
            alpha2: alpha,
            rate1: 0.0,
            rate2: 0.0,
        }
    }
}

/// Full minimal-coordinate state of the robot.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FullState {
    pub body: BodyState,
    pub legs: [LegState; 2],
}

/// Inputs held fixed across one derivative evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsInput {
    /// Motor torques in the control frame: `[leg0 motor1, leg0 motor2,
    /// leg1 motor1, leg1 motor2]` (N m). Positive drives its alpha deeper.
    pub torques: [f64; 4],
    /// Gravitational acceleration along -z (m/s^2).
    pub gravity: f64,
    /// Ground model; `None` disables contact entirely (free flight).
    pub contact: Option<ContactModel>,
    /// Constrains the body's lateral coordinate (`x_b` fixed). Used during
    /// grounded phases where symmetric paws pin the body laterally.
    pub lock_lateral: bool,
}

/// Accelerations plus per-evaluation diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DerivativeOutput {
    /// `(x_b'', z_b'', alpha1_L'', alpha2_L'', alpha1_R'', alpha2_R'')`.
    pub acceleration: [f64; 6],
    /// Clamped normal force per paw (N).
    pub contact_normal: [f64; 2],
    /// Tangential friction force per paw (N).
    pub contact_tangential: [f64; 2],
    /// Sum of unclamped normal forces: the liftoff event function.
    pub raw_normal_total: f64,
    /// Paw height above ground per leg (m).
    pub paw_height: [f64; 2],
    /// Knee-spring tension per leg (N).
    pub spring_tension: [f64; 2],
    /// Instantaneous power flows (W): motors in, contact in, friction and
    /// damping dissipated (non-negative).
    pub power_motor: f64,
    pub power_contact: f64,
    pub power_bearing: f64,
    pub power_damping: f64,
}

/// Work and dissipation integrals along a trajectory (J).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyFlows {
    pub work_motor: f64,
    pub work_contact: f64,
    pub dissipated_bearing: f64,
    pub dissipated_damping: f64,
}

/// Velocity-level kinematics of one leg, shared by the dynamics assembly and
/// the energy functions. Column pairs are alpha-frame Jacobians `(d/d
/// alpha1, d/d alpha2)` of planar points riding on the leg.
struct LegKinematics {
    /// Midpoint positions relative to motor 1, links 1..4.
    mid_pos: [Vec2; 4],
    /// Midpoint Jacobian columns, alpha frame.
    mid_jac: [(Vec2, Vec2); 4],
    /// Midpoint centripetal bias at the current rates.
    mid_bias: [Vec2; 4],
    paw_pos: Vec2,
    paw_jac: (Vec2, Vec2),
    /// Passive relative-joint rates: knee 1, knee 2, paw pivot (rad/s).
    rel_rates: [f64; 3],
    /// Their alpha-frame gradients.
    rel_grads: [(f64, f64); 3],
}

impl LegKinematics {
    fn new(leg: &LegState, geom: &LegGeometry) -> Result<Self, KinematicsError> {
        let theta1 = -FRAC_PI_2 - leg.alpha1;
        let theta2 = leg.alpha2 - FRAC_PI_2;
        let td1 = -leg.rate1;
        let td2 = leg.rate2;

        let config = JointConfiguration::solve(theta1, theta2, geom, Branch::Minus)?;
        let gamma = crate::kinematics::closure_rate_map(&config, geom)?;
        let td3 = gamma.col0.x * td1 + gamma.col1.x * td2;
        let td4 = gamma.col0.z * td1 + gamma.col1.z * td2;

        let (u1, p1) = (Vec2::unit(theta1), Vec2::unit_perp(theta1));
        let (u2, p2) = (Vec2::unit(theta2), Vec2::unit_perp(theta2));
        let (u3, p3) = (Vec2::unit(config.theta3), Vec2::unit_perp(config.theta3));
        let (u4, p4) = (Vec2::unit(config.theta4), Vec2::unit_perp(config.theta4));
        let (l0, l1, l2, l3, l4) = (geom.l0, geom.l1, geom.l2, geom.l3, geom.l4);

        // Closure acceleration bias: passive-angle accelerations when the
        // hip accelerations are zero, from differentiating the velocity
        // closure once more.
        let rho = u1.scale(l1 * td1 * td1) - u2.scale(l2 * td2 * td2) + u3.scale(l3 * td3 * td3)
            - u4.scale(l4 * td4 * td4);
        let phi_v = Mat2::from_cols(p3.scale(l3), p4.scale(-l4));
        let gam_bias = phi_v
            .solve(rho)
            .ok_or(KinematicsError::SingularConfiguration {
                theta3: config.theta3,
                theta4: config.theta4,
            })?;
        let (gb3, gb4) = (gam_bias.x, gam_bias.z);

        let base = Vec2::new(l0, 0.0);
        let mid_pos = [
            u1.scale(0.5 * l1),
            base + u2.scale(0.5 * l2),
            u1.scale(l1) + u3.scale(0.5 * l3),
            base + u2.scale(l2) + u4.scale(0.5 * l4),
        ];

        // Theta-frame Jacobian columns, then alpha frame = flip column 1
        // (theta1 = -pi/2 - alpha1, theta2 = alpha2 - pi/2).
        let theta_jac = [
            (p1.scale(0.5 * l1), Vec2::ZERO),
            (Vec2::ZERO, p2.scale(0.5 * l2)),
            (
                p1.scale(l1) + p3.scale(0.5 * l3 * gamma.col0.x),
                p3.scale(0.5 * l3 * gamma.col1.x),
            ),
            (
                p4.scale(0.5 * l4 * gamma.col0.z),
                p2.scale(l2) + p4.scale(0.5 * l4 * gamma.col1.z),
            ),
        ];
        let mid_jac = theta_jac.map(|(c0, c1)| (-c0, c1));

        let mid_bias = [
            u1.scale(-0.5 * l1 * td1 * td1),
            u2.scale(-0.5 * l2 * td2 * td2),
            u1.scale(-l1 * td1 * td1) + u3.scale(-0.5 * l3 * td3 * td3)
                + p3.scale(0.5 * l3 * gb3),
            u2.scale(-l2 * td2 * td2) + u4.scale(-0.5 * l4 * td4 * td4)
                + p4.scale(0.5 * l4 * gb4),
        ];

        let paw_pos = paw_position(&config, geom);
        let paw_jac_theta = (
            p1.scale(l1) + p3.scale(l3 * gamma.col0.x),
            p3.scale(l3 * gamma.col1.x),
        );
        let paw_jac = (-paw_jac_theta.0, paw_jac_theta.1);

        let rel_rates = [td3 - td1, td4 - td2, td4 - td3];
        let rel_grads_theta = [
            (gamma.col0.x - 1.0, gamma.col1.x),
            (gamma.col0.z, gamma.col1.z - 1.0),
            (gamma.col0.z - gamma.col0.x, gamma.col1.z - gamma.col1.x),
        ];
        let rel_grads = rel_grads_theta.map(|(g1, g2)| (-g1, g2));

        Ok(Self {
            mid_pos,
            mid_jac,
            mid_bias,
            paw_pos,
            paw_jac,
            rel_rates,
            rel_grads,
        })
    }

    /// Velocity of the paw given the body velocity.
    fn paw_velocity(&self, body: &BodyState, leg: &LegState) -> Vec2 {
        Vec2::new(body.vx, body.vz)
            + self.paw_jac.0.scale(leg.rate1)
            + self.paw_jac.1.scale(leg.rate2)
    }
}

/// Per-leg contribution to the global system.
struct LegContribution {
    /// 2x2 leg mass block (alpha x alpha).
    m_aa: [[f64; 2]; 2],
    /// 2x2 body-leg coupling block (body row x alpha column).
    m_ba: [[f64; 2]; 2],
    /// Centripetal bias entering the body rows.
    bias_b: Vec2,
    /// Centripetal bias entering the alpha rows.
    bias_a: [f64; 2],
    /// Generalized applied force on the alpha rows.
    q_a: [f64; 2],
    /// Contact force on the body rows.
    f_b: Vec2,
    normal: f64,
    tangential: f64,
    raw_normal: f64,
    paw_height: f64,
    spring: f64,
    power_motor: f64,
    power_contact: f64,
    power_bearing: f64,
    power_damping: f64,
}

fn leg_contribution(
    body: &BodyState,
    leg: &LegState,
    torques: (f64, f64),
    design: &RobotDesign,
    input: &DynamicsInput,
) -> Result<LegContribution, KinematicsError> {
    let geom = &design.geometry;
    let kin = LegKinematics::new(leg, geom)?;
    let masses = [
        design.masses.hip_link_mass(),
        design.masses.hip_link_mass(),
        design.masses.calf_link_mass(),
        design.masses.calf_link_mass(),
    ];

    let mut m_aa = [[0.0; 2]; 2];
    let mut m_ba = [[0.0; 2]; 2];
    let mut bias_b = Vec2::ZERO;
    let mut bias_a = [0.0; 2];
    let mut q_a = [0.0; 2];

    for i in 0..4 {
        let m = masses[i];
        let (c0, c1) = kin.mid_jac[i];
        let beta = kin.mid_bias[i];
        let cols = [c0, c1];
        for c in 0..2 {
            m_ba[0][c] += m * cols[c].x;
            m_ba[1][c] += m * cols[c].z;
            bias_a[c] += m * cols[c].dot(beta);
            // Gravity on the link mass, alpha rows.
            q_a[c] -= input.gravity * m * cols[c].z;
            for r in 0..2 {
                m_aa[r][c] += m * cols[r].dot(cols[c]);
            }
        }
        bias_b = bias_b + beta.scale(m);
    }

    let inertia = design.motor.reflected_inertia;
    m_aa[0][0] += inertia;
    m_aa[1][1] += inertia;

    // Knee spring.
    let angles = leg.angles();
    let (ts1, ts2) = spring_joint_torques(angles, geom, &design.spring);
    q_a[0] += -ts1;
    q_a[1] += ts2;
    let spring = spring_tension(knee_distance(angles, geom), &design.spring);

    // Passive-bearing viscous friction on the relative joint rates.
    let cj = design.joint_friction;
    let mut power_bearing = 0.0;
    for (rate, grad) in kin.rel_rates.iter().zip(kin.rel_grads.iter()) {
        q_a[0] -= cj * rate * grad.0;
        q_a[1] -= cj * rate * grad.1;
        power_bearing += cj * rate * rate;
    }

    // Motors: commanded torque and rotor viscous damping.
    let cm = design.motor.viscous_damping;
    let (tau1, tau2) = torques;
    q_a[0] += tau1 - cm * leg.rate1;
    q_a[1] += tau2 - cm * leg.rate2;
    let power_motor = tau1 * leg.rate1 + tau2 * leg.rate2;
    let power_damping = cm * (leg.rate1 * leg.rate1 + leg.rate2 * leg.rate2);

    // Ground contact at the paw.
    let paw_height = body.z + kin.paw_pos.z;
    let mut f_b = Vec2::ZERO;
    let (mut normal, mut tangential, mut raw_normal, mut power_contact) = (0.0, 0.0, 0.0, 0.0);
    if let Some(ground) = &input.contact {
        let v_paw = kin.paw_velocity(body, leg);
        raw_normal = ground.raw_normal(paw_height, v_paw.z);
        let (n, t) = contact_force(paw_height, (v_paw.x, v_paw.z), ground);
        normal = n;
        tangential = t;
        let force = Vec2::new(t, n);
        f_b = force;
        q_a[0] += kin.paw_jac.0.dot(force);
        q_a[1] += kin.paw_jac.1.dot(force);
        power_contact = force.dot(v_paw);
    }

    Ok(LegContribution {
        m_aa,
        m_ba,
        bias_b,
        bias_a,
        q_a,
        f_b,
        normal,
        tangential,
        raw_normal,
        paw_height,
        spring,
        power_motor,
        power_contact,
        power_bearing,
        power_damping,
    })
}

/// Generalized accelerations of the full assembly under the given inputs,
/// with force and power diagnostics.
pub fn dynamics_derivative(
    state: &FullState,
    design: &RobotDesign,
    input: &DynamicsInput,
) -> Result<DerivativeOutput, KinematicsError> {
    let legs = [
        leg_contribution(
            &state.body,
            &state.legs[0],
            (input.torques[0], input.torques[1]),
            design,
            input,
        )?,
        leg_contribution(
            &state.body,
            &state.legs[1],
            (input.torques[2], input.torques[3]),
            design,
            input,
        )?,
    ];

    let total_mass = design.masses.total();
    let mut a = [[0.0f64; 6]; 6];
    let mut rhs = [0.0f64; 6];

    a[0][0] = total_mass;
    a[1][1] = total_mass;
    rhs[1] = -input.gravity * total_mass;

    for (l, leg) in legs.iter().enumerate() {
        let o = 2 + 2 * l;
        for c in 0..2 {
            for r in 0..2 {
                a[o + r][o + c] = leg.m_aa[r][c];
                a[r][o + c] = leg.m_ba[r][c];
                a[o + c][r] = leg.m_ba[r][c];
            }
            rhs[o + c] = leg.q_a[c] - leg.bias_a[c];
        }
        rhs[0] += leg.f_b.x - leg.bias_b.x;
        rhs[1] += leg.f_b.z - leg.bias_b.z;
    }

    if input.lock_lateral {
        for j in 0..6 {
            a[0][j] = 0.0;
            a[j][0] = 0.0;
        }
        a[0][0] = 1.0;
        rhs[0] = 0.0;
    }

    let acceleration =
        solve_in_place(&mut a, &mut rhs).ok_or(KinematicsError::SingularConfiguration {
            theta3: 0.0,
            theta4: 0.0,
        })?;

    Ok(DerivativeOutput {
        acceleration,
        contact_normal: [legs[0].normal, legs[1].normal],
        contact_tangential: [legs[0].tangential, legs[1].tangential],
        raw_normal_total: legs[0].raw_normal + legs[1].raw_normal,
        paw_height: [legs[0].paw_height, legs[1].paw_height],
        spring_tension: [legs[0].spring, legs[1].spring],
        power_motor: legs[0].power_motor + legs[1].power_motor,
        power_contact: legs[0].power_contact + legs[1].power_contact,
        power_bearing: legs[0].power_bearing + legs[1].power_bearing,
        power_damping: legs[0].power_damping + legs[1].power_damping,
    })
}

/// Total kinetic energy: body lump, link midpoints, and reflected rotor
/// inertia at the four actuated joints (J).
pub fn kinetic_energy(state: &FullState, design: &RobotDesign) -> Result<f64, KinematicsError> {
    let vb = Vec2::new(state.body.vx, state.body.vz);
    let mut e = 0.5 * design.masses.body_lump() * vb.dot(vb);
    let masses = [
        design.masses.hip_link_mass(),
        design.masses.hip_link_mass(),
        design.masses.calf_link_mass(),
        design.masses.calf_link_mass(),
    ];
    for leg in &state.legs {
        let kin = LegKinematics::new(leg, &design.geometry)?;
        for i in 0..4 {
            let (c0, c1) = kin.mid_jac[i];
            let v = vb + c0.scale(leg.rate1) + c1.scale(leg.rate2);
            e += 0.5 * masses[i] * v.dot(v);
        }
        e += 0.5
            * design.motor.reflected_inertia
            * (leg.rate1 * leg.rate1 + leg.rate2 * leg.rate2);
    }
    Ok(e)
}

/// Gravitational potential with the ground plane as reference (J).
pub fn gravity_potential(
    state: &FullState,
    design: &RobotDesign,
    gravity: f64,
) -> Result<f64, KinematicsError> {
    let masses = [
        design.masses.hip_link_mass(),
        design.masses.hip_link_mass(),
        design.masses.calf_link_mass(),
        design.masses.calf_link_mass(),
    ];
    let mut v = design.masses.body_lump() * state.body.z;
    for leg in &state.legs {
        let kin = LegKinematics::new(leg, &design.geometry)?;
        for i in 0..4 {
            v += masses[i] * (state.body.z + kin.mid_pos[i].z);
        }
    }
    Ok(gravity * v)
}

/// Elastic energy stored in both knee springs (J).
pub fn spring_potential(state: &FullState, design: &RobotDesign) -> f64 {
    let mut v = 0.0;
    for leg in &state.legs {
        let d = knee_distance(leg.angles(), &design.geometry);
        let stretch = (d - design.spring.natural_length).max(0.0);
        v += 0.5 * design.spring.stiffness * stretch * stretch;
    }
    v
}

/// Paw position and velocity of one leg in world coordinates, with the leg's
/// motor-1 frame anchored at `body.x - l0/2`.
pub fn paw_state(
    body: &BodyState,
    leg: &LegState,
    geom: &LegGeometry,
) -> Result<(Vec2, Vec2), KinematicsError> {
    let kin = LegKinematics::new(leg, geom)?;
    let pos = Vec2::new(
        body.x - 0.5 * geom.l0 + kin.paw_pos.x,
        body.z + kin.paw_pos.z,
    );
    Ok((pos, kin.paw_velocity(body, leg)))
}

/// ODE adapter for the full model under constant torques; state layout
/// `[x, z, a1L, a2L, a1R, a2R, vx, vz, r1L, r2L, r1R, r2R]` plus the four
/// energy-flow integrals.
struct FixedTorqueSystem<'a> {
    design: &'a RobotDesign,
    input: DynamicsInput,
}

pub(crate) const STATE_DIM: usize = 12;
pub(crate) const FLOW_DIM: usize = 4;

pub(crate) fn pack_state(state: &FullState, flows: &EnergyFlows) -> [f64; STATE_DIM + FLOW_DIM] {
    let b = &state.body;
    let (l0, l1) = (&state.legs[0], &state.legs[1]);
    [
        b.x, b.z, l0.alpha1, l0.alpha2, l1.alpha1, l1.alpha2, b.vx, b.vz, l0.rate1, l0.rate2,
        l1.rate1, l1.rate2, flows.work_motor, flows.work_contact, flows.dissipated_bearing,
        flows.dissipated_damping,
    ]
}

pub(crate) fn unpack_state(y: &[f64]) -> (FullState, EnergyFlows) {
    let state = FullState {
        body: BodyState {
            x: y[0],
            z: y[1],
            vx: y[6],
            vz: y[7],
        },
        legs: [
            LegState {
                alpha1: y[2],
                alpha2: y[3],
                rate1: y[8],
                rate2: y[9],
            },
            LegState {
                alpha1: y[4],
                alpha2: y[5],
                rate1: y[10],
                rate2: y[11],
            },
        ],
    };
    let flows = EnergyFlows {
        work_motor: y[12],
        work_contact: y[13],
        dissipated_bearing: y[14],
        dissipated_damping: y[15],
    };
    (state, flows)
}

pub(crate) fn state_derivative(
    y: &[f64],
    design: &RobotDesign,
    input: &DynamicsInput,
    dydt: &mut [f64],
) -> Result<DerivativeOutput, KinematicsError> {
    let (state, _) = unpack_state(y);
    let out = dynamics_derivative(&state, design, input)?;
    dydt[0] = state.body.vx;
    dydt[1] = state.body.vz;
    dydt[2] = state.legs[0].rate1;
    dydt[3] = state.legs[0].rate2;
    dydt[4] = state.legs[1].rate1;
    dydt[5] = state.legs[1].rate2;
    dydt[6..12].copy_from_slice(&out.acceleration);
    dydt[12] = out.power_motor;
    dydt[13] = out.power_contact;
    dydt[14] = out.power_bearing;
    dydt[15] = out.power_damping;
    Ok(out)
}

impl OdeSystem for FixedTorqueSystem<'_> {
    fn dim(&self) -> usize {
        STATE_DIM + FLOW_DIM
    }

    fn eval(&mut self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), IntegrationError> {
        state_derivative(y, self.design, &self.input, dydt)?;
        Ok(())
    }
}

/// Integrates the full model under constant torques for `duration` seconds.
/// Returns the final state, the accumulated energy flows, and step counts.
pub fn integrate_fixed_torque(
    state: &FullState,
    design: &RobotDesign,
    input: &DynamicsInput,
    duration: f64,
    tol: Tolerances,
) -> Result<(FullState, EnergyFlows, IntegratorStats), IntegrationError> {
    let sys = FixedTorqueSystem { design, input: *input };
    let y0 = pack_state(state, &EnergyFlows::default());
    let mut dp = Dp45::new(sys, 0.0, &y0, tol);
    while dp.step(duration)? {}
    let (final_state, flows) = unpack_state(dp.y());
    Ok((final_state, flows, dp.stats()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuation::static_hold_torque;

    fn frictionless(design: &RobotDesign) -> RobotDesign {
        let mut d = *design;
        d.joint_friction = 0.0;
        d.motor.viscous_damping = 0.0;
        d
    }

    fn total_energy(state: &FullState, design: &RobotDesign, gravity: f64) -> f64 {
        kinetic_energy(state, design).unwrap()
            + gravity_potential(state, design, gravity).unwrap()
            + spring_potential(state, design)
    }

    #[test]
    fn resting_flight_with_slack_spring_is_exactly_ballistic() {
        // Stand pose keeps the knee spring slack; zero torques, no contact.
        let design = RobotDesign::default();
        let state = FullState {
            body: BodyState {
                x: 0.0,
                z: 2.0,
                vx: 0.1,
                vz: 0.4,
            },
            legs: [LegState::resting(17.5f64.to_radians()); 2],
        };
        let input = DynamicsInput {
            torques: [0.0; 4],
            gravity: 9.81,
            contact: None,
            lock_lateral: false,
        };
        let out = dynamics_derivative(&state, &design, &input).unwrap();
        assert!((out.acceleration[1] + 9.81).abs() < 1e-12);
        for (i, acc) in out.acceleration.iter().enumerate() {
            if i != 1 {
                assert!(acc.abs() < 1e-12, "coordinate {i}: {acc}");
            }
        }
        assert_eq!(out.contact_normal, [0.0, 0.0]);
    }

    #[test]
    fn free_fall_conserves_total_energy() {
        // Swinging legs, engaged springs, no dissipation: E = T + Vg + Vs
        // must be constant to integrator accuracy. The window is short
        // because in free fall the spring flings the undamped legs out of
        // the reachable workspace (there are no joint stops).
        let design = frictionless(&RobotDesign::default());
        let state = FullState {
            body: BodyState {
                x: 0.0,
                z: 3.0,
                vx: 0.2,
                vz: 1.0,
            },
            legs: [
                LegState {
                    alpha1: 100.0f64.to_radians(),
                    alpha2: 95.0f64.to_radians(),
                    rate1: 0.4,
                    rate2: -0.3,
                },
                LegState {
                    alpha1: 80.0f64.to_radians(),
                    alpha2: 105.0f64.to_radians(),
                    rate1: -0.2,
                    rate2: 0.25,
                },
            ],
        };
        let input = DynamicsInput {
            torques: [0.0; 4],
            gravity: 9.81,
            contact: None,
            lock_lateral: false,
        };
        let e0 = total_energy(&state, &design, input.gravity);
        let (after, flows, stats) =
            integrate_fixed_torque(&state, &design, &input, 0.1, Tolerances::default()).unwrap();
        let e1 = total_energy(&after, &design, input.gravity);
        let scale = e0.abs().max(1.0);
        assert!(
            ((e1 - e0) / scale).abs() < 1e-6,
            "drift {} over {} steps",
            e1 - e0,
            stats.steps_accepted
        );
        assert!(stats.steps_accepted > 5, "window too easy to be a test");
        assert_eq!(flows.work_motor, 0.0);
        assert!(flows.dissipated_bearing == 0.0 && flows.dissipated_damping == 0.0);
    }

    #[test]
    fn static_hold_torques_balance_the_grounded_squat() {
        // Symmetric grounded squat with the penalty ground compressed to
        // carry the full weight: applying the analytic hold torques must
        // leave every coordinate at rest.
        let design = RobotDesign::default();
        let gravity = 9.81;
        let alpha = 115.0f64.to_radians();
        let angles = ControlAngles::symmetric(alpha);
        let (tau1, tau2) = static_hold_torque(angles, &design, gravity).unwrap();

        let ground = ContactModel::default();
        let height = crate::kinematics::standing_height(angles, &design.geometry).unwrap();
        let penetration = design.masses.total() * gravity / (2.0 * ground.stiffness);
        let state = FullState {
            body: BodyState {
                x: 0.0,
                z: height - penetration,
                vx: 0.0,
                vz: 0.0,
            },
            legs: [LegState::resting(alpha); 2],
        };
        let input = DynamicsInput {
            torques: [tau1, tau2, tau1, tau2],
            gravity,
            contact: Some(ground),
            lock_lateral: false,
        };
        let out = dynamics_derivative(&state, &design, &input).unwrap();
        for (i, acc) in out.acceleration.iter().enumerate() {
            assert!(acc.abs() < 1e-8, "coordinate {i} accelerates: {acc}");
        }
        let weight = design.masses.total() * gravity;
        assert!((out.contact_normal[0] + out.contact_normal[1] - weight).abs() < 1e-6);
    }

    #[test]
    fn energy_flow_integrals_close_the_work_balance() {
        // Driven, damped, grounded micro-simulation: the change in total
        // energy must equal motor work plus contact work minus dissipation.
        let design = RobotDesign::default();
        let gravity = 9.81;
        let alpha = 60.0f64.to_radians();
        let angles = ControlAngles::symmetric(alpha);
        let ground = ContactModel::default();
        let height = crate::kinematics::standing_height(angles, &design.geometry).unwrap();
        let penetration = design.masses.total() * gravity / (2.0 * ground.stiffness);
        let state = FullState {
            body: BodyState {
                x: 0.0,
                z: height - penetration,
                vx: 0.0,
                vz: 0.0,
            },
            legs: [LegState::resting(alpha); 2],
        };
        // Static hold plus a bias: starts at rest in contact, then squats.
        let (tau1, tau2) = static_hold_torque(angles, &design, gravity).unwrap();
        let input = DynamicsInput {
            torques: [tau1 + 1.5, tau2 + 1.5, tau1 + 1.5, tau2 + 1.5],
            gravity,
            contact: Some(ground),
            lock_lateral: true,
        };
        let e0 = total_energy(&state, &design, gravity);
        let (after, flows, _) =
            integrate_fixed_torque(&state, &design, &input, 0.05, Tolerances::default()).unwrap();
        let e1 = total_energy(&after, &design, gravity);
        let supplied = flows.work_motor + flows.work_contact
            - flows.dissipated_bearing
            - flows.dissipated_damping;
        assert!(
            ((e1 - e0) - supplied).abs() < 5e-6,
            "balance residual {}",
            (e1 - e0) - supplied
        );
        assert!(flows.dissipated_bearing >= 0.0 && flows.dissipated_damping >= 0.0);
    }

    #[test]
    fn lateral_lock_pins_the_body_x_coordinate() {
        let design = RobotDesign::default();
        let state = FullState {
            body: BodyState {
                x: 0.0,
                z: 0.4,
                vx: 0.0,
                vz: 0.0,
            },
            legs: [
                LegState {
                    alpha1: 40.0f64.to_radians(),
                    alpha2: 70.0f64.to_radians(),
                    rate1: 1.0,
                    rate2: -0.5,
                },
                LegState::resting(30.0f64.to_radians()),
            ],
        };
        let input = DynamicsInput {
            torques: [3.0, -2.0, 1.0, 0.5],
            gravity: 9.81,
            contact: Some(ContactModel::default()),
            lock_lateral: true,
        };
        let out = dynamics_derivative(&state, &design, &input).unwrap();
        assert_eq!(out.acceleration[0], 0.0);
        let free = DynamicsInput {
            lock_lateral: false,
            ..input
        };
        let out_free = dynamics_derivative(&state, &design, &free).unwrap();
        assert!(out_free.acceleration[0].abs() > 1e-6, "asymmetric pose should shake x");
    }
}
