//! Planar simulator and design-search core for a spring-assisted five-bar jumping leg.
//!
//! The crate is organized around four layers:
//!
//! * [`kinematics`]: closed-chain solve of the diamond five-bar, paw position,
//!   Jacobians, and reachable-workspace sweeps.
//! * [`actuation`]: knee-to-knee extension spring, motor/PID models, and static
//!   hold torques.
//! * [`dynamics`]: minimal-coordinate Lagrangian jump dynamics with penalty
//!   ground contact, an embedded RK4(5) integrator with event localization,
//!   and the squat-and-jump protocol.
//! * [`optimizer`]: grid search over link lengths and spring stiffness with a
//!   static feasibility screen and robust design selection.
//!
//! Angle conventions: `theta` angles live in the baseline frame (motor 1 at the
//! origin, motor 2 at `(l0, 0)`, angles measured from the +x axis). `alpha`
//! control angles measure each hip link's deviation from straight down,
//! positive spreading the knees outward; the two frames are related by the
//! exact affine maps in [`kinematics::control_to_kinematic`].
//!
//! The crate is `no_std`-compatible: build with
//! `--no-default-features --features libm` to drop the standard library
//! (`alloc` is still required).

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod actuation;
pub mod dynamics;
pub mod kinematics;
pub mod linalg;
pub(crate) mod math;
pub mod optimizer;

/// Standard gravitational acceleration used for Earth scenarios (m/s^2).
pub const EARTH_GRAVITY: f64 = 9.81;
/// Mars surface gravity used for low-gravity scenarios (m/s^2).
pub const MARS_GRAVITY: f64 = 3.71;
