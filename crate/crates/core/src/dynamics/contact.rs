//! Penalty ground contact at the paws: spring-damper normal force with a
//! regularized Coulomb friction cap.

#[allow(unused_imports)]
use crate::math::*;

/// Kelvin-Voigt penalty ground parameters, per paw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactModel {
    /// Ground stiffness (N/m).
    pub stiffness: f64,
    /// Ground damping (N s/m).
    pub damping: f64,
    /// Coulomb friction coefficient.
    pub friction: f64,
    /// Tangential velocity (m/s) at which friction saturates; regularizes
    /// the Coulomb law near sticking.
    pub slip_velocity: f64,
}

impl Default for ContactModel {
    fn default() -> Self {
        Self {
            stiffness: 5.0e4,
            damping: 500.0,
            friction: 0.8,
            slip_velocity: 0.01,
        }
    }
}

impl ContactModel {
    /// Unclamped normal force (N) while penetrated; may be negative when the
    /// paw separates fast. Zero at or above ground. Used as the liftoff
    /// event function, which crosses zero before the clamped force does.
    pub fn raw_normal(&self, paw_height: f64, paw_velocity_z: f64) -> f64 {
        if paw_height >= 0.0 {
            0.0
        } else {
            -self.stiffness * paw_height - self.damping * paw_velocity_z
        }
    }
}

/// Ground reaction on one paw: `(normal, tangential)` in N.
///
/// Normal force is a one-sided spring-damper, never adhesive. Tangential
/// force opposes slip, ramping linearly inside `slip_velocity` and capped at
/// `friction * normal` outside it.
pub fn contact_force(
    paw_height: f64,
    paw_velocity: (f64, f64),
    model: &ContactModel,
) -> (f64, f64) {
    let (vx, vz) = paw_velocity;
    let normal = model.raw_normal(paw_height, vz).max(0.0);
    if normal == 0.0 {
        return (0.0, 0.0);
    }
    let slip = (vx / model.slip_velocity).clamp(-1.0, 1.0);
    (normal, -model.friction * normal * slip)
}
