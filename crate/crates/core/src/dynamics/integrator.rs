//! Embedded Dormand-Prince 5(4) integrator with PI step-size control, a
//! continuous (dense) output interpolant, and bisection-based zero finding
//! for hybrid events.

#[allow(unused_imports)]
use crate::math::*;

use crate::kinematics::KinematicsError;
use alloc::vec;
use alloc::vec::Vec;

/// Relative/absolute error tolerances for adaptive stepping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-6,
            abs: 1e-8,
        }
    }
}

impl Tolerances {
    /// Both tolerances halved; used for convergence checks.
    pub fn halved(self) -> Self {
        Self {
            rel: 0.5 * self.rel,
            abs: 0.5 * self.abs,
        }
    }
}

/// Counters accumulated over one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub derivative_evals: u64,
}

impl IntegratorStats {
    pub fn absorb(&mut self, other: IntegratorStats) {
        self.steps_accepted += other.steps_accepted;
        self.steps_rejected += other.steps_rejected;
        self.derivative_evals += other.derivative_evals;
    }
}

/// Integration failures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntegrationError {
    /// Error control drove the step below the representable floor —
    /// typically a stiffness blowup or an unresolvable discontinuity.
    StepSizeUnderflow { t: f64 },
    /// The state or its derivative stopped being finite.
    NonFiniteState { t: f64 },
    /// The leg mechanism left its reachable set or hit a singularity.
    Kinematics(KinematicsError),
}

impl From<KinematicsError> for IntegrationError {
    fn from(e: KinematicsError) -> Self {
        Self::Kinematics(e)
    }
}

impl core::fmt::Display for IntegrationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::StepSizeUnderflow { t } => {
                write!(f, "step size underflow at t = {t} s")
            }
            Self::NonFiniteState { t } => write!(f, "non-finite state at t = {t} s"),
            Self::Kinematics(e) => write!(f, "kinematics failure during integration: {e}"),
        }
    }
}

impl core::error::Error for IntegrationError {}

/// A first-order ODE system `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn eval(&mut self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), IntegrationError>;
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order solution weights (also row 7 of A: first-same-as-last).
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// Error weights: difference between the 5th- and 4th-order solutions.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output quartic correction weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Outcome of one trial step: accepted with its scaled error, or rejected
/// (with the error when it was finite, `None` on non-finite/kinematic
/// breakdown).
enum StepAttempt {
    Accept(f64),
    Reject(Option<f64>),
}
/// PI controller exponents: alpha on the fresh error, beta on the previous.
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - PI_BETA * 0.75;

/// Adaptive Dormand-Prince 5(4) stepper owning its system.
///
/// Call [`Dp45::step`] repeatedly; after each accepted step the span is
/// available from [`Dp45::last_span`] and any interior state from
/// [`Dp45::dense_eval`]. Mutating the system through [`Dp45::system_mut`]
/// (e.g. new control torques) requires [`Dp45::invalidate_first_stage`] so
/// the cached first stage is recomputed.
pub struct Dp45<S: OdeSystem> {
    sys: S,
    t: f64,
    y: Vec<f64>,
    h_next: f64,
    fac_old: f64,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    rcont: [Vec<f64>; 5],
    seg_t0: f64,
    seg_h: f64,
    fsal_valid: bool,
    tol: Tolerances,
    stats: IntegratorStats,
}

impl<S: OdeSystem> Dp45<S> {
    pub fn new(sys: S, t0: f64, y0: &[f64], tol: Tolerances) -> Self {
        let n = sys.dim();
        assert_eq!(y0.len(), n, "state length must match system dimension");
        Self {
            sys,
            t: t0,
            y: y0.to_vec(),
            h_next: 0.0,
            fac_old: 1e-4,
            k: core::array::from_fn(|_| vec![0.0; n]),
            y_stage: vec![0.0; n],
            rcont: core::array::from_fn(|_| vec![0.0; n]),
            seg_t0: t0,
            seg_h: 0.0,
            fsal_valid: false,
            tol,
            stats: IntegratorStats::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn stats(&self) -> IntegratorStats {
        self.stats
    }

    pub fn system(&self) -> &S {
        &self.sys
    }

    pub fn system_mut(&mut self) -> &mut S {
        &mut self.sys
    }

    /// Drops the cached first stage (first-same-as-last reuse). Required
    /// after any change to the system's right-hand side, e.g. a control tick.
    pub fn invalidate_first_stage(&mut self) {
        self.fsal_valid = false;
    }

    /// Overwrites the current state, e.g. to restart after an event cut.
    pub fn reset_state(&mut self, t: f64, y: &[f64]) {
        assert_eq!(y.len(), self.y.len());
        self.t = t;
        self.y.copy_from_slice(y);
        self.fsal_valid = false;
        self.seg_t0 = t;
        self.seg_h = 0.0;
    }

    /// Start and end time of the last accepted step.
    pub fn last_span(&self) -> (f64, f64) {
        (self.seg_t0, self.seg_t0 + self.seg_h)
    }

    /// Interpolates the solution inside the last accepted step. `t` is
    /// clamped to the span.
    pub fn dense_eval(&self, t: f64, out: &mut [f64]) {
        if self.seg_h == 0.0 {
            // No accepted step since construction/reset.
            out.copy_from_slice(&self.y);
            return;
        }
        let theta = ((t - self.seg_t0) / self.seg_h).clamp(0.0, 1.0);
        let one_m = 1.0 - theta;
        for i in 0..out.len() {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + one_m
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + one_m * self.rcont[4][i])));
        }
    }

    /// Advances one accepted step, never past `t_limit`. Returns `false`
    /// when already at the limit.
    pub fn step(&mut self, t_limit: f64) -> Result<bool, IntegrationError> {
        let span = t_limit - self.t;
        if span <= 0.0 {
            return Ok(false);
        }
        if self.h_next <= 0.0 {
            self.h_next = (1e-4f64).min(span);
        }

        if !self.fsal_valid {
            let (t, y) = (self.t, &self.y);
            // Split borrows: k[0] and sys.
            let k0 = &mut self.k[0];
            self.sys.eval(t, y, k0)?;
            self.stats.derivative_evals += 1;
            self.fsal_valid = true;
        }

        loop {
            let h = self.h_next.min(span);
            let floor = 1e-13 * self.t.abs().max(1.0);
            if h < floor {
                return Err(IntegrationError::StepSizeUnderflow { t: self.t });
            }

            match self.attempt(h)? {
                StepAttempt::Accept(err) => {
                    // Accepted: PI growth from this and the previous error.
                    let err_cl = err.max(1e-10);
                    let growth = (SAFETY * err_cl.powf(-PI_ALPHA) * self.fac_old.powf(PI_BETA))
                        .clamp(MIN_FACTOR, MAX_FACTOR);
                    self.fac_old = err_cl.max(1e-4);
                    self.seg_t0 = self.t;
                    self.seg_h = h;
                    self.t += h;
                    core::mem::swap(&mut self.y, &mut self.y_stage);
                    // First-same-as-last: stage 7 is the next first stage.
                    self.k.swap(0, 6);
                    self.stats.steps_accepted += 1;
                    self.h_next = h * growth;
                    self.build_dense(h);
                    return Ok(true);
                }
                StepAttempt::Reject(err) => {
                    self.stats.steps_rejected += 1;
                    let shrink = match err {
                        // Plain accuracy failure: back off proportionally.
                        Some(e) => (SAFETY * e.powf(-0.2)).clamp(MIN_FACTOR, 0.9),
                        // Non-finite result or kinematic breakdown inside the
                        // step: retreat hard to find the usable region.
                        None => MIN_FACTOR,
                    };
                    self.h_next = h * shrink;
                    continue;
                }
            }
        }
    }

    /// Tries one step of size `h` from the current state. On acceptance the
    /// candidate state is left in `y_stage` and stage 7 in `k[6]`.
    fn attempt(&mut self, h: f64) -> Result<StepAttempt, IntegrationError> {
        let n = self.y.len();
        let a_rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];

        for (stage, a_row) in a_rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in a_row.iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.y_stage[i] = self.y[i] + h * acc;
            }
            let t_stage = self.t + C[stage + 1] * h;
            let (sys, ks, ys) = (&mut self.sys, &mut self.k[stage + 1], &self.y_stage);
            if sys.eval(t_stage, ys, ks).is_err() {
                return Ok(StepAttempt::Reject(None));
            }
            self.stats.derivative_evals += 1;
        }

        // Fifth-order candidate (row B), then the trailing stage at t + h.
        for i in 0..n {
            let mut acc = 0.0;
            for (j, b) in B.iter().enumerate() {
                acc += b * self.k[j][i];
            }
            self.y_stage[i] = self.y[i] + h * acc;
        }
        {
            let t_end = self.t + h;
            let (sys, ks, ys) = (&mut self.sys, &mut self.k[6], &self.y_stage);
            if sys.eval(t_end, ys, ks).is_err() {
                return Ok(StepAttempt::Reject(None));
            }
            self.stats.derivative_evals += 1;
        }

        let mut err_sq = 0.0;
        for i in 0..n {
            if !self.y_stage[i].is_finite() {
                return Ok(StepAttempt::Reject(None));
            }
            let mut e = 0.0;
            for (j, w) in E.iter().enumerate() {
                e += w * self.k[j][i];
            }
            let scale = self.tol.abs + self.tol.rel * self.y[i].abs().max(self.y_stage[i].abs());
            let r = h * e / scale;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();
        if !err.is_finite() {
            return Ok(StepAttempt::Reject(None));
        }
        Ok(if err <= 1.0 {
            StepAttempt::Accept(err)
        } else {
            StepAttempt::Reject(Some(err))
        })
    }

    fn build_dense(&mut self, h: f64) {
        // Called after the acceptance swaps: self.y is the new state,
        // y_stage the old one; k[0] holds stage 7 and k[6] the old stage 1.
        let n = self.y.len();
        for i in 0..n {
            let y_old = self.y_stage[i];
            let y_new = self.y[i];
            let ydiff = y_new - y_old;
            let bspl = h * self.k[6][i] - ydiff;
            self.rcont[0][i] = y_old;
            self.rcont[1][i] = ydiff;
            self.rcont[2][i] = bspl;
            self.rcont[3][i] = ydiff - h * self.k[0][i] - bspl;
            let mut acc = D[0] * self.k[6][i] + D[6] * self.k[0][i];
            for j in 1..6 {
                acc += D[j] * self.k[j][i];
            }
            self.rcont[4][i] = h * acc;
        }
    }

    /// Locates a falling zero crossing of `g` inside `(t_lo, t_hi]` within
    /// the last accepted step, to `t_tol` seconds, by bisection on the dense
    /// interpolant. Requires `g(t_lo) > 0 >= g(t_hi)`.
    pub fn locate_falling_zero<G>(
        &self,
        mut g: G,
        t_lo: f64,
        t_hi: f64,
        t_tol: f64,
    ) -> Result<f64, IntegrationError>
    where
        G: FnMut(f64, &[f64]) -> Result<f64, IntegrationError>,
    {
        let mut scratch = vec![0.0; self.y.len()];
        let (mut lo, mut hi) = (t_lo, t_hi);
        for _ in 0..128 {
            if hi - lo <= t_tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            self.dense_eval(mid, &mut scratch);
            if g(mid, &scratch)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// y' = -y, analytic solution e^{-t}.
    struct Decay;
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&mut self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), IntegrationError> {
            dydt[0] = -y[0];
            Ok(())
        }
    }

    /// Harmonic oscillator, unit frequency: (q, p)' = (p, -q).
    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&mut self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), IntegrationError> {
            dydt[0] = y[1];
            dydt[1] = -y[0];
            Ok(())
        }
    }

    /// Free fall: (z, vz)' = (vz, -g).
    struct Ballistic {
        g: f64,
    }
    impl OdeSystem for Ballistic {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&mut self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), IntegrationError> {
            dydt[0] = y[1];
            dydt[1] = -self.g;
            Ok(())
        }
    }

    fn run_to<S: OdeSystem>(dp: &mut Dp45<S>, t_end: f64) {
        while dp.step(t_end).unwrap() {}
    }

    #[test]
    fn matches_exponential_decay() {
        let mut dp = Dp45::new(Decay, 0.0, &[1.0], Tolerances::default());
        run_to(&mut dp, 5.0);
        assert!((dp.t() - 5.0).abs() < 1e-14);
        assert!((dp.y()[0] - (-5.0f64).exp()).abs() < 1e-6);
        assert!(dp.stats().steps_accepted > 10);
    }

    #[test]
    fn halved_tolerances_reduce_error() {
        let err_at = |tol: Tolerances| {
            let mut dp = Dp45::new(Oscillator, 0.0, &[1.0, 0.0], tol);
            run_to(&mut dp, 20.0);
            let e = 0.5 * (dp.y()[0] * dp.y()[0] + dp.y()[1] * dp.y()[1]);
            (e - 0.5).abs()
        };
        let coarse = err_at(Tolerances {
            rel: 1e-4,
            abs: 1e-6,
        });
        let fine = err_at(Tolerances {
            rel: 1e-4,
            abs: 1e-6,
        }
        .halved()
        .halved());
        assert!(fine < coarse, "fine {fine} vs coarse {coarse}");
    }

    #[test]
    fn dense_output_matches_interior_solution() {
        let mut dp = Dp45::new(Decay, 0.0, &[1.0], Tolerances::default());
        let mut out = [0.0];
        while dp.step(2.0).unwrap() {
            let (a, b) = dp.last_span();
            let mid = 0.5 * (a + b);
            dp.dense_eval(mid, &mut out);
            assert!((out[0] - (-mid).exp()).abs() < 1e-7, "at t = {mid}");
        }
    }

    #[test]
    fn ballistic_apex_event_is_located_to_nanoseconds() {
        // Apex of v0 = 4.43 m/s under g = 9.81: t* = v0/g, gain = v0^2/(2g).
        let (v0, g) = (4.43, 9.81);
        let mut dp = Dp45::new(Ballistic { g }, 0.0, &[0.0, v0], Tolerances::default());
        let t_star = v0 / g;
        let mut apex = None;
        while dp.step(2.0).unwrap() {
            let (a, b) = dp.last_span();
            let mut y = [0.0; 2];
            dp.dense_eval(a, &mut y);
            let va = y[1];
            dp.dense_eval(b, &mut y);
            let vb = y[1];
            if va > 0.0 && vb <= 0.0 {
                let t = dp
                    .locate_falling_zero(|_, y| Ok(y[1]), a, b, 1e-9)
                    .unwrap();
                dp.dense_eval(t, &mut y);
                apex = Some((t, y[0]));
                break;
            }
        }
        let (t_apex, z_apex) = apex.expect("apex crossing found");
        assert!((t_apex - t_star).abs() < 1e-9, "t {t_apex} vs {t_star}");
        assert!((z_apex - v0 * v0 / (2.0 * g)).abs() < 1e-9);
    }

    #[test]
    fn underflow_is_reported_not_looped() {
        /// Derivative that always fails: forces endless rejection.
        struct Poison;
        impl OdeSystem for Poison {
            fn dim(&self) -> usize {
                1
            }
            fn eval(
                &mut self,
                t: f64,
                _y: &[f64],
                dydt: &mut [f64],
            ) -> Result<(), IntegrationError> {
                if t > 0.0 {
                    dydt[0] = f64::NAN;
                } else {
                    dydt[0] = 1.0;
                }
                Ok(())
            }
        }
        let mut dp = Dp45::new(Poison, 0.0, &[0.0], Tolerances::default());
        let mut result = Ok(true);
        for _ in 0..10_000 {
            result = dp.step(1.0);
            if result.is_err() {
                break;
            }
        }
        assert!(matches!(
            result,
            Err(IntegrationError::StepSizeUnderflow { .. })
        ));
    }

    #[test]
    fn control_tick_boundaries_are_hit_exactly() {
        let mut dp = Dp45::new(Decay, 0.0, &[1.0], Tolerances::default());
        for tick in 1..=50 {
            let t_end = tick as f64 * 0.002;
            run_to(&mut dp, t_end);
            assert_eq!(dp.t(), t_end);
            dp.invalidate_first_stage();
        }
    }
}
