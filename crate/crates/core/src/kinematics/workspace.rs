//! Reachable-workspace sweeps: planar sampling of the motor ranges plus
//! revolution about the hip abduction axis.

#[allow(unused_imports)]
use crate::math::*;

use super::{control_to_kinematic, Branch, ControlAngles, JointConfiguration, LegGeometry};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Motor-1 encoder reading to control angle.
///
/// The hardware motor limits are encoder intervals with unpublished zero
/// offsets. Assumed alignment: motor 1 reads the negated control angle
/// (`m1 = -alpha1`, so the protocol's squat shows -120 deg) and motor 2 reads
/// `alpha2 + 180 deg`. Under this map the published limits
/// ([-157, 160] and [20, 337] degrees) place both hips on the identical
/// control interval [-160, 157] degrees.
pub fn motor1_to_alpha(m1: f64) -> f64 {
    -m1
}

/// Motor-2 encoder reading to control angle; see [`motor1_to_alpha`].
pub fn motor2_to_alpha(m2: f64) -> f64 {
    m2 - PI
}

/// Options for [`workspace_sweep`].
#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    /// Grid pitch over the two motor ranges (radians).
    pub planar_increment: f64,
    /// Keep only samples on the discrete perimeter of the feasible region
    /// (a feasible grid cell with an infeasible or out-of-range 4-neighbor).
    pub boundary_only: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            planar_increment: 1f64.to_radians(),
            boundary_only: false,
        }
    }
}

/// One reachable paw sample: generating motor angles, hip rotation, and the
/// 3D position in the leg frame (x along the baseline, z up, y completing
/// the right-handed set).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudPoint {
    pub motor1: f64,
    pub motor2: f64,
    pub hip: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Raw point cloud from a workspace sweep.
#[derive(Clone, Debug)]
pub struct WorkspaceCloud {
    pub points: Vec<CloudPoint>,
    pub motor1_range: (f64, f64),
    pub motor2_range: (f64, f64),
    pub hip_range: (f64, f64),
    pub hip_increment: f64,
}

/// Sweeps the paw workspace: samples the motor-1/motor-2 ranges on a uniform
/// grid, solves the closure at each sample (non-closing samples are skipped,
/// not errors), then revolves the planar set about the baseline axis through
/// the hip range in `hip_increment` steps.
///
/// All angles are radians; motor ranges are encoder intervals interpreted via
/// [`motor1_to_alpha`]/[`motor2_to_alpha`].
pub fn workspace_sweep(
    motor1_range: (f64, f64),
    motor2_range: (f64, f64),
    hip_range: (f64, f64),
    hip_increment: f64,
    geom: &LegGeometry,
    options: SweepOptions,
) -> WorkspaceCloud {
    let planar = planar_samples(motor1_range, motor2_range, geom, options);

    let mut points = Vec::new();
    for hip in range_samples(hip_range, hip_increment) {
        let (sin_h, cos_h) = hip.sin_cos();
        for &(m1, m2, x, z) in &planar {
            points.push(CloudPoint {
                motor1: m1,
                motor2: m2,
                hip,
                x,
                y: -z * sin_h,
                z: z * cos_h,
            });
        }
    }

    WorkspaceCloud {
        points,
        motor1_range,
        motor2_range,
        hip_range,
        hip_increment,
    }
}

/// Planar feasible samples as `(motor1, motor2, x_p, z_p)`.
fn planar_samples(
    motor1_range: (f64, f64),
    motor2_range: (f64, f64),
    geom: &LegGeometry,
    options: SweepOptions,
) -> Vec<(f64, f64, f64, f64)> {
    let m1s = range_samples(motor1_range, options.planar_increment);
    let m2s = range_samples(motor2_range, options.planar_increment);
    let n2 = m2s.len();

    let mut paws: Vec<Option<(f64, f64)>> = Vec::with_capacity(m1s.len() * n2);
    for &m1 in &m1s {
        for &m2 in &m2s {
            let angles = ControlAngles::new(motor1_to_alpha(m1), motor2_to_alpha(m2));
            let k = control_to_kinematic(angles);
            let paw = JointConfiguration::solve(k.theta1, k.theta2, geom, Branch::Minus)
                .ok()
                .map(|config| {
                    let p = super::paw_position(&config, geom);
                    (p.x, p.z)
                });
            paws.push(paw);
        }
    }

    let feasible_at = |i: isize, j: isize| -> bool {
        if i < 0 || j < 0 || i as usize >= m1s.len() || j as usize >= n2 {
            return false;
        }
        paws[i as usize * n2 + j as usize].is_some()
    };

    let mut samples = Vec::new();
    for (i, &m1) in m1s.iter().enumerate() {
        for (j, &m2) in m2s.iter().enumerate() {
            let Some((x, z)) = paws[i * n2 + j] else {
                continue;
            };
            if options.boundary_only {
                let (i, j) = (i as isize, j as isize);
                let interior = feasible_at(i - 1, j)
                    && feasible_at(i + 1, j)
                    && feasible_at(i, j - 1)
                    && feasible_at(i, j + 1);
                if interior {
                    continue;
                }
            }
            samples.push((m1, m2, x, z));
        }
    }
    samples
}

/// Inclusive uniform samples of `[range.0, range.1]`; degenerate ranges yield
/// the single start point.
fn range_samples(range: (f64, f64), step: f64) -> Vec<f64> {
    let (start, end) = range;
    let mut out = Vec::new();
    if !(step > 0.0) || end < start {
        out.push(start);
        return out;
    }
    let span = end - start;
    let count = (span / step + 1e-9).floor() as usize;
    for i in 0..=count {
        out.push(start + i as f64 * step);
    }
    // Keep the far limit even when the step does not divide the span.
    if let Some(&last) = out.last() {
        if end - last > 1e-9 * step.max(1.0) {
            out.push(end);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::paw_position;

    fn paper_limits() -> ((f64, f64), (f64, f64), (f64, f64)) {
        (
            (-157f64.to_radians(), 160f64.to_radians()),
            (20f64.to_radians(), 337f64.to_radians()),
            (-70f64.to_radians(), 180f64.to_radians()),
        )
    }

    #[test]
    fn alignment_covers_protocol_poses() {
        // Squat (alpha = 120 deg) and stand (17.5 deg) must sit inside the
        // published motor limits under the assumed alignment.
        let ((m1_lo, m1_hi), (m2_lo, m2_hi), _) = paper_limits();
        for alpha_deg in [17.5, 120.0] {
            let alpha = (alpha_deg as f64).to_radians();
            let m1 = -alpha;
            let m2 = alpha + PI;
            assert!(m1 >= m1_lo && m1 <= m1_hi, "motor1 at {alpha_deg}");
            assert!(m2 >= m2_lo && m2 <= m2_hi, "motor2 at {alpha_deg}");
        }
    }

    #[test]
    fn zero_width_hip_range_gives_planar_cloud() {
        let geom = LegGeometry::default();
        let (m1, m2, _) = paper_limits();
        let cloud = workspace_sweep(
            m1,
            m2,
            (0.0, 0.0),
            2.5f64.to_radians(),
            &geom,
            SweepOptions {
                planar_increment: 10f64.to_radians(),
                boundary_only: false,
            },
        );
        assert!(!cloud.points.is_empty());
        for p in &cloud.points {
            assert_eq!(p.y, 0.0);
            assert_eq!(p.hip, 0.0);
        }
    }

    #[test]
    fn cloud_contains_squat_and_stand_paw_points() {
        let geom = LegGeometry::default();
        let (m1, m2, _) = paper_limits();
        // Hip range chosen to sample hip = 0 exactly, so the planar slice
        // can be compared against direct closure solutions.
        let cloud = workspace_sweep(
            m1,
            m2,
            (0.0, 180f64.to_radians()),
            45f64.to_radians(),
            &geom,
            SweepOptions {
                planar_increment: 2.5f64.to_radians(),
                boundary_only: false,
            },
        );
        // Adjacent samples move the paw by at most (l1+l3)*step ~ 2.1 cm.
        let tol = 0.025;
        for alpha_deg in [120.0, 17.5] {
            let config = JointConfiguration::from_control(
                ControlAngles::symmetric((alpha_deg as f64).to_radians()),
                &geom,
                Branch::Minus,
            )
            .unwrap();
            let target = paw_position(&config, &geom);
            let nearest = cloud
                .points
                .iter()
                .filter(|p| p.hip == 0.0)
                .map(|p| {
                    let dx = p.x - target.x;
                    let dz = p.z - target.z;
                    (dx * dx + dz * dz).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < tol, "alpha {alpha_deg}: nearest {nearest}");
        }
    }

    #[test]
    fn cloud_points_revalidate_through_closure() {
        let geom = LegGeometry::default();
        let (m1, m2, _) = paper_limits();
        let cloud = workspace_sweep(
            m1,
            m2,
            (0.0, 0.0),
            2.5f64.to_radians(),
            &geom,
            SweepOptions {
                planar_increment: 15f64.to_radians(),
                boundary_only: false,
            },
        );
        for p in &cloud.points {
            let angles =
                ControlAngles::new(motor1_to_alpha(p.motor1), motor2_to_alpha(p.motor2));
            let config = JointConfiguration::from_control(angles, &geom, Branch::Minus)
                .expect("stored point must re-solve");
            assert!(config.closure_residual(&geom) < 1e-9);
            let paw = paw_position(&config, &geom);
            assert!((paw.x - p.x).abs() < 1e-12);
            assert!((paw.z - p.z).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_extraction_shrinks_the_cloud() {
        let geom = LegGeometry::default();
        let (m1, m2, _) = paper_limits();
        let planar = |boundary_only| {
            workspace_sweep(
                m1,
                m2,
                (0.0, 0.0),
                1.0,
                &geom,
                SweepOptions {
                    planar_increment: 5f64.to_radians(),
                    boundary_only,
                },
            )
            .points
            .len()
        };
        let full = planar(false);
        let boundary = planar(true);
        assert!(boundary > 0);
        assert!(boundary < full, "boundary {boundary} full {full}");
    }

    #[test]
    fn hip_rotation_preserves_radius() {
        let geom = LegGeometry::default();
        let (m1, m2, hip) = paper_limits();
        let cloud = workspace_sweep(
            m1,
            m2,
            hip,
            60f64.to_radians(),
            &geom,
            SweepOptions {
                planar_increment: 20f64.to_radians(),
                boundary_only: false,
            },
        );
        for p in &cloud.points {
            let radius = (p.y * p.y + p.z * p.z).sqrt();
            let angles =
                ControlAngles::new(motor1_to_alpha(p.motor1), motor2_to_alpha(p.motor2));
            let config =
                JointConfiguration::from_control(angles, &geom, Branch::Minus).unwrap();
            let planar = paw_position(&config, &geom);
            assert!((radius - planar.z.abs()).abs() < 1e-12);
        }
    }
}
