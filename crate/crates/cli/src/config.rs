//! Robot and scenario configuration: a single TOML file with units embedded
//! in every key name, validated exhaustively at load time.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use springhop_core::actuation::{series_equivalent, MotorConfig, PidGains, SpringConfig};
use springhop_core::dynamics::{
    ContactModel, JumpScenario, MassModel, ProtocolTimings, RobotDesign, SpringInterpretation,
};
use springhop_core::kinematics::LegGeometry;
use springhop_core::{EARTH_GRAVITY, MARS_GRAVITY};

/// Errors from configuration loading, split so the CLI can map them to the
/// config exit code while naming the exact failure.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// The file could not be read or is not valid TOML for the schema.
    #[error("config parse: {0}")]
    ConfigParse(String),
    /// The file parsed but violates a documented invariant; the message
    /// names the invariant and the offending field.
    #[error("config invariant: {0}")]
    ConfigInvariant(String),
}

fn invariant(msg: impl fmt::Display) -> ConfigError {
    ConfigError::ConfigInvariant(msg.to_string())
}

/// Serialized form of the config file. Field names carry their units
/// (`_m`, `_kg`, `_Nm`, `_N_m`, `_deg`, ...); see `configs/paper_biped.toml`
/// for the annotated reference file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub geometry: GeometrySection,
    pub masses: MassSection,
    pub spring: SpringSection,
    pub motor: MotorSection,
    #[serde(default)]
    pub control: ControlSection,
    #[serde(default)]
    pub contact: ContactSection,
    #[serde(default)]
    pub friction: FrictionSection,
    #[serde(default)]
    pub scenario: Vec<ScenarioSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub l0_m: f64,
    pub l1_m: f64,
    pub l2_m: f64,
    pub l3_m: f64,
    pub l4_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSection {
    pub electronics_kg: f64,
    pub leg_kg: f64,
    pub hip_axis_frac: f64,
    pub hip_link_frac: f64,
    pub calf_link_frac: f64,
}

/// Exactly one of `stiffness_N_m` (simulation-frame equivalent) or
/// `physical_stiffness_N_m` (per-leg hardware spring; halved by the series
/// cord arrangement) must be present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // unit suffixes are part of the file format
pub struct SpringSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stiffness_N_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical_stiffness_N_m: Option<f64>,
    pub natural_length_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // unit suffixes are part of the file format
pub struct MotorSection {
    pub max_torque_Nm: f64,
    pub gear_ratio: f64,
    pub viscous_damping_Nms: f64,
    pub reflected_inertia_kgm2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // unit suffixes are part of the file format
pub struct ControlSection {
    pub kp_Nm_rad: f64,
    pub ki_Nm_rads: f64,
    pub kd_Nms_rad: f64,
    pub integral_limit_Nm: f64,
    pub rate_Hz: f64,
}

impl Default for ControlSection {
    fn default() -> Self {
        let g = PidGains::default();
        ControlSection {
            kp_Nm_rad: g.kp,
            ki_Nm_rads: g.ki,
            kd_Nms_rad: g.kd,
            integral_limit_Nm: g.integral_limit,
            rate_Hz: g.control_rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // unit suffixes are part of the file format
pub struct ContactSection {
    pub stiffness_N_m: f64,
    pub damping_Ns_m: f64,
    pub friction: f64,
    pub slip_velocity_m_s: f64,
}

impl Default for ContactSection {
    fn default() -> Self {
        let c = ContactModel::default();
        ContactSection {
            stiffness_N_m: c.stiffness,
            damping_Ns_m: c.damping,
            friction: c.friction,
            slip_velocity_m_s: c.slip_velocity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // unit suffixes are part of the file format
pub struct FrictionSection {
    pub joint_friction_Nms: f64,
}

impl Default for FrictionSection {
    fn default() -> Self {
        FrictionSection {
            joint_friction_Nms: RobotDesign::default().joint_friction,
        }
    }
}

/// One named jump scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // unit suffixes are part of the file format
pub struct ScenarioSection {
    pub name: String,
    /// "earth", "mars", or a number in m/s^2.
    pub gravity: toml::Value,
    pub torque_saturation_Nm: f64,
    pub squat_deg: f64,
    #[serde(default)]
    pub pitch_deg: f64,
    /// Lateral setpoint split during thrust (deg); an alternative forward
    /// mechanism, mutually exclusive with a nonzero pitch.
    #[serde(default)]
    pub thrust_offset_deg: f64,
    /// "equivalent" (default) or "physical".
    #[serde(default)]
    pub spring_interpretation: Option<String>,
}

/// Fully validated configuration: the robot build plus its named scenarios.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedConfig {
    pub design: RobotDesign,
    pub gains: PidGains,
    pub contact: ContactModel,
    pub scenarios: Vec<NamedScenario>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedScenario {
    pub name: String,
    pub scenario: JumpScenario,
}

/// Parses a gravity spelling: the two named bodies or a number in m/s^2.
pub fn parse_gravity(text: &str) -> Result<f64, ConfigError> {
    match text.to_ascii_lowercase().as_str() {
        "earth" => Ok(EARTH_GRAVITY),
        "mars" => Ok(MARS_GRAVITY),
        other => other.parse::<f64>().map_err(|_| {
            invariant(format!(
                "gravity must be \"earth\", \"mars\", or a number in m/s^2, got \"{other}\""
            ))
        }),
    }
}

fn gravity_from_value(value: &toml::Value) -> Result<f64, ConfigError> {
    match value {
        toml::Value::String(s) => parse_gravity(s),
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(invariant(format!(
            "scenario gravity must be \"earth\", \"mars\", or a number, got {other}"
        ))),
    }
}

fn require_positive(value: f64, field: &str) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invariant(format!("{field} must be positive, got {value}")))
    }
}

impl ConfigFile {
    /// Validates every documented invariant and produces the runtime types.
    pub fn validate(&self) -> Result<LoadedConfig, ConfigError> {
        let g = &self.geometry;
        for (v, f) in [
            (g.l0_m, "geometry.l0_m"),
            (g.l1_m, "geometry.l1_m"),
            (g.l2_m, "geometry.l2_m"),
            (g.l3_m, "geometry.l3_m"),
            (g.l4_m, "geometry.l4_m"),
        ] {
            require_positive(v, f)?;
        }
        if g.l1_m != g.l2_m {
            return Err(invariant(format!(
                "hip-link symmetry (l1 = l2) violated: geometry.l1_m = {} but geometry.l2_m = {}",
                g.l1_m, g.l2_m
            )));
        }
        if g.l3_m != g.l4_m {
            return Err(invariant(format!(
                "calf-link symmetry (l3 = l4) violated: geometry.l3_m = {} but geometry.l4_m = {}",
                g.l3_m, g.l4_m
            )));
        }
        let geometry = LegGeometry::new(g.l0_m, g.l1_m, g.l2_m, g.l3_m, g.l4_m)
            .map_err(|e| invariant(format!("geometry does not close standing: {e:?}")))?;

        let m = &self.masses;
        require_positive(m.electronics_kg, "masses.electronics_kg")?;
        require_positive(m.leg_kg, "masses.leg_kg")?;
        let masses = MassModel {
            electronics: m.electronics_kg,
            leg: m.leg_kg,
            hip_axis_frac: m.hip_axis_frac,
            hip_link_frac: m.hip_link_frac,
            calf_link_frac: m.calf_link_frac,
        };
        masses
            .validate()
            .map_err(|e| invariant(format!("masses: {e}")))?;

        let s = &self.spring;
        let stiffness = match (s.stiffness_N_m, s.physical_stiffness_N_m) {
            (Some(k), None) => k,
            (None, Some(k)) => series_equivalent(k),
            (Some(_), Some(_)) => {
                return Err(invariant(
                    "spring stiffness must be given exactly once: both spring.stiffness_N_m \
                     and spring.physical_stiffness_N_m are set",
                ))
            }
            (None, None) => {
                return Err(invariant(
                    "spring stiffness missing: set spring.stiffness_N_m (equivalent) or \
                     spring.physical_stiffness_N_m (per-leg hardware)",
                ))
            }
        };
        require_positive(stiffness, "spring stiffness")?;
        require_positive(s.natural_length_m, "spring.natural_length_m")?;
        let spring = SpringConfig {
            stiffness,
            natural_length: s.natural_length_m,
        };

        let mo = &self.motor;
        require_positive(mo.max_torque_Nm, "motor.max_torque_Nm")?;
        require_positive(mo.gear_ratio, "motor.gear_ratio")?;
        if !(mo.viscous_damping_Nms >= 0.0 && mo.reflected_inertia_kgm2 >= 0.0) {
            return Err(invariant(
                "motor.viscous_damping_Nms and motor.reflected_inertia_kgm2 must be nonnegative",
            ));
        }
        let motor = MotorConfig {
            max_torque: mo.max_torque_Nm,
            torque_saturation: mo.max_torque_Nm,
            gear_ratio: mo.gear_ratio,
            viscous_damping: mo.viscous_damping_Nms,
            reflected_inertia: mo.reflected_inertia_kgm2,
        };

        let c = &self.control;
        require_positive(c.rate_Hz, "control.rate_Hz")?;
        if !(c.kp_Nm_rad >= 0.0
            && c.ki_Nm_rads >= 0.0
            && c.kd_Nms_rad >= 0.0
            && c.integral_limit_Nm >= 0.0)
        {
            return Err(invariant("control gains must be nonnegative"));
        }
        let gains = PidGains {
            kp: c.kp_Nm_rad,
            ki: c.ki_Nm_rads,
            kd: c.kd_Nms_rad,
            integral_limit: c.integral_limit_Nm,
            control_rate: c.rate_Hz,
        };

        let ct = &self.contact;
        require_positive(ct.stiffness_N_m, "contact.stiffness_N_m")?;
        require_positive(ct.slip_velocity_m_s, "contact.slip_velocity_m_s")?;
        if !(ct.damping_Ns_m >= 0.0 && ct.friction >= 0.0) {
            return Err(invariant(
                "contact.damping_Ns_m and contact.friction must be nonnegative",
            ));
        }
        let contact = ContactModel {
            stiffness: ct.stiffness_N_m,
            damping: ct.damping_Ns_m,
            friction: ct.friction,
            slip_velocity: ct.slip_velocity_m_s,
        };

        if !(self.friction.joint_friction_Nms >= 0.0) {
            return Err(invariant("friction.joint_friction_Nms must be nonnegative"));
        }

        let design = RobotDesign {
            geometry,
            masses,
            spring,
            motor,
            joint_friction: self.friction.joint_friction_Nms,
        };

        let mut scenarios = Vec::with_capacity(self.scenario.len());
        let mut seen = std::collections::BTreeSet::new();
        for sc in &self.scenario {
            if sc.name.is_empty() {
                return Err(invariant("scenario.name must be nonempty"));
            }
            if !seen.insert(sc.name.clone()) {
                return Err(invariant(format!(
                    "scenario names must be unique, \"{}\" appears twice",
                    sc.name
                )));
            }
            scenarios.push(NamedScenario {
                name: sc.name.clone(),
                scenario: scenario_from_section(sc, &motor)?,
            });
        }

        Ok(LoadedConfig {
            design,
            gains,
            contact,
            scenarios,
        })
    }
}

fn scenario_from_section(
    sc: &ScenarioSection,
    motor: &MotorConfig,
) -> Result<JumpScenario, ConfigError> {
    let gravity = gravity_from_value(&sc.gravity)?;
    let stand_deg = ProtocolTimings::default().stand_angle.to_degrees();
    if !(sc.squat_deg > stand_deg && sc.squat_deg <= 120.0) {
        return Err(invariant(format!(
            "scenario \"{}\": squat_deg must lie in ({stand_deg:.1}, 120], got {}",
            sc.name, sc.squat_deg
        )));
    }
    if !(sc.torque_saturation_Nm > 0.0 && sc.torque_saturation_Nm <= motor.max_torque) {
        return Err(invariant(format!(
            "scenario \"{}\": torque_saturation_Nm must lie in (0, {}], got {}",
            sc.name, motor.max_torque, sc.torque_saturation_Nm
        )));
    }
    let interpretation = match sc.spring_interpretation.as_deref() {
        None | Some("equivalent") => SpringInterpretation::Equivalent,
        Some("physical") => SpringInterpretation::Physical,
        Some(other) => {
            return Err(invariant(format!(
                "scenario \"{}\": spring_interpretation must be \"equivalent\" or \
                 \"physical\", got \"{other}\"",
                sc.name
            )))
        }
    };
    let mut scenario = JumpScenario::vertical(
        gravity,
        sc.torque_saturation_Nm,
        sc.squat_deg.to_radians(),
    );
    scenario.pitch = sc.pitch_deg.to_radians();
    scenario.thrust_setpoint_offset = sc.thrust_offset_deg.to_radians();
    scenario.spring_interpretation = interpretation;
    scenario
        .validate(motor)
        .map_err(|e| invariant(format!("scenario \"{}\": {e}", sc.name)))?;
    Ok(scenario)
}

/// Loads a config file, returning both the raw schema (for re-serialization)
/// and the fully validated configuration.
pub fn load_config(path: &Path) -> Result<(ConfigFile, LoadedConfig), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::ConfigParse(format!("{}: {e}", path.display())))?;
    let file = parse_config_file(&text).map_err(|e| match e {
        ConfigError::ConfigParse(m) => {
            ConfigError::ConfigParse(format!("{}: {m}", path.display()))
        }
        other => other,
    })?;
    let cfg = file.validate()?;
    Ok((file, cfg))
}

/// Parses config text into the schema without validating invariants.
pub fn parse_config_file(text: &str) -> Result<ConfigFile, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::ConfigParse(e.to_string()))
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    parse_config_file(text)?.validate()
}

/// Serializes a config file structure back to TOML. `parse_config` of the
/// output reproduces the same validated configuration.
pub fn write_config(file: &ConfigFile) -> String {
    toml::to_string_pretty(file).expect("config serialization cannot fail")
}
