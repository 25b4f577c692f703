//! Shared domain types and unit conventions.
//!
//! Everything is SI internally: meters, seconds, radians, pascals.
//! Cohesion is converted to kPa only at I/O boundaries.

use crate::error::{Error, Result};

/// Physical constants of the vehicle platform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    pub mass_kg: f64,
    /// Wheel radius R.
    pub wheel_radius_m: f64,
    /// Wheel width b.
    pub wheel_width_m: f64,
    pub max_steer_rad: f64,
    pub gravity_mps2: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            mass_kg: 14.85,
            wheel_radius_m: 0.1,
            wheel_width_m: 0.07,
            max_steer_rad: 25.0_f64.to_radians(),
            gravity_mps2: 9.81,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("mass_kg", self.mass_kg),
            ("wheel_radius_m", self.wheel_radius_m),
            ("wheel_width_m", self.wheel_width_m),
            ("max_steer_rad", self.max_steer_rad),
            ("gravity_mps2", self.gravity_mps2),
        ];
        for (name, v) in pos {
            if v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.max_steer_rad > std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidParam(format!(
                "max_steer_rad must be <= pi/2, got {}",
                self.max_steer_rad
            )));
        }
        Ok(())
    }

    /// Normal load m*g carried by the lumped wheel model.
    pub fn weight_n(&self) -> f64 {
        self.mass_kg * self.gravity_mps2
    }
}

/// Ground description: either a hard surface characterized by a friction
/// coefficient, or a deformable layer characterized by sinkage, cohesion
/// and internal shear angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundModel {
    HardSurface {
        mu: f64,
    },
    Deformable {
        sinkage_m: f64,
        cohesion_pa: f64,
        shear_angle_rad: f64,
    },
}

impl GroundModel {
    pub fn hard(mu: f64) -> Self {
        GroundModel::HardSurface { mu }
    }

    pub fn deformable(sinkage_m: f64, cohesion_pa: f64, shear_angle_rad: f64) -> Self {
        GroundModel::Deformable {
            sinkage_m,
            cohesion_pa,
            shear_angle_rad,
        }
    }

    pub fn is_hard(&self) -> bool {
        matches!(self, GroundModel::HardSurface { .. })
    }

    pub fn validate(&self, wheel_radius_m: f64) -> Result<()> {
        match *self {
            GroundModel::HardSurface { mu } => {
                if !(mu > 0.0 && mu <= 2.0) {
                    return Err(Error::InvalidParam(format!(
                        "mu must be in (0, 2], got {mu}"
                    )));
                }
            }
            GroundModel::Deformable {
                sinkage_m,
                cohesion_pa,
                shear_angle_rad,
            } => {
                if !(sinkage_m > 0.0 && sinkage_m < wheel_radius_m) {
                    return Err(Error::InvalidParam(format!(
                        "sinkage_m must be in (0, R={wheel_radius_m}), got {sinkage_m}"
                    )));
                }
                if cohesion_pa.is_nan() || cohesion_pa < 0.0 {
                    return Err(Error::InvalidParam(format!(
                        "cohesion_pa must be >= 0, got {cohesion_pa}"
                    )));
                }
                if !(shear_angle_rad > 0.0 && shear_angle_rad < std::f64::consts::FRAC_PI_2) {
                    return Err(Error::InvalidParam(format!(
                        "shear_angle_rad must be in (0, pi/2), got {shear_angle_rad}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One timestamped sensor sample. LIDAR position fields are held between
/// fresh updates; `lidar_fresh` marks samples carrying a new fix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub t_s: f64,
    pub a_imu_mps2: f64,
    pub x_lidar_m: f64,
    pub y_lidar_m: f64,
    pub lidar_fresh: bool,
    pub omega_f_radps: f64,
    pub omega_r_radps: f64,
    pub torque_est_nm: f64,
}

impl SensorFrame {
    pub fn is_finite(&self) -> bool {
        self.t_s.is_finite()
            && self.a_imu_mps2.is_finite()
            && self.x_lidar_m.is_finite()
            && self.y_lidar_m.is_finite()
            && self.omega_f_radps.is_finite()
            && self.omega_r_radps.is_finite()
            && self.torque_est_nm.is_finite()
    }
}

/// An emergency situation: initial speed, ground, and distance to the
/// obstacle straight ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub v0_mps: f64,
    pub ground: GroundModel,
    pub obstacle_distance_m: f64,
}

impl Scenario {
    pub fn new(v0_mps: f64, ground: GroundModel) -> Self {
        Scenario {
            v0_mps,
            ground,
            obstacle_distance_m: 6.0,
        }
    }

    pub fn validate(&self, wheel_radius_m: f64) -> Result<()> {
        if self.v0_mps.is_nan() || self.v0_mps <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "v0_mps must be > 0, got {}",
                self.v0_mps
            )));
        }
        if self.obstacle_distance_m.is_nan() || self.obstacle_distance_m <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "obstacle_distance_m must be > 0, got {}",
                self.obstacle_distance_m
            )));
        }
        self.ground.validate(wheel_radius_m)
    }
}

/// The five discrete emergency maneuvers, ordinals 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ManeuverId {
    Brake100,
    BrakeAbs,
    Turn100,
    Turn100Brake100,
    Turn100BrakeAbs,
}

pub const ALL_MANEUVERS: [ManeuverId; 5] = [
    ManeuverId::Brake100,
    ManeuverId::BrakeAbs,
    ManeuverId::Turn100,
    ManeuverId::Turn100Brake100,
    ManeuverId::Turn100BrakeAbs,
];

impl ManeuverId {
    pub fn ordinal(&self) -> u8 {
        match self {
            ManeuverId::Brake100 => 1,
            ManeuverId::BrakeAbs => 2,
            ManeuverId::Turn100 => 3,
            ManeuverId::Turn100Brake100 => 4,
            ManeuverId::Turn100BrakeAbs => 5,
        }
    }

    pub fn from_ordinal(ord: u8) -> Result<Self> {
        match ord {
            1 => Ok(ManeuverId::Brake100),
            2 => Ok(ManeuverId::BrakeAbs),
            3 => Ok(ManeuverId::Turn100),
            4 => Ok(ManeuverId::Turn100Brake100),
            5 => Ok(ManeuverId::Turn100BrakeAbs),
            _ => Err(Error::UnknownManeuver(ord.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ManeuverId::Brake100 => "brake100",
            ManeuverId::BrakeAbs => "brake-abs",
            ManeuverId::Turn100 => "turn100",
            ManeuverId::Turn100Brake100 => "turn100-brake100",
            ManeuverId::Turn100BrakeAbs => "turn100-brake-abs",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let n = name.trim().to_ascii_lowercase();
        if let Ok(ord) = n.parse::<u8>() {
            return Self::from_ordinal(ord);
        }
        ALL_MANEUVERS
            .iter()
            .copied()
            .find(|m| m.name() == n)
            .ok_or_else(|| Error::UnknownManeuver(name.to_string()))
    }

    /// True for the maneuvers that brake with the anti-lock strategy.
    pub fn uses_abs(&self) -> bool {
        matches!(self, ManeuverId::BrakeAbs | ManeuverId::Turn100BrakeAbs)
    }

    /// True for the maneuvers that brake by blocking the front wheels.
    pub fn locks_wheels(&self) -> bool {
        matches!(self, ManeuverId::Brake100 | ManeuverId::Turn100Brake100)
    }
}

impl std::fmt::Display for ManeuverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One sample along a rolled-out vehicle path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub v_mps: f64,
    pub omega_f_radps: f64,
}

/// Vehicle path over time, starting at the origin heading +x.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// One dataset row: what a maneuver achieved in a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverOutcome {
    pub scenario: Scenario,
    pub maneuver: ManeuverId,
    pub min_distance_m: f64,
}

/// Torque estimate from a motor current measurement, T = k_t * I.
pub fn torque_from_current(current_a: f64, motor_constant_nm_per_a: f64) -> f64 {
    motor_constant_nm_per_a * current_a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_are_valid() {
        let p = VehicleParams::default();
        p.validate().unwrap();
        assert!((p.max_steer_rad - 0.4363).abs() < 1e-3);
    }

    #[test]
    fn params_reject_nonpositive() {
        let p = VehicleParams {
            mass_kg: 0.0,
            ..VehicleParams::default()
        };
        assert!(p.validate().is_err());
        let p = VehicleParams {
            max_steer_rad: 2.0,
            ..VehicleParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn ground_validation_bounds() {
        let r = 0.1;
        assert!(GroundModel::hard(0.45).validate(r).is_ok());
        assert!(GroundModel::hard(0.0).validate(r).is_err());
        assert!(GroundModel::hard(2.5).validate(r).is_err());
        assert!(GroundModel::deformable(0.03, 74e3, 31f64.to_radians())
            .validate(r)
            .is_ok());
        assert!(GroundModel::deformable(0.12, 74e3, 0.5)
            .validate(r)
            .is_err());
        assert!(GroundModel::deformable(0.03, -1.0, 0.5)
            .validate(r)
            .is_err());
    }

    #[test]
    fn torque_from_current_is_linear() {
        assert_eq!(torque_from_current(0.0, 0.3), 0.0);
        assert!((torque_from_current(2.0, 0.05) - 0.1).abs() < 1e-15);
        // inverse round trip
        let k = 0.07;
        let t = torque_from_current(1.7, k);
        assert!((t / k - 1.7).abs() < 1e-12);
    }

    #[test]
    fn maneuver_ordinals_round_trip() {
        for m in ALL_MANEUVERS {
            assert_eq!(ManeuverId::from_ordinal(m.ordinal()).unwrap(), m);
            assert_eq!(ManeuverId::from_name(m.name()).unwrap(), m);
        }
        assert_eq!(ManeuverId::from_name("2").unwrap(), ManeuverId::BrakeAbs);
        assert!(ManeuverId::from_ordinal(0).is_err());
        assert!(ManeuverId::from_name("swerve").is_err());
    }
}
