//! The five emergency maneuver controllers behind a common strategy
//! trait, registered by name and ordinal.
//!
//! Braking is done only with the front wheels; the rear wheels are always
//! free. Full braking is a proportional velocity loop driving the front
//! wheel speed to zero under a torque rate limit. Anti-lock braking cuts
//! the torque to zero whenever |s_x| exceeds the release threshold and
//! re-applies below a hysteresis band; while engaged, the torque tracks
//! the slip set point with a multiplicative servo. Turning commands the
//! maximal steering angle.

use crate::plant::{slip_ratio, PlantState};
use crate::types::{ManeuverId, VehicleParams, ALL_MANEUVERS};

/// Actuator command for one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub drive_torque_nm: f64,
    pub steer_rad: f64,
}

/// Tuning shared by the maneuver controllers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Control period; controllers are ticked at this rate.
    pub dt_s: f64,
    /// Proportional gain of the wheel-speed brake loop.
    pub brake_gain_nm_per_radps: f64,
    pub max_brake_torque_nm: f64,
    /// Torque rate limit for the full-brake loop.
    pub brake_ramp_nm_per_s: f64,
    /// The actuator jumps quickly up to this level before the rate limit
    /// applies; below the weakest ground's holding torque, so the two
    /// brake laws still share an identical early transient.
    pub brake_precharge_nm: f64,
    /// Release braking above this |s_x|.
    pub abs_release_slip: f64,
    /// Re-engage braking once |s_x| falls below this.
    pub abs_reengage_slip: f64,
    /// Slip set point the engaged anti-lock servo tracks.
    pub abs_target_slip: f64,
    pub abs_initial_torque_nm: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            dt_s: 1.0 / 90.0,
            brake_gain_nm_per_radps: 25.0,
            max_brake_torque_nm: 25.0,
            brake_ramp_nm_per_s: 45.0,
            brake_precharge_nm: 2.0,
            abs_release_slip: 0.03,
            abs_reengage_slip: 0.02,
            abs_target_slip: 0.0295,
            abs_initial_torque_nm: 2.0,
        }
    }
}

/// One maneuver variant. Controllers are stateful (ramp and anti-lock
/// latches); build a fresh one per rollout.
pub trait ManeuverStrategy {
    fn id(&self) -> ManeuverId;
    fn name(&self) -> &'static str {
        self.id().name()
    }
    fn command(
        &mut self,
        state: &PlantState,
        params: &VehicleParams,
        cfg: &ControllerConfig,
    ) -> Command;
}

/// Full braking: proportional loop toward omega_f = 0, torque ramped and
/// saturated. Once the saturated loop has driven the wheel to rest, the
/// brake latches and holds it blocked.
#[derive(Debug, Default)]
struct LockBrake {
    allowed_nm: f64,
    saturated: bool,
    latched: bool,
}

impl LockBrake {
    fn torque(
        &mut self,
        state: &PlantState,
        params: &VehicleParams,
        cfg: &ControllerConfig,
    ) -> f64 {
        self.allowed_nm = (self.allowed_nm + cfg.brake_ramp_nm_per_s * cfg.dt_s)
            .max(cfg.brake_precharge_nm)
            .min(cfg.max_brake_torque_nm);
        if self.latched {
            return -self.allowed_nm;
        }
        let omega = state.omega_f_radps.max(0.0);
        let demand = cfg.brake_gain_nm_per_radps * omega;
        if demand >= self.allowed_nm {
            self.saturated = true;
        }
        if self.saturated && omega * params.wheel_radius_m < 0.02 {
            self.latched = true;
            return -self.allowed_nm;
        }
        -demand.min(self.allowed_nm)
    }
}

/// Anti-lock braking: the same ramped velocity loop as full braking, but
/// torque is cut to zero above the release slip, re-applied below the
/// hysteresis band, and capped by a slip servo while engaged so the slip
/// hovers just under the release threshold. The servo anchors on the
/// torque actually applied last tick; slip tracks torque quasi-statically
/// at the control rate, so the cap locks onto the set point as the ramp
/// carries the slip up to it, usually without a single release.
#[derive(Debug)]
struct AbsBrake {
    ramp: LockBrake,
    released: bool,
    level_nm: f64,
    last_applied_nm: f64,
    /// torque known to keep the slip under the set point
    lo_nm: f64,
    /// torque known to have triggered a release
    hi_nm: f64,
}

impl AbsBrake {
    fn new(cfg: &ControllerConfig) -> Self {
        AbsBrake {
            ramp: LockBrake::default(),
            released: false,
            level_nm: cfg.max_brake_torque_nm,
            last_applied_nm: 0.0,
            lo_nm: 0.0,
            hi_nm: f64::INFINITY,
        }
    }

    fn torque(
        &mut self,
        state: &PlantState,
        params: &VehicleParams,
        cfg: &ControllerConfig,
    ) -> f64 {
        // the actuator ramp advances whether or not the torque is cut
        let envelope = -self.ramp.torque(state, params, cfg);
        let s = slip_ratio(state, params.wheel_radius_m).abs();
        if self.released {
            if s < cfg.abs_reengage_slip {
                self.released = false;
            } else {
                return 0.0;
            }
        } else if s > cfg.abs_release_slip {
            self.released = true;
            // bracket the holding torque: what we applied was too much
            if self.last_applied_nm > 0.0 {
                self.hi_nm = self.hi_nm.min(self.last_applied_nm);
            }
            self.level_nm = (0.5 * (self.lo_nm + self.hi_nm.min(cfg.max_brake_torque_nm)))
                .max(cfg.abs_initial_torque_nm);
            self.last_applied_nm = 0.0;
            return 0.0;
        }
        if self.last_applied_nm > 0.0 {
            // slip tracks torque quasi-statically, so the ratio move lands
            // on the set point without crossing the release threshold
            let ratio = (cfg.abs_target_slip / s.max(1e-4)).clamp(0.5, 2.0);
            let ratio = if (0.8..1.25).contains(&ratio) {
                ratio.sqrt()
            } else {
                ratio
            };
            if s < 0.8 * cfg.abs_target_slip {
                self.lo_nm = self.lo_nm.max(self.last_applied_nm);
            }
            let mut next = self.last_applied_nm * ratio;
            if self.hi_nm.is_finite() {
                next = next.min(0.5 * (self.lo_nm + self.hi_nm));
            }
            self.level_nm = next.clamp(0.1, cfg.max_brake_torque_nm);
        }
        let applied = self.level_nm.min(envelope);
        self.last_applied_nm = applied;
        -applied
    }
}

struct Brake100(LockBrake);
struct BrakeAbs(AbsBrake);
struct Turn100;
struct Turn100Brake100(LockBrake);
struct Turn100BrakeAbs(AbsBrake);

impl ManeuverStrategy for Brake100 {
    fn id(&self) -> ManeuverId {
        ManeuverId::Brake100
    }
    fn command(
        &mut self,
        state: &PlantState,
        p: &VehicleParams,
        cfg: &ControllerConfig,
    ) -> Command {
        Command {
            drive_torque_nm: self.0.torque(state, p, cfg),
            steer_rad: 0.0,
        }
    }
}

impl ManeuverStrategy for BrakeAbs {
    fn id(&self) -> ManeuverId {
        ManeuverId::BrakeAbs
    }
    fn command(
        &mut self,
        state: &PlantState,
        p: &VehicleParams,
        cfg: &ControllerConfig,
    ) -> Command {
        Command {
            drive_torque_nm: self.0.torque(state, p, cfg),
            steer_rad: 0.0,
        }
    }
}

impl ManeuverStrategy for Turn100 {
    fn id(&self) -> ManeuverId {
        ManeuverId::Turn100
    }
    fn command(&mut self, _s: &PlantState, p: &VehicleParams, _cfg: &ControllerConfig) -> Command {
        Command {
            drive_torque_nm: 0.0,
            steer_rad: p.max_steer_rad,
        }
    }
}

impl ManeuverStrategy for Turn100Brake100 {
    fn id(&self) -> ManeuverId {
        ManeuverId::Turn100Brake100
    }
    fn command(
        &mut self,
        state: &PlantState,
        p: &VehicleParams,
        cfg: &ControllerConfig,
    ) -> Command {
        Command {
            drive_torque_nm: self.0.torque(state, p, cfg),
            steer_rad: p.max_steer_rad,
        }
    }
}

impl ManeuverStrategy for Turn100BrakeAbs {
    fn id(&self) -> ManeuverId {
        ManeuverId::Turn100BrakeAbs
    }
    fn command(
        &mut self,
        state: &PlantState,
        p: &VehicleParams,
        cfg: &ControllerConfig,
    ) -> Command {
        Command {
            drive_torque_nm: self.0.torque(state, p, cfg),
            steer_rad: p.max_steer_rad,
        }
    }
}

/// Build a fresh controller for one maneuver.
pub fn build_controller(id: ManeuverId, cfg: &ControllerConfig) -> Box<dyn ManeuverStrategy> {
    match id {
        ManeuverId::Brake100 => Box::new(Brake100(LockBrake::default())),
        ManeuverId::BrakeAbs => Box::new(BrakeAbs(AbsBrake::new(cfg))),
        ManeuverId::Turn100 => Box::new(Turn100),
        ManeuverId::Turn100Brake100 => Box::new(Turn100Brake100(LockBrake::default())),
        ManeuverId::Turn100BrakeAbs => Box::new(Turn100BrakeAbs(AbsBrake::new(cfg))),
    }
}

/// Look a maneuver up by registry name or ordinal and build its controller.
pub fn controller_by_name(
    name: &str,
    cfg: &ControllerConfig,
) -> crate::Result<Box<dyn ManeuverStrategy>> {
    Ok(build_controller(ManeuverId::from_name(name)?, cfg))
}

/// Registry listing: (ordinal, name) for every available maneuver.
pub fn registry() -> Vec<(u8, &'static str)> {
    ALL_MANEUVERS
        .iter()
        .map(|m| (m.ordinal(), m.name()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(v: f64, omega: f64) -> PlantState {
        PlantState {
            x_m: 0.0,
            y_m: 0.0,
            heading_rad: 0.0,
            v_mps: v,
            omega_f_radps: omega,
            omega_r_radps: v / 0.1,
            steer_rad: 0.0,
        }
    }

    #[test]
    fn brake100_commands_zero_torque_at_zero_omega() {
        let p = VehicleParams::default();
        let cfg = ControllerConfig::default();
        let mut c = build_controller(ManeuverId::Brake100, &cfg);
        let cmd = c.command(&state(2.0, 0.0), &p, &cfg);
        assert_eq!(cmd.drive_torque_nm, 0.0);
        assert_eq!(cmd.steer_rad, 0.0);
    }

    #[test]
    fn abs_releases_above_slip_threshold() {
        let p = VehicleParams::default();
        let cfg = ControllerConfig::default();
        let mut c = build_controller(ManeuverId::BrakeAbs, &cfg);
        // v=2, omega*R=1.9 -> s_x = -0.05
        let cmd = c.command(&state(2.0, 19.0), &p, &cfg);
        assert_eq!(cmd.drive_torque_nm, 0.0);
        // stays released inside the hysteresis band (|s| = 0.025)
        let cmd = c.command(&state(2.0, 19.5), &p, &cfg);
        assert_eq!(cmd.drive_torque_nm, 0.0);
        // re-engages below 0.02
        let cmd = c.command(&state(2.0, 19.8), &p, &cfg);
        assert!(cmd.drive_torque_nm < 0.0);
    }

    #[test]
    fn turn100_commands_max_steer_no_torque() {
        let p = VehicleParams::default();
        let cfg = ControllerConfig::default();
        let mut c = build_controller(ManeuverId::Turn100, &cfg);
        let cmd = c.command(&state(2.0, 20.0), &p, &cfg);
        assert_eq!(cmd.drive_torque_nm, 0.0);
        assert!((cmd.steer_rad - 25f64.to_radians()).abs() < 1e-12);
        assert!((cmd.steer_rad - 0.4363).abs() < 1e-3);
    }

    #[test]
    fn combined_maneuvers_compose_steer_and_brake() {
        let p = VehicleParams::default();
        let cfg = ControllerConfig::default();
        let mut c = build_controller(ManeuverId::Turn100Brake100, &cfg);
        let cmd = c.command(&state(2.0, 20.0), &p, &cfg);
        assert!(cmd.drive_torque_nm < 0.0);
        assert!((cmd.steer_rad - p.max_steer_rad).abs() < 1e-12);
    }

    #[test]
    fn registry_lists_five_by_ordinal() {
        let r = registry();
        assert_eq!(r.len(), 5);
        assert_eq!(r[0], (1, "brake100"));
        assert_eq!(r[4], (5, "turn100-brake-abs"));
        assert!(controller_by_name("brake-abs", &ControllerConfig::default()).is_ok());
        assert!(controller_by_name("nope", &ControllerConfig::default()).is_err());
    }
}
