//! Forward vehicle plant: single-track longitudinal wheel model plus a
//! kinematic bicycle lateral model saturated by the friction circle.
//!
//! The front axle is lumped into one wheel carrying the full weight; the
//! rear wheels freewheel and track ground speed. The wheel slip dynamics
//! are stiff in the rising part of the traction curve, so each step is
//! integrated with linearized-implicit substeps on the contact-speed
//! difference u = omega*R - v.

use crate::error::{Error, Result};
use crate::soil::SoilContact;
use crate::tire::TireCurveConfig;
use crate::types::{GroundModel, VehicleParams};

/// Kinematic and wheel state of the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
    /// Body-frame longitudinal speed.
    pub v_mps: f64,
    pub omega_f_radps: f64,
    pub omega_r_radps: f64,
    pub steer_rad: f64,
}

impl PlantState {
    /// At-rest state rolling forward at `v0` toward +x.
    pub fn rolling(v0: f64, wheel_radius: f64) -> PlantState {
        PlantState {
            x_m: 0.0,
            y_m: 0.0,
            heading_rad: 0.0,
            v_mps: v0,
            omega_f_radps: v0 / wheel_radius,
            omega_r_radps: v0 / wheel_radius,
            steer_rad: 0.0,
        }
    }
}

/// Plant-model constants that are not vehicle datasheet values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantConfig {
    pub tire: TireCurveConfig,
    pub wheelbase_m: f64,
    /// Lumped front-axle spin inertia.
    pub wheel_inertia_kgm2: f64,
    /// Internal substeps per call to `step`.
    pub substeps: u32,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig {
            tire: TireCurveConfig::default(),
            wheelbase_m: 0.48,
            wheel_inertia_kgm2: 0.0005,
            substeps: 8,
        }
    }
}

/// Low-speed threshold below which slip is treated as undefined.
pub const SPEED_EPS: f64 = 1e-3;

/// Signed slip ratio of the front wheel, clamped to [-1, 1]. Zero while
/// effectively at standstill.
pub fn slip_ratio(state: &PlantState, r: f64) -> f64 {
    let wr = state.omega_f_radps * r;
    let denom = wr.max(state.v_mps);
    if denom < SPEED_EPS {
        0.0
    } else {
        ((wr - state.v_mps) / denom).clamp(-1.0, 1.0)
    }
}

enum Contact<'a> {
    Hard { mu: f64 },
    Soil(&'a SoilContact),
}

impl Contact<'_> {
    /// Longitudinal tire/soil force on the vehicle for contact-speed
    /// difference u = omega*R - v at reference speeds (v, omega).
    fn force(
        &self,
        u: f64,
        v: f64,
        wr: f64,
        params: &VehicleParams,
        tire: &TireCurveConfig,
    ) -> f64 {
        let denom = wr.max(v).max(SPEED_EPS);
        let slip = (u / denom).clamp(-1.0, 1.0);
        match self {
            Contact::Hard { mu } => params.weight_n() * mu * tire.traction_factor(slip),
            Contact::Soil(soil) => {
                let zeta = (-slip).clamp(0.0, 1.0);
                soil.longitudinal_force(slip, zeta, tire, v)
            }
        }
    }

    /// Reaction torque resisting the wheel's rotation.
    fn wheel_torque(
        &self,
        u: f64,
        v: f64,
        wr: f64,
        params: &VehicleParams,
        tire: &TireCurveConfig,
    ) -> f64 {
        match self {
            Contact::Hard { .. } => params.wheel_radius_m * self.force(u, v, wr, params, tire),
            Contact::Soil(soil) => {
                let denom = wr.max(v).max(SPEED_EPS);
                let slip = (u / denom).clamp(-1.0, 1.0);
                soil.wheel_reaction_torque(-slip)
            }
        }
    }

    fn mu_lateral(&self, _params: &VehicleParams) -> f64 {
        match self {
            Contact::Hard { mu } => *mu,
            Contact::Soil(soil) => soil.mu_lat,
        }
        .clamp(0.0, 10.0)
    }

    /// A braked or freewheeling wheel cannot over-rotate on soil.
    fn forbids_overspin(&self, torque: f64) -> bool {
        matches!(self, Contact::Soil(_)) && torque <= 0.0
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= 0.02) {
        return Err(Error::InvalidParam(format!(
            "dt must be in (0, 0.02], got {dt}"
        )));
    }
    Ok(())
}

/// One plant step on a hard surface with friction coefficient `mu`.
pub fn step_hard(
    state: &PlantState,
    drive_torque_nm: f64,
    steer_cmd_rad: f64,
    mu: f64,
    params: &VehicleParams,
    cfg: &PlantConfig,
    dt: f64,
) -> Result<PlantState> {
    check_dt(dt)?;
    Ok(integrate(
        state,
        drive_torque_nm,
        steer_cmd_rad,
        &Contact::Hard { mu },
        params,
        cfg,
        dt,
    ))
}

/// One plant step on a deformable layer.
pub fn step_deformable(
    state: &PlantState,
    drive_torque_nm: f64,
    steer_cmd_rad: f64,
    soil: &SoilContact,
    params: &VehicleParams,
    cfg: &PlantConfig,
    dt: f64,
) -> Result<PlantState> {
    check_dt(dt)?;
    if soil.sinkage_m >= params.wheel_radius_m {
        return Err(Error::WheelBuried);
    }
    Ok(integrate(
        state,
        drive_torque_nm,
        steer_cmd_rad,
        &Contact::Soil(soil),
        params,
        cfg,
        dt,
    ))
}

/// Dispatching step over a `GroundModel`. Soil contacts are rebuilt per
/// call; rollouts precompute a `SoilContact` and call `step_deformable`.
pub fn step(
    state: &PlantState,
    drive_torque_nm: f64,
    steer_cmd_rad: f64,
    ground: &GroundModel,
    params: &VehicleParams,
    cfg: &PlantConfig,
    dt: f64,
) -> Result<PlantState> {
    match *ground {
        GroundModel::HardSurface { mu } => {
            step_hard(state, drive_torque_nm, steer_cmd_rad, mu, params, cfg, dt)
        }
        GroundModel::Deformable {
            sinkage_m,
            cohesion_pa,
            shear_angle_rad,
        } => {
            let soil = SoilContact::new(sinkage_m, cohesion_pa, shear_angle_rad, params);
            step_deformable(
                state,
                drive_torque_nm,
                steer_cmd_rad,
                &soil,
                params,
                cfg,
                dt,
            )
        }
    }
}

fn integrate(
    state: &PlantState,
    torque: f64,
    steer_cmd: f64,
    contact: &Contact,
    params: &VehicleParams,
    cfg: &PlantConfig,
    dt: f64,
) -> PlantState {
    let mut s = *state;
    s.steer_rad = steer_cmd.clamp(-params.max_steer_rad, params.max_steer_rad);
    let h = dt / cfg.substeps as f64;
    for _ in 0..cfg.substeps {
        s = substep(&s, torque, contact, params, cfg, h);
    }
    s
}

fn substep(
    state: &PlantState,
    torque: f64,
    contact: &Contact,
    params: &VehicleParams,
    cfg: &PlantConfig,
    h: f64,
) -> PlantState {
    let r = params.wheel_radius_m;
    let m = params.mass_kg;
    let iw = cfg.wheel_inertia_kgm2;
    let mut s = *state;

    let v = s.v_mps.max(0.0);
    let omega = s.omega_f_radps.max(0.0);
    let wr = omega * r;

    // full stop: nothing drives, nothing moves
    if v < SPEED_EPS && wr < SPEED_EPS && torque <= 0.0 {
        s.v_mps = 0.0;
        s.omega_f_radps = 0.0;
        s.omega_r_radps = 0.0;
        return s;
    }

    let u0 = wr - v;

    // du/dt = R*(T - M(u))/I - F(u)/m =: R*T/I - g(u); backward Euler with
    // g linearized around an anchor point
    let g_at = |u: f64| -> f64 {
        r * contact.wheel_torque(u, v, wr, params, &cfg.tire) / iw
            + contact.force(u, v, wr, params, &cfg.tire) / m
    };
    let solve = |anchor: f64| -> f64 {
        let du = 1e-6 * wr.max(v).max(1.0);
        let g_a = g_at(anchor);
        let slope = (g_at(anchor + du) - g_at(anchor - du)) / (2.0 * du);
        let denom = 1.0 + h * slope;
        if denom > 0.5 {
            (u0 + h * (r * torque / iw - g_a + slope * anchor)) / denom
        } else {
            // destabilizing local slope: take the explicit candidate and
            // let the band-crossing re-anchor handle where it lands
            u0 + h * (r * torque / iw - g_a)
        }
    };

    let mut u1 = solve(u0);
    // if the step crosses into (or through) the steep linear band around
    // zero slip, the plateau-anchored slope is invalid; re-anchor at the
    // rolling point, whose stiff slope the backward Euler handles
    let band = cfg.tire.slip_breakpoint * wr.max(v).max(SPEED_EPS);
    if u0.abs() >= band && (u1.abs() < band || u0.signum() != u1.signum()) {
        u1 = solve(0.0);
    }
    // the wheel cannot spin backward, so u = omega*R - v >= -v
    u1 = u1.max(-v);

    // advance the contact momentum p = m*v + (I/R)*omega, which the stiff
    // contact forces cancel out of exactly on hard ground, then recover
    // (v, omega) consistently with the solved u
    let f1 = contact.force(u1, v, wr, params, &cfg.tire);
    let m1 = contact.wheel_torque(u1, v, wr, params, &cfg.tire);
    let p1 = m * v + (iw / r) * omega + h * (f1 + (torque - m1) / r);
    let omega_free = (p1 + m * u1) / (m * r + iw / r);

    let (v1, omega1) = if omega_free <= 0.0 {
        // wheel blocked: excess brake torque grounds out through the
        // constraint; only the sliding contact force acts on the body
        ((v + h * f1 / m).max(0.0), 0.0)
    } else if contact.forbids_overspin(torque) && u1 > 0.0 {
        // braked or freewheeling soil wheel pinned to rolling: body and
        // wheel decelerate together under the rolling-contact force
        let f_roll = contact.force(0.0, v, wr, params, &cfg.tire);
        let v1 = (v + h * (f_roll + torque / r) / (m + iw / (r * r))).max(0.0);
        (v1, v1 / r)
    } else {
        ((r * omega_free - u1).max(0.0), omega_free)
    };

    // lateral: kinematic bicycle curvature, saturated by what the friction
    // circle leaves after the longitudinal force, degraded by deep slip
    let mut heading1 = s.heading_rad;
    if v1 > SPEED_EPS {
        let kappa_geo = s.steer_rad.tan() / cfg.wheelbase_m;
        if kappa_geo != 0.0 {
            let slip1 = {
                let wr1 = omega1 * r;
                let denom = wr1.max(v1).max(SPEED_EPS);
                ((wr1 - v1) / denom).clamp(-1.0, 1.0)
            };
            let a_x = f1 / m;
            let mu_lat = contact.mu_lateral(params);
            let budget2 = (mu_lat * params.gravity_mps2).powi(2) - a_x * a_x;
            let a_cap = budget2.max(0.0).sqrt() * (1.0 - slip1.abs());
            let a_req = v1 * v1 * kappa_geo.abs();
            let kappa_eff = kappa_geo.signum() * a_req.min(a_cap) / (v1 * v1);
            heading1 += v1 * kappa_eff * h;
        }
    }

    s.x_m += v1 * heading1.cos() * h;
    s.y_m += v1 * heading1.sin() * h;
    s.heading_rad = heading1;
    s.v_mps = v1;
    s.omega_f_radps = omega1;
    s.omega_r_radps = v1 / r;
    s
}

/// Kinetic energy of body plus front wheel, used by dissipation checks.
pub fn kinetic_energy(state: &PlantState, params: &VehicleParams, cfg: &PlantConfig) -> f64 {
    0.5 * params.mass_kg * state.v_mps * state.v_mps
        + 0.5 * cfg.wheel_inertia_kgm2 * state.omega_f_radps * state.omega_f_radps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (VehicleParams, PlantConfig) {
        (VehicleParams::default(), PlantConfig::default())
    }

    #[test]
    fn rejects_bad_dt() {
        let (p, c) = setup();
        let s = PlantState::rolling(2.0, p.wheel_radius_m);
        assert!(step_hard(&s, 0.0, 0.0, 0.45, &p, &c, 0.0).is_err());
        assert!(step_hard(&s, 0.0, 0.0, 0.45, &p, &c, 0.05).is_err());
    }

    #[test]
    fn frictionless_limit_preserves_speed() {
        let (p, c) = setup();
        let s = PlantState::rolling(2.0, p.wheel_radius_m);
        let s1 = step_hard(&s, 5.0, 0.0, 0.0, &p, &c, 1.0 / 90.0).unwrap();
        assert!((s1.v_mps - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_slip_zero_torque_is_equilibrium() {
        let (p, c) = setup();
        let s = PlantState::rolling(2.0, p.wheel_radius_m);
        let s1 = step_hard(&s, 0.0, 0.0, 0.45, &p, &c, 1.0 / 90.0).unwrap();
        assert!((s1.v_mps - 2.0).abs() < 1e-12);
        assert!((s1.omega_f_radps - 20.0).abs() < 1e-9);
    }

    #[test]
    fn locked_wheel_stops_near_coulomb_distance() {
        let (p, c) = setup();
        for (v0, mu) in [(3.0, 0.25), (2.0, 0.45), (1.0, 0.9), (3.0, 0.9)] {
            let mut s = PlantState::rolling(v0, p.wheel_radius_m);
            s.omega_f_radps = 0.0; // wheels already blocked
            let dt = 1.0 / 90.0;
            // strong brake torque holds the lock
            let mut t = 0.0;
            while s.v_mps > 1e-4 && t < 30.0 {
                s = step_hard(&s, -25.0, 0.0, mu, &p, &c, dt).unwrap();
                t += dt;
            }
            let ideal = v0 * v0 / (2.0 * mu * p.gravity_mps2);
            let err = (s.x_m - ideal).abs() / ideal;
            assert!(
                err < 0.05,
                "v0={v0} mu={mu}: stopped at {} vs ideal {ideal} ({:.2}%)",
                s.x_m,
                err * 100.0
            );
        }
    }

    #[test]
    fn wheel_buried_is_rejected() {
        let p = VehicleParams::default();
        let c = PlantConfig::default();
        let soil = SoilContact::new(0.11, 10e3, 0.5, &p);
        let s = PlantState::rolling(2.0, p.wheel_radius_m);
        assert!(matches!(
            step_deformable(&s, 0.0, 0.0, &soil, &p, &c, 0.01),
            Err(Error::WheelBuried)
        ));
    }

    #[test]
    fn locked_beats_released_on_clayey_sand() {
        let (p, c) = setup();
        let soil = SoilContact::new(0.03, 74e3, 31f64.to_radians(), &p);
        let dt = 1.0 / 90.0;

        let mut locked = PlantState::rolling(3.0, p.wheel_radius_m);
        locked.omega_f_radps = 0.0;
        let mut released = PlantState::rolling(3.0, p.wheel_radius_m);
        for _ in 0..18 {
            locked = step_deformable(&locked, -25.0, 0.0, &soil, &p, &c, dt).unwrap();
            released = step_deformable(&released, 0.0, 0.0, &soil, &p, &c, dt).unwrap();
        }
        assert!(
            locked.v_mps < released.v_mps - 0.3,
            "locked {} vs released {}",
            locked.v_mps,
            released.v_mps
        );
    }

    #[test]
    fn energy_never_increases_without_drive() {
        let (p, c) = setup();
        let dt = 1.0 / 90.0;
        for mu in [0.25, 0.45, 0.9] {
            let mut s = PlantState::rolling(3.0, p.wheel_radius_m);
            s.omega_f_radps = 12.0; // braking slip
            let mut e = kinetic_energy(&s, &p, &c);
            for _ in 0..400 {
                s = step_hard(&s, 0.0, 0.35, mu, &p, &c, dt).unwrap();
                let e1 = kinetic_energy(&s, &p, &c);
                assert!(e1 <= e + 1e-9, "mu={mu}: {e} -> {e1}");
                e = e1;
            }
        }
    }
}
