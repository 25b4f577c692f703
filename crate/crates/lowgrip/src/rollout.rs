//! Deterministic rollouts of maneuvers and traction runs.

use crate::error::{Error, Result};
use crate::geometry::min_obstacle_distance;
use crate::maneuver::{build_controller, ControllerConfig};
use crate::plant::{step_deformable, step_hard, PlantConfig, PlantState};
use crate::soil::SoilContact;
use crate::types::{
    GroundModel, ManeuverId, ManeuverOutcome, Scenario, Trajectory, TrajectorySample, VehicleParams,
};

/// States and applied torques of one rollout, sampled at the control rate.
/// `states[k]` is the state at `t = k*dt`; `torques[k]` the front torque
/// applied over `[k*dt, (k+1)*dt)` (last entry zero).
#[derive(Debug, Clone)]
pub struct RolloutRecord {
    pub dt_s: f64,
    pub states: Vec<PlantState>,
    pub torques: Vec<f64>,
}

impl RolloutRecord {
    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            samples: self
                .states
                .iter()
                .enumerate()
                .map(|(k, s)| TrajectorySample {
                    t_s: k as f64 * self.dt_s,
                    x_m: s.x_m,
                    y_m: s.y_m,
                    v_mps: s.v_mps,
                    omega_f_radps: s.omega_f_radps,
                })
                .collect(),
        }
    }
}

/// Maximum simulated time before a rollout is declared runaway.
pub const ROLLOUT_TIME_LIMIT_S: f64 = 60.0;

/// Speed below which the vehicle counts as stopped.
pub const STOP_SPEED_MPS: f64 = 0.01;

#[allow(clippy::too_many_arguments)]
fn step_ground(
    state: &PlantState,
    torque: f64,
    steer: f64,
    ground: &GroundModel,
    soil: Option<&SoilContact>,
    params: &VehicleParams,
    cfg: &PlantConfig,
    dt: f64,
) -> Result<PlantState> {
    match ground {
        GroundModel::HardSurface { mu } => step_hard(state, torque, steer, *mu, params, cfg, dt),
        GroundModel::Deformable { .. } => step_deformable(
            state,
            torque,
            steer,
            soil.expect("soil contact"),
            params,
            cfg,
            dt,
        ),
    }
}

/// Roll one maneuver out of a scenario. The vehicle starts at the origin
/// heading toward the obstacle at the scenario speed, wheels rolling. The
/// rollout ends once the vehicle is slower than `STOP_SPEED_MPS` or has
/// traveled twice the obstacle distance along its path.
pub fn rollout_maneuver(
    scn: &Scenario,
    maneuver: ManeuverId,
    params: &VehicleParams,
    cfg: &PlantConfig,
    ctrl: &ControllerConfig,
    dt: f64,
) -> Result<RolloutRecord> {
    params.validate()?;
    scn.validate(params.wheel_radius_m)?;
    let soil = match scn.ground {
        GroundModel::Deformable {
            sinkage_m,
            cohesion_pa,
            shear_angle_rad,
        } => Some(SoilContact::new(
            sinkage_m,
            cohesion_pa,
            shear_angle_rad,
            params,
        )),
        GroundModel::HardSurface { .. } => None,
    };
    let mut controller = build_controller(maneuver, ctrl);
    let mut state = PlantState::rolling(scn.v0_mps, params.wheel_radius_m);
    let mut states = vec![state];
    let mut torques = Vec::new();
    let mut path_len = 0.0;
    let mut t = 0.0;

    loop {
        if t > ROLLOUT_TIME_LIMIT_S {
            return Err(Error::RunawayRollout);
        }
        let cmd = controller.command(&state, params, ctrl);
        let next = step_ground(
            &state,
            cmd.drive_torque_nm,
            cmd.steer_rad,
            &scn.ground,
            soil.as_ref(),
            params,
            cfg,
            dt,
        )?;
        path_len += ((next.x_m - state.x_m).powi(2) + (next.y_m - state.y_m).powi(2)).sqrt();
        torques.push(cmd.drive_torque_nm);
        state = next;
        states.push(state);
        t += dt;
        if state.v_mps < STOP_SPEED_MPS || path_len >= 2.0 * scn.obstacle_distance_m {
            break;
        }
    }
    torques.push(0.0);
    Ok(RolloutRecord {
        dt_s: dt,
        states,
        torques,
    })
}

/// Roll a maneuver out and score it against the scenario's obstacle.
pub fn run_maneuver(
    scn: &Scenario,
    maneuver: ManeuverId,
    params: &VehicleParams,
    cfg: &PlantConfig,
    ctrl: &ControllerConfig,
    dt: f64,
) -> Result<(Trajectory, ManeuverOutcome)> {
    let record = rollout_maneuver(scn, maneuver, params, cfg, ctrl, dt)?;
    let traj = record.trajectory();
    let d = min_obstacle_distance(&traj, (scn.obstacle_distance_m, 0.0))?;
    Ok((
        traj,
        ManeuverOutcome {
            scenario: *scn,
            maneuver,
            min_distance_m: d,
        },
    ))
}

/// Traction run used as a data source for friction estimation: the front
/// wheel is spun against the ground with a slip set point until the
/// vehicle reaches `target_v`, then the drive is released and the vehicle
/// coasts briefly.
pub fn rollout_traction(
    v_start: f64,
    target_v: f64,
    ground: &GroundModel,
    params: &VehicleParams,
    cfg: &PlantConfig,
    dt: f64,
) -> Result<RolloutRecord> {
    params.validate()?;
    ground.validate(params.wheel_radius_m)?;
    if !(target_v > v_start && v_start > 0.0) {
        return Err(Error::InvalidParam(format!(
            "need 0 < v_start < target_v, got {v_start}, {target_v}"
        )));
    }
    let soil = match *ground {
        GroundModel::Deformable {
            sinkage_m,
            cohesion_pa,
            shear_angle_rad,
        } => Some(SoilContact::new(
            sinkage_m,
            cohesion_pa,
            shear_angle_rad,
            params,
        )),
        GroundModel::HardSurface { .. } => None,
    };
    const DRIVE_SLIP: f64 = 0.05;
    const MAX_DRIVE_NM: f64 = 30.0;
    const COAST_S: f64 = 0.4;

    let r = params.wheel_radius_m;
    let mut state = PlantState::rolling(v_start, r);
    let mut states = vec![state];
    let mut torques = Vec::new();
    let mut coast_left = COAST_S;
    let mut level = 1.0f64;
    let mut t = 0.0;
    loop {
        if t > ROLLOUT_TIME_LIMIT_S {
            return Err(Error::RunawayRollout);
        }
        let torque = if state.v_mps < target_v {
            // climb until the tire breaks loose, then hold: beyond the
            // breakpoint torque the wheel spins up and slip stays deep
            // until the speed target is reached
            let slip = crate::plant::slip_ratio(&state, r);
            if slip.abs() < DRIVE_SLIP {
                level = (level * 1.08).min(MAX_DRIVE_NM);
            }
            level
        } else {
            coast_left -= dt;
            0.0
        };
        let next = step_ground(&state, torque, 0.0, ground, soil.as_ref(), params, cfg, dt)?;
        torques.push(torque);
        state = next;
        states.push(state);
        t += dt;
        if coast_left <= 0.0 {
            break;
        }
    }
    torques.push(0.0);
    Ok(RolloutRecord {
        dt_s: dt,
        states,
        torques,
    })
}
