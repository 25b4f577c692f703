//! Multirate state observer fusing encoder, IMU and LIDAR streams into
//! (v, omega, a) estimates.
//!
//! A fixed-gain linear filter on a constant-acceleration model: encoder
//! speed and IMU acceleration correct every frame, LIDAR-differenced
//! speed corrects only on frames carrying a fresh fix. Gains come from a
//! steady-state Riccati iteration at init and the resulting error
//! dynamics are checked for stability there.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::types::{SensorFrame, VehicleParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverConfig {
    /// Process noise density of the speed state.
    pub q_v: f64,
    /// Process noise density of the acceleration state.
    pub q_a: f64,
    /// LIDAR position noise (m).
    pub r_lidar_pos: f64,
    /// Encoder speed noise (rad/s).
    pub r_encoder: f64,
    /// IMU acceleration noise (m/s^2).
    pub r_imu: f64,
    /// Nominal frame period the gains are derived for.
    pub dt_s: f64,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        ObserverConfig {
            q_v: 0.3,
            q_a: 8.0,
            r_lidar_pos: 0.01,
            r_encoder: 0.1,
            r_imu: 0.2,
            dt_s: 1.0 / 90.0,
        }
    }
}

/// Filtered vehicle state at one frame time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEstimate {
    pub t_s: f64,
    pub v_hat_mps: f64,
    pub omega_hat_radps: f64,
    pub a_hat_mps2: f64,
}

#[derive(Debug, Clone)]
pub struct Observer {
    cfg: ObserverConfig,
    wheel_radius: f64,
    x: Vector2<f64>, // [v, a]
    omega_hat: f64,
    k_base: Matrix2<f64>,
    k_lidar: [Vector2<f64>; 3],
    k_omega: f64,
    last_t: f64,
    last_fix: (f64, f64, f64), // x, y, t
}

fn spectral_radius_2x2(m: &Matrix2<f64>) -> f64 {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        ((tr + r) / 2.0).abs().max(((tr - r) / 2.0).abs())
    } else {
        det.abs().sqrt()
    }
}

impl Observer {
    /// Build an observer seeded from the first frame: v from the front
    /// encoder through the wheel radius, a from the IMU.
    pub fn init(
        cfg: &ObserverConfig,
        params: &VehicleParams,
        frame0: &SensorFrame,
    ) -> Result<Observer> {
        for (name, v) in [
            ("q_v", cfg.q_v),
            ("q_a", cfg.q_a),
            ("r_lidar_pos", cfg.r_lidar_pos),
            ("r_encoder", cfg.r_encoder),
            ("r_imu", cfg.r_imu),
            ("dt_s", cfg.dt_s),
        ] {
            if v.is_nan() || v <= 0.0 || !v.is_finite() {
                return Err(Error::UnstableObserver(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if !frame0.is_finite() {
            return Err(Error::InvalidParam("non-finite initial frame".into()));
        }

        let r = params.wheel_radius_m;
        let dt = cfg.dt_s;
        let f = Matrix2::new(1.0, dt, 0.0, 1.0);
        let q = Matrix2::new(cfg.q_v * dt, 0.0, 0.0, cfg.q_a * dt);
        let r_enc_v = (cfg.r_encoder * r).powi(2);
        let r_imu = cfg.r_imu * cfg.r_imu;
        // LIDAR speed from differenced fixes one LIDAR period apart
        let lidar_dt = 9.0 * dt;
        let r_lid_v = 2.0 * (cfg.r_lidar_pos / lidar_dt).powi(2);

        // steady state for the every-frame measurement set (encoder + imu)
        let mut p = Matrix2::new(1.0, 0.0, 0.0, 1.0);
        let mut k_base = Matrix2::zeros();
        for _ in 0..2000 {
            let pp = f * p * f.transpose() + q;
            // H = I, R = diag(r_enc_v, r_imu)
            let s = pp + Matrix2::new(r_enc_v, 0.0, 0.0, r_imu);
            let k = pp
                * s.try_inverse().ok_or_else(|| {
                    Error::UnstableObserver("singular innovation covariance".into())
                })?;
            p = (Matrix2::identity() - k) * pp;
            k_base = k;
        }

        // gain for frames that also carry a fresh LIDAR fix:
        // H = [1 0; 0 1; 1 0], R = diag(r_enc_v, r_imu, r_lid_v)
        let pp = f * p * f.transpose() + q;
        let h = nalgebra::Matrix3x2::new(1.0, 0.0, 0.0, 1.0, 1.0, 0.0);
        let rm = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(r_enc_v, r_imu, r_lid_v));
        let s = h * pp * h.transpose() + rm;
        let k3 = pp
            * h.transpose()
            * s.try_inverse()
                .ok_or_else(|| Error::UnstableObserver("singular innovation covariance".into()))?;
        let k_lidar = [
            Vector2::new(k3[(0, 0)], k3[(1, 0)]),
            Vector2::new(k3[(0, 1)], k3[(1, 1)]),
            Vector2::new(k3[(0, 2)], k3[(1, 2)]),
        ];

        // scalar steady-state gain for the front-wheel speed filter; the
        // wheel state moves much faster than the body under braking, so
        // its process noise is scaled up relative to the speed state
        let q_w = 4.0 * cfg.q_v / (r * r) * dt;
        let r_w = cfg.r_encoder * cfg.r_encoder;
        let mut pw = 1.0;
        for _ in 0..2000 {
            let ppw: f64 = pw + q_w;
            let kw = ppw / (ppw + r_w);
            pw = (1.0 - kw) * ppw;
        }
        let k_omega = (pw + q_w) / (pw + q_w + r_w);

        // closed-loop error dynamics must be contractive
        let a_base = (Matrix2::identity() - k_base) * f;
        let rho_base = spectral_radius_2x2(&a_base);
        let k3m = Matrix2::new(
            k_lidar[0][0] + k_lidar[2][0],
            k_lidar[1][0],
            k_lidar[0][1] + k_lidar[2][1],
            k_lidar[1][1],
        );
        let a_lid = (Matrix2::identity() - k3m) * f;
        let rho_lid = spectral_radius_2x2(&a_lid);
        if rho_base >= 1.0 || rho_lid >= 1.0 {
            return Err(Error::UnstableObserver(format!(
                "error dynamics spectral radius {rho_base:.4}/{rho_lid:.4}"
            )));
        }
        if !(0.0..1.0).contains(&k_omega) {
            return Err(Error::UnstableObserver(format!("omega gain {k_omega}")));
        }

        Ok(Observer {
            cfg: *cfg,
            wheel_radius: r,
            x: Vector2::new(frame0.omega_f_radps * r, frame0.a_imu_mps2),
            omega_hat: frame0.omega_f_radps.max(0.0),
            k_base,
            k_lidar,
            k_omega,
            last_t: frame0.t_s,
            last_fix: (frame0.x_lidar_m, frame0.y_lidar_m, frame0.t_s),
        })
    }

    /// Spectral radius of the per-frame error dynamics for the
    /// every-frame measurement set; exposed for stability checks.
    pub fn error_spectral_radius(&self) -> f64 {
        let f = Matrix2::new(1.0, self.cfg.dt_s, 0.0, 1.0);
        let a = (Matrix2::identity() - self.k_base) * f;
        spectral_radius_2x2(&a)
    }

    pub fn estimate(&self) -> StateEstimate {
        StateEstimate {
            t_s: self.last_t,
            v_hat_mps: self.x[0],
            omega_hat_radps: self.omega_hat,
            a_hat_mps2: self.x[1],
        }
    }

    /// Fuse one frame. Frames must be strictly forward in time.
    pub fn update(&mut self, frame: &SensorFrame) -> Result<StateEstimate> {
        if frame.t_s <= self.last_t {
            return Err(Error::NonMonotoneTime(frame.t_s));
        }
        let dt = frame.t_s - self.last_t;
        self.last_t = frame.t_s;

        // predict under constant acceleration
        self.x[0] += self.x[1] * dt;

        let z_v = frame.omega_r_radps * self.wheel_radius;
        let z_a = frame.a_imu_mps2;
        if frame.lidar_fresh {
            let (px, py, pt) = self.last_fix;
            let span = frame.t_s - pt;
            if span > 1e-9 {
                let dist = ((frame.x_lidar_m - px).powi(2) + (frame.y_lidar_m - py).powi(2)).sqrt();
                let z_lv = dist / span;
                let innov = [z_v - self.x[0], z_a - self.x[1], z_lv - self.x[0]];
                let mut dx = Vector2::zeros();
                for (k, dz) in self.k_lidar.iter().zip(innov) {
                    dx += k * dz;
                }
                self.x += dx;
            }
            self.last_fix = (frame.x_lidar_m, frame.y_lidar_m, frame.t_s);
        } else {
            let innov = Vector2::new(z_v - self.x[0], z_a - self.x[1]);
            self.x += self.k_base * innov;
        }
        self.omega_hat += self.k_omega * (frame.omega_f_radps - self.omega_hat);
        self.omega_hat = self.omega_hat.max(0.0);
        self.x[0] = self.x[0].max(0.0);
        Ok(self.estimate())
    }
}

/// Run a whole trace through a fresh observer.
pub fn filter_trace(
    cfg: &ObserverConfig,
    params: &VehicleParams,
    frames: &[SensorFrame],
) -> Result<Vec<StateEstimate>> {
    let first = frames.first().ok_or(Error::EmptyTrace)?;
    let mut obs = Observer::init(cfg, params, first)?;
    let mut out = vec![obs.estimate()];
    for f in &frames[1..] {
        out.push(obs.update(f)?);
    }
    Ok(out)
}

pub const ESTIMATE_HEADER: &str = "t_s,v_hat,omega_hat,a_hat";

pub fn write_estimates<W: std::io::Write>(mut w: W, rows: &[StateEstimate]) -> Result<()> {
    writeln!(w, "{ESTIMATE_HEADER}")?;
    for e in rows {
        writeln!(
            w,
            "{},{},{},{}",
            e.t_s, e.v_hat_mps, e.omega_hat_radps, e.a_hat_mps2
        )?;
    }
    Ok(())
}
