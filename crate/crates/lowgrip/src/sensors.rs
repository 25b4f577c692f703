//! Sensor trace synthesis and the trace CSV format.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rollout::RolloutRecord;
use crate::types::SensorFrame;

/// Noise and rate model of the synthesized sensor set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub imu_accel_std: f64,
    pub lidar_pos_std: f64,
    pub encoder_std: f64,
    pub lidar_rate_hz: f64,
    pub fast_rate_hz: f64,
    pub rng_seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            imu_accel_std: 0.2,
            lidar_pos_std: 0.01,
            encoder_std: 0.05,
            lidar_rate_hz: 10.0,
            fast_rate_hz: 90.0,
            rng_seed: 42,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("imu_accel_std", self.imu_accel_std),
            ("lidar_pos_std", self.lidar_pos_std),
            ("encoder_std", self.encoder_std),
        ] {
            if v.is_nan() || v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.lidar_rate_hz > 0.0 && self.fast_rate_hz > 0.0) {
            return Err(Error::InvalidParam("rates must be > 0".into()));
        }
        if self.fast_rate_hz < self.lidar_rate_hz {
            return Err(Error::InvalidParam(
                "fast_rate_hz must be >= lidar_rate_hz".into(),
            ));
        }
        Ok(())
    }

    /// Fast frames per LIDAR update.
    pub fn lidar_divider(&self) -> usize {
        (self.fast_rate_hz / self.lidar_rate_hz).round().max(1.0) as usize
    }
}

fn gaussian(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    // Box-Muller; one draw per call keeps the stream layout simple
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    std * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Turn a rollout into sensor frames at the fast rate. The LIDAR fix is
/// refreshed every `fast/lidar` frames starting one full period in; other
/// frames hold the previous fix and are flagged stale. The IMU channel
/// carries the backward-differenced body acceleration.
pub fn synthesize_sensors(record: &RolloutRecord, noise: &NoiseConfig) -> Result<Vec<SensorFrame>> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    let dt = record.dt_s;
    let div = noise.lidar_divider();
    let mut frames = Vec::with_capacity(record.states.len());
    let mut held_x = record.states[0].x_m + gaussian(&mut rng, noise.lidar_pos_std);
    let mut held_y = record.states[0].y_m + gaussian(&mut rng, noise.lidar_pos_std);
    for (k, st) in record.states.iter().enumerate() {
        let a_true = if k == 0 {
            0.0
        } else {
            (st.v_mps - record.states[k - 1].v_mps) / dt
        };
        // the current measurement reports the command driven over the
        // preceding interval (one sample of transport delay)
        let torque = record.torques[k.saturating_sub(1)];
        let fresh = k > 0 && (k + 1) % div == 0;
        if fresh {
            held_x = st.x_m + gaussian(&mut rng, noise.lidar_pos_std);
            held_y = st.y_m + gaussian(&mut rng, noise.lidar_pos_std);
        }
        frames.push(SensorFrame {
            t_s: k as f64 * dt,
            a_imu_mps2: a_true + gaussian(&mut rng, noise.imu_accel_std),
            x_lidar_m: held_x,
            y_lidar_m: held_y,
            lidar_fresh: fresh,
            omega_f_radps: st.omega_f_radps + gaussian(&mut rng, noise.encoder_std),
            omega_r_radps: st.omega_r_radps + gaussian(&mut rng, noise.encoder_std),
            torque_est_nm: torque,
        });
    }
    Ok(frames)
}

pub const TRACE_HEADER: &str =
    "t_s,a_imu_mps2,x_lidar_m,y_lidar_m,lidar_fresh,omega_f_radps,omega_r_radps,torque_est_Nm";

/// Serialize frames to the fixed-column trace CSV.
pub fn write_trace<W: Write>(mut w: W, frames: &[SensorFrame]) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for f in frames {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            f.t_s,
            f.a_imu_mps2,
            f.x_lidar_m,
            f.y_lidar_m,
            u8::from(f.lidar_fresh),
            f.omega_f_radps,
            f.omega_r_radps,
            f.torque_est_nm
        )?;
    }
    Ok(())
}

pub fn write_trace_file(path: &Path, frames: &[SensorFrame]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trace(std::io::BufWriter::new(file), frames)
}

/// Parse a trace CSV; errors carry the 1-based line number.
pub fn read_trace<R: BufRead>(r: R) -> Result<Vec<SensorFrame>> {
    let mut frames = Vec::new();
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::EmptyTrace),
    };
    if header.trim() != TRACE_HEADER {
        return Err(Error::Csv {
            line: 1,
            msg: format!("bad header: expected '{TRACE_HEADER}'"),
        });
    }
    let mut prev_t = f64::NEG_INFINITY;
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Csv {
                line: lineno,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|e| Error::Csv {
                line: lineno,
                msg: format!("field {}: {e}", i + 1),
            })
        };
        let frame = SensorFrame {
            t_s: num(0)?,
            a_imu_mps2: num(1)?,
            x_lidar_m: num(2)?,
            y_lidar_m: num(3)?,
            lidar_fresh: num(4)? != 0.0,
            omega_f_radps: num(5)?,
            omega_r_radps: num(6)?,
            torque_est_nm: num(7)?,
        };
        if !frame.is_finite() {
            return Err(Error::Csv {
                line: lineno,
                msg: "non-finite value".into(),
            });
        }
        if frame.t_s <= prev_t {
            return Err(Error::Csv {
                line: lineno,
                msg: format!("non-increasing timestamp {}", frame.t_s),
            });
        }
        prev_t = frame.t_s;
        frames.push(frame);
    }
    if frames.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(frames)
}

pub fn read_trace_file(path: &Path) -> Result<Vec<SensorFrame>> {
    let file = std::fs::File::open(path)?;
    read_trace(std::io::BufReader::new(file))
}
