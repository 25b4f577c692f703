//! Friction coefficient identification from the slip-slope plateau.
//!
//! Only the plateau of the traction curve is estimated: samples are
//! admitted while |s_x| >= 0.03 and the estimate is the sliding mean of
//! the last N admitted |rho| values. The mean is recomputed from the
//! window on every update rather than applied as an incremental delta,
//! which is algebraically identical for a full window and free of drift.

use std::collections::VecDeque;

use crate::observer::StateEstimate;
use crate::types::VehicleParams;

/// Slip gate below which the estimate is held.
pub const SLIP_GATE: f64 = 0.03;

/// Speeds below this are standstill; slip is undefined there.
pub const STANDSTILL_EPS: f64 = 1e-3;

/// Default sliding-window length.
pub const DEFAULT_WINDOW: usize = 10;

/// Signed slip ratio with a standstill marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slip {
    pub ratio: f64,
    pub standstill: bool,
}

/// s_x = (omega*R - v) / max(omega*R, v), clamped to [-1, 1]; zero with
/// the standstill flag when both speeds are negligible.
pub fn compute_slip(v: f64, omega: f64, wheel_radius: f64) -> Slip {
    let wr = omega * wheel_radius;
    let denom = wr.max(v);
    if denom < STANDSTILL_EPS {
        return Slip {
            ratio: 0.0,
            standstill: true,
        };
    }
    Slip {
        ratio: ((wr - v) / denom).clamp(-1.0, 1.0),
        standstill: false,
    }
}

/// Normalized traction force rho = F_x / F_z = a / g.
pub fn compute_rho(a: f64, g: f64) -> f64 {
    debug_assert!(g > 0.0);
    a / g
}

/// Sliding-mean estimator state.
#[derive(Debug, Clone)]
pub struct FrictionEstimator {
    window: VecDeque<f64>,
    capacity: usize,
    mu_hat: f64,
}

impl FrictionEstimator {
    pub fn new(capacity: usize) -> FrictionEstimator {
        FrictionEstimator {
            window: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
            mu_hat: 0.0,
        }
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Fold one sample in. Gated samples (|s_x| < 0.03 or standstill)
    /// leave the estimate unchanged; admitted samples push |rho| into the
    /// window and the estimate becomes the window mean (partial window
    /// during warm-up).
    pub fn update(&mut self, slip: Slip, rho: f64) -> f64 {
        if slip.standstill || slip.ratio.abs() < SLIP_GATE {
            return self.mu_hat;
        }
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(rho.abs());
        self.mu_hat = self.window.iter().sum::<f64>() / self.window.len() as f64;
        self.mu_hat
    }
}

/// Streaming wrapper feeding observer output into the estimator.
#[derive(Debug, Clone)]
pub struct FrictionStream {
    inner: FrictionEstimator,
    wheel_radius: f64,
    gravity: f64,
}

impl FrictionStream {
    pub fn new(params: &VehicleParams) -> FrictionStream {
        FrictionStream {
            inner: FrictionEstimator::new(DEFAULT_WINDOW),
            wheel_radius: params.wheel_radius_m,
            gravity: params.gravity_mps2,
        }
    }
}

impl super::GroundEstimator for FrictionStream {
    fn mode(&self) -> &'static str {
        "hard"
    }

    fn csv_header(&self) -> &'static str {
        "t_s,mu_hat"
    }

    fn update(&mut self, est: &StateEstimate, _torque_nm: f64) -> Option<Vec<f64>> {
        let slip = compute_slip(est.v_hat_mps, est.omega_hat_radps, self.wheel_radius);
        let rho = compute_rho(est.a_hat_mps2, self.gravity);
        let mu = self.inner.update(slip, rho);
        Some(vec![mu])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slip_matches_definition() {
        let s = compute_slip(1.0, 10.0, 0.1);
        assert_eq!(s.ratio, 0.0);
        assert!(!s.standstill);

        let s = compute_slip(1.0, 5.0, 0.1);
        assert!((s.ratio - (-0.5)).abs() < 1e-15);

        let s = compute_slip(0.0005, 0.001, 0.1);
        assert_eq!(s.ratio, 0.0);
        assert!(s.standstill);
    }

    #[test]
    fn slip_is_clamped_and_sign_correct() {
        for (v, w) in [(0.01, 400.0), (5.0, 0.0), (2.0, 30.0), (3.0, 10.0)] {
            let s = compute_slip(v, w, 0.1);
            assert!(s.ratio.abs() <= 1.0);
            let raw = w * 0.1 - v;
            if raw != 0.0 && !s.standstill {
                assert_eq!(s.ratio.signum(), raw.signum());
            }
        }
    }

    #[test]
    fn rho_is_acceleration_over_gravity() {
        assert_eq!(compute_rho(0.0, 9.81), 0.0);
        assert_eq!(compute_rho(9.81, 9.81), 1.0);
        assert!((compute_rho(-4.4145, 9.81) - (-0.45)).abs() < 1e-12);
    }

    #[test]
    fn gated_samples_leave_estimate_unchanged() {
        let mut est = FrictionEstimator::new(10);
        let admitted = Slip {
            ratio: 0.05,
            standstill: false,
        };
        est.update(admitted, 0.3);
        let before = est.mu_hat();
        est.update(
            Slip {
                ratio: 0.01,
                standstill: false,
            },
            0.9,
        );
        assert_eq!(est.mu_hat(), before);
        est.update(
            Slip {
                ratio: 0.0,
                standstill: true,
            },
            0.9,
        );
        assert_eq!(est.mu_hat(), before);
    }

    #[test]
    fn constant_window_mean_is_exact() {
        let mut est = FrictionEstimator::new(10);
        let s = Slip {
            ratio: -0.08,
            standstill: false,
        };
        for _ in 0..10 {
            est.update(s, -0.45);
        }
        assert!((est.mu_hat() - 0.45).abs() < 1e-15);
        assert_eq!(est.window_len(), 10);
    }

    #[test]
    fn warm_up_uses_partial_window_mean() {
        let mut est = FrictionEstimator::new(10);
        let s = Slip {
            ratio: 0.05,
            standstill: false,
        };
        est.update(s, 0.2);
        assert!((est.mu_hat() - 0.2).abs() < 1e-15);
        est.update(s, 0.4);
        assert!((est.mu_hat() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn window_evicts_oldest() {
        let mut est = FrictionEstimator::new(3);
        let s = Slip {
            ratio: 0.05,
            standstill: false,
        };
        for rho in [1.0, 2.0, 3.0, 4.0] {
            est.update(s, rho);
        }
        // window now [2, 3, 4]
        assert!((est.mu_hat() - 3.0).abs() < 1e-15);
    }
}
