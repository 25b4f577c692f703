//! Online ground-parameter estimators.
//!
//! Two interchangeable estimators sit behind [`GroundEstimator`], keyed
//! by mode name: `hard` identifies the friction coefficient from the
//! slip-slope plateau, `deformable` identifies soil cohesion and shear
//! angle by linear least squares. Both consume observer output plus the
//! measured motor torque and emit CSV rows.

pub mod friction;
pub mod terra;

use crate::error::{Error, Result};
use crate::observer::StateEstimate;
use crate::types::VehicleParams;

pub use friction::{compute_rho, compute_slip, FrictionEstimator, Slip};
pub use terra::{kappa_terms, terra_solve, TerraDataPoint, TerraEstimate, TerraEstimator};

/// A streaming ground-parameter estimator fed one filtered frame at a
/// time. `update` returns the current estimate row for the output CSV.
pub trait GroundEstimator {
    fn mode(&self) -> &'static str;
    fn csv_header(&self) -> &'static str;
    fn update(&mut self, est: &StateEstimate, torque_nm: f64) -> Option<Vec<f64>>;
}

/// Build the estimator registered under `mode`. Deformable mode requires
/// the known sinkage.
pub fn build_estimator(
    mode: &str,
    params: &VehicleParams,
    sinkage_m: Option<f64>,
) -> Result<Box<dyn GroundEstimator>> {
    match mode {
        "hard" => Ok(Box::new(friction::FrictionStream::new(params))),
        "deformable" => {
            let z = sinkage_m.ok_or_else(|| {
                Error::InvalidParam("deformable mode requires sinkage (--z)".into())
            })?;
            Ok(Box::new(terra::TerraStream::new(params, z)?))
        }
        other => Err(Error::InvalidParam(format!("unknown mode '{other}'"))),
    }
}

/// Replay filtered estimates through an estimator, collecting CSV rows.
pub fn replay<E: GroundEstimator + ?Sized>(
    estimator: &mut E,
    estimates: &[StateEstimate],
    torques: &[f64],
) -> Vec<(f64, Vec<f64>)> {
    estimates
        .iter()
        .zip(torques)
        .filter_map(|(e, tq)| estimator.update(e, *tq).map(|row| (e.t_s, row)))
        .collect()
}
