//! Wheel-soil interaction for a deformable layer.
//!
//! The wheel's equilibrium drive torque on soil is modeled from the shear
//! stress (c + sigma * tan(phi)) acting over the contact patch of entry
//! angle beta = arccos((R - z)/R). The same torque relation is what the
//! terramechanics estimator inverts, so the plant and the estimator are
//! mutually consistent by construction. The net longitudinal force is
//! anchored so that a freely rolling wheel sees only the sinkage
//! compaction drag, and tends to the hard-surface model with
//! mu = tan(phi) as the layer vanishes.

use crate::tire::TireCurveConfig;
use crate::types::VehicleParams;

/// Precomputed contact terms for one (ground, vehicle) pairing.
#[derive(Debug, Clone, Copy)]
pub struct SoilContact {
    pub sinkage_m: f64,
    pub cohesion_pa: f64,
    pub tan_phi: f64,
    /// Contact entry angle beta = arccos((R - z)/R).
    pub beta: f64,
    radius: f64,
    width: f64,
    weight_n: f64,
    /// Blend toward the pure soil model as sinkage grows; ~0 as z -> 0.
    blend: f64,
    /// Equilibrium torque at pure rolling (zeta = 0); force anchor.
    torque_at_rolling: f64,
    /// Equilibrium torque with the wheel fully skidding (zeta = 1).
    torque_at_lock: f64,
    /// Compaction resistance, proportional to sinkage.
    pub compaction_n: f64,
    /// Friction-circle bound for lateral acceleration, in g units.
    pub mu_lat: f64,
}

/// Sinkage scale over which the soil model takes over from the
/// hard-surface limit.
pub const SOIL_BLEND_DEPTH_M: f64 = 0.005;

/// Compaction drag coefficient: R_comp = COMPACTION_COEFF * (z/R) * m * g.
pub const COMPACTION_COEFF: f64 = 0.4;

impl SoilContact {
    pub fn new(
        sinkage_m: f64,
        cohesion_pa: f64,
        shear_angle_rad: f64,
        params: &VehicleParams,
    ) -> SoilContact {
        let radius = params.wheel_radius_m;
        let width = params.wheel_width_m;
        let weight_n = params.weight_n();
        let beta = ((radius - sinkage_m) / radius).clamp(-1.0, 1.0).acos();
        let tan_phi = shear_angle_rad.tan();
        let blend = (sinkage_m / SOIL_BLEND_DEPTH_M).min(1.0);
        let compaction_n = COMPACTION_COEFF * (sinkage_m / radius) * weight_n;

        let mut contact = SoilContact {
            sinkage_m,
            cohesion_pa,
            tan_phi,
            beta,
            radius,
            width,
            weight_n,
            blend,
            torque_at_rolling: 0.0,
            torque_at_lock: 0.0,
            compaction_n,
            mu_lat: 0.0,
        };
        contact.torque_at_rolling = contact.equilibrium_torque(0.0);
        contact.torque_at_lock = contact.equilibrium_torque(1.0);
        let lock_force = (contact.torque_at_lock - contact.torque_at_rolling).min(0.0) / radius;
        contact.mu_lat = (1.0 - blend) * tan_phi + blend * lock_force.abs() / weight_n;
        contact
    }

    /// Drive torque that holds the wheel in equilibrium at skid ratio
    /// `zeta` = 1 - omega*R/v. Positive means drive is needed to sustain
    /// rolling (plowing resistance); negative means braking torque is
    /// needed to hold the skid.
    pub fn equilibrium_torque(&self, zeta: f64) -> f64 {
        let beta = self.beta;
        let half = beta / 2.0;
        let alpha = 1.0
            - ((self.radius / self.width) * (half + (1.0 - zeta) * (-beta.sin() + half.sin())))
                .exp();
        let c2 = beta.cos() - 2.0 * half.cos() + 1.0;
        let s1 = beta.sin() - 2.0 * half.sin();
        let kappa3 = beta * self.radius * self.radius * self.width * c2 * (1.0 + 2.0 * alpha);
        let num = self.cohesion_pa * kappa3
            - self.tan_phi * alpha * beta * beta * self.weight_n * self.radius;
        let den = 4.0 * c2 + 4.0 * alpha * self.tan_phi * s1;
        if den.abs() < 1e-12 {
            return 0.0;
        }
        num / den
    }

    /// Torque the soil exerts against the wheel's rotation state; the
    /// wheel obeys I * d(omega)/dt = T_applied - reaction.
    pub fn wheel_reaction_torque(&self, zeta: f64) -> f64 {
        self.equilibrium_torque(zeta.clamp(0.0, 1.0))
    }

    /// Net longitudinal force on the vehicle (N, signed; negative brakes a
    /// forward-moving vehicle). `slip` is the signed slip ratio and `zeta`
    /// the braking skid ratio clamped to [0, 1].
    ///
    /// The shear term is the torque-curve drop from the rolling point,
    /// scaled by the squared skid ratio: mobilization grows progressively
    /// as material accumulates ahead of a skidding wheel, and a blocked
    /// wheel mobilizes the full contact.
    pub fn longitudinal_force(&self, slip: f64, zeta: f64, tire: &TireCurveConfig, v: f64) -> f64 {
        let hard_like = self.weight_n * self.tan_phi * tire.traction_factor(slip);
        let zeta = zeta.clamp(0.0, 1.0);
        let shear = zeta * zeta * (self.equilibrium_torque(zeta) - self.torque_at_rolling).min(0.0)
            / self.radius;
        let drag = if v > 0.0 { -self.compaction_n } else { 0.0 };
        (1.0 - self.blend) * hard_like + self.blend * shear + drag
    }
}
