//! Normalized traction curve for hard surfaces.

/// Shape of the traction-vs-slip curve. The normalized traction factor
/// rises linearly to 1 at `slip_breakpoint`, then declines gently to
/// `slide_ratio` at full slide (|s| = 1). Multiplied by mu it yields the
/// normalized traction force rho, so |rho| <= mu everywhere and the curve
/// is odd and continuous.
///
/// The mild decline separates a sliding wheel from one held near the
/// breakpoint: a locked wheel brakes at `slide_ratio * mu * g` while
/// slip-servo braking reaches close to `mu * g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TireCurveConfig {
    pub slip_breakpoint: f64,
    pub slide_ratio: f64,
}

impl Default for TireCurveConfig {
    fn default() -> Self {
        TireCurveConfig {
            slip_breakpoint: 0.03,
            slide_ratio: 0.955,
        }
    }
}

impl TireCurveConfig {
    /// Normalized traction factor in [-1, 1] for a signed slip ratio.
    pub fn traction_factor(&self, slip: f64) -> f64 {
        let bp = self.slip_breakpoint;
        let s = slip.clamp(-1.0, 1.0);
        if s.abs() <= bp {
            s / bp
        } else {
            let decline = (1.0 - self.slide_ratio) * (s.abs() - bp) / (1.0 - bp);
            s.signum() * (1.0 - decline)
        }
    }

    /// d(traction_factor)/d(slip), used by the implicit wheel update.
    pub fn traction_slope(&self, slip: f64) -> f64 {
        let bp = self.slip_breakpoint;
        if slip.abs() <= bp {
            1.0 / bp
        } else {
            -(1.0 - self.slide_ratio) / (1.0 - bp)
        }
    }
}
