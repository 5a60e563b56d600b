use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::PotentialError;
use crate::lattice::{AspectRatio, DualVector};

/// Separable raised-cosine bump
/// `W(u) = A · Π_i (1 + cos(π u_i / r)) / 2` on `[−r, r]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    radius: f64,
    amplitude: f64,
}

impl BumpProfile {
    pub fn new(radius: f64, amplitude: f64) -> Result<Self, PotentialError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(PotentialError::NonPositiveRadius(radius));
        }
        Ok(Self { radius, amplitude })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Radius of a disc containing the support, `r√2`.
    pub fn support_radius(&self) -> f64 {
        self.radius * std::f64::consts::SQRT_2
    }

    /// One-dimensional profile `(1 + cos(π u / r)) / 2` on `[−r, r]`.
    pub fn profile_1d(&self, u: f64) -> f64 {
        if u.abs() > self.radius {
            0.0
        } else {
            0.5 * (1.0 + (PI * u / self.radius).cos())
        }
    }

    pub fn value(&self, u: [f64; 2]) -> f64 {
        self.amplitude * self.profile_1d(u[0]) * self.profile_1d(u[1])
    }

    /// `∫ e^{−iku} (1 + cos(πu/r))/2 du = sin(kr)/k · π²/(π² − k²r²)`.
    pub fn transform_1d(&self, k: f64) -> f64 {
        let r = self.radius;
        let t = (k * r).abs();
        if t < 0.5 * PI {
            r * sinc(t) * PI * PI / (PI * PI - t * t)
        } else {
            // sin t = sin(π − t) removes the apparent pole at t = π
            r * PI * PI * sinc(PI - t) / (t * (PI + t))
        }
    }

    /// `Ŵ(k) = ∫ W(u) e^{−i⟨k,u⟩} du`.
    pub fn transform(&self, k: [f64; 2]) -> f64 {
        self.amplitude * self.transform_1d(k[0]) * self.transform_1d(k[1])
    }

    /// `‖W‖_{L²(R²)} = |A| · 3r/4`.
    pub fn l2_norm(&self) -> f64 {
        self.amplitude.abs() * 0.75 * self.radius
    }

    /// One-dimensional autocorrelation `∫ g(u) g(u − d) du` of the profile.
    pub fn overlap_1d(&self, d: f64) -> f64 {
        let r = self.radius;
        let d = d.abs();
        if d >= 2.0 * r {
            return 0.0;
        }
        let alpha = PI / r;
        let len = 2.0 * r - d;
        0.25 * (len * (1.0 + 0.5 * (alpha * d).cos()) + 1.5 * (alpha * d).sin() / alpha)
    }

    /// `∫ W(u) W(u − d) du` over `R²`.
    pub fn overlap(&self, d: [f64; 2]) -> f64 {
        self.amplitude * self.amplitude * self.overlap_1d(d[0]) * self.overlap_1d(d[1])
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Coefficient `v(ζ)` of the periodized bump `W(s·x)` centred at the origin:
/// `Ŵ(ζ/s) / (4π² s²)`.
pub fn bump_fourier(profile: &BumpProfile, zeta: DualVector, scale: f64, aspect: AspectRatio) -> Complex64 {
    let [k1, k2] = zeta.embed(aspect);
    let v = profile.transform([k1 / scale, k2 / scale]) / (4.0 * PI * PI * scale * scale);
    Complex64::new(v, 0.0)
}
