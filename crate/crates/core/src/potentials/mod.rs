//! Potentials in Fourier space.
//!
//! A potential is stored through its coefficients in
//! `V(x) = Σ_ζ v(ζ) e^{i⟨ζ,x⟩}`, so that `⟨V e_η, e_ξ⟩ = v(ξ − η)` and
//! `‖V‖² = 4π² Σ |v(ζ)|²`.
//!
//! Points on the torus are stored in covolume-one coordinates `y` in the cell
//! `[0, a) × [0, 1/a)`; the physical point is `x = 2π y`, and
//! `⟨ζ, x⟩ = 2π (m y₁ / a + n a y₂)`.

mod bump;
mod disorder;
mod scatterer;

pub use bump::{bump_fourier, BumpProfile};
pub use disorder::{
    default_radius_grid, distorted_lattice, grid_positions, rdm_sample, weak_disorder_check,
    DisplacementLaw, RadiusSummary, RdmConfig, WeakDisorderReport, WitnessBall,
};
pub use scatterer::{
    l2_norm_bound_check, scatterer_l2_norm, scatterer_potential, strong_disorder_potential,
    NormBoundCheck, ScattererConfig, StrongDisorder,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::PotentialError;
use crate::lattice::{q_form, AspectRatio, DualVector};

/// Point of the torus in covolume-one coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Representative inside `[0, a) × [0, 1/a)`.
    pub fn reduce(self, aspect: AspectRatio) -> Self {
        let [cx, cy] = aspect.cell();
        Self::new(wrap(self.x, cx), wrap(self.y, cy))
    }

    /// `⟨ζ, x⟩` for the physical point `x = 2π y`.
    pub fn phase(&self, zeta: DualVector, aspect: AspectRatio) -> f64 {
        let a = aspect.a();
        2.0 * PI * (zeta.m as f64 * self.x / a + zeta.n as f64 * a * self.y)
    }

    /// Minimum-image displacement `other − self`.
    pub fn displacement(&self, other: &TorusPoint, aspect: AspectRatio) -> [f64; 2] {
        let [cx, cy] = aspect.cell();
        [min_image(other.x - self.x, cx), min_image(other.y - self.y, cy)]
    }

    pub fn distance(&self, other: &TorusPoint, aspect: AspectRatio) -> f64 {
        let [dx, dy] = self.displacement(other, aspect);
        dx.hypot(dy)
    }
}

fn wrap(v: f64, period: f64) -> f64 {
    let r = v.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

fn min_image(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "cutoff", rename_all = "snake_case")]
pub enum Coverage {
    /// Every nonzero coefficient is stored.
    Complete,
    /// Coefficients are stored for `|ζ|² ≤ cutoff` only.
    UpTo(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierPotential {
    aspect: AspectRatio,
    coeffs: BTreeMap<DualVector, Complex64>,
    l2_norm: f64,
    real: bool,
    coverage: Coverage,
    support_radius: Option<f64>,
}

impl FourierPotential {
    pub fn zero(aspect: AspectRatio) -> Self {
        Self {
            aspect,
            coeffs: BTreeMap::new(),
            l2_norm: 0.0,
            real: true,
            coverage: Coverage::Complete,
            support_radius: None,
        }
    }

    /// Truncated coefficient data with an externally known exact norm.
    pub fn truncated(
        aspect: AspectRatio,
        coeffs: BTreeMap<DualVector, Complex64>,
        cutoff: f64,
        l2_norm: f64,
        real: bool,
        support_radius: Option<f64>,
    ) -> Self {
        Self {
            aspect,
            coeffs,
            l2_norm,
            real,
            coverage: Coverage::UpTo(cutoff),
            support_radius,
        }
    }

    pub fn aspect(&self) -> AspectRatio {
        self.aspect
    }

    pub fn coeffs(&self) -> &BTreeMap<DualVector, Complex64> {
        &self.coeffs
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// `v(ζ)`, or an error when `ζ` lies beyond the stored truncation.
    pub fn coefficient(&self, zeta: DualVector) -> Result<Complex64, PotentialError> {
        if let Some(v) = self.coeffs.get(&zeta) {
            return Ok(*v);
        }
        match self.coverage {
            Coverage::Complete => Ok(Complex64::new(0.0, 0.0)),
            Coverage::UpTo(cutoff) => {
                if q_form(zeta, self.aspect).le_real(cutoff) {
                    Ok(Complex64::new(0.0, 0.0))
                } else {
                    Err(PotentialError::MissingCoefficient { zeta, cutoff })
                }
            }
        }
    }

    /// Whether `v(ζ)` is available for every `|ζ|² ≤ t`.
    pub fn covers(&self, t: f64) -> bool {
        match self.coverage {
            Coverage::Complete => true,
            Coverage::UpTo(cutoff) => t <= cutoff,
        }
    }

    /// `Σ |v(ζ)|` over the stored coefficients.
    pub fn coefficient_l1(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).sum()
    }

    /// `2π (Σ |v(ζ)|²)^{1/2}` over the stored coefficients.
    pub fn parseval_norm(&self) -> f64 {
        2.0 * PI * self.coeffs.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖V‖² − 4π² Σ|v|²`, the mass carried by coefficients not stored.
    pub fn truncation_tail(&self) -> f64 {
        self.l2_norm.powi(2) - self.parseval_norm().powi(2)
    }

    /// The potential `t·V`.
    pub fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v *= t;
        }
        out.l2_norm *= t.abs();
        out
    }

    /// Pointwise value `V(x)` at the physical point `2π y`, from stored data.
    pub fn evaluate(&self, point: TorusPoint) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(z, v)| v * Complex64::from_polar(1.0, point.phase(*z, self.aspect)))
            .sum()
    }
}

/// Potential given by a finite list of Fourier coefficients.
///
/// With `real` set, `v(−ζ) = conj v(ζ)` is required to relative precision
/// `1e−12`; a missing partner counts as zero.
pub fn trig_potential(
    aspect: AspectRatio,
    coeffs: impl IntoIterator<Item = (DualVector, Complex64)>,
    real: bool,
) -> Result<FourierPotential, PotentialError> {
    let mut map = BTreeMap::new();
    for (z, v) in coeffs {
        *map.entry(z).or_insert(Complex64::new(0.0, 0.0)) += v;
    }
    if real {
        let scale = map.values().map(|v| v.norm()).fold(0.0, f64::max);
        let zero = Complex64::new(0.0, 0.0);
        for (z, v) in &map {
            let partner = map.get(&-*z).copied().unwrap_or(zero);
            if (partner - v.conj()).norm() > 1e-12 * scale {
                return Err(PotentialError::SymmetryViolation { zeta: *z });
            }
        }
    }
    let mut out = FourierPotential {
        aspect,
        coeffs: map,
        l2_norm: 0.0,
        real,
        coverage: Coverage::Complete,
        support_radius: None,
    };
    out.l2_norm = out.parseval_norm();
    Ok(out)
}

/// `V(x) = 2c cos x₁`, the workhorse test potential on the square torus.
pub fn cosine_potential(aspect: AspectRatio, c: f64) -> FourierPotential {
    let v = Complex64::new(c, 0.0);
    trig_potential(
        aspect,
        [(DualVector::new(1, 0), v), (DualVector::new(-1, 0), v)],
        true,
    )
    .expect("symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_norm_by_parseval() {
        let v = trig_potential(
            AspectRatio::square(),
            [
                (DualVector::new(1, 0), Complex64::new(0.5, 0.0)),
                (DualVector::new(-1, 0), Complex64::new(0.5, 0.0)),
            ],
            true,
        )
        .unwrap();
        assert!((v.l2_norm().powi(2) - 2.0 * PI * PI).abs() < 1e-12);
        let x = TorusPoint::new(0.3 / (2.0 * PI), 0.0);
        assert!((v.evaluate(x).re - 0.3f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn empty_map_is_zero() {
        let v = trig_potential(AspectRatio::square(), [], true).unwrap();
        assert!(v.is_zero());
        assert_eq!(v.l2_norm(), 0.0);
    }

    #[test]
    fn asymmetric_real_flag_rejected() {
        let err = trig_potential(
            AspectRatio::square(),
            [
                (DualVector::new(1, 0), Complex64::new(0.0, 1.0)),
                (DualVector::new(-1, 0), Complex64::new(0.0, 1.0)),
            ],
            true,
        )
        .unwrap_err();
        assert!(matches!(err, PotentialError::SymmetryViolation { .. }));
    }

    #[test]
    fn truncated_coverage_reports_missing() {
        let mut map = BTreeMap::new();
        map.insert(DualVector::ZERO, Complex64::new(1.0, 0.0));
        let v = FourierPotential::truncated(AspectRatio::square(), map, 4.0, 3.0, true, None);
        assert_eq!(v.coefficient(DualVector::new(2, 0)).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(
            v.coefficient(DualVector::new(2, 1)),
            Err(PotentialError::MissingCoefficient { .. })
        ));
    }

    #[test]
    fn reduce_and_min_image() {
        let aspect = AspectRatio::new(2, 1).unwrap();
        let [cx, cy] = aspect.cell();
        let p = TorusPoint::new(-0.25 * cx, 1.5 * cy).reduce(aspect);
        assert!((p.x - 0.75 * cx).abs() < 1e-15 && (p.y - 0.5 * cy).abs() < 1e-15);
        let q = TorusPoint::new(0.05 * cx, 0.0);
        let r = TorusPoint::new(0.95 * cx, 0.0);
        assert!((q.distance(&r, aspect) - 0.1 * cx).abs() < 1e-14);
    }
}
