use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{bump_fourier, BumpProfile, FourierPotential, TorusPoint};
use crate::error::PotentialError;
use crate::lattice::{enumerate_up_to, AspectRatio, DualVector};

/// Scatterers `amplitude · Σ_j W(s(x − ω_j))`, periodized over the torus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScattererConfig {
    positions: Vec<TorusPoint>,
    scale: f64,
    amplitude: f64,
}

impl ScattererConfig {
    pub fn new(
        positions: Vec<TorusPoint>,
        scale: f64,
        amplitude: f64,
        aspect: AspectRatio,
    ) -> Result<Self, PotentialError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(PotentialError::NonPositiveScale(scale));
        }
        let positions = positions.into_iter().map(|p| p.reduce(aspect)).collect();
        Ok(Self {
            positions,
            scale,
            amplitude,
        })
    }

    /// Scale `N^{1/2}` and unit amplitude.
    pub fn weak_coupling(positions: Vec<TorusPoint>, aspect: AspectRatio) -> Result<Self, PotentialError> {
        if positions.is_empty() {
            return Err(PotentialError::EmptyPositions);
        }
        let s = (positions.len() as f64).sqrt();
        Self::new(positions, s, 1.0, aspect)
    }

    pub fn positions(&self) -> &[TorusPoint] {
        &self.positions
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn translated(&self, t: TorusPoint, aspect: AspectRatio) -> Self {
        let positions = self
            .positions
            .iter()
            .map(|p| TorusPoint::new(p.x + t.x, p.y + t.y).reduce(aspect))
            .collect();
        Self {
            positions,
            ..self.clone()
        }
    }
}

/// Fourier data of a scatterer sum, emitted for every `|ζ|² ≤ 4Λ` so that a
/// plane-wave basis with cutoff `Λ` is fully covered.
pub fn scatterer_potential(
    config: &ScattererConfig,
    profile: &BumpProfile,
    aspect: AspectRatio,
    basis_cutoff: f64,
) -> FourierPotential {
    let cutoff = 4.0 * basis_cutoff;
    let half: Vec<DualVector> = enumerate_up_to(cutoff, aspect)
        .into_iter()
        .filter(|z| *z >= DualVector::ZERO)
        .collect();
    let values: Vec<Complex64> = half
        .par_iter()
        .map(|&z| {
            let phases: Complex64 = config
                .positions
                .iter()
                .map(|p| Complex64::from_polar(1.0, -p.phase(z, aspect)))
                .sum();
            phases * bump_fourier(profile, z, config.scale, aspect) * config.amplitude
        })
        .collect();
    let mut coeffs = BTreeMap::new();
    for (z, v) in half.into_iter().zip(values) {
        if z.is_zero() {
            coeffs.insert(z, Complex64::new(v.re, 0.0));
        } else {
            coeffs.insert(z, v);
            coeffs.insert(-z, v.conj());
        }
    }
    let l2 = scatterer_l2_norm(config, profile, aspect);
    FourierPotential::truncated(
        aspect,
        coeffs,
        cutoff,
        l2,
        true,
        Some(profile.support_radius() / config.scale),
    )
}

/// Offsets `d + iP` of a periodic displacement with `|d + iP| < reach`.
fn images(d: f64, period: f64, reach: f64) -> impl Iterator<Item = f64> {
    let lo = ((-reach - d) / period).ceil() as i64;
    let hi = ((reach - d) / period).floor() as i64;
    (lo..=hi).map(move |i| d + i as f64 * period).filter(move |x| x.abs() < reach)
}

/// Exact `‖V_N‖_{L²(T²)}` from pairwise overlaps of the translated bumps,
/// lattice images included.
pub fn scatterer_l2_norm(config: &ScattererConfig, profile: &BumpProfile, aspect: AspectRatio) -> f64 {
    let s = config.scale;
    let [cx, cy] = aspect.cell();
    let (px, py) = (2.0 * PI * cx, 2.0 * PI * cy);
    let reach = 2.0 * profile.radius() / s;
    let pos = &config.positions;
    // per-point partial sums, added in index order for thread-count independence
    let partial: Vec<f64> = pos
        .par_iter()
        .map(|pj| {
            let mut acc = 0.0;
            for pk in pos {
                let [dx, dy] = pj.displacement(pk, aspect);
                let (dx, dy) = (2.0 * PI * dx, 2.0 * PI * dy);
                for ix in images(dx, px, reach) {
                    let ox = profile.overlap_1d(s * ix);
                    for iy in images(dy, py, reach) {
                        acc += ox * profile.overlap_1d(s * iy);
                    }
                }
            }
            acc
        })
        .collect();
    let total: f64 = partial.iter().sum();
    let a = config.amplitude * profile.amplitude();
    (a * a * total / (s * s)).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBoundCheck {
    /// `∫ |V_N|²`
    pub lhs: f64,
    /// `C · max(1, (r√2)²) · ‖V‖²`
    pub rhs: f64,
    pub pass: bool,
}

/// Compares `∫|V_N|²` with the weak-disorder prediction `C r² ‖V‖²`, using
/// the support radius `r√2` of the bump.
pub fn l2_norm_bound_check(
    config: &ScattererConfig,
    profile: &BumpProfile,
    c: f64,
    aspect: AspectRatio,
) -> NormBoundCheck {
    let lhs = scatterer_l2_norm(config, profile, aspect).powi(2);
    let v = config.amplitude.abs() * profile.l2_norm();
    let rhs = c * profile.support_radius().powi(2).max(1.0) * v * v;
    NormBoundCheck {
        lhs,
        rhs,
        pass: lhs <= rhs,
    }
}

/// `α L² Σ_j W(L x − x_j)` with positions given on the unit torus.
#[derive(Debug, Clone)]
pub struct StrongDisorder {
    pub potential: FourierPotential,
    pub config: ScattererConfig,
    pub alpha: f64,
    pub length: u32,
    /// Scatterers per unit area of the rescaled torus, `N / (2πL)²`.
    pub rho: f64,
}

impl StrongDisorder {
    pub fn lambda_of_energy(&self, energy: f64) -> f64 {
        energy * (self.length as f64).powi(2)
    }

    pub fn energy_of_lambda(&self, lambda: f64) -> f64 {
        lambda / (self.length as f64).powi(2)
    }
}

pub fn strong_disorder_potential(
    alpha: f64,
    length: u32,
    omega: Vec<TorusPoint>,
    profile: &BumpProfile,
    aspect: AspectRatio,
    basis_cutoff: f64,
) -> Result<StrongDisorder, PotentialError> {
    if length < 1 {
        return Err(PotentialError::LengthScaleTooSmall(length as f64));
    }
    let l = length as f64;
    let n = omega.len();
    let config = ScattererConfig::new(omega, l, alpha * l * l, aspect)?;
    let potential = scatterer_potential(&config, profile, aspect, basis_cutoff);
    Ok(StrongDisorder {
        potential,
        config,
        alpha,
        length,
        rho: n as f64 / (2.0 * PI * l).powi(2),
    })
}
