//! Equidistribution discrepancies, decay rates and localization-length bounds.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::DiagnosticsError;
use crate::lattice::{enumerate_up_to, q_form, AspectRatio, DualVector, QValue};
use crate::solver::{truncate_eigenfunction, BasisSet, EigenPair, TruncatedPair};

/// Test function `a(x) = Σ_ζ â(ζ) e^{i⟨ζ,x⟩}` with finitely many terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub id: String,
    coeffs: BTreeMap<DualVector, Complex64>,
    /// Decay exponent `K` of synthetic smooth observables.
    pub smoothness: Option<f64>,
}

impl Observable {
    pub fn new(id: impl Into<String>, coeffs: impl IntoIterator<Item = (DualVector, Complex64)>) -> Self {
        let mut map = BTreeMap::new();
        for (z, v) in coeffs {
            *map.entry(z).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        Self {
            id: id.into(),
            coeffs: map,
            smoothness: None,
        }
    }

    /// `e^{i⟨ζ,x⟩}`
    pub fn monomial(zeta: DualVector) -> Self {
        Self::new(format!("exp{zeta}"), [(zeta, Complex64::new(1.0, 0.0))])
    }

    /// `cos⟨ζ,x⟩`
    pub fn cosine(zeta: DualVector) -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self::new(format!("cos{zeta}"), [(zeta, h), (-zeta, h)])
    }

    /// `sin⟨ζ,x⟩`
    pub fn sine(zeta: DualVector) -> Self {
        Self::new(
            format!("sin{zeta}"),
            [(zeta, Complex64::new(0.0, -0.5)), (-zeta, Complex64::new(0.0, 0.5))],
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const{c}"), [(DualVector::ZERO, Complex64::new(c, 0.0))])
    }

    /// Zero-mean real observable with `â(ζ) = |ζ|^{−K}` for `0 < |ζ| ≤ radius`.
    pub fn smooth(k: f64, radius: f64, aspect: AspectRatio) -> Self {
        let coeffs = enumerate_up_to(radius * radius, aspect)
            .into_iter()
            .filter(|z| !z.is_zero())
            .map(|z| (z, Complex64::new(q_form(z, aspect).to_f64().powf(-k / 2.0), 0.0)));
        let mut out = Self::new(format!("smooth_K{k}_R{radius}"), coeffs);
        out.smoothness = Some(k);
        out
    }

    pub fn coeffs(&self) -> &BTreeMap<DualVector, Complex64> {
        &self.coeffs
    }

    pub fn coefficient(&self, zeta: DualVector) -> Complex64 {
        self.coeffs.get(&zeta).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `â(0) = (1/4π²) ∫ a dμ`
    pub fn mean(&self) -> Complex64 {
        self.coefficient(DualVector::ZERO)
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean() == Complex64::new(0.0, 0.0)
    }

    pub fn is_real(&self) -> bool {
        let scale = self.l1_norm();
        self.coeffs
            .iter()
            .all(|(z, v)| (self.coefficient(-*z) - v.conj()).norm() <= 1e-12 * scale)
    }

    /// `‖â‖_{ℓ¹}`, which also bounds `‖a‖_∞`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).sum()
    }

    /// `a + c`
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        *out.coeffs.entry(DualVector::ZERO).or_insert(Complex64::new(0.0, 0.0)) += c;
        out
    }

    /// Largest `|ζ|²` in the support.
    pub fn support_norm(&self, aspect: AspectRatio) -> f64 {
        self.coeffs
            .keys()
            .map(|z| q_form(*z, aspect).to_f64())
            .fold(0.0, f64::max)
    }
}

/// Plane-wave coefficients of a wavefunction over a basis.
pub trait Wavefunction {
    fn basis(&self) -> &BasisSet;
    fn coefficients(&self) -> &[Complex64];
}

impl Wavefunction for EigenPair {
    fn basis(&self) -> &BasisSet {
        &self.basis
    }

    fn coefficients(&self) -> &[Complex64] {
        &self.psi
    }
}

impl Wavefunction for TruncatedPair {
    fn basis(&self) -> &BasisSet {
        &self.parent.basis
    }

    fn coefficients(&self) -> &[Complex64] {
        &self.psi_inside
    }
}

/// `Σ_ξ ψ̂(ξ) conj ψ̂(ξ − ζ)` over the wavefunction's support.
pub fn pair_correlation<W: Wavefunction + ?Sized>(psi: &W, zeta: DualVector) -> Complex64 {
    let basis = psi.basis();
    let c = psi.coefficients();
    basis
        .vectors()
        .iter()
        .zip(c)
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .filter_map(|(xi, a)| basis.index_of(*xi - zeta).map(|j| a * c[j].conj()))
        .sum()
}

/// `∫ a |ψ|² dμ = Σ_ζ â(ζ) · pair_correlation(ψ, −ζ)`.
pub fn matrix_element<W: Wavefunction + ?Sized>(a: &Observable, psi: &W) -> Complex64 {
    a.coeffs().iter().map(|(z, v)| v * pair_correlation(psi, -*z)).sum()
}

/// Exponents `θ`, `ε` of the equidistribution rate `(1 − 3θ)/2 − ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateParams {
    pub theta: Ratio<i64>,
    pub epsilon: Ratio<i64>,
}

impl Default for RateParams {
    fn default() -> Self {
        Self {
            theta: Ratio::new(517, 1648),
            epsilon: Ratio::new(1, 100),
        }
    }
}

impl RateParams {
    pub fn conjectured() -> Self {
        Self {
            theta: Ratio::new(1, 4),
            ..Self::default()
        }
    }

    pub fn theta_f64(&self) -> f64 {
        self.theta.to_f64().unwrap_or(f64::NAN)
    }

    pub fn epsilon_f64(&self) -> f64 {
        self.epsilon.to_f64().unwrap_or(f64::NAN)
    }

    /// `2 + 3θ + ε`
    pub fn length_exponent(&self) -> Ratio<i64> {
        Ratio::from_integer(2) + self.theta * 3 + self.epsilon
    }
}

/// `(1 − 3θ)/2 − ε`, exactly.
pub fn theoretical_rate_exact(params: &RateParams) -> Ratio<i64> {
    (Ratio::from_integer(1) - params.theta * 3) / 2 - params.epsilon
}

pub fn theoretical_rate(params: &RateParams) -> f64 {
    theoretical_rate_exact(params).to_f64().unwrap_or(f64::NAN)
}

/// `‖V‖ λ^{−rate}`, undefined (NaN) for `λ ≤ 0`.
pub fn envelope(v_norm: f64, lambda: f64, params: &RateParams) -> f64 {
    if lambda > 0.0 {
        v_norm * lambda.powf(-theoretical_rate(params))
    } else {
        f64::NAN
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRecord {
    pub lambda: f64,
    pub n_k: Option<QValue>,
    pub in_sigma: bool,
    pub truncation_safe: bool,
    pub observable_id: String,
    /// `|∫ a|ψ|² − â(0)|`
    pub discrepancy: f64,
    /// `‖ψ^R‖²` for the annulus `A(n_k, n_k^δ)`.
    pub tail_mass: Option<f64>,
    pub envelope: f64,
    /// `min ||ξ − ζ|² − λ|` over `ξ ∈ A(n_k, n_k^δ)` and `ζ ≠ 0` in the
    /// observable's support.
    pub ann_min_gap: Option<f64>,
}

fn annulus_min_gap(trunc: &TruncatedPair, zetas: impl Iterator<Item = DualVector> + Clone) -> Option<f64> {
    let aspect = trunc.parent.basis.aspect();
    let lambda = trunc.parent.lambda;
    let mut best: Option<f64> = None;
    for (xi, inside) in trunc.parent.basis.vectors().iter().zip(&trunc.inside) {
        if !inside {
            continue;
        }
        for z in zetas.clone() {
            let g = (q_form(*xi - z, aspect).to_f64() - lambda).abs();
            best = Some(best.map_or(g, |b: f64| b.min(g)));
        }
    }
    best
}

pub fn discrepancy(
    a: &Observable,
    pair: &EigenPair,
    v_norm: f64,
    rate: &RateParams,
    delta: f64,
) -> Result<DiscrepancyRecord, DiagnosticsError> {
    if !a.is_real() {
        return Err(DiagnosticsError::NotReal);
    }
    let d = (matrix_element(a, pair) - a.mean()).norm();
    let trunc = truncate_eigenfunction(pair, delta).ok();
    let zetas = a.coeffs().keys().copied().filter(|z| !z.is_zero());
    Ok(DiscrepancyRecord {
        lambda: pair.lambda,
        n_k: pair.bracket.lower,
        in_sigma: pair.in_sigma,
        truncation_safe: pair.truncation_safe,
        observable_id: a.id.clone(),
        discrepancy: d,
        tail_mass: trunc.as_ref().map(|t| t.tail_mass),
        envelope: envelope(v_norm, pair.lambda, rate),
        ann_min_gap: trunc.as_ref().and_then(|t| annulus_min_gap(t, zetas)),
    })
}

/// Restriction to `|ζ| ≤ cutoff` and the `ℓ¹` mass left out.
pub fn truncate_observable(a: &Observable, cutoff: f64, aspect: AspectRatio) -> (Observable, f64) {
    let mut kept = Vec::new();
    let mut tail = 0.0;
    for (z, v) in a.coeffs() {
        if q_form(*z, aspect).le_real(cutoff * cutoff) {
            kept.push((*z, *v));
        } else {
            tail += v.norm();
        }
    }
    let mut out = Observable::new(format!("{}|{cutoff}", a.id), kept);
    out.smoothness = a.smoothness;
    (out, tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquiCondition {
    /// `ρ |α| ‖V‖ L^{2+3θ+ε}`
    pub lhs: f64,
    /// `E^{(1−3θ)/2−ε}`
    pub rhs: f64,
    pub satisfied: bool,
}

fn positive(name: &'static str, value: f64) -> Result<(), DiagnosticsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(DiagnosticsError::NonPositive { name, value })
    }
}

pub fn equi_condition(
    rho: f64,
    alpha: f64,
    v_norm: f64,
    length: f64,
    energy: f64,
    params: &RateParams,
) -> Result<EquiCondition, DiagnosticsError> {
    positive("rho", rho)?;
    positive("v_norm", v_norm)?;
    positive("L", length)?;
    positive("E", energy)?;
    let exp = params.length_exponent().to_f64().unwrap_or(f64::NAN);
    let lhs = rho * alpha.abs() * v_norm * length.powf(exp);
    let rhs = energy.powf(theoretical_rate(params));
    Ok(EquiCondition {
        lhs,
        rhs,
        satisfied: lhs < rhs,
    })
}

/// `(E^{(1−3θ)/2−ε} / (ρ |α| ‖V‖))^{1/(2+3θ+ε)}`
pub fn localization_bound(
    alpha: f64,
    energy: f64,
    rho: f64,
    v_norm: f64,
    params: &RateParams,
) -> Result<f64, DiagnosticsError> {
    if alpha == 0.0 {
        return Err(DiagnosticsError::ZeroCoupling);
    }
    positive("E", energy)?;
    positive("rho", rho)?;
    positive("v_norm", v_norm)?;
    let exp = params.length_exponent().to_f64().unwrap_or(f64::NAN);
    Ok((energy.powf(theoretical_rate(params)) / (rho * alpha.abs() * v_norm)).powf(1.0 / exp))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// `max D / envelope` over the fitted records.
    pub fitted_c: f64,
    pub used: usize,
}

/// Discrepancies at or below this are treated as exact zeros.
pub const ZERO_DISCREPANCY: f64 = 1e-12;

/// Least-squares fit of `log D` against `log λ` over records in `Σ` that
/// are truncation-safe and have `D > 1e−12`.
pub fn decay_fit(records: &[DiscrepancyRecord]) -> Result<DecayFit, DiagnosticsError> {
    let eligible: Vec<&DiscrepancyRecord> = records
        .iter()
        .filter(|r| r.in_sigma && r.truncation_safe && r.lambda > 0.0)
        .collect();
    let usable: Vec<&DiscrepancyRecord> = eligible
        .iter()
        .copied()
        .filter(|r| r.discrepancy > ZERO_DISCREPANCY)
        .collect();
    if usable.is_empty() && !eligible.is_empty() {
        return Err(DiagnosticsError::AllZero);
    }
    let mut lambdas: Vec<f64> = usable.iter().map(|r| r.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    if lambdas.len() < 8 {
        return Err(DiagnosticsError::TooFewRecords(lambdas.len()));
    }
    let n = usable.len() as f64;
    let xs: Vec<f64> = usable.iter().map(|r| r.lambda.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.discrepancy.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let fitted_c = usable
        .iter()
        .map(|r| r.discrepancy / r.envelope)
        .fold(0.0, f64::max);
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        fitted_c,
        used: usable.len(),
    })
}

/// Finite-size form of the equidistribution chain for the monomial `e_ζ`:
/// `D ≤ ‖V‖ g⁻¹ (#A)^{1/2} + 2‖ψ^R‖ + ‖ψ^R‖²` with
/// `g = min_{ξ∈A} ||ξ − ζ|² − λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainCheck {
    pub zeta: DualVector,
    pub discrepancy: f64,
    pub min_gap: f64,
    pub annulus_size: usize,
    pub tail_norm: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn chain_check(trunc: &TruncatedPair, zeta: DualVector, v_norm: f64) -> ChainCheck {
    let pair = &trunc.parent;
    let discrepancy = (matrix_element(&Observable::monomial(zeta), pair)
        - if zeta.is_zero() { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    .norm();
    let min_gap = annulus_min_gap(trunc, std::iter::once(zeta)).unwrap_or(f64::INFINITY);
    let tail_norm = trunc.tail_mass.sqrt();
    let main = if min_gap > 0.0 {
        v_norm * (trunc.annulus_size as f64).sqrt() / min_gap
    } else {
        f64::INFINITY
    };
    let bound = main + 2.0 * tail_norm + tail_norm * tail_norm;
    ChainCheck {
        zeta,
        discrepancy,
        min_gap,
        annulus_size: trunc.annulus_size,
        tail_norm,
        bound,
        pass: discrepancy <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_are_exact() {
        let r = theoretical_rate_exact(&RateParams {
            theta: Ratio::new(1, 4),
            epsilon: Ratio::from_integer(0),
        });
        assert_eq!(r, Ratio::new(1, 8));
        let r = theoretical_rate_exact(&RateParams {
            theta: Ratio::new(517, 1648),
            epsilon: Ratio::from_integer(0),
        });
        assert_eq!(r, Ratio::new(97, 3296));
        let r = theoretical_rate_exact(&RateParams {
            theta: Ratio::new(1, 3),
            epsilon: Ratio::from_integer(0),
        });
        assert_eq!(r, Ratio::from_integer(0));
    }

    #[test]
    fn equi_condition_threshold() {
        let p = RateParams {
            theta: Ratio::new(1, 4),
            epsilon: Ratio::from_integer(0),
        };
        let at = |e: f64| equi_condition(1.0, 1.0, 1.0, 2.0, e, &p).unwrap();
        assert!(!at(2f64.powi(22) * 0.99).satisfied);
        assert!(at(2f64.powi(22) * 1.01).satisfied);
        let zero = equi_condition(1.0, 0.0, 1.0, 2.0, 5.0, &p).unwrap();
        assert_eq!(zero.lhs, 0.0);
        assert!(zero.satisfied);
        assert!(equi_condition(0.0, 1.0, 1.0, 2.0, 5.0, &p).is_err());
    }

    #[test]
    fn localization_exponent() {
        let p = RateParams {
            theta: Ratio::new(1, 4),
            epsilon: Ratio::from_integer(0),
        };
        for e in [10.0, 1e3, 1e6] {
            let b = localization_bound(1.0, e, 1.0, 1.0, &p).unwrap();
            assert!((b - f64::powf(e, 1.0 / 22.0)).abs() < 1e-12 * b);
        }
        assert_eq!(localization_bound(0.0, 1.0, 1.0, 1.0, &p), Err(DiagnosticsError::ZeroCoupling));
    }

    #[test]
    fn observable_basics() {
        let c = Observable::cosine(DualVector::new(1, 2));
        assert!(c.is_real() && c.is_zero_mean());
        assert!(Observable::sine(DualVector::new(0, 1)).is_real());
        assert!(!Observable::monomial(DualVector::new(1, 0)).is_real());
        let s = c.shifted(3.0);
        assert_eq!(s.mean(), Complex64::new(3.0, 0.0));
    }
}
