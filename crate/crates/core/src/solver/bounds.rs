use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{EigenPair, AMBIGUITY_TOLERANCE};
use crate::error::SolverError;
use crate::goodset::THETA_PROVEN;
use crate::lattice::{annulus, le_inclusive, AspectRatio, DualVector, QValue};
use crate::potentials::FourierPotential;

/// Eigenfunction split along the annulus `A(n_k, L)`, `L = n_k^δ`.
#[derive(Debug, Clone)]
pub struct TruncatedPair {
    pub parent: EigenPair,
    pub center: QValue,
    pub window: f64,
    /// Basis membership in the annulus.
    pub inside: Vec<bool>,
    /// `ψ_{λ,L}`: coefficients inside the annulus, zero elsewhere.
    pub psi_inside: Vec<Complex64>,
    /// `‖ψ^R‖²`
    pub tail_mass: f64,
    /// `#A(n_k, L)` over the whole dual lattice.
    pub annulus_size: usize,
}

impl TruncatedPair {
    pub fn inside_mass(&self) -> f64 {
        self.psi_inside.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `ψ^R = ψ − ψ_{λ,L}`.
    pub fn psi_outside(&self) -> Vec<Complex64> {
        self.parent
            .psi
            .iter()
            .zip(&self.inside)
            .map(|(c, &i)| if i { Complex64::new(0.0, 0.0) } else { *c })
            .collect()
    }
}

pub fn truncate_eigenfunction(pair: &EigenPair, delta: f64) -> Result<TruncatedPair, SolverError> {
    let center = pair
        .bracket
        .lower
        .filter(|n| n.to_f64() >= 1.0)
        .ok_or(SolverError::NoBracket(pair.lambda))?;
    let window = center.to_f64().powf(delta);
    let inside: Vec<bool> = pair.basis.norms().iter().map(|q| q.within(&center, window)).collect();
    let mut psi_inside = pair.psi.clone();
    let mut tail_mass = 0.0;
    for (c, &i) in psi_inside.iter_mut().zip(&inside) {
        if !i {
            tail_mass += c.norm_sqr();
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let annulus_size = annulus(center, window, pair.basis.aspect())?.len();
    Ok(TruncatedPair {
        parent: pair.clone(),
        center,
        window,
        inside,
        psi_inside,
        tail_mass,
        annulus_size,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierBound {
    /// `max_ξ |ψ̂(ξ)|² (|ξ|² − λ)² / ‖V‖²`
    pub max_ratio: f64,
    pub argmax: Option<DualVector>,
    pub pass: bool,
}

pub const FOURIER_BOUND_SLACK: f64 = 1.05;

/// Pointwise bound `|ψ̂(ξ)|² ≤ ‖V‖² (|ξ|² − λ)^{−2}`; basis vectors with
/// `|ξ|²` within the ambiguity tolerance of `λ` are skipped.
pub fn fourier_bound_check(pair: &EigenPair, potential: &FourierPotential) -> FourierBound {
    let v2 = potential.l2_norm().powi(2);
    let mut max_ratio = 0.0f64;
    let mut argmax = None;
    for ((v, q), c) in pair.basis.vectors().iter().zip(pair.basis.norms()).zip(&pair.psi) {
        let gap = q.to_f64() - pair.lambda;
        if gap.abs() <= AMBIGUITY_TOLERANCE {
            continue;
        }
        let num = c.norm_sqr() * gap * gap;
        let ratio = if v2 > 0.0 {
            num / v2
        } else if num > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > max_ratio {
            max_ratio = ratio;
            argmax = Some(*v);
        }
    }
    FourierBound {
        max_ratio,
        argmax,
        pass: max_ratio <= FOURIER_BOUND_SLACK,
    }
}

/// `Σ f(|ξ|²)` over dual vectors with `lo < |ξ|² ≤ hi`.
///
/// Membership is decided in floating point except within a relative `1e−9`
/// of either boundary, where the exact rational test takes over.
fn shell_sum(aspect: AspectRatio, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (p, q) = (aspect.p(), aspect.q());
    let den = p * q;
    let denf = den as f64;
    let (p2, q2) = ((p * p) as f64, (q * q) as f64);
    let edge = |t: f64, b: f64| (t - b).abs() <= 1e-9 * b.abs().max(1.0);
    let inside = |num: i64, t: f64| {
        let above_lo = if edge(t, lo) { !le_inclusive(num as i128, den as i128, lo) } else { t > lo };
        let below_hi = if edge(t, hi) { le_inclusive(num as i128, den as i128, hi) } else { t <= hi };
        above_lo && below_hi
    };
    let m_max = (hi * p as f64 / q as f64).sqrt().floor() as i64 + 1;
    let mut acc = 0.0;
    for m in -m_max..=m_max {
        let qm = q * q * m * m;
        let base = q2 * (m * m) as f64;
        // n² p² ≤ t·pq − q²m²
        let room = |t: f64| (t * denf - base) / p2;
        let out = room(hi);
        if out < -1.0 {
            continue;
        }
        let n_out = out.max(0.0).sqrt().floor() as i64 + 1;
        let inner = room(lo);
        // rows |n| < start lie inside the inner circle
        let start = if inner > 1.0 { inner.sqrt().floor() as i64 - 1 } else { 0 }.max(0);
        let mut row = 0.0;
        for n in start..=n_out {
            let num = qm + p * p * n * n;
            let t = num as f64 / denf;
            if inside(num, t) {
                let v = f(t);
                row += if n == 0 { v } else { 2.0 * v };
            }
        }
        acc += row;
    }
    acc
}

/// Relative size of the integral remainder at which enumeration stops.
const TAIL_REL: f64 = 1e-6;

/// Sums `g(t) = (t − λ)^{−2}` over `|ξ|² > start` restricted by `keep`,
/// enumerating shells until the remainder `π/(T − λ)` falls below `1e−6` of
/// the partial sum, then adding that remainder.
fn inverse_square_tail(lambda: f64, start: f64, aspect: AspectRatio, keep: impl Fn(f64) -> bool) -> f64 {
    let g = |t: f64| {
        if keep(t) {
            (t - lambda).powi(-2)
        } else {
            0.0
        }
    };
    let mut lo = start;
    let mut hi = start.max(lambda) + 64.0;
    let mut partial = shell_sum(aspect, lo, hi, g);
    loop {
        let rem = PI / (hi - lambda);
        if rem < TAIL_REL * partial {
            return partial + rem;
        }
        lo = hi;
        hi = lambda + 2.0 * (hi - lambda);
        partial += shell_sum(aspect, lo, hi, g);
    }
}

/// `Σ_{||ξ|² − λ| ≥ L} (|ξ|² − λ)^{−2}` over the whole dual lattice.
pub fn lattice_tail_sum(lambda: f64, l: f64, aspect: AspectRatio) -> f64 {
    inverse_square_tail(lambda, -1.0, aspect, |t| (t - lambda).abs() >= l)
}

/// Constant in `Σ ≤ C (1/L + n^θ/L²)`, fitted once on square-torus brackets
/// with `n ≤ 1000` and frozen.
pub const TAIL_SUM_CONSTANT: f64 = 6.26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSum {
    pub exact_sum: f64,
    pub bound: f64,
}

impl TailSum {
    pub fn holds(&self) -> bool {
        self.exact_sum <= self.bound
    }
}

pub fn tail_sum_bound(lambda: f64, n: QValue, l: f64, aspect: AspectRatio) -> Result<TailSum, SolverError> {
    if !(l >= 1.0) {
        return Err(SolverError::WindowTooSmall(l));
    }
    let exact_sum = lattice_tail_sum(lambda, l, aspect);
    let bound = TAIL_SUM_CONSTANT * (1.0 / l + n.to_f64().powf(THETA_PROVEN) / (l * l));
    Ok(TailSum { exact_sum, bound })
}

/// `‖V‖² Σ_{|ξ|² > Λ} (|ξ|² − λ)^{−2}`, the pointwise Fourier bound summed
/// over the modes the basis leaves out. Shells are enumerated to
/// `Λ + max(64Λ, 10⁵)` and the rest is the integral `π/(T − λ)`.
pub fn basis_tail_estimate(lambda: f64, cutoff: f64, v_norm: f64, aspect: AspectRatio) -> f64 {
    let top = cutoff + (64.0 * cutoff).max(1e5);
    let s = shell_sum(aspect, cutoff, top, |t| (t - lambda).powi(-2)) + PI / (top - lambda);
    v_norm * v_norm * s
}
