//! Plane-wave Galerkin discretization of `H_V = −Δ + V`.
//!
//! The orthonormal basis is `e_ξ = e^{i⟨ξ,x⟩} / 2π` over `|ξ|² ≤ Λ`; with the
//! plain-exponential convention for `V` the matrix is
//! `H[ξ, η] = |ξ|² δ_{ξη} + v(ξ − η)`.

mod bounds;

pub use bounds::{
    basis_tail_estimate, fourier_bound_check, lattice_tail_sum, tail_sum_bound,
    truncate_eigenfunction, FourierBound, TailSum, TruncatedPair, FOURIER_BOUND_SLACK, TAIL_SUM_CONSTANT,
};

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::SolverError;
use crate::goodset::GoodBrackets;
use crate::lattice::{enumerate_up_to, q_form, AspectRatio, DualVector, QValue, Spectrum};
use crate::potentials::FourierPotential;

pub const DEFAULT_BASIS_CAP: usize = 4096;

/// Eigenvalues within this distance of a Laplace value have no open bracket.
pub const AMBIGUITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BasisSet {
    cutoff: f64,
    aspect: AspectRatio,
    vectors: Vec<DualVector>,
    norms: Vec<QValue>,
    index: HashMap<DualVector, usize>,
}

impl BasisSet {
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn aspect(&self) -> AspectRatio {
        self.aspect
    }

    pub fn vectors(&self) -> &[DualVector] {
        &self.vectors
    }

    /// Exact `|ξ|²` for each basis vector, in basis order.
    pub fn norms(&self) -> &[QValue] {
        &self.norms
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn index_of(&self, v: DualVector) -> Option<usize> {
        self.index.get(&v).copied()
    }
}

pub fn build_basis(cutoff: f64, aspect: AspectRatio) -> Result<BasisSet, SolverError> {
    build_basis_capped(cutoff, aspect, DEFAULT_BASIS_CAP)
}

pub fn build_basis_capped(cutoff: f64, aspect: AspectRatio, cap: usize) -> Result<BasisSet, SolverError> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(SolverError::NonPositiveCutoff(cutoff));
    }
    let vectors = enumerate_up_to(cutoff, aspect);
    if vectors.len() > cap {
        return Err(SolverError::BasisTooLarge {
            cutoff,
            size: vectors.len(),
            cap,
        });
    }
    let norms = vectors.iter().map(|v| q_form(*v, aspect)).collect();
    let index = vectors.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    Ok(BasisSet {
        cutoff,
        aspect,
        vectors,
        norms,
        index,
    })
}

#[derive(Debug, Clone)]
enum Dense {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    basis: Arc<BasisSet>,
    dense: Dense,
    coupling_l1: f64,
    v_norm: f64,
}

impl HamiltonianMatrix {
    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Whether every entry is real, so the real symmetric solver applies.
    pub fn is_real(&self) -> bool {
        matches!(self.dense, Dense::Real(_))
    }

    /// `Σ |v(ζ)|` over the potential's stored coefficients.
    pub fn coupling_l1(&self) -> f64 {
        self.coupling_l1
    }

    /// `‖V‖_{L²(T²)}` of the assembled potential.
    pub fn potential_norm(&self) -> f64 {
        self.v_norm
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.dense {
            Dense::Real(m) => Complex64::new(m[(i, j)], 0.0),
            Dense::Complex(m) => m[(i, j)],
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match &self.dense {
            Dense::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            Dense::Complex(m) => m.clone(),
        }
    }

    /// `max |H − H*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..=i {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i).re).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        match &self.dense {
            Dense::Real(m) => m.iter().map(|x| x * x).sum(),
            Dense::Complex(m) => m.iter().map(|x| x.norm_sqr()).sum(),
        }
    }

    /// Residual tolerance `1e−8 · (Λ + Σ|v|)`.
    pub fn residual_tolerance(&self) -> f64 {
        1e-8 * (self.basis.cutoff() + self.coupling_l1)
    }
}

pub fn assemble(potential: &FourierPotential, basis: Arc<BasisSet>) -> Result<HamiltonianMatrix, SolverError> {
    let d = basis.len();
    let vecs = basis.vectors();
    let rows: Vec<Vec<Complex64>> = (0..d)
        .into_par_iter()
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut h = potential.coefficient(vecs[i] - vecs[j])?;
                    if i == j {
                        h += basis.norms()[i].to_f64();
                    }
                    Ok(h)
                })
                .collect::<Result<Vec<_>, SolverError>>()
        })
        .collect::<Result<_, _>>()?;
    let real = potential.is_real() && rows.iter().flatten().all(|h| h.im == 0.0);
    let dense = if real {
        Dense::Real(DMatrix::from_fn(d, d, |i, j| rows[i][j].re))
    } else {
        Dense::Complex(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    };
    Ok(HamiltonianMatrix {
        basis,
        dense,
        coupling_l1: potential.coefficient_l1(),
        v_norm: potential.l2_norm(),
    })
}

/// Position of an eigenvalue relative to the Laplace spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    /// `n_k`, the largest Laplace value below `λ`.
    pub lower: Option<QValue>,
    /// `n_{k+1}`, the smallest Laplace value above `λ`.
    pub upper: Option<QValue>,
    /// `λ` lies within [`AMBIGUITY_TOLERANCE`] of a Laplace value.
    pub ambiguous: bool,
}

impl Bracket {
    pub fn locate(lambda: f64, spectrum: &Spectrum) -> Self {
        let below = spectrum.count_below(lambda);
        let near = |k: usize| {
            k < spectrum.len() && (spectrum.value(k).to_f64() - lambda).abs() <= AMBIGUITY_TOLERANCE
        };
        let ambiguous = near(below) || (below > 0 && near(below - 1));
        let (lower, upper) = match spectrum.bracket_index(lambda) {
            Some(k) => (Some(spectrum.value(k)), Some(spectrum.value(k + 1))),
            None if below == 0 => (None, (!spectrum.is_empty()).then(|| spectrum.value(0))),
            None => (Some(spectrum.value(below - 1)), None),
        };
        Self {
            lower,
            upper,
            ambiguous,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub index: usize,
    pub lambda: f64,
    /// Unit-norm coefficients over the basis, phase fixed so the largest
    /// component is real and positive.
    pub psi: Vec<Complex64>,
    pub basis: Arc<BasisSet>,
    /// `‖Hψ − λψ‖₂`
    pub residual: f64,
    pub residual_ok: bool,
    pub bracket: Bracket,
    /// `λ ≤ Λ/4`
    pub truncation_safe: bool,
    /// Set by [`mark_sigma`].
    pub in_sigma: bool,
}

impl EigenPair {
    pub fn coefficient(&self, v: DualVector) -> Complex64 {
        self.basis
            .index_of(v)
            .map_or(Complex64::new(0.0, 0.0), |i| self.psi[i])
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > v[best].norm() * (1.0 + 1e-9) {
            best = i;
        }
    }
    let p = v[best];
    if p.norm() > 0.0 {
        let u = p.conj() / p.norm();
        for c in v.iter_mut() {
            *c *= u;
        }
    }
}

/// Full dense eigendecomposition, sorted by eigenvalue.
pub fn eigensolve(h: &HamiltonianMatrix, spectrum: &Spectrum) -> Vec<EigenPair> {
    let d = h.dim();
    let (values, vectors, residuals): (Vec<f64>, DMatrix<Complex64>, Vec<f64>) = match &h.dense {
        Dense::Real(m) => {
            let e = SymmetricEigen::new(m.clone());
            let hv = m * &e.eigenvectors;
            let res = (0..d)
                .map(|j| (hv.column(j) - e.eigenvectors.column(j) * e.eigenvalues[j]).norm())
                .collect();
            (
                e.eigenvalues.iter().copied().collect(),
                e.eigenvectors.map(|x| Complex64::new(x, 0.0)),
                res,
            )
        }
        Dense::Complex(m) => {
            let e = SymmetricEigen::new(m.clone());
            let hv = m * &e.eigenvectors;
            let res = (0..d)
                .map(|j| {
                    let lam = Complex64::new(e.eigenvalues[j], 0.0);
                    (hv.column(j) - e.eigenvectors.column(j) * lam).norm()
                })
                .collect();
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors, res)
        }
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let tol = h.residual_tolerance();
    let cutoff = h.basis.cutoff();
    order
        .into_par_iter()
        .enumerate()
        .map(|(index, col)| {
            let lambda = values[col];
            let mut psi: Vec<Complex64> = vectors.column(col).iter().copied().collect();
            let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for c in psi.iter_mut() {
                *c /= norm;
            }
            fix_phase(&mut psi);
            let residual = residuals[col];
            EigenPair {
                index,
                lambda,
                psi,
                basis: h.basis.clone(),
                residual,
                residual_ok: residual <= tol,
                bracket: Bracket::locate(lambda, spectrum),
                truncation_safe: lambda <= cutoff / 4.0,
                in_sigma: false,
            }
        })
        .collect()
}

/// Eigenvalues only, sorted.
pub fn eigenvalues(h: &HamiltonianMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = match &h.dense {
        Dense::Real(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
        Dense::Complex(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
    };
    v.sort_by(f64::total_cmp);
    v
}

/// Sets `in_sigma` for pairs in an unambiguous good bracket.
pub fn mark_sigma(pairs: &mut [EigenPair], good: &GoodBrackets) {
    for p in pairs.iter_mut() {
        p.in_sigma = !p.bracket.ambiguous
            && p.bracket.upper.is_some()
            && p.bracket.lower.is_some_and(|n| n.to_f64() >= 1.0 && good.is_good(n));
    }
}

/// Basis, assembly and eigensolve in one step, with a spectrum covering
/// every eigenvalue's bracket.
pub fn solve(potential: &FourierPotential, cutoff: f64) -> Result<Vec<EigenPair>, SolverError> {
    let aspect = potential.aspect();
    let basis = Arc::new(build_basis(cutoff, aspect)?);
    let h = assemble(potential, basis)?;
    let top = cutoff + h.coupling_l1() + 4.0 * cutoff.sqrt() + 8.0;
    let spectrum = crate::lattice::distinct_spectrum(top, aspect);
    Ok(eigensolve(&h, &spectrum))
}
