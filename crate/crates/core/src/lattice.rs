//! Exact arithmetic on the rectangular unimodular lattice and its dual.
//!
//! The torus is `R² / 2π L₀` with `L₀ = Z(a, 0) ⊕ Z(0, 1/a)`. The aspect
//! parameter is restricted to rational `a² = p/q`, which makes every squared
//! dual norm an integer over the fixed denominator `p·q`. All grouping of
//! Laplace eigenvalues is therefore exact integer arithmetic.
//!
//! A dual vector `(m, n)` embeds as `ξ = (m/a, n·a)`, so
//! `|ξ|² = m²/a² + n²a² = (q²m² + p²n²) / (p·q)`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::LatticeError;

/// Rational aspect parameter `a² = p/q` with `gcd(p, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AspectRatio {
    p: i64,
    q: i64,
}

impl AspectRatio {
    pub fn new(p: i64, q: i64) -> Result<Self, LatticeError> {
        if p < 1 || q < 1 {
            return Err(LatticeError::NonPositiveAspect { p, q });
        }
        if p.gcd(&q) != 1 {
            return Err(LatticeError::NotCoprime { p, q });
        }
        // Keeps q²m² + p²n² comfortably inside i64 for any cutoff we enumerate.
        if p > 1 << 12 || q > 1 << 12 {
            return Err(LatticeError::AspectTooLarge { p, q });
        }
        Ok(Self { p, q })
    }

    /// The square torus, `a = 1`.
    pub fn square() -> Self {
        Self { p: 1, q: 1 }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// Common denominator `p·q` of every squared dual norm.
    pub fn den(&self) -> i64 {
        self.p * self.q
    }

    pub fn a_squared(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn a(&self) -> f64 {
        self.a_squared().sqrt()
    }

    /// Side lengths `(a, 1/a)` of the covolume-one fundamental cell of `L₀`.
    pub fn cell(&self) -> [f64; 2] {
        let a = self.a();
        [a, 1.0 / a]
    }
}

impl Default for AspectRatio {
    fn default() -> Self {
        Self::square()
    }
}

/// Integer coordinates `(m, n)` of the dual vector `ξ = (m/a, n·a)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct DualVector {
    pub m: i64,
    pub n: i64,
}

impl DualVector {
    pub const ZERO: DualVector = DualVector { m: 0, n: 0 };

    pub const fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0 && self.n == 0
    }

    /// Euclidean embedding `(m/a, n·a)`.
    pub fn embed(&self, aspect: AspectRatio) -> [f64; 2] {
        let a = aspect.a();
        [self.m as f64 / a, self.n as f64 * a]
    }
}

impl Add for DualVector {
    type Output = DualVector;
    fn add(self, rhs: Self) -> Self {
        DualVector::new(self.m + rhs.m, self.n + rhs.n)
    }
}

impl Sub for DualVector {
    type Output = DualVector;
    fn sub(self, rhs: Self) -> Self {
        DualVector::new(self.m - rhs.m, self.n - rhs.n)
    }
}

impl Neg for DualVector {
    type Output = DualVector;
    fn neg(self) -> Self {
        DualVector::new(-self.m, -self.n)
    }
}

impl fmt::Display for DualVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// Exact value of the quadratic form, `num / den`.
///
/// Values produced under one [`AspectRatio`] share `den = p·q`, so their
/// ordering is the ordering of `num`. Comparison across denominators is still
/// exact (cross-multiplication).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QValue {
    num: i64,
    den: i64,
}

impl QValue {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0, "QValue denominator must be positive");
        Self { num, den }
    }

    pub fn zero(aspect: AspectRatio) -> Self {
        Self::new(0, aspect.den())
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_ratio(&self) -> Ratio<i64> {
        Ratio::new(self.num, self.den)
    }

    /// `|self - other|` as an exact numerator over `self.den * other.den / g`.
    fn abs_diff_parts(&self, other: &QValue) -> (i128, i128) {
        if self.den == other.den {
            ((self.num as i128 - other.num as i128).abs(), self.den as i128)
        } else {
            let d = self.den as i128 * other.den as i128;
            let n = self.num as i128 * other.den as i128 - other.num as i128 * self.den as i128;
            (n.abs(), d)
        }
    }

    /// `|self − other| ≤ bound`, deciding floating-point ties toward inclusion.
    pub fn within(&self, other: &QValue, bound: f64) -> bool {
        let (num, den) = self.abs_diff_parts(other);
        le_inclusive(num, den, bound)
    }

    /// `self ≤ bound`, ties toward inclusion.
    pub fn le_real(&self, bound: f64) -> bool {
        self.num <= 0 || le_inclusive(self.num as i128, self.den as i128, bound)
    }

    /// `|self − other|` as a float.
    pub fn dist(&self, other: &QValue) -> f64 {
        let (num, den) = self.abs_diff_parts(other);
        num as f64 / den as f64
    }
}

/// Relative slack granted to the floating-point side of exact-vs-real
/// comparisons. Anything this close to the boundary counts as inside.
const INCLUSION_SLACK: f64 = 4.0 * f64::EPSILON;

/// Decides `num / den ≤ bound` for a non-negative exact rational, with ties
/// (to within a few ulps) resolved toward inclusion.
pub(crate) fn le_inclusive(num: i128, den: i128, bound: f64) -> bool {
    debug_assert!(num >= 0 && den > 0);
    if bound.is_nan() {
        return false;
    }
    if bound == f64::INFINITY {
        return true;
    }
    let lhs = num as f64;
    let rhs = bound * den as f64;
    lhs <= rhs + rhs.abs() * INCLUSION_SLACK
}

impl PartialEq for QValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QValue {}

impl PartialOrd for QValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QValue {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.den == other.den {
            self.num.cmp(&other.num)
        } else {
            (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
        }
    }
}

impl Hash for QValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let g = self.num.gcd(&self.den).max(1);
        (self.num / g, self.den / g).hash(state);
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_ratio();
        if *r.denom() == 1 {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

/// Exact squared norm `|v|²`.
pub fn q_form(v: DualVector, aspect: AspectRatio) -> QValue {
    let (p, q) = (aspect.p, aspect.q);
    QValue::new(q * q * v.m * v.m + p * p * v.n * v.n, p * q)
}

/// Exact inner product `m₁m₂/a² + n₁n₂a²`.
pub fn inner(v: DualVector, w: DualVector, aspect: AspectRatio) -> Ratio<i64> {
    let (p, q) = (aspect.p, aspect.q);
    Ratio::new(q * q * v.m * w.m + p * p * v.n * w.n, p * q)
}

/// Numerator of [`inner`] over the fixed denominator `p·q` (unreduced).
pub(crate) fn inner_num(v: DualVector, w: DualVector, aspect: AspectRatio) -> i64 {
    let (p, q) = (aspect.p, aspect.q);
    q * q * v.m * w.m + p * p * v.n * w.n
}

/// Every dual vector with `|v|² ≤ t`, ordered by norm then `(m, n)`.
pub fn enumerate_up_to(t: f64, aspect: AspectRatio) -> Vec<DualVector> {
    if !(t >= 0.0) {
        return Vec::new();
    }
    let (p, q) = (aspect.p, aspect.q);
    let den = (p * q) as i128;
    // m²q/p ≤ t and n²p/q ≤ t
    let m_max = (t * p as f64 / q as f64).sqrt().floor() as i64 + 1;
    let n_max = (t * q as f64 / p as f64).sqrt().floor() as i64 + 1;
    let mut out: Vec<(i64, DualVector)> = Vec::new();
    for m in -m_max..=m_max {
        let qm = q * q * m * m;
        for n in -n_max..=n_max {
            let num = qm + p * p * n * n;
            if le_inclusive(num as i128, den, t) {
                out.push((num, DualVector::new(m, n)));
            }
        }
    }
    out.sort_unstable();
    out.into_iter().map(|(_, v)| v).collect()
}

/// Lattice point count `#{|v|² ≤ t}` and its deviation from the circle law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleCount {
    pub count: usize,
    /// `count − π t`
    pub residual: f64,
}

pub fn counting_function(t: f64, aspect: AspectRatio) -> CircleCount {
    let count = enumerate_up_to(t, aspect).len();
    CircleCount {
        count,
        residual: count as f64 - std::f64::consts::PI * t,
    }
}

/// One distinct Laplace eigenvalue with all of its dual vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub value: QValue,
    pub vectors: Vec<DualVector>,
}

impl SpectrumEntry {
    pub fn multiplicity(&self) -> usize {
        self.vectors.len()
    }
}

/// Distinct Laplace eigenvalues `0 = n₀ < n₁ < …` up to a cutoff.
#[derive(Debug, Clone)]
pub struct Spectrum {
    aspect: AspectRatio,
    cutoff: f64,
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    pub fn aspect(&self) -> AspectRatio {
        self.aspect
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn value(&self, k: usize) -> QValue {
        self.entries[k].value
    }

    pub fn values(&self) -> impl Iterator<Item = QValue> + '_ {
        self.entries.iter().map(|e| e.value)
    }

    /// Total number of lattice vectors, i.e. `counting_function(cutoff)`.
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.vectors.len()).sum()
    }

    /// Index of an exact value, if present.
    pub fn index_of(&self, value: QValue) -> Option<usize> {
        self.entries.binary_search_by(|e| e.value.cmp(&value)).ok()
    }

    /// Number of entries with `value < x` (x real).
    pub fn count_below(&self, x: f64) -> usize {
        self.entries.partition_point(|e| e.value.to_f64() < x)
    }

    /// Whether values up to `x` are all known.
    pub fn covers(&self, x: f64) -> bool {
        x <= self.cutoff
    }

    /// Index range of entries with `|value − center| ≤ width` (ties inclusive).
    pub fn window(&self, center: QValue, width: f64) -> std::ops::Range<usize> {
        let c = center.to_f64();
        let pad = width.abs() * 1e-9 + 1e-9;
        let mut lo = self.count_below(c - width - pad);
        let mut hi = self.count_below(c + width + pad);
        while lo < hi && !self.entries[lo].value.within(&center, width) {
            lo += 1;
        }
        while hi > lo && !self.entries[hi - 1].value.within(&center, width) {
            hi -= 1;
        }
        lo..hi
    }

    /// The annulus `A(n, L)`; values in it must be covered by this spectrum.
    pub fn annulus(&self, center: QValue, width: f64) -> Result<Annulus, LatticeError> {
        if !(width > 0.0) {
            return Err(LatticeError::NonPositiveWidth(width));
        }
        let top = center.to_f64() + width;
        if !self.covers(top) {
            return Err(LatticeError::NotCovered {
                needed: top,
                cutoff: self.cutoff,
            });
        }
        let members = self.entries[self.window(center, width)]
            .iter()
            .flat_map(|e| e.vectors.iter().copied())
            .collect();
        Ok(Annulus {
            center,
            width,
            members,
        })
    }

    /// Index `k` with `n_k < x < n_{k+1}`, if both ends are known.
    pub fn bracket_index(&self, x: f64) -> Option<usize> {
        let below = self.count_below(x);
        if below == 0 || below >= self.entries.len() {
            return None;
        }
        Some(below - 1)
    }
}

pub fn distinct_spectrum(t: f64, aspect: AspectRatio) -> Spectrum {
    let vectors = enumerate_up_to(t, aspect);
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for v in vectors {
        let value = q_form(v, aspect);
        match entries.last_mut() {
            Some(last) if last.value == value => last.vectors.push(v),
            _ => entries.push(SpectrumEntry {
                value,
                vectors: vec![v],
            }),
        }
    }
    Spectrum {
        aspect,
        cutoff: t.max(0.0),
        entries,
    }
}

/// Dual vectors whose squared norm lies within `width` of `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Annulus {
    pub center: QValue,
    pub width: f64,
    pub members: Vec<DualVector>,
}

impl Annulus {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: DualVector, aspect: AspectRatio) -> bool {
        q_form(v, aspect).within(&self.center, self.width)
    }
}

pub fn annulus(center: QValue, width: f64, aspect: AspectRatio) -> Result<Annulus, LatticeError> {
    let spectrum = distinct_spectrum(center.to_f64() + width.max(0.0) + 1.0, aspect);
    spectrum.annulus(center, width)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> AspectRatio {
        AspectRatio::square()
    }

    fn two() -> AspectRatio {
        AspectRatio::new(2, 1).unwrap()
    }

    #[test]
    fn q_form_examples() {
        assert_eq!(q_form(DualVector::new(3, 4), sq()), QValue::new(25, 1));
        assert!(q_form(DualVector::ZERO, sq()).is_zero());
        let v = q_form(DualVector::new(1, 1), two());
        assert_eq!(v.to_ratio(), Ratio::new(5, 2));
        assert_eq!(v.den(), 2);
    }

    #[test]
    fn inner_examples() {
        let a = sq();
        assert_eq!(inner(DualVector::new(1, 2), DualVector::new(3, 4), a), Ratio::from_integer(11));
        assert_eq!(inner(DualVector::new(1, 0), DualVector::new(0, 1), a), Ratio::from_integer(0));
        let v = DualVector::new(1, 1);
        assert_eq!(inner(v, v, two()), Ratio::new(5, 2));
        assert_eq!(inner(v, v, two()), q_form(v, two()).to_ratio());
    }

    #[test]
    fn aspect_validation() {
        assert!(AspectRatio::new(2, 4).is_err());
        assert!(AspectRatio::new(0, 1).is_err());
        assert!(AspectRatio::new(3, 2).is_ok());
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(enumerate_up_to(0.0, sq()), vec![DualVector::ZERO]);
        let v = enumerate_up_to(2.0, two());
        assert_eq!(v.len(), 7);
        let expect = [(0, 0), (0, -1), (0, 1), (-1, 0), (1, 0), (-2, 0), (2, 0)];
        // norms: 0, 1/2 (n=±1), 1/2... ordered by value then lexicographic
        let got: Vec<(i64, i64)> = v.iter().map(|d| (d.m, d.n)).collect();
        let mut e: Vec<(i64, i64)> = expect.to_vec();
        e.sort_by_key(|&(m, n)| (q_form(DualVector::new(m, n), two()).num(), m, n));
        assert_eq!(got, e);
    }

    #[test]
    fn counting_example() {
        let c = counting_function(100.0, sq());
        assert_eq!(c.count, 317);
        assert!((c.residual - (317.0 - 100.0 * std::f64::consts::PI)).abs() < 1e-12);
        let z = counting_function(0.0, sq());
        assert_eq!((z.count, z.residual), (1, 1.0));
    }

    #[test]
    fn spectrum_examples() {
        let s = distinct_spectrum(8.0, sq());
        let vals: Vec<i64> = s.values().map(|v| v.num()).collect();
        assert_eq!(vals, vec![0, 1, 2, 4, 5, 8]);
        let five = s.index_of(QValue::new(5, 1)).unwrap();
        assert_eq!(s.entries()[five].multiplicity(), 8);
        assert_eq!(s.total_multiplicity(), counting_function(8.0, sq()).count);

        let s2 = distinct_spectrum(2.5, two());
        let vals: Vec<Ratio<i64>> = s2.values().map(|v| v.to_ratio()).collect();
        assert_eq!(
            vals,
            vec![Ratio::from_integer(0), Ratio::new(1, 2), Ratio::from_integer(2), Ratio::new(5, 2)]
        );
    }

    #[test]
    fn annulus_examples() {
        let a5 = annulus(QValue::new(5, 1), 1.0, sq()).unwrap();
        assert_eq!(a5.len(), 12);
        let a1 = annulus(QValue::new(1, 1), 0.5, sq()).unwrap();
        assert_eq!(a1.len(), 4);
        assert!(annulus(QValue::new(1, 1), 0.0, sq()).is_err());
    }

    #[test]
    fn bracket_index_is_open_interval() {
        let s = distinct_spectrum(10.0, sq());
        assert_eq!(s.bracket_index(1.5), Some(1));
        assert_eq!(s.bracket_index(-0.5), None);
        // an exact hit reports the bracket below; callers flag such λ separately
        assert_eq!(s.bracket_index(2.0), Some(1));
    }

    #[test]
    fn qvalue_cross_denominator_ordering() {
        let a = QValue::new(5, 2);
        let b = QValue::new(10, 4);
        assert_eq!(a, b);
        assert!(QValue::new(1, 3) < QValue::new(1, 2));
        assert_eq!(a.to_string(), "5/2");
    }
}
