//! Good eigenvalue sets: bad vectors `S_ζ`, bad values `B_ζ`, the sets
//! `Q₁`, `Q₂`, `Q' = Q₁ ∩ Q₂`, and direct certificates for good annuli.
//!
//! A value `n` is good when the thin annulus `A(n, n^δ)` contains no lattice
//! point nearly orthogonal to any short shift `ζ`, so that shifting the
//! annulus by `ζ` moves every point at least `c·n^δ` away from `n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::GoodSetError;
use crate::lattice::{
    distinct_spectrum, enumerate_up_to, inner_num, le_inclusive, q_form, AspectRatio, DualVector,
    QValue, Spectrum,
};

/// Best proven circle-law exponent, `517/1648`.
pub const THETA_PROVEN: f64 = 517.0 / 1648.0;
/// Conjectured circle-law exponent.
pub const THETA_CONJECTURED: f64 = 0.25;

/// Gap threshold `G(n)` standing in for `n^{o(1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapFn {
    /// `scale · (ln(2 + n))²`
    LogSquared { scale: f64 },
    /// `G ≡ value`
    Constant { value: f64 },
}

impl GapFn {
    pub fn eval(&self, n: f64) -> f64 {
        match *self {
            GapFn::LogSquared { scale } => {
                let l = (2.0 + n).ln();
                scale * l * l
            }
            GapFn::Constant { value } => value,
        }
    }
}

impl Default for GapFn {
    fn default() -> Self {
        GapFn::LogSquared { scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodSetParams {
    pub delta: f64,
    pub epsilon: f64,
    /// Certificate constant: good annuli keep shifted points `c·n^δ` away.
    pub c: f64,
    pub theta: f64,
    pub gap: GapFn,
}

impl Default for GoodSetParams {
    fn default() -> Self {
        Self {
            delta: 0.17,
            epsilon: 0.01,
            c: 0.5,
            theta: THETA_PROVEN,
            gap: GapFn::default(),
        }
    }
}

impl GoodSetParams {
    /// Checks `θ ∈ [1/4, 1/3)`, `θ/2 < δ < 1/2 − θ`, `0 < ε < 1/2 − θ − δ`
    /// and `0 < c ≤ 2`.
    ///
    /// The library functions accept unvalidated parameters so that the
    /// machinery can be explored outside the admissible range.
    pub fn validate(&self) -> Result<(), GoodSetError> {
        if !(self.theta >= 0.25 && self.theta < 1.0 / 3.0) {
            return Err(GoodSetError::ThetaOutOfRange(self.theta));
        }
        let (lo, hi) = (self.theta / 2.0, 0.5 - self.theta);
        if !(self.delta > lo && self.delta < hi) {
            return Err(GoodSetError::DeltaOutOfRange {
                delta: self.delta,
                lo,
                hi,
            });
        }
        let eps_hi = 0.5 - self.theta - self.delta;
        if !(self.epsilon > 0.0 && self.epsilon < eps_hi) {
            return Err(GoodSetError::EpsilonOutOfRange {
                epsilon: self.epsilon,
                hi: eps_hi,
            });
        }
        if !(self.c > 0.0 && self.c <= 2.0) {
            return Err(GoodSetError::MarginOutOfRange(self.c));
        }
        match self.gap {
            GapFn::LogSquared { scale: g } | GapFn::Constant { value: g } if g < 0.0 || g.is_nan() => {
                Err(GoodSetError::NegativeGap(g))
            }
            _ => Ok(()),
        }
    }

    /// Exponent `1/2 + δ + θ + ε` of the `Q₁` complement bound.
    pub fn complement_exponent(&self) -> f64 {
        0.5 + self.delta + self.theta + self.epsilon
    }
}

/// `|⟨ξ,ζ⟩| ≤ |ξ|^{2δ}`; ties count as bad. The zero vector is bad.
pub fn is_bad_vector(xi: DualVector, zeta: DualVector, delta: f64, aspect: AspectRatio) -> bool {
    let ip = inner_num(xi, zeta, aspect).unsigned_abs() as i128;
    if xi.is_zero() {
        return true;
    }
    let rhs = q_form(xi, aspect).to_f64().powf(delta);
    le_inclusive(ip, aspect.den() as i128, rhs)
}

/// Members of `S_ζ` with `|η|² ≤ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct BadVectorSet {
    pub zeta: DualVector,
    pub delta: f64,
    pub cutoff: f64,
    pub members: Vec<DualVector>,
}

pub fn bad_vectors(zeta: DualVector, x: f64, delta: f64, aspect: AspectRatio) -> BadVectorSet {
    let members = enumerate_up_to(x, aspect)
        .into_iter()
        .filter(|&xi| is_bad_vector(xi, zeta, delta, aspect))
        .collect();
    BadVectorSet {
        zeta,
        delta,
        cutoff: x,
        members,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BadVectorCount {
    pub count: usize,
    /// `count · |ζ| / X^{1/2+δ}`
    pub ratio: f64,
}

pub fn bad_vector_count(
    zeta: DualVector,
    x: f64,
    delta: f64,
    aspect: AspectRatio,
) -> Result<BadVectorCount, GoodSetError> {
    if !(x >= 1.0) {
        return Err(GoodSetError::CutoffTooSmall(x));
    }
    let count = bad_vectors(zeta, x, delta, aspect).members.len();
    let zn = q_form(zeta, aspect).to_f64().sqrt();
    Ok(BadVectorCount {
        count,
        ratio: count as f64 * zn / x.powf(0.5 + delta),
    })
}

/// Outcome of the direct good-annulus test at one value `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub pass: bool,
    /// `min ||ξ+ζ|² − n| / n^δ` over the tested pairs (`+∞` if none).
    pub margin: f64,
    /// A pair `(ξ, ζ)` attaining the minimum, reported on failure.
    pub witness: Option<(DualVector, DualVector)>,
}

/// Nonzero `ζ` with `|ζ|² ≤ r2`, ordered by norm then `(m, n)`.
pub fn short_shifts(r2: f64, aspect: AspectRatio) -> Vec<DualVector> {
    enumerate_up_to(r2, aspect)
        .into_iter()
        .filter(|z| !z.is_zero())
        .collect()
}

/// Number of leading shifts in `zetas` (sorted by norm) with `|ζ| ≤ n^ε`.
fn shift_prefix(zetas: &[DualVector], n: f64, epsilon: f64, aspect: AspectRatio) -> usize {
    let bound = n.powf(2.0 * epsilon);
    zetas.partition_point(|&z| q_form(z, aspect).le_real(bound))
}

fn certify_in(
    spectrum: &Spectrum,
    n: QValue,
    params: &GoodSetParams,
    zetas: &[DualVector],
) -> Certificate {
    let aspect = spectrum.aspect();
    let nf = n.to_f64();
    let width = nf.powf(params.delta);
    let prefix = shift_prefix(zetas, nf, params.epsilon, aspect);
    let range = spectrum.window(n, width);
    let mut best = f64::INFINITY;
    let mut arg = None;
    for entry in &spectrum.entries()[range] {
        for &xi in &entry.vectors {
            for &zeta in &zetas[..prefix] {
                let ratio = q_form(xi + zeta, aspect).dist(&n) / width;
                // later ties win, which makes the witness canonical
                if ratio <= best {
                    best = ratio;
                    arg = Some((xi, zeta));
                }
            }
        }
    }
    let pass = best >= params.c;
    Certificate {
        pass,
        margin: best,
        witness: if pass { None } else { arg },
    }
}

/// Direct check that `||ξ+ζ|² − n| ≥ c·n^δ` for all `ξ ∈ A(n, n^δ)` and all
/// nonzero `|ζ| ≤ n^ε`.
pub fn certify_good_annulus(
    n: QValue,
    params: &GoodSetParams,
    aspect: AspectRatio,
) -> Result<Certificate, GoodSetError> {
    let nf = n.to_f64();
    if !(nf >= 1.0) {
        return Err(GoodSetError::ValueTooSmall(nf));
    }
    let spectrum = distinct_spectrum(nf + nf.powf(params.delta) + 1.0, aspect);
    let zetas = short_shifts(nf.powf(2.0 * params.epsilon), aspect);
    Ok(certify_in(&spectrum, n, params, &zetas))
}

/// Lower bound on the certificate margin implied by `n ∈ Q₁`:
/// `(2(n − n^δ)^δ − n^δ − n^{2ε}) / n^δ`.
pub fn implied_margin(n: f64, params: &GoodSetParams) -> f64 {
    let w = n.powf(params.delta);
    let inner = (n - w).max(0.0).powf(params.delta);
    (2.0 * inner - w - n.powf(2.0 * params.epsilon)) / w
}

/// Precomputed lattice data for all good-set questions up to a cutoff `X`.
///
/// The spectrum is scanned to `X + 2X^δ` so that every annulus `A(n, n^δ)`
/// with `n ≤ X` is complete.
#[derive(Debug, Clone)]
pub struct GoodSetScan {
    params: GoodSetParams,
    cutoff: f64,
    spectrum: Spectrum,
    /// Number of spectrum entries with value `≤ X`.
    n_values: usize,
    zetas: Vec<DualVector>,
}

impl GoodSetScan {
    pub fn new(x: f64, params: GoodSetParams, aspect: AspectRatio) -> Result<Self, GoodSetError> {
        if !(x >= 1.0) {
            return Err(GoodSetError::CutoffTooSmall(x));
        }
        let scan_to = x + 2.0 * x.powf(params.delta) + 1.0;
        let spectrum = distinct_spectrum(scan_to, aspect);
        let n_values = spectrum.values().take_while(|v| v.le_real(x)).count();
        let zetas = short_shifts(x.powf(2.0 * params.epsilon), aspect);
        Ok(Self {
            params,
            cutoff: x,
            spectrum,
            n_values,
            zetas,
        })
    }

    pub fn params(&self) -> &GoodSetParams {
        &self.params
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Values `n_k ≤ X`.
    pub fn values(&self) -> impl Iterator<Item = QValue> + '_ {
        self.spectrum.values().take(self.n_values)
    }

    pub fn value_count(&self) -> usize {
        self.n_values
    }

    /// Shifts tested at the largest value, `|ζ| ≤ X^ε`.
    pub fn shifts(&self) -> &[DualVector] {
        &self.zetas
    }

    /// Distinct values `|η|²` of bad vectors `η ∈ S_ζ` within the scan.
    fn bad_norms(&self, zeta: DualVector) -> Vec<QValue> {
        let aspect = self.spectrum.aspect();
        self.spectrum
            .entries()
            .iter()
            .filter(|e| {
                e.vectors
                    .iter()
                    .any(|&eta| is_bad_vector(eta, zeta, self.params.delta, aspect))
            })
            .map(|e| e.value)
            .collect()
    }

    /// Membership flags of `B_ζ ∩ [0, X]`, indexed like [`Self::values`].
    ///
    /// Every bad norm `m` marks each `n ≤ X` with `|n − m| ≤ n^δ`.
    pub fn bad_value_flags(&self, zeta: DualVector) -> Vec<bool> {
        let delta = self.params.delta;
        let reach = self.cutoff.powf(delta);
        let mut flags = vec![false; self.n_values];
        let entries = &self.spectrum.entries()[..self.n_values];
        for m in self.bad_norms(zeta) {
            let mf = m.to_f64();
            let lo = entries.partition_point(|e| e.value.to_f64() < mf - reach - 1.0);
            let hi = entries.partition_point(|e| e.value.to_f64() <= mf + reach + 1.0);
            for (k, e) in entries[lo..hi].iter().enumerate() {
                if e.value.within(&m, e.value.to_f64().powf(delta)) {
                    flags[lo + k] = true;
                }
            }
        }
        flags
    }

    pub fn bad_values(&self, zeta: DualVector) -> Vec<QValue> {
        self.bad_value_flags(zeta)
            .into_iter()
            .zip(self.values())
            .filter_map(|(b, v)| b.then_some(v))
            .collect()
    }

    /// `n ∈ Q₁` flags: no shift `0 < |ζ| ≤ n^ε` has `n ∈ B_ζ`.
    pub fn q1_flags(&self) -> Vec<bool> {
        let bad: Vec<Vec<bool>> = self
            .zetas
            .par_iter()
            .map(|&z| self.bad_value_flags(z))
            .collect();
        let aspect = self.spectrum.aspect();
        self.values()
            .enumerate()
            .map(|(k, n)| {
                let prefix = shift_prefix(&self.zetas, n.to_f64(), self.params.epsilon, aspect);
                !bad[..prefix].iter().any(|flags| flags[k])
            })
            .collect()
    }

    /// `n_k ∈ Q₂` flags; the last value below `X` is never a member since
    /// its successor is treated as unknown. Returns that excluded index.
    pub fn q2_flags(&self) -> (Vec<bool>, Option<usize>) {
        q2_flags_for(&self.spectrum, self.n_values, &self.params.gap)
    }

    pub fn certify(&self, k: usize) -> Option<Certificate> {
        let n = self.spectrum.value(k);
        (n.to_f64() >= 1.0).then(|| certify_in(&self.spectrum, n, &self.params, &self.zetas))
    }

    pub fn report(&self) -> GoodSetReport {
        let q1 = self.q1_flags();
        let (q2, excluded) = self.q2_flags();
        let certs: Vec<Option<Certificate>> =
            (0..self.n_values).into_par_iter().map(|k| self.certify(k)).collect();
        let mut rows = Vec::with_capacity(self.n_values);
        for (k, value) in self.values().enumerate() {
            let nf = value.to_f64();
            let implied = (nf >= 1.0).then(|| implied_margin(nf, &self.params));
            rows.push(GoodSetRow {
                value,
                in_q1: q1[k],
                in_q2: q2[k],
                in_qprime: q1[k] && q2[k],
                certificate: certs[k],
                implied_margin: implied,
            });
        }
        let curve = complement_curve(&rows, self.cutoff, &self.params);
        GoodSetReport {
            cutoff: self.cutoff,
            params: self.params,
            rows,
            q2_excluded_last: excluded.map(|k| self.spectrum.value(k)),
            complement_curve: curve,
        }
    }
}

fn q2_flags_for(spectrum: &Spectrum, n_values: usize, gap: &GapFn) -> (Vec<bool>, Option<usize>) {
    let mut flags = vec![false; n_values];
    if n_values == 0 {
        return (flags, None);
    }
    for k in 0..n_values - 1 {
        let n = spectrum.value(k);
        let next = spectrum.value(k + 1);
        flags[k] = next.within(&n, gap.eval(n.to_f64()));
    }
    (flags, Some(n_values - 1))
}

/// `B_ζ ∩ [0, X]`.
pub fn bad_values(
    zeta: DualVector,
    x: f64,
    params: &GoodSetParams,
    aspect: AspectRatio,
) -> Result<Vec<QValue>, GoodSetError> {
    let scan = GoodSetScan::new(x, *params, aspect)?;
    Ok(scan.bad_values(zeta))
}

/// `Q₁ ∩ [0, X]`.
pub fn q1(x: f64, params: &GoodSetParams, aspect: AspectRatio) -> Result<Vec<QValue>, GoodSetError> {
    let scan = GoodSetScan::new(x, *params, aspect)?;
    Ok(scan
        .q1_flags()
        .into_iter()
        .zip(scan.values())
        .filter_map(|(b, v)| b.then_some(v))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Q2Set {
    pub members: Vec<QValue>,
    /// Final value below `X`, excluded because its successor is not examined.
    pub excluded_last: Option<QValue>,
}

/// `Q₂ ∩ [0, X]` for the gap threshold `gap`.
pub fn q2(x: f64, gap: &GapFn, aspect: AspectRatio) -> Q2Set {
    let spectrum = distinct_spectrum(x.max(0.0), aspect);
    let n_values = spectrum.len();
    let (flags, excluded) = q2_flags_for(&spectrum, n_values, gap);
    Q2Set {
        members: flags
            .into_iter()
            .zip(spectrum.values())
            .filter_map(|(b, v)| b.then_some(v))
            .collect(),
        excluded_last: excluded.map(|k| spectrum.value(k)),
    }
}

pub fn qprime(x: f64, params: &GoodSetParams, aspect: AspectRatio) -> Result<GoodSetReport, GoodSetError> {
    Ok(GoodSetScan::new(x, *params, aspect)?.report())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodSetRow {
    pub value: QValue,
    pub in_q1: bool,
    pub in_q2: bool,
    pub in_qprime: bool,
    /// `None` for `n < 1`, where the certificate is not defined.
    pub certificate: Option<Certificate>,
    /// Margin that membership in `Q₁` guarantees; see [`implied_margin`].
    pub implied_margin: Option<f64>,
}

/// Complement statistics of `Q₁` on `[0, x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplementPoint {
    pub x: f64,
    pub values: usize,
    pub complement: usize,
    pub density: f64,
    /// `complement / x^{1/2+δ+θ+ε}`
    pub normalized: f64,
}

fn complement_curve(rows: &[GoodSetRow], cutoff: f64, params: &GoodSetParams) -> Vec<ComplementPoint> {
    let mut checkpoints = Vec::new();
    let mut x = 10.0;
    while x < cutoff {
        checkpoints.push(x);
        x *= 10.0;
    }
    checkpoints.push(cutoff);
    let e = params.complement_exponent();
    checkpoints
        .into_iter()
        .map(|x| {
            let upto: Vec<&GoodSetRow> = rows.iter().filter(|r| r.value.le_real(x)).collect();
            let complement = upto.iter().filter(|r| !r.in_q1).count();
            ComplementPoint {
                x,
                values: upto.len(),
                complement,
                density: complement as f64 / upto.len().max(1) as f64,
                normalized: complement as f64 / x.powf(e),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodSetReport {
    pub cutoff: f64,
    pub params: GoodSetParams,
    pub rows: Vec<GoodSetRow>,
    pub q2_excluded_last: Option<QValue>,
    pub complement_curve: Vec<ComplementPoint>,
}

impl GoodSetReport {
    fn density(&self, f: impl Fn(&GoodSetRow) -> bool) -> f64 {
        self.rows.iter().filter(|r| f(r)).count() as f64 / self.rows.len().max(1) as f64
    }

    pub fn q1_density(&self) -> f64 {
        self.density(|r| r.in_q1)
    }

    pub fn q2_density(&self) -> f64 {
        self.density(|r| r.in_q2)
    }

    pub fn qprime_density(&self) -> f64 {
        self.density(|r| r.in_qprime)
    }

    /// Values in `Q₁` whose certificate margin falls below the margin that
    /// `Q₁` membership implies. Nonzero counts indicate an inconsistency.
    pub fn implied_margin_violations(&self) -> Vec<QValue> {
        self.rows
            .iter()
            .filter(|r| r.in_q1)
            .filter_map(|r| match (r.certificate, r.implied_margin) {
                (Some(c), Some(m)) if c.margin < m - 1e-9 => Some(r.value),
                _ => None,
            })
            .collect()
    }

    /// Values in `Q₁` failing the certificate at the configured `c`.
    pub fn q1_uncertified(&self) -> Vec<QValue> {
        self.rows
            .iter()
            .filter(|r| r.in_q1 && r.certificate.is_some_and(|c| !c.pass))
            .map(|r| r.value)
            .collect()
    }

    /// Values passing the certificate without being in `Q₁`.
    pub fn certified_outside_q1(&self) -> Vec<QValue> {
        self.rows
            .iter()
            .filter(|r| !r.in_q1 && r.certificate.is_some_and(|c| c.pass))
            .map(|r| r.value)
            .collect()
    }

    pub fn summary(&self) -> GoodSetSummary {
        GoodSetSummary {
            cutoff: self.cutoff,
            values: self.rows.len(),
            q1_density: self.q1_density(),
            q2_density: self.q2_density(),
            qprime_density: self.qprime_density(),
            certified_density: self.density(|r| r.certificate.is_some_and(|c| c.pass)),
            q2_excluded_last: self.q2_excluded_last.map(|v| v.to_f64()),
            implied_margin_violations: self.implied_margin_violations().len(),
            q1_uncertified: self.q1_uncertified().len(),
            certified_outside_q1: self.certified_outside_q1().len(),
            complement_curve: self.complement_curve.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodSetSummary {
    pub cutoff: f64,
    pub values: usize,
    pub q1_density: f64,
    pub q2_density: f64,
    pub qprime_density: f64,
    pub certified_density: f64,
    pub q2_excluded_last: Option<f64>,
    pub implied_margin_violations: usize,
    pub q1_uncertified: usize,
    pub certified_outside_q1: usize,
    pub complement_curve: Vec<ComplementPoint>,
}

/// Decides `λ ∈ Σ` for eigenvalue brackets `(n_k, n_{k+1})`: the lower end
/// must pass the certificate and the gap must be at most `G(n_k)`.
#[derive(Debug, Clone)]
pub struct GoodBrackets {
    params: GoodSetParams,
    spectrum: Spectrum,
    zetas: Vec<DualVector>,
}

impl GoodBrackets {
    /// Prepares classification for brackets with `n_k ≤ top`.
    pub fn new(top: f64, params: GoodSetParams, aspect: AspectRatio) -> Self {
        let top = top.max(1.0);
        let spectrum = distinct_spectrum(top + 2.0 * top.powf(params.delta.max(0.0)) + top.sqrt() + 4.0, aspect);
        let zetas = short_shifts(top.powf(2.0 * params.epsilon), aspect);
        Self {
            params,
            spectrum,
            zetas,
        }
    }

    pub fn params(&self) -> &GoodSetParams {
        &self.params
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn certificate(&self, n: QValue) -> Option<Certificate> {
        (n.to_f64() >= 1.0).then(|| certify_in(&self.spectrum, n, &self.params, &self.zetas))
    }

    /// Whether `(n_k, n_{k+1})` with `n_k = n` is a good bracket.
    pub fn is_good(&self, n: QValue) -> bool {
        let Some(k) = self.spectrum.index_of(n) else {
            return false;
        };
        if k + 1 >= self.spectrum.len() {
            return false;
        }
        let next = self.spectrum.value(k + 1);
        next.within(&n, self.params.gap.eval(n.to_f64()))
            && self.certificate(n).is_some_and(|c| c.pass)
    }
}
