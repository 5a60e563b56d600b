//! Output formats.
//!
//! Every CSV file opens with one comment line
//! `# config_sha256=<hex> seed=<u64 or none>` followed by a header row.
//! Floats are written with 17 significant digits (`{:.16e}`), booleans as
//! `true`/`false`, and absent values as empty cells. JSON floats follow the
//! same 17-digit rule; non-finite values become `null`.

use std::io::{self, Read, Write};

use serde::Serialize;
use serde_json::Value;

use crate::diagnostics::DiscrepancyRecord;
use crate::goodset::GoodSetReport;
use crate::lattice::{DualVector, QValue, Spectrum};
use crate::potentials::{BumpProfile, FourierPotential, TorusPoint};
use crate::solver::EigenPair;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn comment_line(&self) -> String {
        match self.seed {
            Some(s) => format!("# config_sha256={} seed={}", self.config_sha256, s),
            None => format!("# config_sha256={} seed=none", self.config_sha256),
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// CSV sink with the provenance comment already written.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W, prov: &Provenance, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", prov.comment_line())?;
        let mut inner = csv::WriterBuilder::new().from_writer(out);
        inner.write_record(header).map_err(io::Error::other)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> io::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(io::Error::other)
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| e.into_error())
    }
}

pub const SPECTRUM_HEADER: [&str; 5] = ["k", "num", "den", "value_float", "multiplicity"];

/// One row per dual vector, grouped by distinct value index `k`.
pub fn write_spectrum<W: Write>(out: W, prov: &Provenance, spectrum: &Spectrum) -> io::Result<W> {
    let mut sink = CsvSink::new(out, prov, &SPECTRUM_HEADER)?;
    for (k, e) in spectrum.entries().iter().enumerate() {
        let mult = e.multiplicity().to_string();
        for _ in &e.vectors {
            sink.row([
                k.to_string(),
                e.value.num().to_string(),
                e.value.den().to_string(),
                fmt_f64(e.value.to_f64()),
                mult.clone(),
            ])?;
        }
    }
    sink.finish()
}

pub const GOODSET_HEADER: [&str; 10] = [
    "num",
    "den",
    "value_float",
    "in_q1",
    "in_q2",
    "in_qprime",
    "certificate_pass",
    "certificate_margin",
    "witness_xi",
    "witness_zeta",
];

pub fn write_goodset<W: Write>(out: W, prov: &Provenance, report: &GoodSetReport) -> io::Result<W> {
    let mut sink = CsvSink::new(out, prov, &GOODSET_HEADER)?;
    for r in &report.rows {
        let (pass, margin, wx, wz) = match &r.certificate {
            Some(c) => (
                c.pass.to_string(),
                fmt_f64(c.margin),
                c.witness.map(|w| w.0.to_string()).unwrap_or_default(),
                c.witness.map(|w| w.1.to_string()).unwrap_or_default(),
            ),
            None => Default::default(),
        };
        sink.row([
            r.value.num().to_string(),
            r.value.den().to_string(),
            fmt_f64(r.value.to_f64()),
            r.in_q1.to_string(),
            r.in_q2.to_string(),
            r.in_qprime.to_string(),
            pass,
            margin,
            wx,
            wz,
        ])?;
    }
    sink.finish()
}

pub const EIGENPAIRS_HEADER: [&str; 8] = [
    "pair_id",
    "lambda",
    "n_k_num",
    "n_k_den",
    "in_sigma",
    "residual",
    "tail_mass_delta0.3",
    "fourier_bound_max_ratio",
];

/// Per-pair quantities computed by the caller alongside each pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSummary {
    pub tail_mass: Option<f64>,
    pub fourier_ratio: f64,
}

pub fn write_eigenpairs<W: Write>(
    out: W,
    prov: &Provenance,
    pairs: &[EigenPair],
    summaries: &[PairSummary],
) -> io::Result<W> {
    let mut sink = CsvSink::new(out, prov, &EIGENPAIRS_HEADER)?;
    for (p, s) in pairs.iter().zip(summaries) {
        let (num, den) = p
            .bracket
            .lower
            .map(|n| (n.num().to_string(), n.den().to_string()))
            .unwrap_or_default();
        sink.row([
            p.index.to_string(),
            fmt_f64(p.lambda),
            num,
            den,
            p.in_sigma.to_string(),
            fmt_f64(p.residual),
            fmt_opt(s.tail_mass),
            fmt_f64(s.fourier_ratio),
        ])?;
    }
    sink.finish()
}

pub const EQUIDIST_HEADER: [&str; 9] = [
    "run_id",
    "lambda",
    "n_k_float",
    "in_sigma",
    "observable_id",
    "discrepancy",
    "envelope",
    "tail_mass",
    "ann_min_gap",
];

pub fn write_equidist<W: Write>(
    out: W,
    prov: &Provenance,
    run_id: &str,
    records: &[DiscrepancyRecord],
) -> io::Result<W> {
    let mut sink = CsvSink::new(out, prov, &EQUIDIST_HEADER)?;
    for r in records {
        sink.row([
            run_id.to_string(),
            fmt_f64(r.lambda),
            fmt_opt(r.n_k.map(|n: QValue| n.to_f64())),
            r.in_sigma.to_string(),
            r.observable_id.clone(),
            fmt_f64(r.discrepancy),
            fmt_f64(r.envelope),
            fmt_opt(r.tail_mass),
            fmt_opt(r.ann_min_gap),
        ])?;
    }
    sink.finish()
}

pub const POSITIONS_HEADER: [&str; 5] = ["j", "omega_x", "omega_y", "base_x", "base_y"];

/// Positions with their undisplaced base points (the base may be empty).
pub fn write_positions<W: Write>(
    out: W,
    prov: &Provenance,
    omega: &[TorusPoint],
    base: &[TorusPoint],
) -> io::Result<W> {
    let mut sink = CsvSink::new(out, prov, &POSITIONS_HEADER)?;
    for (j, p) in omega.iter().enumerate() {
        let (bx, by) = base
            .get(j)
            .map(|b| (fmt_f64(b.x), fmt_f64(b.y)))
            .unwrap_or_default();
        sink.row([j.to_string(), fmt_f64(p.x), fmt_f64(p.y), bx, by])?;
    }
    sink.finish()
}

/// Reads `j, omega_x, omega_y, …` rows, skipping `#` comment lines.
pub fn read_positions<R: Read>(input: R) -> Result<Vec<TorusPoint>, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str, fallback: usize| headers.iter().position(|h| h.trim() == name).unwrap_or(fallback);
    let (ix, iy) = (col("omega_x", 1), col("omega_y", 2));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64, csv::Error> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    csv::Error::from(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("bad coordinate in row {:?}", rec.position().map(|p| p.line())),
                    ))
                })
        };
        out.push(TorusPoint::new(parse(ix)?, parse(iy)?));
    }
    Ok(out)
}

pub const DISORDER_HEADER: [&str; 17] = [
    "row",
    "N",
    "L",
    "alpha",
    "rho",
    "scale",
    "amplitude",
    "v_l2_norm",
    "l2_bound_lhs",
    "l2_bound_rhs",
    "l2_bound_pass",
    "weak_disorder_constant",
    "weak_disorder_pass",
    "worst_ratio",
    "equi_lhs",
    "equi_rhs",
    "equi_satisfied",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderRow {
    pub n: usize,
    pub length: Option<u32>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub scale: f64,
    pub amplitude: f64,
    pub v_l2_norm: f64,
    pub l2_bound_lhs: f64,
    pub l2_bound_rhs: f64,
    pub l2_bound_pass: bool,
    pub weak_disorder_constant: f64,
    pub weak_disorder_pass: bool,
    pub worst_ratio: f64,
    pub equi_lhs: Option<f64>,
    pub equi_rhs: Option<f64>,
    pub equi_satisfied: Option<bool>,
}

pub fn write_disorder<W: Write>(out: W, prov: &Provenance, rows: &[DisorderRow]) -> io::Result<W> {
    let mut sink = CsvSink::new(out, prov, &DISORDER_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        sink.row([
            i.to_string(),
            r.n.to_string(),
            r.length.map(|l| l.to_string()).unwrap_or_default(),
            fmt_opt(r.alpha),
            fmt_opt(r.rho),
            fmt_f64(r.scale),
            fmt_f64(r.amplitude),
            fmt_f64(r.v_l2_norm),
            fmt_f64(r.l2_bound_lhs),
            fmt_f64(r.l2_bound_rhs),
            r.l2_bound_pass.to_string(),
            fmt_f64(r.weak_disorder_constant),
            r.weak_disorder_pass.to_string(),
            fmt_f64(r.worst_ratio),
            fmt_opt(r.equi_lhs),
            fmt_opt(r.equi_rhs),
            r.equi_satisfied.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    sink.finish()
}

/// Pretty JSON with every float rendered to 17 significant digits.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    render(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                out.push_str(&if x.is_finite() { format!("{x:.16e}") } else { "null".into() });
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                render(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                render(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientEntry {
    pub m: i64,
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialDocument {
    pub kind: String,
    pub aspect: [i64; 2],
    pub profile: Option<BumpProfile>,
    pub scale: Option<f64>,
    pub amplitude: Option<f64>,
    pub l2_norm: f64,
    pub real: bool,
    pub coefficient_cutoff: Option<f64>,
    pub coefficients: Vec<CoefficientEntry>,
}

impl PotentialDocument {
    pub fn new(kind: &str, v: &FourierPotential) -> Self {
        Self {
            kind: kind.into(),
            aspect: [v.aspect().p(), v.aspect().q()],
            profile: None,
            scale: None,
            amplitude: None,
            l2_norm: v.l2_norm(),
            real: v.is_real(),
            coefficient_cutoff: match v.coverage() {
                crate::potentials::Coverage::Complete => None,
                crate::potentials::Coverage::UpTo(c) => Some(c),
            },
            coefficients: v
                .coeffs()
                .iter()
                .map(|(z, c)| CoefficientEntry {
                    m: z.m,
                    n: z.n,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

/// Eigenvector dump: little-endian `u64` pair count, `u64` dimension, then
/// each eigenvector in turn as `dim` pairs of `f64` (real, imaginary).
pub fn write_eigenvectors<W: Write>(mut out: W, pairs: &[EigenPair]) -> io::Result<W> {
    let dim = pairs.first().map_or(0, |p| p.psi.len());
    out.write_all(&(pairs.len() as u64).to_le_bytes())?;
    out.write_all(&(dim as u64).to_le_bytes())?;
    for p in pairs {
        for c in &p.psi {
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(out)
}

/// Inverse of [`write_eigenvectors`]: one `Vec` of `(re, im)` per pair.
pub fn read_eigenvectors<R: Read>(mut input: R) -> io::Result<Vec<Vec<(f64, f64)>>> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let count = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let dim = u64::from_le_bytes(word) as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            input.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            input.read_exact(&mut word)?;
            v.push((re, f64::from_le_bytes(word)));
        }
        out.push(v);
    }
    Ok(out)
}

/// Basis order of an eigenvector dump, for readers that need `ξ`.
pub fn basis_listing(pairs: &[EigenPair]) -> Vec<DualVector> {
    pairs.first().map(|p| p.basis.vectors().to_vec()).unwrap_or_default()
}
