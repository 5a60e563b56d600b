use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use toral::diagnostics::{
    decay_fit, discrepancy, equi_condition, localization_bound, theoretical_rate, DiscrepancyRecord, Observable,
    RateParams,
};
use toral::goodset::{GoodBrackets, GoodSetScan, GoodSetSummary};
use toral::io::{
    fmt_f64, to_json, write_disorder, write_eigenpairs, write_eigenvectors, write_equidist, write_goodset,
    write_positions, write_spectrum, CsvSink, DisorderRow, PairSummary, PotentialDocument, Provenance,
};
use toral::lattice::{distinct_spectrum, AspectRatio, DualVector};
use toral::potentials::{
    default_radius_grid, distorted_lattice, grid_positions, l2_norm_bound_check, rdm_sample, scatterer_potential,
    strong_disorder_potential, trig_potential, weak_disorder_check, BumpProfile, DisplacementLaw, FourierPotential,
    RdmConfig, ScattererConfig, TorusPoint,
};
use toral::solver::{
    assemble, build_basis_capped, eigensolve, fourier_bound_check, mark_sigma, truncate_eigenfunction, EigenPair,
};

use crate::config::{Layout, PotentialSpec, RunConfig};

/// Window used for the `tail_mass_delta0.3` column of `eigenpairs.csv`.
const EIGENPAIR_TAIL_DELTA: f64 = 0.3;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical tolerance failure: {0}")]
    Tolerance(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn other(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Other(e.into())
}

/// Files produced by a run, written only after every computation succeeds.
#[derive(Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    /// Set when the run finished but a numerical check failed.
    pub tolerance: Option<String>,
}

impl Outputs {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

pub struct Context {
    pub config: RunConfig,
    pub aspect: AspectRatio,
    pub prov: Provenance,
    pub base_dir: PathBuf,
}

impl Context {
    pub fn new(config: RunConfig, base_dir: PathBuf) -> Result<Self, Failure> {
        let aspect = config.aspect().map_err(invalid)?;
        if !config.cutoff.is_finite() {
            return Err(invalid(format!("cutoff = {} must be finite", config.cutoff)));
        }
        let prov = Provenance {
            config_sha256: config.sha256(),
            seed: config.seed,
        };
        Ok(Self {
            config,
            aspect,
            prov,
            base_dir,
        })
    }

    fn seed(&self, what: &str) -> Result<u64, Failure> {
        self.config
            .seed
            .ok_or_else(|| invalid(format!("{what} is random and needs a seed (config `seed` or --seed)")))
    }

    fn run_id(&self) -> String {
        self.prov.config_sha256[..12].to_string()
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_sha256: &'a str,
    seed: Option<u64>,
    #[serde(flatten)]
    body: T,
}

fn stamped_json<T: Serialize>(ctx: &Context, body: T) -> Result<Vec<u8>, Failure> {
    let doc = Stamped {
        config_sha256: &ctx.prov.config_sha256,
        seed: ctx.prov.seed,
        body,
    };
    Ok(to_json(&doc).map_err(other)?.into_bytes())
}

pub fn spectrum(ctx: &Context) -> Result<Outputs, Failure> {
    let t = ctx.config.cutoff;
    if t < 0.0 {
        return Err(invalid(format!("cutoff = {t} must be non-negative")));
    }
    let spec = distinct_spectrum(t, ctx.aspect);
    let mut out = Outputs::default();
    out.add("spectrum.csv", write_spectrum(Vec::new(), &ctx.prov, &spec).map_err(other)?);
    Ok(out)
}

#[derive(Serialize)]
struct GoodSetDocument {
    summary: GoodSetSummary,
}

pub fn goodset(ctx: &Context) -> Result<Outputs, Failure> {
    let params = ctx.config.goodset.params().map_err(invalid)?;
    let scan = GoodSetScan::new(ctx.config.cutoff, params, ctx.aspect).map_err(invalid)?;
    let report = scan.report();
    let mut out = Outputs::default();
    out.add("goodset.csv", write_goodset(Vec::new(), &ctx.prov, &report).map_err(other)?);
    out.add(
        "goodset_summary.json",
        stamped_json(ctx, GoodSetDocument {
            summary: report.summary(),
        })?,
    );
    Ok(out)
}

/// Scatterer positions and their undisplaced base (empty when there is none).
struct Placement {
    omega: Vec<TorusPoint>,
    base: Vec<TorusPoint>,
}

fn square_side(n: usize) -> Result<usize, Failure> {
    let m = (n as f64).sqrt().round() as usize;
    if m == 0 || m * m != n {
        return Err(invalid(format!("N = {n} must be a positive perfect square")));
    }
    Ok(m)
}

struct LayoutSpec<'a> {
    layout: Layout,
    n: Option<usize>,
    r0: Option<f64>,
    r1: Option<f64>,
    law: DisplacementLaw,
    file: Option<&'a PathBuf>,
}

fn place(ctx: &Context, spec: &LayoutSpec) -> Result<Placement, Failure> {
    let aspect = ctx.aspect;
    let need_n = || spec.n.ok_or_else(|| invalid(format!("layout {:?} needs `n`", spec.layout)));
    match spec.layout {
        Layout::Grid => {
            let m = square_side(need_n()?)?;
            Ok(Placement {
                omega: grid_positions(m, aspect),
                base: Vec::new(),
            })
        }
        Layout::Distorted => {
            let n = need_n()?;
            let m = square_side(n)?;
            let r0 = spec.r0.ok_or_else(|| invalid("layout distorted needs `r0`"))?;
            let seed = ctx.seed("layout distorted")?;
            Ok(Placement {
                omega: distorted_lattice(n, r0, seed, aspect).map_err(invalid)?,
                base: grid_positions(m, aspect),
            })
        }
        Layout::Rdm => {
            let m = square_side(need_n()?)?;
            let r1 = spec.r1.ok_or_else(|| invalid("layout rdm needs `r1`"))?;
            let base = grid_positions(m, aspect);
            let omega = if r1 == 0.0 {
                base.clone()
            } else {
                let cfg = RdmConfig {
                    base: base.clone(),
                    r1,
                    law: spec.law,
                    seed: ctx.seed("layout rdm")?,
                };
                rdm_sample(&cfg, aspect).map_err(invalid)?
            };
            Ok(Placement { omega, base })
        }
        Layout::File => {
            let file = spec.file.ok_or_else(|| invalid("layout file needs `file`"))?;
            let path = ctx.base_dir.join(file);
            let f = fs::File::open(&path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let omega = toral::io::read_positions(f).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            if omega.is_empty() {
                return Err(invalid(format!("{}: no positions", path.display())));
            }
            Ok(Placement {
                omega,
                base: Vec::new(),
            })
        }
    }
}

/// Everything derived from the `[potential]` table for a given `N`.
struct Scatterers {
    placement: Placement,
    config: ScattererConfig,
    profile: BumpProfile,
    strong: Option<(f64, u32)>,
}

fn scatterers(ctx: &Context, spec: &PotentialSpec, n: Option<usize>, length: Option<u32>) -> Result<Scatterers, Failure> {
    let aspect = ctx.aspect;
    match spec {
        PotentialSpec::Trig { .. } => Err(invalid("a scatterer potential is required here, got kind trig")),
        PotentialSpec::Scatterer {
            layout,
            n: n0,
            r0,
            r1,
            law,
            file,
            scale,
            amplitude,
            bump_radius,
            bump_amplitude,
        } => {
            let placement = place(
                ctx,
                &LayoutSpec {
                    layout: *layout,
                    n: n.or(*n0),
                    r0: *r0,
                    r1: *r1,
                    law: law.unwrap_or_default(),
                    file: file.as_ref(),
                },
            )?;
            let s = scale.unwrap_or((placement.omega.len() as f64).sqrt());
            let config = ScattererConfig::new(placement.omega.clone(), s, *amplitude, aspect).map_err(invalid)?;
            Ok(Scatterers {
                placement,
                config,
                profile: BumpProfile::new(*bump_radius, *bump_amplitude).map_err(invalid)?,
                strong: None,
            })
        }
        PotentialSpec::Rdm {
            n: n0,
            r1,
            law,
            scale,
            amplitude,
            bump_radius,
            bump_amplitude,
        } => {
            let placement = place(
                ctx,
                &LayoutSpec {
                    layout: Layout::Rdm,
                    n: Some(n.unwrap_or(*n0)),
                    r0: None,
                    r1: Some(*r1),
                    law: *law,
                    file: None,
                },
            )?;
            let s = scale.unwrap_or((placement.omega.len() as f64).sqrt());
            let config = ScattererConfig::new(placement.omega.clone(), s, *amplitude, aspect).map_err(invalid)?;
            Ok(Scatterers {
                placement,
                config,
                profile: BumpProfile::new(*bump_radius, *bump_amplitude).map_err(invalid)?,
                strong: None,
            })
        }
        PotentialSpec::StrongDisorder {
            alpha,
            length: l0,
            n: n0,
            r1,
            law,
            bump_radius,
            bump_amplitude,
        } => {
            let l = length.unwrap_or(*l0);
            if l < 1 {
                return Err(invalid("strong disorder needs length L >= 1"));
            }
            let placement = place(
                ctx,
                &LayoutSpec {
                    layout: Layout::Rdm,
                    n: Some(n.unwrap_or(*n0)),
                    r0: None,
                    r1: Some(*r1),
                    law: *law,
                    file: None,
                },
            )?;
            let lf = l as f64;
            let config =
                ScattererConfig::new(placement.omega.clone(), lf, alpha * lf * lf, aspect).map_err(invalid)?;
            Ok(Scatterers {
                placement,
                config,
                profile: BumpProfile::new(*bump_radius, *bump_amplitude).map_err(invalid)?,
                strong: Some((*alpha, l)),
            })
        }
    }
}

/// The potential of the `[potential]` table with its documents.
struct Built {
    potential: FourierPotential,
    document: PotentialDocument,
    placement: Option<Placement>,
    /// `λ = E · lambda_scale`; `L²` for strong disorder.
    lambda_scale: f64,
}

fn build_potential(ctx: &Context, cutoff: f64) -> Result<Built, Failure> {
    let spec = ctx
        .config
        .potential
        .as_ref()
        .ok_or_else(|| invalid("a [potential] table is required"))?;
    let aspect = ctx.aspect;
    if let PotentialSpec::Trig { coefficients, real } = spec {
        let coeffs = coefficients
            .iter()
            .map(|c| (DualVector::new(c.m, c.n), Complex64::new(c.re, c.im)));
        let potential = trig_potential(aspect, coeffs, *real).map_err(invalid)?;
        let document = PotentialDocument::new("trig", &potential);
        return Ok(Built {
            potential,
            document,
            placement: None,
            lambda_scale: 1.0,
        });
    }
    let sc = scatterers(ctx, spec, None, None)?;
    let (potential, lambda_scale) = match sc.strong {
        Some((alpha, l)) => {
            let sd = strong_disorder_potential(alpha, l, sc.placement.omega.clone(), &sc.profile, aspect, cutoff)
                .map_err(invalid)?;
            (sd.potential, (l as f64).powi(2))
        }
        None => (scatterer_potential(&sc.config, &sc.profile, aspect, cutoff), 1.0),
    };
    let mut document = PotentialDocument::new(spec.kind(), &potential);
    document.profile = Some(sc.profile);
    document.scale = Some(sc.config.scale());
    document.amplitude = Some(sc.config.amplitude());
    Ok(Built {
        potential,
        document,
        placement: Some(sc.placement),
        lambda_scale,
    })
}

struct Solved {
    built: Built,
    pairs: Vec<EigenPair>,
    summaries: Vec<PairSummary>,
}

fn solve_configured(ctx: &Context) -> Result<Solved, Failure> {
    let params = ctx.config.goodset.params().map_err(invalid)?;
    let cutoff = ctx.config.cutoff;
    let basis = build_basis_capped(cutoff, ctx.aspect, ctx.config.solver.basis_cap).map_err(invalid)?;
    let built = build_potential(ctx, cutoff)?;
    let h = assemble(&built.potential, Arc::new(basis)).map_err(other)?;
    let top = cutoff + h.coupling_l1() + 4.0 * cutoff.sqrt() + 8.0;
    let spectrum = distinct_spectrum(top, ctx.aspect);
    let mut pairs = eigensolve(&h, &spectrum);
    let highest = pairs.last().map_or(1.0, |p| p.lambda);
    let good = GoodBrackets::new(highest, params, ctx.aspect);
    mark_sigma(&mut pairs, &good);
    let summaries = pairs
        .par_iter()
        .map(|p| PairSummary {
            tail_mass: truncate_eigenfunction(p, EIGENPAIR_TAIL_DELTA).ok().map(|t| t.tail_mass),
            fourier_ratio: fourier_bound_check(p, &built.potential).max_ratio,
        })
        .collect();
    Ok(Solved {
        built,
        pairs,
        summaries,
    })
}

fn residual_failures(pairs: &[EigenPair]) -> Option<String> {
    let bad: Vec<&EigenPair> = pairs.iter().filter(|p| !p.residual_ok).collect();
    let worst = bad.iter().map(|p| p.residual).fold(0.0, f64::max);
    (!bad.is_empty()).then(|| format!("{} eigenpairs exceed the residual tolerance (worst {worst:e})", bad.len()))
}

fn common_outputs(ctx: &Context, solved: &Solved, out: &mut Outputs) -> Result<(), Failure> {
    out.add(
        "eigenpairs.csv",
        write_eigenpairs(Vec::new(), &ctx.prov, &solved.pairs, &solved.summaries).map_err(other)?,
    );
    out.add("potential.json", to_json(&solved.built.document).map_err(other)?.into_bytes());
    if let Some(pl) = &solved.built.placement {
        out.add(
            "positions.csv",
            write_positions(Vec::new(), &ctx.prov, &pl.omega, &pl.base).map_err(other)?,
        );
    }
    out.tolerance = residual_failures(&solved.pairs);
    Ok(())
}

pub fn solve(ctx: &Context) -> Result<Outputs, Failure> {
    let solved = solve_configured(ctx)?;
    let mut out = Outputs::default();
    common_outputs(ctx, &solved, &mut out)?;
    if ctx.config.solver.dump_eigenvectors {
        let mut basis = CsvSink::new(Vec::new(), &ctx.prov, &["j", "m", "n", "norm_float"]).map_err(other)?;
        if let Some(p) = solved.pairs.first() {
            for (j, (v, q)) in p.basis.vectors().iter().zip(p.basis.norms()).enumerate() {
                basis
                    .row([j.to_string(), v.m.to_string(), v.n.to_string(), fmt_f64(q.to_f64())])
                    .map_err(other)?;
            }
        }
        out.add("basis.csv", basis.finish().map_err(other)?);
        out.add("eigenvectors.bin", write_eigenvectors(Vec::new(), &solved.pairs).map_err(other)?);
    }
    Ok(out)
}

fn observables(ctx: &Context) -> Result<Vec<Observable>, Failure> {
    let t = &ctx.config.observables;
    let mut list = Vec::new();
    for [m, n] in &t.cos {
        list.push(Observable::cosine(DualVector::new(*m, *n)));
    }
    for [m, n] in &t.sin {
        list.push(Observable::sine(DualVector::new(*m, *n)));
    }
    for s in &t.smooth {
        if !(s.radius >= 1.0) {
            return Err(invalid(format!("smooth observable radius {} must be at least 1", s.radius)));
        }
        list.push(Observable::smooth(s.k, s.radius, ctx.aspect));
    }
    if list.is_empty() {
        return Err(invalid("[observables] lists no observable"));
    }
    Ok(list)
}

#[derive(Serialize)]
struct FitEntry {
    observable_id: String,
    slope: Option<f64>,
    intercept: Option<f64>,
    fitted_c: Option<f64>,
    used: Option<usize>,
    error: Option<String>,
}

#[derive(Serialize)]
struct EquidistSummary {
    run_id: String,
    pairs: usize,
    in_sigma: usize,
    truncation_safe: usize,
    window: Option<[f64; 2]>,
    records: usize,
    theoretical_rate: f64,
    fourier_bound_checked: usize,
    fourier_bound_passed: usize,
    fits: Vec<FitEntry>,
}

pub fn equidist(ctx: &Context) -> Result<Outputs, Failure> {
    let rate: RateParams = ctx.config.rate.params().map_err(invalid)?;
    let obs = observables(ctx)?;
    if let Some(w) = &ctx.config.window {
        if !(w.energy > 0.0 && w.energy.is_finite()) {
            return Err(invalid(format!("window.energy = {} must be positive", w.energy)));
        }
    }
    let delta = ctx.config.goodset.delta;
    let solved = solve_configured(ctx)?;
    let v_norm = solved.built.potential.l2_norm();
    let window = ctx
        .config
        .window
        .as_ref()
        .map(|w| [w.energy * solved.built.lambda_scale, 2.0 * w.energy * solved.built.lambda_scale]);
    let selected: Vec<&EigenPair> = solved
        .pairs
        .iter()
        .filter(|p| window.is_none_or(|[lo, hi]| p.lambda >= lo && p.lambda <= hi))
        .collect();
    let records: Vec<DiscrepancyRecord> = selected
        .par_iter()
        .map(|p| {
            obs.iter()
                .map(|a| discrepancy(a, p, v_norm, &rate, delta))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid)?
        .into_iter()
        .flatten()
        .collect();
    let run_id = ctx.run_id();
    let fits = obs
        .iter()
        .map(|a| {
            let mine: Vec<DiscrepancyRecord> =
                records.iter().filter(|r| r.observable_id == a.id).cloned().collect();
            match decay_fit(&mine) {
                Ok(f) => FitEntry {
                    observable_id: a.id.clone(),
                    slope: Some(f.slope),
                    intercept: Some(f.intercept),
                    fitted_c: Some(f.fitted_c),
                    used: Some(f.used),
                    error: None,
                },
                Err(e) => FitEntry {
                    observable_id: a.id.clone(),
                    slope: None,
                    intercept: None,
                    fitted_c: None,
                    used: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let safe: Vec<usize> = (0..solved.pairs.len())
        .filter(|&i| solved.pairs[i].truncation_safe)
        .collect();
    let summary = EquidistSummary {
        run_id: run_id.clone(),
        pairs: solved.pairs.len(),
        in_sigma: solved.pairs.iter().filter(|p| p.in_sigma).count(),
        truncation_safe: safe.len(),
        window,
        records: records.len(),
        theoretical_rate: theoretical_rate(&rate),
        fourier_bound_checked: safe.len(),
        fourier_bound_passed: safe
            .iter()
            .filter(|&&i| solved.summaries[i].fourier_ratio <= toral::solver::FOURIER_BOUND_SLACK)
            .count(),
        fits,
    };
    let mut out = Outputs::default();
    common_outputs(ctx, &solved, &mut out)?;
    out.add(
        "equidist.csv",
        write_equidist(Vec::new(), &ctx.prov, &run_id, &records).map_err(other)?,
    );
    out.add("equidist_summary.json", stamped_json(ctx, summary)?);
    Ok(out)
}

pub fn disorder(ctx: &Context) -> Result<Outputs, Failure> {
    let table = ctx
        .config
        .disorder
        .as_ref()
        .ok_or_else(|| invalid("a [disorder] table is required"))?;
    let spec = ctx
        .config
        .potential
        .as_ref()
        .ok_or_else(|| invalid("a [potential] table is required"))?;
    let rate = ctx.config.rate.params().map_err(invalid)?;
    let is_file = matches!(spec, PotentialSpec::Scatterer { layout: Layout::File, .. });
    let ns: Vec<Option<usize>> = if is_file || table.n_values.is_empty() {
        vec![None]
    } else {
        table.n_values.iter().map(|&n| Some(n)).collect()
    };
    let strong = matches!(spec, PotentialSpec::StrongDisorder { .. });
    let lengths: Vec<Option<u32>> = if strong && !table.lengths.is_empty() {
        table.lengths.iter().map(|&l| Some(l)).collect()
    } else {
        vec![None]
    };
    let points: Vec<(Option<usize>, Option<u32>)> = ns
        .iter()
        .flat_map(|&n| lengths.iter().map(move |&l| (n, l)))
        .collect();
    let energy = ctx.config.window.as_ref().map(|w| w.energy);
    // build every configuration first so that nothing runs on invalid input
    let prepared: Vec<Scatterers> = points
        .iter()
        .map(|&(n, l)| scatterers(ctx, spec, n, l))
        .collect::<Result<_, _>>()?;
    for sc in &prepared {
        let n = sc.placement.omega.len();
        let radii = table.radii.clone().unwrap_or_else(|| default_radius_grid(n));
        let top = (n as f64).sqrt();
        if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r <= top)) {
            return Err(invalid(format!("ball radius R = {r} must lie in (0, {top}] for N = {n}")));
        }
    }
    let rows: Vec<DisorderRow> = prepared
        .par_iter()
        .map(|sc| -> Result<DisorderRow, Failure> {
            let n = sc.placement.omega.len();
            let radii = table.radii.clone().unwrap_or_else(|| default_radius_grid(n));
            let norm = l2_norm_bound_check(&sc.config, &sc.profile, table.norm_c, ctx.aspect);
            let weak = weak_disorder_check(&sc.placement.omega, n, table.c, &radii, ctx.aspect).map_err(invalid)?;
            let mut row = DisorderRow {
                n,
                length: None,
                alpha: None,
                rho: None,
                scale: sc.config.scale(),
                amplitude: sc.config.amplitude(),
                v_l2_norm: norm.lhs.sqrt(),
                l2_bound_lhs: norm.lhs,
                l2_bound_rhs: norm.rhs,
                l2_bound_pass: norm.pass,
                weak_disorder_constant: table.c,
                weak_disorder_pass: weak.pass,
                worst_ratio: weak.worst_ratio,
                equi_lhs: None,
                equi_rhs: None,
                equi_satisfied: None,
            };
            if let Some((alpha, l)) = sc.strong {
                let sd = strong_disorder_potential(alpha, l, sc.placement.omega.clone(), &sc.profile, ctx.aspect, 1.0)
                    .map_err(invalid)?;
                row.length = Some(l);
                row.alpha = Some(alpha);
                row.rho = Some(sd.rho);
                if let Some(e) = energy {
                    let eq = equi_condition(sd.rho, alpha, sc.profile.l2_norm(), l as f64, e, &rate)
                        .map_err(invalid)?;
                    row.equi_lhs = Some(eq.lhs);
                    row.equi_rhs = Some(eq.rhs);
                    row.equi_satisfied = Some(eq.satisfied);
                }
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;
    let mut out = Outputs::default();
    out.add("disorder.csv", write_disorder(Vec::new(), &ctx.prov, &rows).map_err(other)?);
    Ok(out)
}

#[derive(Serialize)]
struct LocboundDocument {
    alpha: f64,
    energy: f64,
    rho: f64,
    v_norm: f64,
    theta: String,
    epsilon: String,
    rate: f64,
    length_exponent: f64,
    bound: f64,
}

pub fn locbound(ctx: &Context) -> Result<Outputs, Failure> {
    let t = ctx
        .config
        .locbound
        .as_ref()
        .ok_or_else(|| invalid("a [locbound] table is required"))?;
    let rate = ctx.config.rate.params().map_err(invalid)?;
    let bound = localization_bound(t.alpha, t.energy, t.rho, t.v_norm, &rate).map_err(invalid)?;
    let exp = rate.length_exponent();
    let doc = LocboundDocument {
        alpha: t.alpha,
        energy: t.energy,
        rho: t.rho,
        v_norm: t.v_norm,
        theta: rate.theta.to_string(),
        epsilon: rate.epsilon.to_string(),
        rate: theoretical_rate(&rate),
        length_exponent: *exp.numer() as f64 / *exp.denom() as f64,
        bound,
    };
    let mut out = Outputs::default();
    out.add("locbound.json", stamped_json(ctx, doc)?);
    Ok(out)
}
