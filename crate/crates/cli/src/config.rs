//! Run configuration, read from a TOML file with flat tables.

use std::path::PathBuf;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toral::diagnostics::RateParams;
use toral::goodset::{GapFn, GoodSetParams, THETA_PROVEN};
use toral::lattice::AspectRatio;
use toral::potentials::DisplacementLaw;
use toral::solver::DEFAULT_BASIS_CAP;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "square")]
    pub aspect: [i64; 2],
    /// Spectrum cutoff `T`, good-set cutoff `X` or basis cutoff `Λ`,
    /// depending on the subcommand.
    pub cutoff: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Output directory; not part of the config hash.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub goodset: GoodSetTable,
    #[serde(default)]
    pub rate: RateTable,
    #[serde(default)]
    pub solver: SolverTable,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub observables: ObservableTable,
    #[serde(default)]
    pub window: Option<WindowTable>,
    #[serde(default)]
    pub disorder: Option<DisorderTable>,
    #[serde(default)]
    pub locbound: Option<LocboundTable>,
}

fn square() -> [i64; 2] {
    [1, 1]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodSetTable {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_margin")]
    pub c: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// `G(n) = gap_scale · (ln(2 + n))²`
    #[serde(default)]
    pub gap_scale: Option<f64>,
    /// `G(n) = gap_constant`
    #[serde(default)]
    pub gap_constant: Option<f64>,
}

fn default_delta() -> f64 {
    GoodSetParams::default().delta
}

fn default_epsilon() -> f64 {
    GoodSetParams::default().epsilon
}

fn default_margin() -> f64 {
    GoodSetParams::default().c
}

fn default_theta() -> f64 {
    THETA_PROVEN
}

impl Default for GoodSetTable {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            epsilon: default_epsilon(),
            c: default_margin(),
            theta: default_theta(),
            gap_scale: None,
            gap_constant: None,
        }
    }
}

impl GoodSetTable {
    pub fn params(&self) -> Result<GoodSetParams, String> {
        let gap = match (self.gap_scale, self.gap_constant) {
            (Some(_), Some(_)) => return Err("goodset: set at most one of gap_scale and gap_constant".into()),
            (Some(scale), None) => GapFn::LogSquared { scale },
            (None, Some(value)) => GapFn::Constant { value },
            (None, None) => GapFn::default(),
        };
        let p = GoodSetParams {
            delta: self.delta,
            epsilon: self.epsilon,
            c: self.c,
            theta: self.theta,
            gap,
        };
        p.validate().map_err(|e| format!("goodset: {e}"))?;
        Ok(p)
    }
}

/// Exponents for the decay envelope and the localization bound, as exact
/// fractions such as `"517/1648"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTable {
    #[serde(default = "default_rate_theta")]
    pub theta: String,
    #[serde(default = "default_rate_epsilon")]
    pub epsilon: String,
}

fn default_rate_theta() -> String {
    "517/1648".into()
}

fn default_rate_epsilon() -> String {
    "1/100".into()
}

impl Default for RateTable {
    fn default() -> Self {
        Self {
            theta: default_rate_theta(),
            epsilon: default_rate_epsilon(),
        }
    }
}

impl RateTable {
    pub fn params(&self) -> Result<RateParams, String> {
        let parse = |name: &str, s: &str| {
            s.trim()
                .parse::<Ratio<i64>>()
                .map_err(|e| format!("rate.{name} = {s:?} is not a fraction: {e}"))
        };
        let theta = parse("theta", &self.theta)?;
        let epsilon = parse("epsilon", &self.epsilon)?;
        if theta < Ratio::new(1, 4) || theta >= Ratio::new(1, 3) {
            return Err(format!("rate.theta = {theta} must lie in [1/4, 1/3)"));
        }
        if epsilon < Ratio::from_integer(0) {
            return Err(format!("rate.epsilon = {epsilon} must be non-negative"));
        }
        Ok(RateParams { theta, epsilon })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverTable {
    #[serde(default = "default_cap")]
    pub basis_cap: usize,
    #[serde(default = "yes")]
    pub dump_eigenvectors: bool,
}

fn default_cap() -> usize {
    DEFAULT_BASIS_CAP
}

fn yes() -> bool {
    true
}

impl Default for SolverTable {
    fn default() -> Self {
        Self {
            basis_cap: default_cap(),
            dump_eigenvectors: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub m: i64,
    pub n: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Grid,
    Distorted,
    Rdm,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Trig {
        coefficients: Vec<Coefficient>,
        #[serde(default = "yes")]
        real: bool,
    },
    Scatterer {
        layout: Layout,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        r0: Option<f64>,
        #[serde(default)]
        r1: Option<f64>,
        #[serde(default)]
        law: Option<DisplacementLaw>,
        #[serde(default)]
        file: Option<PathBuf>,
        /// Defaults to `N^{1/2}`.
        #[serde(default)]
        scale: Option<f64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        bump_radius: f64,
        #[serde(default = "one")]
        bump_amplitude: f64,
    },
    Rdm {
        n: usize,
        r1: f64,
        #[serde(default)]
        law: DisplacementLaw,
        #[serde(default)]
        scale: Option<f64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        bump_radius: f64,
        #[serde(default = "one")]
        bump_amplitude: f64,
    },
    StrongDisorder {
        alpha: f64,
        length: u32,
        n: usize,
        #[serde(default)]
        r1: f64,
        #[serde(default)]
        law: DisplacementLaw,
        #[serde(default = "one")]
        bump_radius: f64,
        #[serde(default = "one")]
        bump_amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            PotentialSpec::Trig { .. } => "trig",
            PotentialSpec::Scatterer { .. } => "scatterer",
            PotentialSpec::Rdm { .. } => "rdm",
            PotentialSpec::StrongDisorder { .. } => "strong_disorder",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSpec {
    pub k: f64,
    pub radius: f64,
}

/// Real observables: `cos⟨ζ,x⟩`, `sin⟨ζ,x⟩` and `Σ_{0<|ζ|≤R} |ζ|^{−K} e_ζ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableTable {
    #[serde(default)]
    pub cos: Vec<[i64; 2]>,
    #[serde(default)]
    pub sin: Vec<[i64; 2]>,
    #[serde(default)]
    pub smooth: Vec<SmoothSpec>,
}

impl Default for ObservableTable {
    fn default() -> Self {
        Self {
            cos: vec![[1, 0], [0, 1], [1, 1]],
            sin: vec![],
            smooth: vec![SmoothSpec { k: 2.0, radius: 3.0 }],
        }
    }
}

/// Eigenvalues are kept when `λ ∈ [E, 2E]`; for strong disorder the
/// window is in rescaled energy `E = λ / L²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowTable {
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderTable {
    /// Sweep over `N`; ignored for file layouts.
    #[serde(default)]
    pub n_values: Vec<usize>,
    /// Sweep over `L` for strong disorder.
    #[serde(default)]
    pub lengths: Vec<u32>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_c")]
    pub norm_c: f64,
    /// Ball radii in units of `N^{−1/2}`; powers of two by default.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

fn default_c() -> f64 {
    8.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocboundTable {
    pub alpha: f64,
    pub energy: f64,
    pub rho: f64,
    pub v_norm: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn aspect(&self) -> Result<AspectRatio, String> {
        AspectRatio::new(self.aspect[0], self.aspect[1]).map_err(|e| format!("aspect: {e}"))
    }

    /// SHA-256 of the resolved configuration in canonical JSON form.
    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
