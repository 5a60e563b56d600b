use thiserror::Error;

use crate::lattice::DualVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("aspect parameters must be positive, got p={p}, q={q}")]
    NonPositiveAspect { p: i64, q: i64 },
    #[error("aspect parameters p={p}, q={q} are not coprime")]
    NotCoprime { p: i64, q: i64 },
    #[error("aspect parameters p={p}, q={q} exceed 4096")]
    AspectTooLarge { p: i64, q: i64 },
    #[error("annulus width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("spectrum cutoff {cutoff} does not reach {needed}")]
    NotCovered { needed: f64, cutoff: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GoodSetError {
    #[error("delta = {delta} must lie in (theta/2, 1/2 - theta) = ({lo}, {hi}) for the good-annulus construction")]
    DeltaOutOfRange { delta: f64, lo: f64, hi: f64 },
    #[error("epsilon = {epsilon} must be positive and below 1/2 - theta - delta = {hi}")]
    EpsilonOutOfRange { epsilon: f64, hi: f64 },
    #[error("certificate margin c = {0} must lie in (0, 2]")]
    MarginOutOfRange(f64),
    #[error("circle-law exponent theta = {0} must lie in [1/4, 1/3)")]
    ThetaOutOfRange(f64),
    #[error("gap threshold scale must be non-negative, got {0}")]
    NegativeGap(f64),
    #[error("cutoff X = {0} must be at least 1")]
    CutoffTooSmall(f64),
    #[error("certificate requires n >= 1, got {0}")]
    ValueTooSmall(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("real potential violates v(-z) = conj v(z) at z = {zeta}")]
    SymmetryViolation { zeta: DualVector },
    #[error("coefficient v({zeta}) is not available (coefficients known up to |z|^2 <= {cutoff})")]
    MissingCoefficient { zeta: DualVector, cutoff: f64 },
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("bump radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("N = {0} is not a perfect square")]
    NotSquare(usize),
    #[error("distortion r0 = {0} must lie in [0, 1/2)")]
    DistortionTooLarge(f64),
    #[error("displacement radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("ball radius R = {r} must lie in (0, sqrt(N)] = (0, {max}]")]
    BallRadiusOutOfRange { r: f64, max: f64 },
    #[error("L must be at least 1, got {0}")]
    LengthScaleTooSmall(f64),
    #[error("empty point set")]
    EmptyPositions,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("basis with cutoff {cutoff} has {size} vectors, above the cap of {cap}")]
    BasisTooLarge { cutoff: f64, size: usize, cap: usize },
    #[error("basis cutoff must be positive, got {0}")]
    NonPositiveCutoff(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("eigenpair at lambda = {0} has no bracket with n_k >= 1")]
    NoBracket(f64),
    #[error("window length L = {0} must be at least 1")]
    WindowTooSmall(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("alpha = 0 leaves the localization bound undefined")]
    ZeroCoupling,
    #[error("argument {name} = {value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("decay fit needs at least 8 usable records with distinct lambda, got {0}")]
    TooFewRecords(usize),
    #[error("all discrepancies vanish; the decay slope is undefined")]
    AllZero,
    #[error("observable is not real-valued")]
    NotReal,
}
