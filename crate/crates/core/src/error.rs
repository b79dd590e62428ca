use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cosine series: {0}")]
    InvalidSeries(String),

    #[error("invalid domain wall: {0}")]
    InvalidWall(String),

    #[error(
        "tabulated profile has no data at X = {x} (table covers [{lo}, {hi}], asymptote beyond |X| >= {threshold})"
    )]
    TableGap { x: f64, lo: f64, hi: f64, threshold: f64 },

    #[error(
        "plane-wave cutoff M = {m_max} too small for potential with max harmonic {max_harmonic} (need M >= {required})"
    )]
    CutoffTooSmall { m_max: usize, max_harmonic: u32, required: usize },

    #[error("requested {requested} bands but basis has dimension {dimension}")]
    TooManyBands { requested: usize, dimension: usize },

    #[error("potential must be an {expected} cosine series")]
    WrongParity { expected: &'static str },

    #[error("parity sectors are only defined at k = pi (got k = {0})")]
    SectorOffHighSymmetry(f64),

    #[error("inversion dropped coefficient mass {0:e} outside the truncation")]
    InversionTruncation(f64),

    #[error("mode is not normalized (|c|^2 sum = {0})")]
    Unnormalized(f64),

    #[error("not a Dirac point at this tolerance: |E_even - E_odd| = {residual:e} (tol {tol:e})")]
    NotDegenerate { residual: f64, tol: f64 },

    #[error("non-degeneracy condition fails: lambda_sharp = {0:e}")]
    LambdaVanishes(f64),

    #[error("band slope {measured} does not match lambda_sharp {predicted} (relative error {relative:e})")]
    SlopeMismatch { measured: f64, predicted: f64, relative: f64 },

    #[error("theta_sharp has imaginary part {0:e}; phase convention violated")]
    PhaseConvention(f64),

    #[error("theta_sharp has not been computed for this certificate")]
    ThetaUnset,

    #[error("k' = {kprime} outside the validity window |k'| < delta = {delta}")]
    OutsideValidity { kprime: f64, delta: f64 },

    #[error("k = 0 pair near (2n pi)^2 not separable from neighbouring bands at eps = {0}")]
    NotSeparable(f64),

    #[error("no zero mode: {0}")]
    NoZeroMode(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("bump perturbation changes the asymptotic limits of the wall")]
    BumpNotCompact,

    #[error("near-zero resolvent denominator at band {band}: E_b - E_star = {gap:e}")]
    NearDegeneracy { band: usize, gap: f64 },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("no spectral gap: bands overlap (lower {lower}, upper {upper})")]
    NoGap { lower: f64, upper: f64 },

    #[error("window ({lower}, {upper}) contains {count} eigenvalues (limit 64)")]
    WindowTooWide { lower: f64, upper: f64, count: usize },

    #[error("invalid window ({0}, {1})")]
    InvalidWindow(f64, f64),

    #[error("boundary leak {0:e} above threshold after enlarging the domain")]
    BoundaryLeak(f64),

    #[error("phase alignment degenerate: inner product magnitude {0:e}")]
    DegenerateAlignment(f64),
}

impl Error {
    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoGap { .. } => 2,
            Error::NoConvergence(_)
            | Error::GridTooCoarse(_)
            | Error::BoundaryLeak(_)
            | Error::SlopeMismatch { .. } => 3,
            _ => 1,
        }
    }
}
