use thiserror::Error;

/// Everything that can go wrong constructing or combining domain values.
///
/// Construction errors are contract violations by the caller; none of them
/// are recoverable mid-computation, so a single flat enum keeps call sites
/// honest without error-type plumbing between modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid step must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("grid needs at least 2 points, got {0}")]
    CountTooSmall(usize),
    #[error("grid origin must be finite, got {0}")]
    BadOrigin(f64),
    #[error("index {index} out of range for {count} points")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("coordinate {0} is not on the grid (beyond step/2 of every point)")]
    PointNotOnGrid(f64),
    #[error("value at index {0} is NaN or +inf")]
    NonFiniteValue(usize),
    #[error("grid function needs at least one finite value")]
    NoFiniteValue,
    #[error("got {got} values for a grid of {want} points")]
    LengthMismatch { got: usize, want: usize },
    #[error("grid does not contain the origin within step/2")]
    OriginNotOnGrid,
    #[error("diffusion coefficient must be nonnegative, got {0}")]
    NegativeDiffusion(f64),
    #[error("drift magnitude must be nonnegative and finite, got {0}")]
    BadDrift(f64),
    #[error("need at least one line, got {0}")]
    BadLineCount(usize),
    #[error("line {line} outside 1..={lines}")]
    LineOutOfRange { line: usize, lines: usize },
    #[error("endpoints out of order: the start must be weakly left of the end and on a weakly lower line")]
    BadEndpointOrder,
    #[error("{candidates} candidate paths exceed the enumeration budget {budget}")]
    InstanceTooLarge { candidates: u128, budget: u128 },
    #[error("malformed jump sequence: {0}")]
    BadJumpSequence(String),
    #[error("time order violated: need s < t, got s={s}, t={t}")]
    BadTimeOrder { s: f64, t: f64 },
    #[error("scaling parameter n must be >= 1 and finite, got {0}")]
    BadScalingN(f64),
    #[error("split time {s} does not land on a line boundary for n={n}")]
    MisalignedSplit { s: f64, n: f64 },
    #[error("intervals ({a0}, {a1}) and ({b0}, {b1}) overlap")]
    OverlappingIntervals { a0: f64, a1: f64, b0: f64, b1: f64 },
    #[error("slice times are ({s}, {t}), need ({want_s}, {want_t})")]
    WrongTimes { s: f64, t: f64, want_s: f64, want_t: f64 },
    #[error("grid steps {0} and {1} are not integer multiples of a common base")]
    IncommensurateSteps(f64, f64),
    #[error("grids do not match")]
    GridMismatch,
    #[error("column {x_index} has no finite h(z) + L[z][x]")]
    AllMinusInfinityColumn { x_index: usize },
    #[error("wedge apex {0} is not a grid point")]
    ApexOffGrid(f64),
    #[error("exponent must lie in [0, 1], got {0}")]
    BadExponent(f64),
    #[error("slices were not built from one shared ensemble")]
    MismatchedEnsembles,
    #[error("window [{lo}, {hi}] does not fit inside the grid")]
    WindowOutOfGrid { lo: f64, hi: f64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("increment ordering hypothesis failed at indices {x} < {y}")]
    HypothesisFailed { x: usize, y: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("variance must be positive and finite, got {0}")]
    BadVariance(f64),
    #[error("delta must be positive, got {0}")]
    BadDelta(f64),
    #[error("need at least {want} replications, got {got}")]
    TooFewReplications { got: usize, want: usize },
    #[error("bad drift parameter grid: {0}")]
    BadAGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
