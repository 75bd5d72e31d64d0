use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate span: intermediate vector has |Q| = {0:e} below tolerance")]
    DegenerateSpan(f64),
    #[error("point is not on the hyperboloid sheet (Q = {q}, x0 = {x0})")]
    NotOnHyperboloid { q: f64, x0: f64 },
    #[error("vector is not isotropic (Q = {0:e})")]
    NotIsotropic(f64),
    #[error("ball point has nonzero coordinate at index 0")]
    NonSpatial,
    #[error("point lies on or outside the unit sphere (norm = {0})")]
    OnBoundary(f64),
    #[error("points coincide")]
    CoincidentPoints,
    #[error("invalid geodesic: Q(direction) = {q}, (base, direction) = {orth}")]
    InvalidGeodesic { q: f64, orth: f64 },
    #[error("block is not orthogonal for the relevant form (defect {0:e})")]
    NotOrthogonal(f64),
    #[error("block does not preserve the upper sheet")]
    NotSheetPreserving,
    #[error("invalid active set: {0}")]
    InvalidActiveSet(String),
    #[error("points are at different distances from the center ({0} vs {1})")]
    UnequalRadii(f64, f64),
    #[error("target distance {target} not attainable: admissible range [{lo}, {hi}]")]
    Unattainable { target: f64, lo: f64, hi: f64 },
    #[error("rotation center lies on the geodesic through the two other points")]
    CollinearCenter,
    #[error("identity has no symmetry decomposition")]
    IdentityInput,
    #[error("probe set is empty")]
    EmptyProbeSet,
    #[error("isometry does not fix the ideal point (defect {0:e})")]
    NotInStabilizer(f64),
    #[error("functional set is empty")]
    EmptyFunctionals,
    #[error("invalid frustum pair: norm {norm} exceeds r = {r}")]
    InvalidFrustumPair { norm: f64, r: f64 },
    #[error("length mismatch: {0} angles vs {1} blocks")]
    LengthMismatch(usize, usize),
    #[error("rotation blocks must have positive even dimension, got {0}")]
    OddBlockDimension(usize),
    #[error("insufficient angle density: {0}")]
    InsufficientAngleDensity(String),
    #[error("translation vector is zero")]
    ZeroTranslation,
    #[error("non-positive translation length {0}")]
    NonPositiveLength(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
