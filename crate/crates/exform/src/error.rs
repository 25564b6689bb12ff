use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {k} out of range for ambient dimension {n}")]
    DegreeOutOfRange { n: usize, k: isize },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("division by zero while evaluating at {point:?}")]
    DivisionByZero { point: Vec<f64> },

    #[error("finite-difference stencil leaves the domain on the {side} side at {point:?}")]
    StencilOutsideDomain { point: Vec<f64>, side: &'static str },

    #[error("metric degenerate (det g = {det:.3e}) at {point:?}")]
    MetricDegenerate { point: Vec<f64>, det: f64 },

    #[error("chart not adapted: g_{{{i}{n}}} deviates from delta by {deviation:.3e} at boundary point {point:?}")]
    NotAdapted {
        i: usize,
        n: usize,
        point: Vec<f64>,
        deviation: f64,
    },

    #[error("normal part nonzero: coefficient {index} is {value:.3e} at boundary point {point:?} (trace matching fails)")]
    NormalPartNonzero {
        index: String,
        point: Vec<f64>,
        value: f64,
    },

    #[error("domain has no reflection interface")]
    NoInterface,

    #[error("boundary patch tangent space is rank deficient at parameter {parameter:?}")]
    RankDeficientTangent { parameter: Vec<f64> },

    #[error("chart radius {requested} too large; largest sampled-injectivity radius is {suggested}")]
    RadiusTooLarge { requested: f64, suggested: f64 },

    #[error("zero cloud is empty: dimension undefined")]
    EmptyCloud,

    #[error("need at least {need} scales spanning {decades} decades, got {got}")]
    BadScaleGrid { need: usize, decades: f64, got: usize },

    #[error("expression is not a polynomial with rational coefficients: {reason}")]
    NonPolynomial { reason: String },

    #[error("{op} requires ambient dimension {expect}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expect: usize,
        got: usize,
    },

    #[error("form is missing the required boundary tag {expected}")]
    MissingBoundaryTag { expected: &'static str },

    #[error("jet recovery relation dγ = 0 fails: coefficient {index} is not identically zero")]
    NotClosed { index: String },

    #[error("jet recovery relation δγ = 0 fails: coefficient {index} is not identically zero")]
    NotCoclosed { index: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
