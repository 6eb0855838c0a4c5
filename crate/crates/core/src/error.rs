use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("enumeration cap exceeded: {configs} configurations requested, cap is {cap}")]
    CapExceeded { configs: u128, cap: u64 },

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("invalid subvolume `{name}`: {reason}")]
    Subvolume { name: String, reason: String },

    #[error("observable support {support:?} meets system `{system}`; not embeddable by identity")]
    NotEmbeddable { system: String, support: Vec<usize> },

    #[error("system `{system}` is outside the domain of template `{template}`")]
    OutsideDomain { template: String, system: String },

    #[error("`{s}` is not contained in `{t}`")]
    NotNested { s: String, t: String },

    #[error("distribution is not normalized: {0}")]
    NotNormalized(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not an observable-valued measure: {0}")]
    NotObservableMeasure(String),

    #[error("malformed real set: {0}")]
    MalformedSet(String),

    #[error("invalid rational `{0}`")]
    Rational(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    Invalid(String),
}
