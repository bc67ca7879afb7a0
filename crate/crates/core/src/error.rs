use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymbolicError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("singular evaluation: {0}")]
    EvalSingularity(String),
    #[error("no non-singular sample point found after {0} attempts")]
    AllPointsSingular(usize),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngineError {
    #[error("`{0}` is not a declared dynamical variable")]
    UnknownVariable(String),
    #[error("no kernel assigned for deformed slot of `{variable}` along `{coordinate}`")]
    MissingKernel { variable: String, coordinate: String },
    #[error("limit singular: term `{0}` carries a negative or undetermined power of the interval")]
    LimitSingular(String),
    #[error("momentum is not invertible for `{0}`: Lagrangian is not quadratic in the slot")]
    NonInvertibleMomentum(String),
    #[error("invalid Lagrangian: {0}")]
    InvalidLagrangian(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CatalogError {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("bad parameter `{key}`: {msg}")]
    BadParameter { key: String, msg: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericError {
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("stability bound violated: dt = {dt} exceeds {bound} ({reason})")]
    CflViolation { dt: f64, bound: f64, reason: String },
    #[error("negative density at t = {t} (min {min})")]
    NegativeDensity { t: f64, min: f64 },
    #[error("runaway solution detected at t = {t}: energy grew by a factor {factor}")]
    RunawayDetected { t: f64, factor: f64 },
    #[error("norm drift {drift} exceeds tolerance at t = {t}")]
    NormDrift { t: f64, drift: f64 },
    #[error("symbol mismatch: {0}")]
    SymbolMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}
