use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the admissible domain of `op`.
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error(
        "inverse_ft: imaginary residue {imag_norm:e} exceeds 1e-10 x real-part norm {real_norm:e}"
    )]
    Consistency { imag_norm: f64, real_norm: f64 },

    #[error(
        "morozov: iteration limit {max_iters} reached at alpha = {alpha:e} \
         (discrepancy {discrepancy:e} > threshold {threshold:e})"
    )]
    IterationLimit {
        max_iters: usize,
        alpha: f64,
        discrepancy: f64,
        threshold: f64,
    },

    #[error("morozov: bracket failure: {0}")]
    Bracket(String),

    #[error(
        "noise condition 0 < theta*delta < ||g_delta|| violated \
         (theta*delta = {threshold:e}, ||g_delta|| = {data_norm:e})"
    )]
    NoiseCondition { threshold: f64, data_norm: f64 },

    #[error("{op}: degenerate input: {msg}")]
    DegenerateInput { op: &'static str, msg: String },

    #[error("replication with seed {seed} failed: {source}")]
    Replication {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("ml_reference: {0}")]
    Reference(String),

    #[error("field file, line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable name of the failure class.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Consistency { .. } => "consistency",
            Error::IterationLimit { .. } => "iteration-limit",
            Error::Bracket(_) => "bracket",
            Error::NoiseCondition { .. } => "noise-condition",
            Error::DegenerateInput { .. } => "degenerate-input",
            Error::Replication { .. } => "replication",
            Error::Reference(_) => "reference",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}

/// Fails with a domain error unless `cond` holds.
pub(crate) fn ensure(cond: bool, op: &'static str, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(domain(op, msg()))
    }
}
