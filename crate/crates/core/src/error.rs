use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the range an operation supports.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("provider {provider}: {assigned} VMs assigned but capacity is {capacity}")]
    CapacityExceeded {
        provider: usize,
        assigned: u64,
        capacity: u64,
    },

    /// The coalition cannot host its own workload.
    #[error("coalition {members:?} is infeasible: demand {demand} VMs exceeds capacity {capacity}")]
    Infeasible {
        members: Vec<usize>,
        demand: u64,
        capacity: u64,
    },

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("slot {slot}, scheme {scheme}: {source}")]
    Slot {
        slot: usize,
        scheme: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
