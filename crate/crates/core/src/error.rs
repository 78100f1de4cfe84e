use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside the domain of the function it was passed to.
    #[error("{name} = {value} is outside its domain ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A channel scenario (or derived record) violates one of its invariants.
    #[error("invalid {field}: {constraint}")]
    Invalid { field: &'static str, constraint: String },

    /// The scenario's short blocklength is too small for early decoding.
    #[error("early decoding needs n2 >= {required} symbols but the scenario has n2 = {n2} (short by {shortfall})")]
    EdShortfall { n2: u64, required: u64, shortfall: u64 },

    /// No point of the feasible set satisfies the request.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A simulation was asked to run beyond the sizes it accepts.
    #[error("scale limit exceeded: {0}")]
    ScaleLimit(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, constraint: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            constraint: constraint.into(),
        }
    }
}
