use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("order {order} exceeds the supported maximum {max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("{what} must satisfy {constraint}, got {value}")]
    Domain { what: &'static str, constraint: &'static str, value: f64 },

    #[error("degenerate state: normalizer {normalizer} is not positive")]
    DegenerateState { normalizer: f64 },

    #[error(
        "regularization width {sigma} is too small for |Im z| = {imag}: \
         need sigma >= {min_sigma}"
    )]
    RegularizationTooSmall { sigma: f64, imag: f64, min_sigma: f64 },

    #[error("cancellation factor {factor:.3e} exceeds the allowed {limit:.1e}")]
    Cancellation { factor: f64, limit: f64 },

    #[error("non-finite integrand sample at node {index} (x = {x})")]
    NonFinite { index: usize, x: f64 },

    #[error(
        "gain g = {g} is the singular limit (sigma_of_gain = {sigma}); \
         the P-function is a generalized delta and cannot be sampled, \
         use p_cat_terms / p_regularized_eval instead"
    )]
    SingularLimit { g: f64, sigma: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, constraint: &'static str, value: f64) -> Self {
        Error::Domain { what, constraint, value }
    }

    /// True for the errors raised by numerical guards (overflow, cancellation,
    /// singular limits) as opposed to bad input shapes.
    pub fn is_numeric_guard(&self) -> bool {
        matches!(
            self,
            Error::RegularizationTooSmall { .. }
                | Error::Cancellation { .. }
                | Error::NonFinite { .. }
                | Error::SingularLimit { .. }
                | Error::DegenerateState { .. }
        )
    }
}
