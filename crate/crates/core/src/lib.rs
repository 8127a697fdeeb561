//! Neural optimal transport for strong and weak quadratic costs.
//!
//! The crate has two halves that check each other:
//!
//! * a neural half — a minimal reverse-mode tape over dense `f64` tensors
//!   ([`autodiff`]), MLPs with Adam ([`nn`]), and the adversarial
//!   ascent-descent trainer for stochastic transport maps ([`trainer`]);
//! * a discrete half — an exact transportation-simplex EMD solver and a
//!   Frank–Wolfe solver for the γ-weak quadratic cost over the transport
//!   polytope ([`oracle`]), used as ground truth.
//!
//! [`distributions`] provides the seeded toy samplers, [`costs`] the strong
//! and γ-weak quadratic costs with their Monte-Carlo estimators, and
//! [`metrics`] the quantitative diagnostics (L²-UVP, empirical W₂,
//! conditional variance, monotonicity and segment-crossing checks) that
//! compare the two halves.
//!
//! All randomness flows through `ChaCha8` generators (`rand_chacha`) seeded
//! from explicit `u64` seeds; equal seeds give bit-identical results.

pub mod autodiff;
pub mod costs;
pub mod distributions;
pub mod metrics;
pub mod nn;
pub mod oracle;
mod simplex;
pub mod trainer;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Tensor or batch dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A specification or configuration value is invalid.
    #[error("invalid config: {0}")]
    Config(String),
    /// An operation was called outside its contract.
    #[error("invalid usage: {0}")]
    Usage(String),
    /// A numeric value left the finite range.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Training aborted because a loss became non-finite or exploded.
    #[error("training diverged at outer iteration {iter}: {detail}")]
    Diverged { iter: usize, detail: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
