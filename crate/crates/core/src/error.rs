use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Two equal-depth global minimizers of the potential. The caller has to
    /// condition on a neighbourhood of one of them.
    #[error("coexistence at K={k}, J={j}: minimizers {minimizers:?} have equal depth")]
    Coexistence { k: f64, j: f64, minimizers: Vec<f64> },

    #[error("critical point (K, J) = (0, 1): no Gaussian pure phase")]
    CriticalPoint,

    #[error("no positive local minimizer for K={k} anywhere in J bracket [{lo}, {hi}]")]
    NoCoexistence { k: f64, lo: f64, hi: f64 },

    #[error("bracket check failed: {0}")]
    Bracket(String),

    #[error("density is not integrable: {0}")]
    Integrability(String),

    #[error("conditioning set [{lo}, {hi}] has no support points")]
    EmptyCondition { lo: f64, hi: f64 },
}
