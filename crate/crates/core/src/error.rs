use std::io;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A series or iteration hit its term budget. Carries the partial value
    /// accumulated so far so callers can decide whether it is still usable.
    #[error("{what} did not converge within {max_terms} terms (partial value {partial:e})")]
    NonConvergence {
        what: &'static str,
        partial: f64,
        max_terms: usize,
    },

    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested quantity exists but the implemented method does not
    /// cover this parameter regime.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// The device-count bound has no finite solution for these parameters.
    #[error("no finite device-count bound: inner square root is negative")]
    NoFiniteBound,

    /// Floating-point cancellation produced a non-positive conditional
    /// variance; the moments are not usable.
    #[error("conditional variance sigma_r^2 = {value:e} is not positive at error count m = {m}")]
    NonPositiveVariance { m: u32, value: f64 },

    /// A component of the error mixture failed; `m` identifies which one.
    #[error("mixture component m = {m} failed: {source}")]
    MixtureComponent {
        m: u32,
        #[source]
        source: Box<Error>,
    },

    /// Quantile inversion could not bracket the target probability.
    #[error("quantile target p = {p} could not be bracketed")]
    Unbracketable { p: f64 },

    /// Device-count search exhausted its cap without reaching the target.
    #[error("no device count up to {cap} reaches the target rate")]
    SearchInfeasible { cap: u32 },

    /// Requested more samples than the sorted-storage representation holds.
    #[error("sample count {requested} exceeds the sorted-sample cap {cap}")]
    SampleBudget { requested: u64, cap: u64 },

    #[error("cache i/o: {0}")]
    Io(#[from] io::Error),

    /// A cache file failed structural validation.
    #[error("cache file corrupt: {0}")]
    CacheFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
