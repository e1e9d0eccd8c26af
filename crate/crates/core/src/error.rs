//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong outside of a budgeted report.
///
/// Budget exhaustion inside `normalize` and reduct enumeration is *not* an
/// error — those operations return reports with explicit flags.  The
/// [`Error::Budget`] variant is reserved for operations whose contract is a
/// plain value (equivalence tests, invariants, polynomial extraction) and
/// that cannot finish within the configured budgets.
#[derive(Debug, Error)]
pub enum Error {
    /// A token was rejected by the alphabet's validity predicate.
    #[error("invalid letter {token:?} for alphabet {alphabet}")]
    InvalidLetter { token: String, alphabet: String },

    /// Traces are elements of the free partially commutative *semigroup*:
    /// the empty word is not one of them.
    #[error("traces are nonempty; the empty word is not a trace")]
    EmptyTrace,

    /// Two operands were built over different alphabets.
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: String, right: String },

    /// Malformed input that is not a letter problem (bad document fields,
    /// out-of-range vertices, unparsable certificates, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation that is only sound on a convergent system was invoked
    /// without a verified convergence certificate.
    #[error("operation {operation} requires a verified convergence certificate")]
    MissingCertificate { operation: &'static str },

    /// A caller-supplied callback failed a spot-check of its stated
    /// preconditions (commutation respect, rule invariance, group laws).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A hard cap was exceeded (vertex caps, enumeration caps).
    #[error("resource cap exceeded: {0}")]
    ResourceExceeded(String),

    /// A budgeted computation did not finish and the operation has no
    /// partial-result channel.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// The operation is not defined for this system (e.g. presentations of
    /// non-enumerable alphabets).
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
