//! Exact generation and lattice analysis of superabundant numbers.
//!
//! Numbers are never stored in decimal: every value is a [`Signature`]
//! (nonincreasing prime-exponent vector, kept in conjugate form) and sizes
//! are compared through high-precision logarithms with exact fallbacks.
//!
//! - [`hp`], [`primes`], [`signature`], [`magnitude`], [`abundancy`],
//!   [`scn`]: arithmetic core.
//! - [`exhaustive`]: complete enumeration in increasing order plus the
//!   divisor-sum sieve oracle.
//! - [`backbone`]: large-scale generation around the colossally abundant
//!   chain.
//! - [`lattice`]: source/sink classification, the multiplicative closure
//!   from 1, and connectivity.
//! - [`io`]: list files, reference ingestion, table export, list diffs.

pub mod abundancy;
pub mod backbone;
pub mod error;
pub mod exhaustive;
pub mod hp;
pub mod io;
pub mod lattice;
pub mod magnitude;
pub mod primes;
pub mod record;
pub mod scn;
pub mod signature;

pub use abundancy::{abundancy, compare_abundancy, Abundancy};
pub use error::GenError;
pub use magnitude::{compare_magnitude, log_magnitude, LogMagnitude};
pub use primes::PrimeTable;
pub use record::{Limit, SaRecord};
pub use scn::{parse_scn, scn_decode, scn_encode, ScnVector};
pub use signature::{MoveError, Signature};
