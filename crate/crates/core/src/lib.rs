//! Exact computer algebra for toric mirror symmetry: truncated power series,
//! fan combinatorics, the mirror map and correction terms, and Seidel
//! elements with their lifts.

pub mod builtins;
pub mod cone;
pub mod fan;
pub mod linalg;
pub mod mirror;
pub mod seidel;
pub mod series;
pub mod verify;

pub use fan::{Fan, FanError, Toric};
pub use mirror::{MirrorEngine, MirrorError};
pub use series::{Rational, RingDescriptor, SeriesError, SeriesMatrix, TruncatedSeries};
pub use verify::{run_verification, VerificationReport};
