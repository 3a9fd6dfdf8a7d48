//! Numerics for terms over `exp`, `log`, restricted analytic primitives and a
//! super-logarithm `phi`: the Abel function itself, certified zero counting
//! for square systems, and Morse-style component bounds for quantifier-free
//! sets.

pub mod abel;
pub mod census;
pub mod error;
pub mod interval;
pub mod morse;
pub mod oracle;
pub mod term;

pub use abel::AbelFunction;
pub use error::{Error, Result};
pub use interval::{Interval, IntervalBox};
pub use term::TermNode;

/// Version stamped into every JSON report.
pub const REPORT_VERSION: u32 = 1;
