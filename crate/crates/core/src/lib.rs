//! Exact computation of G-stable lattices in a representation over a
//! discretely valued field: the invariant subcomplex of the Bruhat–Tits
//! building, its maximal and extremal vertices, sharp subquotients, the
//! extension graph of the residual factors, and the verification suites
//! tying them together.
//!
//! All arithmetic is exact over a truncated discrete valuation ring
//! `O/π^N` (either `Z/p^N` or `F_p[t]/t^N`); top-level analyses re-run at
//! precision `N+4` and fail loudly on any disagreement.

pub mod complex;
pub mod error;
pub mod jobspec;
pub mod lattice;
pub mod maxlat;
pub mod modrep;
pub mod report;
pub mod ribet;
pub mod ring;

pub use error::{Error, Result};
pub use jobspec::JobSpec;
pub use report::Analysis;
