//! Distance-graph statistics of subsets `E ⊂ F_q^d`.
//!
//! For an odd prime `q` and dimension `d`, equip `F_q^d` with the quadratic
//! form `||x|| = x_1^2 + … + x_d^2` and connect `x, y` when `||x - y||`
//! equals a prescribed nonzero residue. This crate computes the statistics
//! of that graph over a chosen vertex set `E`:
//!
//! * chain counts `C_k(t⃗)` (ordered tuples with prescribed consecutive
//!   distances, repeats allowed) via dynamic programming and an exhaustive
//!   tuple-enumeration oracle,
//! * non-overlapping path counts `G_k` and witness extraction,
//! * star counts `ν_k(t⃗)` and degree tails `H_n`,
//! * the discrete Fourier transform on `F_q^d`, sphere spectra, and the
//!   bilinear distance form,
//!
//! and cross-verifies every quantity against the analytic bounds that govern
//! it (main term / remainder decompositions, recurrences, decay estimates,
//! and the size thresholds that force positivity). Every check is reported
//! with its hypothesis status: a bound whose size hypothesis fails at the
//! tested scale is marked vacuous, never passed silently.
//!
//! All counting kernels are exact integer computations; floating point only
//! enters through character sums and the analytic sides of inequalities,
//! with documented tolerances (see [`report::REL_SLACK`]).

pub mod acceptance;
pub mod chains;
pub mod ensembles;
pub mod field;
pub mod paths;
pub mod report;
pub mod spectral;
pub mod stars;

mod error;

pub use error::{Error, Result};
