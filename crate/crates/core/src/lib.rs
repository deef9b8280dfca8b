//! Desk-scale toolkit for range-preserving maps `T: C(X,E) -> C(Y,E)`.
//!
//! `X` and `Y` are finite point sets and `E` is `C^d` carrying a separating
//! family of seminorms. On such instances every map satisfying
//! `Ran(TF - TG) ⊆ Ran(F - G)` is an offset plus a composition operator
//! `F ↦ F∘φ`. The [`analyzer`] checks the hypothesis on black-box maps,
//! recovers `φ` and the offset, and reports concrete witnesses when
//! something fails.
//!
//! Module map:
//!
//! * [`lcs`]: complex vectors, seminorms, neighborhoods of the origin.
//! * [`space`]: finite spaces and symbols `φ: Y -> X`.
//! * [`funcspace`]: scalar and vector function tables, ranges, tensors.
//! * [`approx`]: covers, partitions of unity, tensor approximation.
//! * [`analyzer`]: the classification pipeline.
//! * [`ksfunc`]: scalar functionals and the spectral hypothesis on `C(X)`.
//! * [`harness`]: instance specs, generators, the brute-force oracle and
//!   the external map protocol.

pub mod analyzer;
pub mod approx;
pub mod error;
pub mod funcspace;
pub mod harness;
pub mod ksfunc;
pub mod lcs;
pub mod par;
pub mod sample;
pub mod space;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Default absolute comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
