//! Classification pipeline for black-box maps `T: C(X,E) -> C(Y,E)`.
//!
//! The stages build up to the representation `TF = T(0) + F∘φ`:
//! normalise by the offset `T(0)`, check `Ran(TF - TG) ⊆ Ran(F - G)` on
//! sampled pairs, read off the scalar actions `T(f⊗u)(y) = g(y)·u`, extract
//! the symbol from indicator probes, check independence of the probe vector
//! and additivity on tensors, and finally confirm `TF = T(0) + F∘φ` on
//! samples. A map that passes gets the injectivity/surjectivity diagnostics.

mod cache;
mod checks;
mod classify;
mod corollary;
mod map;
mod witness;

pub use cache::CachedMap;
pub use checks::{
    check_point_functional, check_point_functionals, check_range_preservation, check_tensor_additivity,
    check_u_independence, extract_symbol, scalar_action, scalar_actions, verify_composition, PointFunctionalReport,
    RangeReport, RepresentationReport, ScalarAction, SymbolExtraction, UIndependenceReport,
};
pub use classify::{classify, default_probes, AnalysisConfig, AnalysisReport, Residuals, Verdict};
pub use corollary::{
    corollary_diagnostics, preimage_construct, CorollaryRecord, InjectivityWitness, PreimageCheck, RangeEqualitySpot,
    SurjectivityWitness,
};
pub use map::{normalize, MapUnderTest};
pub use witness::{Law, Witness, WitnessKind};
