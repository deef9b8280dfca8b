//! Injectivity and surjectivity of `T = offset + (F ↦ F∘φ)` read off the
//! symbol, with constructive witnesses:
//!
//! * `T` injective iff `φ` surjective. A missed point `x0` gives the
//!   separating function `1_{x0} ⊗ e_1`, which `T` sends to the offset.
//! * `Ran(TF - TG) = Ran(F - G)` for all pairs iff `φ` surjective.
//! * `T` surjective iff `φ` injective. A colliding pair `y1, y2` gives an
//!   unattainable `H = 1_{y1} ⊗ e_1`; an injective `φ` gives explicit
//!   preimages by extension with zero.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{ScalarFunction, VectorFunction};
use crate::lcs::ComplexVector;
use crate::par::map_ordered;
use crate::sample;
use crate::space::Symbol;

use super::classify::AnalysisConfig;
use super::map::MapUnderTest;

/// `F` on `X` with `F∘φ + offset = H`: `F(φ(y)) = H(y) - offset(y)` and
/// `F = 0` off the image of `φ`.
pub fn preimage_construct(phi: &Symbol, offset: &VectorFunction, h: &VectorFunction) -> Result<VectorFunction> {
    if let Err((y1, y2)) = phi.check_injective() {
        return Err(Error::NotInjective(
            phi.source().label(y1).to_string(),
            phi.source().label(y2).to_string(),
        ));
    }
    let target = h.sub(offset)?;
    let model = h.model().clone();
    let mut values = vec![ComplexVector::zero(model.dim()); phi.target().len()];
    for (y, &x) in phi.table().iter().enumerate() {
        values[x] = target.at(y).clone();
    }
    VectorFunction::new(phi.target().clone(), model, values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityWitness {
    pub x0: String,
    pub f: VectorFunction,
    pub tf: VectorFunction,
    /// `TF` equals the offset (within tolerance) while `F != 0`.
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurjectivityWitness {
    pub y1: String,
    pub y2: String,
    pub h: VectorFunction,
    /// Sampled functions whose image was confirmed to differ from `H`.
    pub samples_checked: usize,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreimageCheck {
    pub h: VectorFunction,
    pub f: VectorFunction,
    pub residual: f64,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeEqualitySpot {
    pub pairs: usize,
    /// Pairs where some value of `F - G` is missing from `Ran(TF - TG)`.
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryRecord {
    #[serde(rename = "T_injective")]
    pub t_injective: bool,
    #[serde(rename = "T_surjective")]
    pub t_surjective: bool,
    pub range_equality: bool,
    pub injectivity_witness: Option<InjectivityWitness>,
    pub surjectivity_witness: Option<SurjectivityWitness>,
    pub preimage: Option<PreimageCheck>,
    pub range_equality_spot: RangeEqualitySpot,
}

/// Runs the diagnostics for a map already known to be `offset + F∘φ`.
/// Uses `cfg.tol`, `cfg.seed`, `cfg.corollary_pairs` and `cfg.family`.
pub fn corollary_diagnostics(
    map: &MapUnderTest,
    phi: &Symbol,
    offset: &VectorFunction,
    cfg: &AnalysisConfig,
) -> Result<CorollaryRecord> {
    let (tol, spot_pairs, family, mode) = (cfg.tol, cfg.corollary_pairs, cfg.family, cfg.execution);
    let x = map.domain().clone();
    let y = map.codomain().clone();
    let model = map.model().clone();
    let e1 = ComplexVector::basis(model.dim(), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC0_11A5);

    let t_injective = phi.is_surjective();
    let injectivity_witness = match phi.first_missed() {
        None => None,
        Some(x0) => {
            let f = ScalarFunction::indicator(x.clone(), x0).tensor(&e1, &model)?;
            let tf = map.eval(&f)?;
            let gap = tf.sub(offset)?.uniform_max()?;
            Some(InjectivityWitness {
                x0: x.label(x0).to_string(),
                verified: gap <= tol && !f.is_zero(),
                f,
                tf,
            })
        }
    };

    let t_surjective = phi.is_injective();
    let (surjectivity_witness, preimage) = match phi.check_injective() {
        Err((y1, y2)) => {
            let h = ScalarFunction::indicator(y.clone(), y1).tensor(&e1, &model)?;
            let samples = sample::representation_samples(&mut rng, &x, &model, spot_pairs.max(1), family);
            let distances = map_ordered(&samples, mode, |f| -> Result<f64> {
                map.eval(f)?.sub(&h)?.uniform_max()
            });
            let mut checked = 0;
            let mut all_differ = true;
            for d in distances {
                checked += 1;
                all_differ &= d? > tol;
            }
            (
                Some(SurjectivityWitness {
                    y1: y.label(y1).to_string(),
                    y2: y.label(y2).to_string(),
                    h,
                    samples_checked: checked,
                    verified: all_differ,
                }),
                None,
            )
        }
        Ok(()) => {
            let h = sample::random_function(&mut rng, &y, &model, sample::integer_draw(family, 1));
            let f = preimage_construct(phi, offset, &h)?;
            let residual = map.eval(&f)?.sub(&h)?.uniform_max()?;
            (
                None,
                Some(PreimageCheck {
                    h,
                    f,
                    residual,
                    verified: residual <= tol,
                }),
            )
        }
    };

    let mut pairs = Vec::with_capacity(spot_pairs);
    if let Some(w) = &injectivity_witness {
        pairs.push((w.f.clone(), map.zero_input()));
    }
    let rest = spot_pairs.saturating_sub(pairs.len());
    pairs.extend(
        sample::range_pairs(&mut rng, &x, &model, rest.max(1), family)
            .into_iter()
            .take(rest),
    );
    let failures = map_ordered(&pairs, mode, |(f, g)| -> Result<bool> {
        let image = map.eval(f)?.sub(&map.eval(g)?)?.range(0.0)?;
        for v in f.sub(g)?.values() {
            if !image.contains(v, tol)?.0 {
                return Ok(true);
            }
        }
        Ok(false)
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?
    .into_iter()
    .filter(|b| *b)
    .count();

    Ok(CorollaryRecord {
        t_injective,
        t_surjective,
        range_equality: t_injective,
        injectivity_witness,
        surjectivity_witness,
        preimage,
        range_equality_spot: RangeEqualitySpot {
            pairs: pairs.len(),
            failures,
        },
    })
}
