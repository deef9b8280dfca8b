//! Seeded sample families: random scalar and vector functions, and the
//! structured probes (indicators, constants, tensors) the checks rely on.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::funcspace::{ScalarFunction, VectorFunction};
use crate::lcs::{ComplexVector, VectorSpaceModel};
use crate::space::FiniteSpace;

/// Value distribution for random samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleFamily {
    /// Alternates between the continuous box `[-2, 2]²` and Gaussian
    /// integers in the same box.
    #[default]
    Mixed,
    /// Gaussian integers with parts in `{-2, ..., 2}` only. All arithmetic
    /// in the checks is then exact.
    Integer,
    /// Continuous box only.
    Continuous,
}

pub fn random_scalar<R: Rng>(rng: &mut R, integer: bool) -> C64 {
    if integer {
        C64::new(rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64)
    } else {
        C64::new(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0))
    }
}

/// Whether the `k`-th draw of a family is integer valued.
pub fn integer_draw(family: SampleFamily, k: usize) -> bool {
    match family {
        SampleFamily::Integer => true,
        SampleFamily::Continuous => false,
        SampleFamily::Mixed => k % 2 == 1,
    }
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize, integer: bool) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| random_scalar(rng, integer)).collect()).expect("finite entries")
}

pub fn random_scalar_function<R: Rng>(rng: &mut R, space: &Arc<FiniteSpace>, integer: bool) -> ScalarFunction {
    ScalarFunction::from_fn(space.clone(), |_| random_scalar(rng, integer))
}

pub fn random_function<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteSpace>,
    model: &Arc<VectorSpaceModel>,
    integer: bool,
) -> VectorFunction {
    let values = (0..space.len())
        .map(|_| random_vector(rng, model.dim(), integer))
        .collect();
    VectorFunction::new(space.clone(), model.clone(), values).expect("dimensions agree")
}

/// `1_x ⊗ e_k` for every point and coordinate, point-major.
pub fn indicator_functions(space: &Arc<FiniteSpace>, model: &Arc<VectorSpaceModel>) -> Vec<VectorFunction> {
    let d = model.dim();
    (0..space.len())
        .flat_map(|x| (0..d).map(move |k| (x, k)))
        .map(|(x, k)| {
            ScalarFunction::indicator(space.clone(), x)
                .tensor(&ComplexVector::basis(d, k), model)
                .expect("dimensions agree")
        })
        .collect()
}

/// Indicators, the constants `0`, `1`, `i`, and `count` random functions.
pub fn scalar_samples<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteSpace>,
    count: usize,
    family: SampleFamily,
) -> Vec<ScalarFunction> {
    let mut out: Vec<ScalarFunction> = (0..space.len())
        .map(|x| ScalarFunction::indicator(space.clone(), x))
        .collect();
    out.push(ScalarFunction::constant(space.clone(), C64::new(0.0, 0.0)));
    out.push(ScalarFunction::constant(space.clone(), C64::new(1.0, 0.0)));
    out.push(ScalarFunction::constant(space.clone(), C64::new(0.0, 1.0)));
    for k in 0..count {
        out.push(random_scalar_function(rng, space, integer_draw(family, k)));
    }
    out
}

/// Pair family for the range-preservation check, truncated to `budget`.
///
/// Order: `(1_x⊗e_k, 0)`, `(c, 0)` for basis constants, `(F, F)`,
/// indicator pairs, then random pairs cycling through random/random,
/// tensor/random, random/zero, random/constant and tensor/tensor.
pub fn range_pairs<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteSpace>,
    model: &Arc<VectorSpaceModel>,
    budget: usize,
    family: SampleFamily,
) -> Vec<(VectorFunction, VectorFunction)> {
    let d = model.dim();
    let zero = VectorFunction::zero(space.clone(), model.clone());
    let indicators = indicator_functions(space, model);
    let mut pairs = Vec::new();
    for f in &indicators {
        pairs.push((f.clone(), zero.clone()));
    }
    for k in 0..d {
        let c = VectorFunction::constant(space.clone(), model.clone(), ComplexVector::basis(d, k));
        pairs.push((c, zero.clone()));
    }
    let first = random_function(rng, space, model, integer_draw(family, 0));
    pairs.push((first.clone(), first));
    for i in 0..indicators.len() {
        for j in (i + 1)..indicators.len() {
            pairs.push((indicators[i].clone(), indicators[j].clone()));
        }
    }
    let mut k = 0usize;
    while pairs.len() < budget {
        let int = integer_draw(family, k);
        let tensor = |rng: &mut R| {
            random_scalar_function(rng, space, int)
                .tensor(&random_vector(rng, d, int), model)
                .expect("dimensions agree")
        };
        let pair = match k % 5 {
            0 => (
                random_function(rng, space, model, int),
                random_function(rng, space, model, int),
            ),
            1 => (tensor(rng), random_function(rng, space, model, int)),
            2 => (random_function(rng, space, model, int), zero.clone()),
            3 => {
                let c = VectorFunction::constant(space.clone(), model.clone(), random_vector(rng, d, int));
                (random_function(rng, space, model, int), c)
            }
            _ => (tensor(rng), tensor(rng)),
        };
        pairs.push(pair);
        k += 1;
    }
    pairs.truncate(budget.max(1));
    pairs
}

/// Functions for the representation check: every `1_x ⊗ e_k`, the basis
/// constants, then random functions up to `budget` entries in total.
pub fn representation_samples<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteSpace>,
    model: &Arc<VectorSpaceModel>,
    budget: usize,
    family: SampleFamily,
) -> Vec<VectorFunction> {
    let d = model.dim();
    let mut out = indicator_functions(space, model);
    for k in 0..d {
        out.push(VectorFunction::constant(
            space.clone(),
            model.clone(),
            ComplexVector::basis(d, k),
        ));
    }
    let mut k = 0;
    while out.len() < budget {
        out.push(random_function(rng, space, model, integer_draw(family, k)));
        k += 1;
    }
    out
}

/// Picks a random element.
pub fn pick<'a, T, R: Rng>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty")
}
