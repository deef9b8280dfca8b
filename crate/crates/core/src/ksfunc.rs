//! Scalar functionals `δ : C(X) → ℂ`: spectra, the spectral hypothesis
//! (`δ(0) = 0`, `δ(a) - δ(b) ∈ σ(a - b)`) and the conclusion (linear,
//! multiplicative, represented by a point).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::ScalarFunction;
use crate::par::{map_ordered, Execution};
use crate::sample;
use crate::space::FiniteSpace;

type Evaluator = dyn Fn(&ScalarFunction) -> C64 + Send + Sync;

#[derive(Clone)]
pub struct ScalarFunctional {
    space: Arc<FiniteSpace>,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for ScalarFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunctional")
            .field("space", &self.space.labels())
            .finish()
    }
}

impl ScalarFunctional {
    pub fn new<F>(space: Arc<FiniteSpace>, evaluator: F) -> Self
    where
        F: Fn(&ScalarFunction) -> C64 + Send + Sync + 'static,
    {
        Self {
            space,
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn eval(&self, f: &ScalarFunction) -> Result<C64> {
        crate::funcspace::check_same_space(&self.space, f.space())?;
        Ok((self.evaluator)(f))
    }
}

/// Deduplicated value set of a scalar function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSet {
    values: Vec<C64>,
}

impl SpectrumSet {
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distance from `z` to the nearest element.
    pub fn distance(&self, z: C64) -> f64 {
        self.values.iter().map(|v| (z - v).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.distance(z) <= tol
    }
}

/// Values of `f` in point order, merging values within `tol` of an earlier one.
pub fn spectrum(f: &ScalarFunction, tol: f64) -> SpectrumSet {
    let mut values: Vec<C64> = Vec::new();
    for &z in f.values() {
        if values.iter().all(|v| (z - v).norm() > tol) {
            values.push(z);
        }
    }
    SpectrumSet { values }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KsWitness {
    /// `δ(0) != 0`.
    ZeroValue { value: [f64; 2] },
    /// `δ(a) - δ(b)` lies at `distance` from `σ(a - b)`.
    Spectrum {
        a: ScalarFunction,
        b: ScalarFunction,
        difference: [f64; 2],
        distance: f64,
    },
    Linearity {
        f: ScalarFunction,
        g: ScalarFunction,
        lambda: [f64; 2],
        residual: f64,
    },
    Multiplicativity {
        f: ScalarFunction,
        g: ScalarFunction,
        residual: f64,
    },
    /// `δ(1) != 1` for a functional that is not identically zero.
    Unit { value: [f64; 2] },
    /// Indicator probes do not single out one point.
    Ambiguity { coefficients: Vec<(String, [f64; 2])> },
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Indicators, `i·`indicators, the constants `0, 1, -1, i`, then `extra`
/// random functions of the given family.
pub fn hypothesis_family<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteSpace>,
    extra: usize,
    family: sample::SampleFamily,
) -> Vec<ScalarFunction> {
    let i = C64::new(0.0, 1.0);
    let mut out: Vec<_> = (0..space.len())
        .map(|x| ScalarFunction::indicator(space.clone(), x))
        .collect();
    out.extend((0..space.len()).map(|x| ScalarFunction::indicator(space.clone(), x).scale(i)));
    for c in [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), i] {
        out.push(ScalarFunction::constant(space.clone(), c));
    }
    out.extend((0..extra).map(|k| sample::random_scalar_function(rng, space, sample::integer_draw(family, k))));
    out
}

const GRID: [C64; 5] = [
    C64::new(0.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(0.0, -1.0),
];

/// Every function `X → {0, ±1, ±i}`; `5^|X|` of them, so `|X| <= 4`.
pub fn grid_family(space: &Arc<FiniteSpace>) -> Result<Vec<ScalarFunction>> {
    let n = space.len();
    if n > 4 {
        return Err(Error::InvalidSpec(format!(
            "grid family needs at most 4 points, got {n}"
        )));
    }
    let total = GRID.len().pow(n as u32);
    Ok((0..total)
        .map(|mut code| {
            ScalarFunction::from_fn(space.clone(), |_| {
                let z = GRID[code % GRID.len()];
                code /= GRID.len();
                z
            })
        })
        .collect())
}

/// All ordered pairs, `a` major.
pub fn all_pairs(fs: &[ScalarFunction]) -> Vec<(ScalarFunction, ScalarFunction)> {
    fs.iter()
        .flat_map(|a| fs.iter().map(move |b| (a.clone(), b.clone())))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub pairs: usize,
    pub zero_value: f64,
    pub max_distance: f64,
    pub witness: Option<KsWitness>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

pub fn check_ks_hypothesis(
    delta: &ScalarFunctional,
    pairs: &[(ScalarFunction, ScalarFunction)],
    tol: f64,
    mode: Execution,
) -> Result<HypothesisReport> {
    let zero = delta.eval(&ScalarFunction::constant(delta.space().clone(), C64::new(0.0, 0.0)))?;
    let mut witness = (zero.norm() > tol).then(|| KsWitness::ZeroValue { value: pair(zero) });
    let outcomes = map_ordered(pairs, mode, |(a, b)| -> Result<(C64, f64)> {
        let diff = delta.eval(a)? - delta.eval(b)?;
        Ok((diff, spectrum(&a.sub(b)?, 0.0).distance(diff)))
    });
    let mut max_distance: f64 = 0.0;
    for ((a, b), outcome) in pairs.iter().zip(outcomes) {
        let (diff, distance) = outcome?;
        max_distance = max_distance.max(distance);
        if distance > tol && witness.is_none() {
            witness = Some(KsWitness::Spectrum {
                a: a.clone(),
                b: b.clone(),
                difference: pair(diff),
                distance,
            });
        }
    }
    Ok(HypothesisReport {
        pairs: pairs.len(),
        zero_value: zero.norm(),
        max_distance,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConclusionReport {
    pub samples: usize,
    pub linearity: f64,
    pub multiplicativity: f64,
    /// `|δ(1) - 1|`.
    pub unit: f64,
    pub zero_functional: bool,
    pub representing_point: Option<String>,
    /// `max |δ(f) - f(x)|` over the samples for the representing point.
    pub representation: Option<f64>,
    pub witness: Option<KsWitness>,
}

impl ConclusionReport {
    pub fn max_residual(&self) -> f64 {
        self.linearity
            .max(self.multiplicativity)
            .max(self.representation.unwrap_or(0.0))
    }
}

const LAMBDAS: [C64; 4] = [
    C64::new(0.0, 1.0),
    C64::new(2.0, 0.0),
    C64::new(-1.0, 0.0),
    C64::new(1.0, 1.0),
];

/// Linearity and multiplicativity over all ordered sample pairs, then point
/// representation by indicator probing.
pub fn check_ks_conclusion(
    delta: &ScalarFunctional,
    samples: &[ScalarFunction],
    tol: f64,
    mode: Execution,
) -> Result<ConclusionReport> {
    let space = delta.space().clone();
    let values: Vec<C64> = map_ordered(samples, mode, |f| delta.eval(f))
        .into_iter()
        .collect::<Result<_>>()?;
    let indices: Vec<(usize, usize)> = (0..samples.len())
        .flat_map(|a| (0..samples.len()).map(move |b| (a, b)))
        .collect();
    let residuals = map_ordered(&indices, mode, |&(a, b)| -> Result<(f64, f64)> {
        let (f, g) = (&samples[a], &samples[b]);
        let lambda = LAMBDAS[(a + b) % LAMBDAS.len()];
        let lin = (delta.eval(&f.add(&g.scale(lambda))?)? - values[a] - lambda * values[b]).norm();
        let mul = (delta.eval(&f.mul(g)?)? - values[a] * values[b]).norm();
        Ok((lin, mul))
    });

    let mut report = ConclusionReport {
        samples: samples.len(),
        linearity: 0.0,
        multiplicativity: 0.0,
        unit: 0.0,
        zero_functional: false,
        representing_point: None,
        representation: None,
        witness: None,
    };
    for (&(a, b), r) in indices.iter().zip(residuals) {
        let (lin, mul) = r?;
        report.linearity = report.linearity.max(lin);
        report.multiplicativity = report.multiplicativity.max(mul);
        if report.witness.is_none() {
            let (f, g) = (samples[a].clone(), samples[b].clone());
            if lin > tol {
                let lambda = pair(LAMBDAS[(a + b) % LAMBDAS.len()]);
                report.witness = Some(KsWitness::Linearity {
                    f,
                    g,
                    lambda,
                    residual: lin,
                });
            } else if mul > tol {
                report.witness = Some(KsWitness::Multiplicativity { f, g, residual: mul });
            }
        }
    }

    let one = delta.eval(&ScalarFunction::constant(space.clone(), C64::new(1.0, 0.0)))?;
    report.unit = (one - C64::new(1.0, 0.0)).norm();
    let probes: Vec<C64> = (0..space.len())
        .map(|x| delta.eval(&ScalarFunction::indicator(space.clone(), x)))
        .collect::<Result<_>>()?;
    report.zero_functional = one.norm() <= tol && probes.iter().chain(&values).all(|z| z.norm() <= tol);
    if report.zero_functional || report.witness.is_some() {
        return Ok(report);
    }
    if report.unit > tol {
        report.witness = Some(KsWitness::Unit { value: pair(one) });
        return Ok(report);
    }
    let hits: Vec<usize> = (0..space.len())
        .filter(|&x| {
            (probes[x] - C64::new(1.0, 0.0)).norm() <= tol
                && probes.iter().enumerate().all(|(z, c)| z == x || c.norm() <= tol)
        })
        .collect();
    match hits.as_slice() {
        [x] => {
            let residual = samples
                .iter()
                .zip(&values)
                .map(|(f, v)| (f.at(*x) - v).norm())
                .fold(0.0, f64::max);
            report.representing_point = Some(space.label(*x).to_string());
            report.representation = Some(residual);
        }
        _ => {
            report.witness = Some(KsWitness::Ambiguity {
                coefficients: probes
                    .iter()
                    .enumerate()
                    .map(|(x, c)| (space.label(x).to_string(), pair(*c)))
                    .collect(),
            })
        }
    }
    Ok(report)
}

/// Named functionals on a finite space, referenced by point label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionalSpec {
    /// `f(at)`.
    Evaluation {
        at: String,
    },
    /// `Σ w_x f(x)`.
    Averaging {
        weights: BTreeMap<String, f64>,
    },
    /// `conj(f(at))`.
    Conjugate {
        at: String,
    },
    Zero,
    /// `factor · f(at)`.
    Scaled {
        at: String,
        factor: [f64; 2],
    },
    /// `f(at)²`.
    Squared {
        at: String,
    },
    /// `Re f(at)`.
    RealPart {
        at: String,
    },
    /// `f(first) · f(second)`.
    Product {
        first: String,
        second: String,
    },
    /// `f(at) + shift`.
    Shifted {
        at: String,
        shift: [f64; 2],
    },
    /// First non-zero value of `f` in point order, `0` for `f = 0`.
    FirstNonzero,
}

impl FunctionalSpec {
    pub fn build(&self, space: &Arc<FiniteSpace>) -> Result<ScalarFunctional> {
        let s = space.clone();
        let c = |z: [f64; 2]| C64::new(z[0], z[1]);
        Ok(match self {
            FunctionalSpec::Evaluation { at } => {
                let x = space.index_of(at)?;
                ScalarFunctional::new(s, move |f| f.at(x))
            }
            FunctionalSpec::Averaging { weights } => {
                let mut w = vec![0.0; space.len()];
                for (label, v) in weights {
                    if !v.is_finite() {
                        return Err(Error::InvalidSpec(format!("weight for {label} is not finite")));
                    }
                    w[space.index_of(label)?] = *v;
                }
                ScalarFunctional::new(s, move |f| f.values().iter().zip(&w).map(|(z, w)| z * w).sum())
            }
            FunctionalSpec::Conjugate { at } => {
                let x = space.index_of(at)?;
                ScalarFunctional::new(s, move |f| f.at(x).conj())
            }
            FunctionalSpec::Zero => ScalarFunctional::new(s, |_| C64::new(0.0, 0.0)),
            FunctionalSpec::Scaled { at, factor } => {
                let (x, k) = (space.index_of(at)?, c(*factor));
                ScalarFunctional::new(s, move |f| k * f.at(x))
            }
            FunctionalSpec::Squared { at } => {
                let x = space.index_of(at)?;
                ScalarFunctional::new(s, move |f| f.at(x) * f.at(x))
            }
            FunctionalSpec::RealPart { at } => {
                let x = space.index_of(at)?;
                ScalarFunctional::new(s, move |f| C64::new(f.at(x).re, 0.0))
            }
            FunctionalSpec::Product { first, second } => {
                let (a, b) = (space.index_of(first)?, space.index_of(second)?);
                ScalarFunctional::new(s, move |f| f.at(a) * f.at(b))
            }
            FunctionalSpec::Shifted { at, shift } => {
                let (x, k) = (space.index_of(at)?, c(*shift));
                ScalarFunctional::new(s, move |f| f.at(x) + k)
            }
            FunctionalSpec::FirstNonzero => ScalarFunctional::new(s, |f| {
                f.values()
                    .iter()
                    .copied()
                    .find(|z| *z != C64::new(0.0, 0.0))
                    .unwrap_or_default()
            }),
        })
    }
}

/// Every catalog entry for `space`: per-point evaluation, conjugate, square,
/// real part, scalings and shifts, plus averages, products, the zero
/// functional and the first-non-zero selector.
pub fn functional_catalog(space: &FiniteSpace) -> Vec<FunctionalSpec> {
    let labels = space.labels();
    let mut out = Vec::new();
    for at in labels {
        let at = at.clone();
        out.push(FunctionalSpec::Evaluation { at: at.clone() });
        out.push(FunctionalSpec::Conjugate { at: at.clone() });
        out.push(FunctionalSpec::Squared { at: at.clone() });
        out.push(FunctionalSpec::RealPart { at: at.clone() });
        out.push(FunctionalSpec::Scaled {
            at: at.clone(),
            factor: [2.0, 0.0],
        });
        out.push(FunctionalSpec::Scaled {
            at: at.clone(),
            factor: [0.0, 1.0],
        });
        out.push(FunctionalSpec::Shifted {
            at: at.clone(),
            shift: [1.0, 0.0],
        });
        out.push(FunctionalSpec::Averaging {
            weights: BTreeMap::from([(at, 1.0)]),
        });
    }
    if labels.len() >= 2 {
        let w = 1.0 / labels.len() as f64;
        out.push(FunctionalSpec::Averaging {
            weights: labels.iter().map(|l| (l.clone(), w)).collect(),
        });
        out.push(FunctionalSpec::Product {
            first: labels[0].clone(),
            second: labels[1].clone(),
        });
    }
    out.push(FunctionalSpec::Zero);
    out.push(FunctionalSpec::FirstNonzero);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub hypothesis: HypothesisReport,
    pub conclusion: ConclusionReport,
}

impl KsReport {
    /// Hypothesis holds and the conclusion has zero residuals with a
    /// representing point.
    pub fn consistent(&self, tol: f64) -> bool {
        self.hypothesis.passed()
            && self.conclusion.witness.is_none()
            && self.conclusion.representing_point.is_some()
            && self.conclusion.max_residual() <= tol
    }
}

/// Both checks over the exhaustive pair family of [`grid_family`] when
/// `|X| <= 3`, else over [`hypothesis_family`] with `extra` random samples.
pub fn analyze_functional<R: Rng>(
    delta: &ScalarFunctional,
    rng: &mut R,
    extra: usize,
    tol: f64,
    mode: Execution,
) -> Result<KsReport> {
    let space = delta.space();
    let family = if space.len() <= 3 {
        grid_family(space)?
    } else {
        hypothesis_family(rng, space, extra, sample::SampleFamily::Mixed)
    };
    let hypothesis = check_ks_hypothesis(delta, &all_pairs(&family), tol, mode)?;
    let conclusion = check_ks_conclusion(delta, &family, tol, mode)?;
    Ok(KsReport { hypothesis, conclusion })
}
