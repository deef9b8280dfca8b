use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{ScalarFunction, VectorFunction};
use crate::lcs::ComplexVector;
use crate::par::{map_ordered, Execution};
use crate::space::{FiniteSpace, Symbol};

use super::map::MapUnderTest;
use super::witness::{two_term, Law, Witness};

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Outcome of the range-preservation check over a list of pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeReport {
    pub pairs: usize,
    /// Largest distance from `(TF - TG)(y)` to `Ran(F - G)` over all checks.
    pub max_distance: f64,
    /// Per seminorm, the largest `|TF - TG|_p - |F - G|_p` over all pairs.
    pub expansion_per_seminorm: Vec<f64>,
    /// Same quantity restricted to pairs that passed the range check.
    pub expansion_on_passing: Vec<f64>,
    pub witness: Option<Witness>,
}

impl RangeReport {
    /// `max(0, max_p expansion)` over every pair.
    pub fn expansion(&self) -> f64 {
        self.expansion_per_seminorm.iter().copied().fold(0.0, f64::max)
    }
}

struct PairOutcome {
    failure: Option<(usize, ComplexVector, f64)>,
    max_distance: f64,
    excess: Vec<f64>,
}

/// Checks `(TF - TG)(y) ∈ Ran(F - G)` within `tol` for every pair and every
/// `y`. The first failing pair (list order, then label order) becomes the
/// witness.
pub fn check_range_preservation(
    map: &MapUnderTest,
    pairs: &[(VectorFunction, VectorFunction)],
    tol: f64,
    mode: Execution,
) -> Result<RangeReport> {
    let model = map.model().clone();
    let outcomes = map_ordered(pairs, mode, |(f, g)| -> Result<PairOutcome> {
        let diff_out = map.eval(f)?.sub(&map.eval(g)?)?;
        let diff_in = f.sub(g)?;
        let range = diff_in.range(0.0)?;
        let mut failure = None;
        let mut max_distance: f64 = 0.0;
        for (y, v) in diff_out.values().iter().enumerate() {
            let (member, dist) = range.contains(v, tol)?;
            max_distance = max_distance.max(dist);
            if !member && failure.is_none() {
                failure = Some((y, v.clone(), dist));
            }
        }
        let excess = model
            .seminorms()
            .iter()
            .map(|p| Ok(diff_out.uniform_seminorm(p)? - diff_in.uniform_seminorm(p)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(PairOutcome {
            failure,
            max_distance,
            excess,
        })
    });
    let k = model.seminorms().len();
    let mut report = RangeReport {
        pairs: pairs.len(),
        max_distance: 0.0,
        expansion_per_seminorm: vec![0.0; k],
        expansion_on_passing: vec![0.0; k],
        witness: None,
    };
    for (outcome, (f, g)) in outcomes.into_iter().zip(pairs) {
        let o = outcome?;
        report.max_distance = report.max_distance.max(o.max_distance);
        for (i, e) in o.excess.iter().enumerate() {
            report.expansion_per_seminorm[i] = report.expansion_per_seminorm[i].max(*e);
            if o.failure.is_none() {
                report.expansion_on_passing[i] = report.expansion_on_passing[i].max(*e);
            }
        }
        if let (None, Some((y, value, distance))) = (&report.witness, o.failure) {
            report.witness = Some(Witness::RangeViolation {
                f: f.clone(),
                g: g.clone(),
                y: map.codomain().label(y).to_string(),
                value,
                distance,
            });
        }
    }
    Ok(report)
}

/// The scalar function `g` on `Y` with `T'(f⊗u)(y) ≈ g(y)·u`, together with
/// how far each `T'(f⊗u)(y)` is from the line through `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarAction {
    pub g: ScalarFunction,
    pub residuals: Vec<f64>,
    pub residual: f64,
}

/// Projects `T'(f⊗u)(y)` orthogonally (coordinate inner product) onto `u`.
/// The colinearity residual is the max-seminorm of what is left over.
pub fn scalar_action(tn: &MapUnderTest, u: &ComplexVector, f: &ScalarFunction) -> Result<ScalarAction> {
    if u.is_zero() {
        return Err(Error::ZeroProbe);
    }
    let model = tn.model();
    let out = tn.eval(&f.tensor(u, model)?)?;
    let uu = u.norm_sqr();
    let mut coeffs = Vec::with_capacity(out.values().len());
    let mut residuals = Vec::with_capacity(out.values().len());
    for v in out.values() {
        let g = u.inner(v)? / uu;
        residuals.push(model.max_seminorm(&v.sub(&u.scale(g))?)?);
        coeffs.push(g);
    }
    let residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ScalarAction {
        g: ScalarFunction::new(tn.codomain().clone(), coeffs)?,
        residuals,
        residual,
    })
}

pub fn scalar_actions(
    tn: &MapUnderTest,
    u: &ComplexVector,
    fs: &[ScalarFunction],
    mode: Execution,
) -> Result<Vec<ScalarAction>> {
    map_ordered(fs, mode, |f| scalar_action(tn, u, f)).into_iter().collect()
}

/// Residuals of `δ = f ↦ (T̃_u f)(y)` against linearity, multiplicativity
/// and `δ(1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointFunctionalReport {
    pub y: String,
    pub linearity: f64,
    pub multiplicativity: f64,
    pub unit: f64,
    /// First sample (law order: linearity, multiplicativity, unit) whose
    /// residual exceeds the tolerance: `(law, sample index, residual)`.
    #[serde(skip)]
    pub first_violation: Option<(Law, usize, f64)>,
}

impl PointFunctionalReport {
    pub fn max_residual(&self) -> f64 {
        self.linearity.max(self.multiplicativity).max(self.unit)
    }
}

/// Point-functional residuals at every `y` for the sampled triples
/// `(f, g, λ)`.
pub fn check_point_functionals(
    tn: &MapUnderTest,
    u: &ComplexVector,
    samples: &[(ScalarFunction, ScalarFunction, C64)],
    tol: f64,
    mode: Execution,
) -> Result<Vec<PointFunctionalReport>> {
    let x = tn.domain().clone();
    let one = ScalarFunction::constant(x, C64::new(1.0, 0.0));
    // per sample: f, g, f + λg, fg
    let mut probes = Vec::with_capacity(4 * samples.len() + 1);
    for (f, g, lambda) in samples {
        probes.push(f.clone());
        probes.push(g.clone());
        probes.push(f.add(&g.scale(*lambda))?);
        probes.push(f.mul(g)?);
    }
    probes.push(one);
    let actions = scalar_actions(tn, u, &probes, mode)?;
    let unit_action = &actions[actions.len() - 1];
    let y_space = tn.codomain();
    let mut reports = Vec::with_capacity(y_space.len());
    for y in 0..y_space.len() {
        let mut rep = PointFunctionalReport {
            y: y_space.label(y).to_string(),
            linearity: 0.0,
            multiplicativity: 0.0,
            unit: (unit_action.g.at(y) - C64::new(1.0, 0.0)).norm(),
            first_violation: None,
        };
        let mut first_lin = None;
        let mut first_mul = None;
        for (k, (_, _, lambda)) in samples.iter().enumerate() {
            let d = |i: usize| actions[4 * k + i].g.at(y);
            let lin = (d(2) - d(0) - lambda * d(1)).norm();
            let mul = (d(3) - d(0) * d(1)).norm();
            if lin > tol && first_lin.is_none() {
                first_lin = Some((Law::Linearity, k, lin));
            }
            if mul > tol && first_mul.is_none() {
                first_mul = Some((Law::Multiplicativity, k, mul));
            }
            rep.linearity = rep.linearity.max(lin);
            rep.multiplicativity = rep.multiplicativity.max(mul);
        }
        rep.first_violation = first_lin
            .or(first_mul)
            .or((rep.unit > tol).then_some((Law::Unit, 0, rep.unit)));
        reports.push(rep);
    }
    Ok(reports)
}

/// Single-`y` form of [`check_point_functionals`].
pub fn check_point_functional(
    tn: &MapUnderTest,
    u: &ComplexVector,
    y: usize,
    samples: &[(ScalarFunction, ScalarFunction, C64)],
    tol: f64,
) -> Result<PointFunctionalReport> {
    let mut all = check_point_functionals(tn, u, samples, tol, Execution::Sequential)?;
    if y >= all.len() {
        return Err(Error::UnknownLabel(format!("#{y}")));
    }
    Ok(all.swap_remove(y))
}

/// Indicator-probe coefficients `g_{1_x}(y)` and the symbol they determine.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolExtraction {
    source: Arc<FiniteSpace>,
    target: Arc<FiniteSpace>,
    u: ComplexVector,
    /// `coefficients[y][x] = (T̃_u 1_x)(y)`.
    coefficients: Vec<Vec<C64>>,
    table: Vec<Option<usize>>,
    colinearity: Vec<(usize, f64)>,
}

impl SymbolExtraction {
    pub fn source(&self) -> &Arc<FiniteSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteSpace> {
        &self.target
    }

    pub fn u(&self) -> &ComplexVector {
        &self.u
    }

    pub fn coefficients(&self) -> &[Vec<C64>] {
        &self.coefficients
    }

    pub fn table(&self) -> &[Option<usize>] {
        &self.table
    }

    pub fn is_unambiguous(&self) -> bool {
        self.table.iter().all(Option::is_some)
    }

    /// Largest colinearity residual among the indicator probes.
    pub fn colinearity(&self) -> f64 {
        self.colinearity.iter().map(|c| c.1).fold(0.0, f64::max)
    }

    pub fn symbol(&self) -> Option<Symbol> {
        let table = self.table.iter().copied().collect::<Option<Vec<_>>>()?;
        Symbol::new(self.source.clone(), self.target.clone(), table).ok()
    }

    /// Score of candidate `x` at `y`: `max_{x'} |g_{1_x'}(y) - 1_{x'}(x)|`.
    pub fn score(&self, y: usize, x: usize) -> f64 {
        self.coefficients[y]
            .iter()
            .enumerate()
            .map(|(xp, c)| (c - C64::new(if xp == x { 1.0 } else { 0.0 }, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// Per `y`, the first point minimising [`Self::score`]. Used only to
    /// measure how far an ambiguous map is from a composition operator.
    pub fn best_fit(&self) -> Symbol {
        let table = (0..self.source.len())
            .map(|y| {
                let mut best = (0, f64::INFINITY);
                for x in 0..self.target.len() {
                    let s = self.score(y, x);
                    if s < best.1 {
                        best = (x, s);
                    }
                }
                best.0
            })
            .collect();
        Symbol::new(self.source.clone(), self.target.clone(), table).expect("indices in range")
    }

    /// One ambiguity witness per unresolved `y`, in label order.
    pub fn ambiguities(&self) -> Vec<Witness> {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_none())
            .map(|(y, _)| Witness::Ambiguity {
                u: self.u.clone(),
                y: self.source.label(y).to_string(),
                coefficients: self.coefficients[y]
                    .iter()
                    .enumerate()
                    .map(|(x, c)| (self.target.label(x).to_string(), pair(*c)))
                    .collect(),
            })
            .collect()
    }
}

/// Probes `T'` with `1_x ⊗ u` for every `x`. `φ(y)` is the unique `x` with
/// `|g_{1_x}(y) - 1| <= tol` while every other coefficient is within `tol`
/// of zero; anything else leaves `y` unresolved.
pub fn extract_symbol(tn: &MapUnderTest, u: &ComplexVector, tol: f64, mode: Execution) -> Result<SymbolExtraction> {
    let x_space = tn.domain().clone();
    let y_space = tn.codomain().clone();
    let probes: Vec<ScalarFunction> = (0..x_space.len())
        .map(|x| ScalarFunction::indicator(x_space.clone(), x))
        .collect();
    let actions = scalar_actions(tn, u, &probes, mode)?;
    let coefficients: Vec<Vec<C64>> = (0..y_space.len())
        .map(|y| actions.iter().map(|a| a.g.at(y)).collect())
        .collect();
    let table = coefficients
        .iter()
        .map(|row| {
            let near_one: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, c)| (*c - C64::new(1.0, 0.0)).norm() <= tol)
                .map(|(x, _)| x)
                .collect();
            match near_one.as_slice() {
                [x] if row.iter().enumerate().all(|(xp, c)| xp == *x || c.norm() <= tol) => Some(*x),
                _ => None,
            }
        })
        .collect();
    let colinearity = actions.iter().enumerate().map(|(x, a)| (x, a.residual)).collect();
    Ok(SymbolExtraction {
        source: y_space,
        target: x_space,
        u: u.clone(),
        coefficients,
        table,
        colinearity,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UIndependenceReport {
    pub residual: f64,
    pub witness: Option<Witness>,
}

/// Max over probe pairs `(u, v)`, sampled `f` and `y` of
/// `|(T̃_u f)(y) - (T̃_v f)(y)|`.
pub fn check_u_independence(
    tn: &MapUnderTest,
    us: &[ComplexVector],
    fs: &[ScalarFunction],
    tol: f64,
    mode: Execution,
) -> Result<UIndependenceReport> {
    let per_probe = map_ordered(us, mode, |u| scalar_actions(tn, u, fs, Execution::Sequential))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut report = UIndependenceReport {
        residual: 0.0,
        witness: None,
    };
    for i in 0..us.len() {
        for j in (i + 1)..us.len() {
            for (k, f) in fs.iter().enumerate() {
                let (gu, gv) = (&per_probe[i][k].g, &per_probe[j][k].g);
                for y in 0..tn.codomain().len() {
                    let r = (gu.at(y) - gv.at(y)).norm();
                    report.residual = report.residual.max(r);
                    if r > tol && report.witness.is_none() {
                        report.witness = Some(Witness::UDependence {
                            u: us[i].clone(),
                            v: us[j].clone(),
                            f: f.clone(),
                            y: tn.codomain().label(y).to_string(),
                            values: [pair(gu.at(y)), pair(gv.at(y))],
                            residual: r,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Uniform max-seminorm of `T'(f⊗u + g⊗v) - T'(f⊗u) - T'(g⊗v)`.
pub fn check_tensor_additivity(
    tn: &MapUnderTest,
    f: &ScalarFunction,
    u: &ComplexVector,
    g: &ScalarFunction,
    v: &ComplexVector,
) -> Result<f64> {
    let model = tn.model();
    let both = tn.eval(&two_term(tn, f, u, g, v)?)?;
    let fu = tn.eval(&f.tensor(u, model)?)?;
    let gv = tn.eval(&g.tensor(v, model)?)?;
    both.sub(&fu)?.sub(&gv)?.uniform_max()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationReport {
    pub residual: f64,
    pub witness: Option<Witness>,
}

/// Max over samples `F`, points `y` and seminorms of
/// `p(TF(y) - offset(y) - F(φ(y)))`.
pub fn verify_composition(
    map: &MapUnderTest,
    phi: &Symbol,
    offset: &VectorFunction,
    samples: &[VectorFunction],
    tol: f64,
    mode: Execution,
) -> Result<RepresentationReport> {
    let model = map.model().clone();
    let per_sample = map_ordered(samples, mode, |f| -> Result<Vec<f64>> {
        let tf = map.eval(f)?;
        let expected = f.compose(phi)?.add(offset)?;
        tf.values()
            .iter()
            .zip(expected.values())
            .map(|(a, b)| model.distance(a, b))
            .collect()
    });
    let mut report = RepresentationReport {
        residual: 0.0,
        witness: None,
    };
    for (res, f) in per_sample.into_iter().zip(samples) {
        for (y, r) in res?.into_iter().enumerate() {
            report.residual = report.residual.max(r);
            if r > tol && report.witness.is_none() {
                report.witness = Some(Witness::Representation {
                    f: f.clone(),
                    symbol: phi.clone(),
                    y: map.codomain().label(y).to_string(),
                    residual: r,
                });
            }
        }
    }
    Ok(report)
}
