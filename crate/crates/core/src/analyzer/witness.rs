use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::funcspace::{ScalarFunction, TensorSum, VectorFunction};
use crate::lcs::ComplexVector;
use crate::space::Symbol;

use super::checks;
use super::map::{normalize, MapUnderTest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    RangeViolation,
    Colinearity,
    Ambiguity,
    Additivity,
    UDependence,
    Representation,
    PointFunctional,
    Purity,
    Evaluation,
}

/// Algebraic law probed on a point functional `f ↦ (T̃_u f)(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Linearity,
    Multiplicativity,
    Unit,
}

/// A concrete, replayable counterexample.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `(TF - TG)(y)` is at distance `distance` from `Ran(F - G)`.
    RangeViolation {
        f: VectorFunction,
        g: VectorFunction,
        y: String,
        value: ComplexVector,
        distance: f64,
    },
    /// `T'(f⊗u)(y)` is not a multiple of `u`.
    Colinearity {
        u: ComplexVector,
        f: ScalarFunction,
        y: String,
        coefficient: [f64; 2],
        residual: f64,
    },
    /// Indicator probes at `y` do not single out one point.
    Ambiguity {
        u: ComplexVector,
        y: String,
        coefficients: Vec<(String, [f64; 2])>,
    },
    /// `T'(f⊗u + g⊗v) != T'(f⊗u) + T'(g⊗v)`.
    Additivity {
        f: ScalarFunction,
        u: ComplexVector,
        g: ScalarFunction,
        v: ComplexVector,
        residual: f64,
    },
    /// Scalar actions for `u` and `v` differ on `f` at `y`.
    UDependence {
        u: ComplexVector,
        v: ComplexVector,
        f: ScalarFunction,
        y: String,
        values: [[f64; 2]; 2],
        residual: f64,
    },
    /// `TF(y) != T(0)(y) + F(φ(y))`.
    Representation {
        f: VectorFunction,
        symbol: Symbol,
        y: String,
        residual: f64,
    },
    /// The point functional at `y` breaks `law`.
    PointFunctional {
        u: ComplexVector,
        y: String,
        law: Law,
        f: ScalarFunction,
        g: ScalarFunction,
        lambda: [f64; 2],
        residual: f64,
    },
    /// Two evaluations of the same input disagreed.
    Purity {
        input: VectorFunction,
        first: VectorFunction,
        second: VectorFunction,
    },
    /// The evaluator failed.
    Evaluation {
        input: Option<VectorFunction>,
        message: String,
    },
}

fn c(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

impl Witness {
    pub fn kind(&self) -> WitnessKind {
        match self {
            Witness::RangeViolation { .. } => WitnessKind::RangeViolation,
            Witness::Colinearity { .. } => WitnessKind::Colinearity,
            Witness::Ambiguity { .. } => WitnessKind::Ambiguity,
            Witness::Additivity { .. } => WitnessKind::Additivity,
            Witness::UDependence { .. } => WitnessKind::UDependence,
            Witness::Representation { .. } => WitnessKind::Representation,
            Witness::PointFunctional { .. } => WitnessKind::PointFunctional,
            Witness::Purity { .. } => WitnessKind::Purity,
            Witness::Evaluation { .. } => WitnessKind::Evaluation,
        }
    }

    /// Re-evaluates the payload against `map` and reports whether the failure
    /// is reproduced at tolerance `tol`.
    pub fn replay(&self, map: &MapUnderTest, tol: f64) -> Result<bool> {
        let y_index = |y: &str| map.codomain().index_of(y);
        match self {
            Witness::RangeViolation { f, g, y, .. } => {
                let v = map.eval(f)?.sub(&map.eval(g)?)?;
                let range = f.sub(g)?.range(0.0)?;
                let (member, _) = range.contains(v.at(y_index(y)?), tol)?;
                Ok(!member)
            }
            Witness::Colinearity { u, f, y, .. } => {
                let (_, tn) = normalize(map)?;
                let action = checks::scalar_action(&tn, u, f)?;
                Ok(action.residuals[y_index(y)?] > tol)
            }
            Witness::Ambiguity { u, y, .. } => {
                let (_, tn) = normalize(map)?;
                let ext = checks::extract_symbol(&tn, u, tol, Default::default())?;
                Ok(ext.table()[y_index(y)?].is_none())
            }
            Witness::Additivity { f, u, g, v, .. } => {
                let (_, tn) = normalize(map)?;
                Ok(checks::check_tensor_additivity(&tn, f, u, g, v)? > tol)
            }
            Witness::UDependence { u, v, f, y, .. } => {
                let (_, tn) = normalize(map)?;
                let gu = checks::scalar_action(&tn, u, f)?.g;
                let gv = checks::scalar_action(&tn, v, f)?.g;
                let yi = y_index(y)?;
                Ok((gu.at(yi) - gv.at(yi)).norm() > tol)
            }
            Witness::Representation { f, symbol, y, .. } => {
                let offset = map.eval(&map.zero_input())?;
                let yi = y_index(y)?;
                let tf = map.eval(f)?;
                let expected = offset.at(yi).add(f.at(symbol.image_of(yi)))?;
                Ok(map.model().distance(tf.at(yi), &expected)? > tol)
            }
            Witness::PointFunctional {
                u,
                y,
                law,
                f,
                g,
                lambda,
                ..
            } => {
                let (_, tn) = normalize(map)?;
                let yi = y_index(y)?;
                let delta = |h: &ScalarFunction| -> Result<C64> { Ok(checks::scalar_action(&tn, u, h)?.g.at(yi)) };
                let residual = match law {
                    Law::Linearity => {
                        let l = c(*lambda);
                        (delta(&f.add(&g.scale(l))?)? - delta(f)? - l * delta(g)?).norm()
                    }
                    Law::Multiplicativity => (delta(&f.mul(g)?)? - delta(f)? * delta(g)?).norm(),
                    Law::Unit => {
                        let one = ScalarFunction::constant(f.space().clone(), C64::new(1.0, 0.0));
                        (delta(&one)? - C64::new(1.0, 0.0)).norm()
                    }
                };
                Ok(residual > tol)
            }
            Witness::Purity { input, first, second } => {
                let again = map.eval(input)?;
                Ok(first != second || again != *first)
            }
            Witness::Evaluation { input, .. } => match input {
                Some(f) => Ok(map.eval(f).is_err()),
                None => Ok(true),
            },
        }
    }
}

/// `f⊗u + g⊗v` as a function, used by additivity checks and their replay.
pub(crate) fn two_term(
    map: &MapUnderTest,
    f: &ScalarFunction,
    u: &ComplexVector,
    g: &ScalarFunction,
    v: &ComplexVector,
) -> Result<VectorFunction> {
    TensorSum::new(vec![(f.clone(), u.clone()), (g.clone(), v.clone())])?.eval(map.model())
}
