//! Versioned JSON instance descriptions and the evaluators they denote.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analyzer::MapUnderTest;
use crate::error::{Error, Result};
use crate::funcspace::{FunctionValues, VectorFunction};
use crate::lcs::{ComplexVector, VectorSpaceModel};
use crate::sample::SampleFamily;
use crate::space::{FiniteSpace, Symbol, SymbolSpec};
use crate::DEFAULT_TOL;

use super::external::ExternalMap;

pub const SCHEMA_VERSION: u32 = 1;

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub schema: u32,
    pub x: FiniteSpace,
    pub y: FiniteSpace,
    pub model: VectorSpaceModel,
    pub map: MapSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub family: SampleFamily,
}

/// When a perturbed composition adds its bump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    Nonzero,
    Nonconstant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    /// `TF = offset + F∘φ`.
    Composition {
        symbol: SymbolSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<FunctionValues>,
    },
    /// `TF = K`.
    Constant { value: FunctionValues },
    /// `TF(y) = Σ_x w_x F(x)` at every `y`.
    Averaging { weights: BTreeMap<String, f64> },
    /// `TF(y) = R F(φ(y))`; `matrix` is row-major `[re, im]` entries.
    Rotation {
        matrix: Vec<Vec<[f64; 2]>>,
        symbol: SymbolSpec,
    },
    /// Coordinate 1 of `TF(y)` is read at `first(y)`, the others at
    /// `second(y)`.
    DirectionDependent { first: SymbolSpec, second: SymbolSpec },
    /// Composition plus `epsilon·e_1` at `at` (default: first point of `Y`)
    /// whenever `trigger` holds for `F`.
    PerturbedComposition {
        symbol: SymbolSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<FunctionValues>,
        epsilon: f64,
        trigger: Trigger,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<String>,
    },
    /// Out-of-process evaluator speaking line-delimited JSON.
    External {
        command: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timeout_ms: Option<u64>,
    },
}

impl MapSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            MapSpec::Composition { .. } => "composition",
            MapSpec::Constant { .. } => "constant",
            MapSpec::Averaging { .. } => "averaging",
            MapSpec::Rotation { .. } => "rotation",
            MapSpec::DirectionDependent { .. } => "direction-dependent",
            MapSpec::PerturbedComposition { .. } => "perturbed-composition",
            MapSpec::External { .. } => "external",
        }
    }
}

/// A spec with its spaces shared between the map and the caller.
#[derive(Clone, Debug)]
pub struct Instance {
    pub x: Arc<FiniteSpace>,
    pub y: Arc<FiniteSpace>,
    pub model: Arc<VectorSpaceModel>,
    pub map: MapUnderTest,
    pub seed: u64,
    pub tol: f64,
    pub family: SampleFamily,
}

impl InstanceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::InvalidSpec(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "tolerance {} is not a finite non-negative number",
                self.tol
            )));
        }
        Ok(())
    }

    /// Resolves labels and builds the evaluator.
    pub fn instantiate(&self) -> Result<Instance> {
        self.validate()?;
        let x = Arc::new(self.x.clone());
        let y = Arc::new(self.y.clone());
        let model = Arc::new(self.model.clone());
        let map = generate(&self.map, &x, &y, &model)?;
        Ok(Instance {
            x,
            y,
            model,
            map,
            seed: self.seed,
            tol: self.tol,
            family: self.family,
        })
    }
}

fn offset_of(
    offset: &Option<FunctionValues>,
    y: &Arc<FiniteSpace>,
    model: &Arc<VectorSpaceModel>,
) -> Result<VectorFunction> {
    match offset {
        Some(v) => v.resolve(y.clone(), model.clone()),
        None => Ok(VectorFunction::zero(y.clone(), model.clone())),
    }
}

fn composition_map(
    x: &Arc<FiniteSpace>,
    model: &Arc<VectorSpaceModel>,
    phi: Symbol,
    offset: VectorFunction,
) -> MapUnderTest {
    MapUnderTest::new(x.clone(), phi.source().clone(), model.clone(), move |f| {
        offset.add(&f.compose(&phi)?)
    })
}

/// Builds the deterministic evaluator named by `map`.
pub fn generate(
    map: &MapSpec,
    x: &Arc<FiniteSpace>,
    y: &Arc<FiniteSpace>,
    model: &Arc<VectorSpaceModel>,
) -> Result<MapUnderTest> {
    let d = model.dim();
    Ok(match map {
        MapSpec::Composition { symbol, offset } => {
            let phi = symbol.resolve(y.clone(), x.clone())?;
            composition_map(x, model, phi, offset_of(offset, y, model)?)
        }
        MapSpec::Constant { value } => {
            let k = value.resolve(y.clone(), model.clone())?;
            MapUnderTest::new(x.clone(), y.clone(), model.clone(), move |_| Ok(k.clone()))
        }
        MapSpec::Averaging { weights } => {
            let mut w = vec![0.0; x.len()];
            for (label, v) in weights {
                if !v.is_finite() {
                    return Err(Error::InvalidSpec(format!("weight for `{label}` is not finite")));
                }
                w[x.index_of(label)?] = *v;
            }
            let (y2, m2) = (y.clone(), model.clone());
            MapUnderTest::new(x.clone(), y.clone(), model.clone(), move |f| {
                let mut acc = ComplexVector::zero(m2.dim());
                for (v, &wx) in f.values().iter().zip(&w) {
                    acc = acc.add(&v.scale(C64::new(wx, 0.0)))?;
                }
                Ok(VectorFunction::constant(y2.clone(), m2.clone(), acc))
            })
        }
        MapSpec::Rotation { matrix, symbol } => {
            if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
                return Err(Error::InvalidSpec(format!("rotation matrix must be {d}x{d}")));
            }
            let r: Vec<Vec<C64>> = matrix
                .iter()
                .map(|row| row.iter().map(|z| C64::new(z[0], z[1])).collect())
                .collect();
            if r.iter().flatten().any(|z| !z.is_finite()) {
                return Err(Error::InvalidSpec("rotation matrix has non-finite entries".into()));
            }
            let phi = symbol.resolve(y.clone(), x.clone())?;
            let (y2, m2) = (y.clone(), model.clone());
            MapUnderTest::new(x.clone(), y.clone(), model.clone(), move |f| {
                let values = phi
                    .table()
                    .iter()
                    .map(|&xi| {
                        let v = f.at(xi).entries();
                        ComplexVector::new(
                            r.iter()
                                .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
                                .collect(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                VectorFunction::new(y2.clone(), m2.clone(), values)
            })
        }
        MapSpec::DirectionDependent { first, second } => {
            if d < 2 {
                return Err(Error::InvalidSpec(
                    "direction-dependent maps need dimension at least 2".into(),
                ));
            }
            let p1 = first.resolve(y.clone(), x.clone())?;
            let p2 = second.resolve(y.clone(), x.clone())?;
            let (y2, m2) = (y.clone(), model.clone());
            MapUnderTest::new(x.clone(), y.clone(), model.clone(), move |f| {
                let values = (0..y2.len())
                    .map(|yi| {
                        let mut v = f.at(p2.image_of(yi)).entries().to_vec();
                        v[0] = f.at(p1.image_of(yi)).entries()[0];
                        ComplexVector::new(v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                VectorFunction::new(y2.clone(), m2.clone(), values)
            })
        }
        MapSpec::PerturbedComposition {
            symbol,
            offset,
            epsilon,
            trigger,
            at,
        } => {
            if !epsilon.is_finite() {
                return Err(Error::InvalidSpec("epsilon is not finite".into()));
            }
            let phi = symbol.resolve(y.clone(), x.clone())?;
            let base = composition_map(x, model, phi, offset_of(offset, y, model)?);
            let y0 = match at {
                Some(label) => y.index_of(label)?,
                None => 0,
            };
            let bump = ComplexVector::basis(d, 0).scale(C64::new(*epsilon, 0.0));
            let trigger = *trigger;
            MapUnderTest::new(x.clone(), y.clone(), model.clone(), move |f| {
                let out = base.eval(f)?;
                let fires = match trigger {
                    Trigger::Nonzero => !f.is_zero(),
                    Trigger::Nonconstant => !f.is_constant(),
                };
                if fires {
                    out.with_value(y0, out.at(y0).add(&bump)?)
                } else {
                    Ok(out)
                }
            })
        }
        MapSpec::External { command, timeout_ms } => {
            let timeout = Duration::from_millis(timeout_ms.unwrap_or(super::external::DEFAULT_TIMEOUT_MS));
            let child = Arc::new(ExternalMap::spawn(command, y.clone(), model.clone(), timeout)?);
            MapUnderTest::new(x.clone(), y.clone(), model.clone(), move |f| child.call(f))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMPOSITION: &str = r#"{
        "schema": 1,
        "x": {"labels": ["a", "b"]},
        "y": {"labels": ["p"]},
        "model": {"dimension": 2, "seminorms": [[[[1,0],[0,0]],[[0,0],[1,0]]]]},
        "map": {"kind": "composition", "symbol": {"table": {"p": "b"}},
                "offset": {"values": {"p": [[1,0],[0,0]]}}}
    }"#;

    fn vf(space: &Arc<FiniteSpace>, model: &Arc<VectorSpaceModel>, vals: &[&[f64]]) -> VectorFunction {
        VectorFunction::new(
            space.clone(),
            model.clone(),
            vals.iter().map(|v| ComplexVector::real(v).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn composition_example() {
        let inst = InstanceSpec::from_json(COMPOSITION).unwrap().instantiate().unwrap();
        assert_eq!(inst.tol, DEFAULT_TOL);
        let f = vf(&inst.x, &inst.model, &[&[0.0, 0.0], &[2.0, 0.0]]);
        let tf = inst.map.eval(&f).unwrap();
        assert_eq!(tf, vf(&inst.y, &inst.model, &[&[3.0, 0.0]]));
    }

    #[test]
    fn constant_ignores_input() {
        let spec = COMPOSITION.replace(
            r#""kind": "composition", "symbol": {"table": {"p": "b"}},
                "offset""#,
            r#""kind": "constant", "value""#,
        );
        let inst = InstanceSpec::from_json(&spec).unwrap().instantiate().unwrap();
        let k = vf(&inst.y, &inst.model, &[&[1.0, 0.0]]);
        for f in crate::sample::indicator_functions(&inst.x, &inst.model) {
            assert_eq!(inst.map.eval(&f).unwrap(), k);
        }
    }

    #[test]
    fn perturbation_differs_by_epsilon() {
        let x = Arc::new(FiniteSpace::new(["a", "b"]).unwrap());
        let y = Arc::new(FiniteSpace::new(["p", "q"]).unwrap());
        let model = Arc::new(VectorSpaceModel::standard(1));
        let symbol: SymbolSpec = serde_json::from_str(r#"{"table": {"p": "a", "q": "b"}}"#).unwrap();
        let plain = generate(
            &MapSpec::Composition {
                symbol: symbol.clone(),
                offset: None,
            },
            &x,
            &y,
            &model,
        )
        .unwrap();
        let bumped = generate(
            &MapSpec::PerturbedComposition {
                symbol,
                offset: None,
                epsilon: 1e-3,
                trigger: Trigger::Nonzero,
                at: None,
            },
            &x,
            &y,
            &model,
        )
        .unwrap();
        let f = vf(&x, &model, &[&[0.0], &[-1.0]]);
        let diff = bumped.eval(&f).unwrap().sub(&plain.eval(&f).unwrap()).unwrap();
        assert_eq!(diff, vf(&y, &model, &[&[1e-3], &[0.0]]));
        let zero = bumped.zero_input();
        assert!(bumped.eval(&zero).unwrap().is_zero());
    }

    #[test]
    fn malformed_specs_rejected() {
        assert!(InstanceSpec::from_json("{").is_err());
        assert!(matches!(
            InstanceSpec::from_json(&COMPOSITION.replace(r#""schema": 1"#, r#""schema": 2"#)),
            Err(Error::InvalidSpec(_))
        ));
        let unknown = COMPOSITION.replace(r#""p": "b""#, r#""p": "z""#);
        assert!(InstanceSpec::from_json(&unknown).unwrap().instantiate().is_err());
        let dd = COMPOSITION
            .replace(
                r#""dimension": 2, "seminorms": [[[[1,0],[0,0]],[[0,0],[1,0]]]]"#,
                r#""dimension": 1, "seminorms": [[[[1,0]]]]"#,
            )
            .replace(
                r#""kind": "composition", "symbol": {"table": {"p": "b"}},
                "offset": {"values": {"p": [[1,0],[0,0]]}}"#,
                r#""kind": "direction-dependent", "first": {"table": {"p": "a"}}, "second": {"table": {"p": "b"}}"#,
            );
        assert!(matches!(
            InstanceSpec::from_json(&dd).unwrap().instantiate(),
            Err(Error::InvalidSpec(_))
        ));
    }
}
