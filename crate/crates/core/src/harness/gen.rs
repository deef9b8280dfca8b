//! Seeded instance catalog: compositions plus one adversarial kind per
//! stage of the analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::WitnessKind;
use crate::error::{Error, Result};
use crate::funcspace::FunctionValues;
use crate::lcs::{Seminorm, VectorSpaceModel};
use crate::sample::{self, SampleFamily};
use crate::space::{FiniteSpace, SymbolSpec};
use crate::DEFAULT_TOL;

use super::spec::{InstanceSpec, MapSpec, Trigger, SCHEMA_VERSION};

pub const PERTURBATION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogKind {
    Composition,
    Constant,
    Averaging,
    Rotation,
    DirectionDependent,
    Perturbed,
}

impl CatalogKind {
    pub const ALL: [CatalogKind; 6] = [
        CatalogKind::Composition,
        CatalogKind::Constant,
        CatalogKind::Averaging,
        CatalogKind::Rotation,
        CatalogKind::DirectionDependent,
        CatalogKind::Perturbed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CatalogKind::Composition => "composition",
            CatalogKind::Constant => "constant",
            CatalogKind::Averaging => "averaging",
            CatalogKind::Rotation => "rotation",
            CatalogKind::DirectionDependent => "direction-dependent",
            CatalogKind::Perturbed => "perturbed",
        }
    }

    /// Witness kind each adversary must produce; `None` for compositions,
    /// which must be accepted.
    pub fn expected_witness(self) -> Option<WitnessKind> {
        match self {
            CatalogKind::Composition => None,
            CatalogKind::Constant => Some(WitnessKind::RangeViolation),
            CatalogKind::Averaging => Some(WitnessKind::Ambiguity),
            CatalogKind::Rotation => Some(WitnessKind::Colinearity),
            CatalogKind::DirectionDependent => Some(WitnessKind::UDependence),
            CatalogKind::Perturbed => Some(WitnessKind::Representation),
        }
    }
}

impl fmt::Display for CatalogKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CatalogKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown catalog kind `{s}`")))
    }
}

struct Shape {
    nx: usize,
    ny: usize,
    dim: usize,
}

fn draw_shape<R: Rng>(rng: &mut R, kind: CatalogKind) -> Shape {
    let mut shape = Shape {
        nx: rng.gen_range(1..=4),
        ny: rng.gen_range(1..=3),
        dim: rng.gen_range(1..=2),
    };
    match kind {
        CatalogKind::Rotation => shape.dim = 2,
        CatalogKind::Averaging => shape.nx = shape.nx.max(2),
        CatalogKind::DirectionDependent => {
            shape.dim = 2;
            shape.nx = shape.nx.max(2);
        }
        _ => {}
    }
    shape
}

fn draw_model<R: Rng>(rng: &mut R, dim: usize) -> VectorSpaceModel {
    if dim == 1 {
        return VectorSpaceModel::standard(1);
    }
    let seminorms = match rng.gen_range(0..3) {
        0 => vec![Seminorm::identity(dim)],
        1 => (0..dim).map(|k| Seminorm::coordinate(dim, k)).collect(),
        _ => vec![Seminorm::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).expect("2x2 rows")],
    };
    VectorSpaceModel::new(dim, seminorms).expect("separating family")
}

fn draw_table<R: Rng>(rng: &mut R, x: &FiniteSpace, y: &FiniteSpace) -> Vec<usize> {
    (0..y.len()).map(|_| rng.gen_range(0..x.len())).collect()
}

fn symbol_spec(x: &FiniteSpace, y: &FiniteSpace, table: &[usize]) -> SymbolSpec {
    SymbolSpec {
        table: table
            .iter()
            .enumerate()
            .map(|(yi, &xi)| (y.label(yi).to_string(), x.label(xi).to_string()))
            .collect(),
    }
}

/// Gaussian-integer values in `{-2..2}²`, so compositions stay exact.
fn integer_values<R: Rng>(rng: &mut R, y: &FiniteSpace, dim: usize) -> FunctionValues {
    FunctionValues {
        values: y
            .labels()
            .iter()
            .map(|l| (l.clone(), sample::random_vector(rng, dim, true)))
            .collect(),
    }
}

/// A seeded instance of `kind` with `|X| ∈ 1..=4`, `|Y| ∈ 1..=3`,
/// `d ∈ {1, 2}` (constrained where the kind needs it), tolerance
/// [`DEFAULT_TOL`] and mixed sampling.
pub fn generate_spec(kind: CatalogKind, seed: u64) -> InstanceSpec {
    let salt = CatalogKind::ALL.iter().position(|k| *k == kind).expect("listed") as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(salt));
    let shape = draw_shape(&mut rng, kind);
    let x = FiniteSpace::numbered("x", shape.nx).expect("distinct labels");
    let y = FiniteSpace::numbered("y", shape.ny).expect("distinct labels");
    let model = draw_model(&mut rng, shape.dim);
    let table = draw_table(&mut rng, &x, &y);
    let offset = integer_values(&mut rng, &y, shape.dim);

    let map = match kind {
        CatalogKind::Composition => MapSpec::Composition {
            symbol: symbol_spec(&x, &y, &table),
            offset: Some(offset),
        },
        CatalogKind::Constant => MapSpec::Constant { value: offset },
        CatalogKind::Averaging => {
            let raw: Vec<f64> = (0..shape.nx).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            MapSpec::Averaging {
                weights: x.labels().iter().cloned().zip(raw.iter().map(|w| w / total)).collect(),
            }
        }
        CatalogKind::Rotation => MapSpec::Rotation {
            matrix: vec![vec![[0.0, 0.0], [-1.0, 0.0]], vec![[1.0, 0.0], [0.0, 0.0]]],
            symbol: symbol_spec(&x, &y, &table),
        },
        CatalogKind::DirectionDependent => {
            let mut second = draw_table(&mut rng, &x, &y);
            let y0 = rng.gen_range(0..shape.ny);
            if second[y0] == table[y0] {
                second[y0] = (table[y0] + rng.gen_range(1..shape.nx)) % shape.nx;
            }
            MapSpec::DirectionDependent {
                first: symbol_spec(&x, &y, &table),
                second: symbol_spec(&x, &y, &second),
            }
        }
        CatalogKind::Perturbed => MapSpec::PerturbedComposition {
            symbol: symbol_spec(&x, &y, &table),
            offset: Some(offset),
            epsilon: PERTURBATION,
            trigger: Trigger::Nonzero,
            at: None,
        },
    };
    InstanceSpec {
        schema: SCHEMA_VERSION,
        x,
        y,
        model,
        map,
        seed,
        tol: DEFAULT_TOL,
        family: SampleFamily::Mixed,
    }
}

/// Composition instance with a fully random symbol and offset, for
/// round-trip tests; identical to the catalog's composition kind.
pub fn composition_spec(seed: u64) -> InstanceSpec {
    generate_spec(CatalogKind::Composition, seed)
}

/// The symbol table of a composition or perturbed spec, by label.
pub fn spec_symbol(spec: &InstanceSpec) -> Option<&BTreeMap<String, String>> {
    match &spec.map {
        MapSpec::Composition { symbol, .. } | MapSpec::PerturbedComposition { symbol, .. } => Some(&symbol.table),
        _ => None,
    }
}
