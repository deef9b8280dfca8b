//! Exhaustive symbol recovery used to cross-check the analyzer. Coefficients
//! are read off the dominant coordinate of the probe rather than by
//! projection, and every candidate point is scored against a whole sample
//! family instead of indicators alone.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analyzer::{normalize, MapUnderTest, SymbolExtraction};
use crate::error::{Error, Result};
use crate::funcspace::ScalarFunction;
use crate::lcs::ComplexVector;
use crate::sample;

pub const ORACLE_GUARD: usize = 64;
pub const ORACLE_RANDOM_FUNCTIONS: usize = 50;

/// Scores within this relative margin of the minimum count as tied.
const TIE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub y: String,
    /// `scores[x] = max_f |g_f(y) - f(x)|`.
    pub scores: Vec<f64>,
    pub candidates: Vec<String>,
    pub min_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub u: ComplexVector,
    pub family_size: usize,
    pub rows: Vec<OracleRow>,
}

impl OracleResult {
    /// The unique candidate for `y` if its score is within `tol`.
    pub fn decided(&self, y: usize, tol: f64) -> Option<&str> {
        let row = &self.rows[y];
        match row.candidates.as_slice() {
            [x] if row.min_score <= tol => Some(x),
            _ => None,
        }
    }

    /// Rows where the analyzer's table differs from [`Self::decided`].
    pub fn disagreements(&self, ext: &SymbolExtraction, tol: f64) -> Vec<String> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(y, _)| {
                let analyzer = ext.table()[*y].map(|x| ext.target().label(x));
                analyzer != self.decided(*y, tol)
            })
            .map(|(_, row)| row.y.clone())
            .collect()
    }
}

/// Scores every `(y, x)` for the probe `u` over all indicators plus
/// [`ORACLE_RANDOM_FUNCTIONS`] seeded random scalar functions.
pub fn oracle_extract(map: &MapUnderTest, u: &ComplexVector, seed: u64) -> Result<OracleResult> {
    let (x, y) = (map.domain().clone(), map.codomain().clone());
    let product = x.len() * y.len();
    if product > ORACLE_GUARD {
        return Err(Error::OracleGuard(product));
    }
    if u.is_zero() {
        return Err(Error::ZeroProbe);
    }
    let k = (0..u.dim())
        .max_by(|&a, &b| u.entries()[a].norm().total_cmp(&u.entries()[b].norm()).then(b.cmp(&a)))
        .expect("non-empty vector");
    let uk = u.entries()[k];

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0_7AC1E);
    let mut family: Vec<ScalarFunction> = (0..x.len()).map(|i| ScalarFunction::indicator(x.clone(), i)).collect();
    family.extend((0..ORACLE_RANDOM_FUNCTIONS).map(|j| sample::random_scalar_function(&mut rng, &x, j % 2 == 1)));

    let (_, tn) = normalize(map)?;
    let mut scores = vec![vec![0.0f64; x.len()]; y.len()];
    for f in &family {
        let image = tn.eval(&f.tensor(u, map.model())?)?;
        for (yi, row) in scores.iter_mut().enumerate() {
            let g: C64 = image.at(yi).entries()[k] / uk;
            for (xi, s) in row.iter_mut().enumerate() {
                *s = s.max((g - f.at(xi)).norm());
            }
        }
    }

    let rows = scores
        .into_iter()
        .enumerate()
        .map(|(yi, scores)| {
            let min_score = scores.iter().copied().fold(f64::INFINITY, f64::min);
            let candidates = scores
                .iter()
                .enumerate()
                .filter(|(_, s)| **s <= min_score + TIE * (1.0 + min_score))
                .map(|(xi, _)| x.label(xi).to_string())
                .collect();
            OracleRow {
                y: y.label(yi).to_string(),
                scores,
                candidates,
                min_score,
            }
        })
        .collect();
    Ok(OracleResult {
        u: u.clone(),
        family_size: family.len(),
        rows,
    })
}
