//! Approximation of `F ∈ C(X,E)` by tensor sums `G = Σ_j h_j ⊗ F(x_j)` with
//! `F - G ∈ V_X(B)`.
//!
//! The construction picks a finite cover by sets
//! `W_{x0} = {x : F(x) - F(x0) ∈ B}`, a partition of unity `h_j` subordinate
//! to it, and evaluates `F` at the centers. Because `B` is convex and every
//! `h_j` is supported in `W_{x_j}`, `F(x) - G(x) = Σ_j h_j(x)(F(x) - F(x_j))`
//! lies in `B` at every point.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{ScalarFunction, TensorSum, VectorFunction};
use crate::lcs::Neighborhood;
use crate::space::FiniteSpace;

const POU_TOL: f64 = 1e-12;

/// Centers `x_1..x_n` with their sets `W_{x_j}` (point indices, label order).
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    space: Arc<FiniteSpace>,
    centers: Vec<usize>,
    sets: Vec<Vec<usize>>,
}

impl Cover {
    /// Checks that each center lies in its own set and indices are in range.
    /// Coverage of the whole space is checked by [`build_pou`].
    pub fn new(space: Arc<FiniteSpace>, centers: Vec<usize>, sets: Vec<Vec<usize>>) -> Result<Self> {
        if centers.len() != sets.len() {
            return Err(Error::InvalidFunction("centers and sets differ in length".into()));
        }
        for (c, set) in centers.iter().zip(&sets) {
            if *c >= space.len() || set.iter().any(|&x| x >= space.len()) {
                return Err(Error::InvalidFunction("cover index out of range".into()));
            }
            if !set.contains(c) {
                return Err(Error::InvalidFunction(format!(
                    "center `{}` is not in its own set",
                    space.label(*c)
                )));
            }
        }
        Ok(Self { space, centers, sets })
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn center_labels(&self) -> Vec<String> {
        self.centers.iter().map(|&c| self.space.label(c).to_string()).collect()
    }

    fn first_uncovered(&self) -> Option<usize> {
        let mut covered = vec![false; self.space.len()];
        for s in &self.sets {
            for &x in s {
                covered[x] = true;
            }
        }
        covered.iter().position(|c| !c)
    }
}

/// Greedy cover: the first uncovered label becomes the next center.
pub fn build_cover(f: &VectorFunction, nbr: &Neighborhood) -> Result<Cover> {
    let n = f.space().len();
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    let mut sets = Vec::new();
    while let Some(x0) = covered.iter().position(|c| !c) {
        let mut set = Vec::new();
        for (x, c) in covered.iter_mut().enumerate() {
            if nbr.contains(f.model(), &f.at(x).sub(f.at(x0))?)? {
                set.push(x);
                *c = true;
            }
        }
        // 0_E ∈ B puts x0 in its own set, so the loop always makes progress.
        debug_assert!(set.contains(&x0));
        centers.push(x0);
        sets.push(set);
    }
    Cover::new(f.space().clone(), centers, sets)
}

/// Real weights `h_j(x)`, one row per center.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    space: Arc<FiniteSpace>,
    weights: Vec<Vec<f64>>,
}

impl PartitionOfUnity {
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn weight_function(&self, j: usize) -> ScalarFunction {
        ScalarFunction::from_fn(self.space.clone(), |x| C64::new(self.weights[j][x], 0.0))
    }

    /// Nonnegativity, summing to one and subordination to `cover`.
    pub fn check(&self, cover: &Cover) -> std::result::Result<(), String> {
        if self.weights.len() != cover.sets.len() {
            return Err("one weight function per center expected".into());
        }
        for x in 0..self.space.len() {
            let mut total = 0.0;
            for (j, h) in self.weights.iter().enumerate() {
                if h[x] < 0.0 {
                    return Err(format!("h_{j} negative at `{}`", self.space.label(x)));
                }
                if h[x] != 0.0 && !cover.sets[j].contains(&x) {
                    return Err(format!(
                        "h_{j} supported at `{}` outside its cover set",
                        self.space.label(x)
                    ));
                }
                total += h[x];
            }
            if (total - 1.0).abs() > POU_TOL {
                return Err(format!("weights sum to {total} at `{}`", self.space.label(x)));
            }
        }
        Ok(())
    }
}

fn first_containing(cover: &Cover, x: usize) -> Option<usize> {
    cover.sets.iter().position(|s| s.contains(&x))
}

/// Assignment partition: each point carries full weight on the first center
/// (center order) whose set contains it.
#[allow(clippy::needless_range_loop)]
pub fn build_pou(cover: &Cover) -> Result<PartitionOfUnity> {
    if let Some(x) = cover.first_uncovered() {
        return Err(Error::InvalidCover(cover.space.label(x).to_string()));
    }
    let n = cover.space.len();
    let mut weights = vec![vec![0.0; n]; cover.centers.len()];
    for x in 0..n {
        let j = first_containing(cover, x).expect("coverage checked above");
        weights[j][x] = 1.0;
    }
    Ok(PartitionOfUnity {
        space: cover.space.clone(),
        weights,
    })
}

/// Hat-weight partition on a metric space: `h_j(x) ∝ max(0, 1 - d(x, x_j)/r_j)`
/// restricted to `W_{x_j}`, normalised per point. With `radius = None`,
/// `r_j` is twice the largest distance from `x_j` within `W_{x_j}`, so every
/// covered point gets positive weight. Points whose weights all vanish fall
/// back to assignment.
#[allow(clippy::needless_range_loop)]
pub fn build_hat_pou(cover: &Cover, radius: Option<f64>) -> Result<PartitionOfUnity> {
    if let Some(x) = cover.first_uncovered() {
        return Err(Error::InvalidCover(cover.space.label(x).to_string()));
    }
    let space = &cover.space;
    if space.metric().is_none() {
        return Err(Error::InvalidSpace("hat partition needs a metric".into()));
    }
    let dist = |a, b| space.distance(a, b).expect("metric present");
    let radii: Vec<f64> = cover
        .centers
        .iter()
        .zip(&cover.sets)
        .map(|(&c, set)| radius.unwrap_or_else(|| 2.0 * set.iter().map(|&x| dist(c, x)).fold(0.0, f64::max)))
        .collect();
    let n = space.len();
    let mut weights = vec![vec![0.0; n]; cover.centers.len()];
    for x in 0..n {
        let raw: Vec<f64> = cover
            .centers
            .iter()
            .zip(&cover.sets)
            .zip(&radii)
            .map(|((&c, set), &r)| {
                if !set.contains(&x) {
                    0.0
                } else if r > 0.0 {
                    (1.0 - dist(x, c) / r).max(0.0)
                } else if x == c {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            for (j, w) in raw.iter().enumerate() {
                weights[j][x] = w / total;
            }
        } else {
            let j = first_containing(cover, x).expect("coverage checked above");
            weights[j][x] = 1.0;
        }
    }
    Ok(PartitionOfUnity {
        space: space.clone(),
        weights,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Assignment,
    Hat,
}

/// Outcome of [`tensor_approximate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub cover_centers: Vec<String>,
    #[serde(rename = "in_V")]
    pub in_v: bool,
    pub errors_per_seminorm: Vec<f64>,
}

/// Builds the cover, the partition and `G = Σ_j h_j ⊗ F(x_j)`, and certifies
/// `F - G ∈ V_X(B)`.
pub fn tensor_approximate(
    f: &VectorFunction,
    nbr: &Neighborhood,
    strategy: Strategy,
) -> Result<(TensorSum, Certificate)> {
    nbr.validate(f.model())?;
    let cover = build_cover(f, nbr)?;
    let pou = match strategy {
        Strategy::Assignment => build_pou(&cover)?,
        Strategy::Hat => build_hat_pou(&cover, None)?,
    };
    let terms = cover
        .centers
        .iter()
        .enumerate()
        .map(|(j, &c)| (pou.weight_function(j), f.at(c).clone()))
        .collect();
    let g = TensorSum::new(terms)?;
    let diff = f.sub(&g.eval(f.model())?)?;
    let errors_per_seminorm = f
        .model()
        .seminorms()
        .iter()
        .map(|p| diff.uniform_seminorm(p))
        .collect::<Result<_>>()?;
    Ok((
        g,
        Certificate {
            cover_centers: cover.center_labels(),
            in_v: diff.in_v(nbr)?,
            errors_per_seminorm,
        },
    ))
}
