//! Finite-dimensional locally convex model: `E = C^d` with a separating
//! family of seminorms `p(u) = max_k |(A u)_k|`, and neighborhoods of the
//! origin given as finite intersections of seminorm sublevel sets.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A vector in `C^d`, `d >= 1`, with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidVector("dimension must be at least 1".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidVector("entries must be finite".into()));
        }
        Ok(Self(entries))
    }

    /// Builds from real entries.
    pub fn real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self(vec![C64::new(0.0, 0.0); dim])
    }

    /// Standard basis vector `e_k` (zero based).
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, lambda: C64) -> Self {
        Self(self.0.iter().map(|z| z * lambda).collect())
    }

    /// Coordinate inner product `<self, other> = Σ conj(self_k) other_k`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum())
    }

    /// Squared Euclidean length in coordinates.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Self::new(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect()).map_err(serde::de::Error::custom)
    }
}

/// `p(u) = max_k |(A u)_k|` for a fixed complex matrix `A` (rows × dim).
#[derive(Clone, Debug, PartialEq)]
pub struct Seminorm {
    rows: usize,
    dim: usize,
    matrix: Vec<C64>,
}

impl Seminorm {
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || dim == 0 {
            return Err(Error::InvalidSeminorm("matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidSeminorm("ragged matrix".into()));
        }
        let matrix: Vec<C64> = rows.into_iter().flatten().collect();
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSeminorm("entries must be finite".into()));
        }
        Ok(Self {
            rows: matrix.len() / dim,
            dim,
            matrix,
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    /// `max_k |u_k|`.
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![C64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            matrix[k * dim + k] = C64::new(1.0, 0.0);
        }
        Self { rows: dim, dim, matrix }
    }

    /// `|u_k|`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut matrix = vec![C64::new(0.0, 0.0); dim];
        matrix[k] = C64::new(1.0, 0.0);
        Self { rows: 1, dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, k: usize) -> &[C64] {
        &self.matrix[k * self.dim..(k + 1) * self.dim]
    }

    pub fn eval(&self, u: &ComplexVector) -> Result<f64> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.dim(),
            });
        }
        Ok((0..self.rows)
            .map(|k| {
                self.row(k)
                    .iter()
                    .zip(u.entries())
                    .map(|(a, x)| a * x)
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max))
    }
}

impl Serialize for Seminorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|k| self.row(k).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Seminorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Numerical rank of a row-major complex matrix by Gaussian elimination with
/// partial pivoting.
pub fn complex_rank(rows: usize, cols: usize, data: &[C64]) -> usize {
    let mut a = data.to_vec();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let eps = 1e-10 * scale;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (pivot, best) = (rank..rows)
            .map(|r| (r, a[r * cols + col].norm()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= eps {
            continue;
        }
        for c in 0..cols {
            a.swap(rank * cols + c, pivot * cols + c);
        }
        let p = a[rank * cols + col];
        for r in (rank + 1)..rows {
            let factor = a[r * cols + col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..cols {
                let v = a[rank * cols + c];
                a[r * cols + c] -= factor * v;
            }
        }
        rank += 1;
    }
    rank
}

/// True iff the seminorms jointly separate points of `C^dim`, i.e. the
/// stacked matrices have full column rank.
pub fn separating_check(dim: usize, seminorms: &[Seminorm]) -> bool {
    if seminorms.iter().any(|p| p.dim() != dim) {
        return false;
    }
    let rows: usize = seminorms.iter().map(Seminorm::rows).sum();
    let data: Vec<C64> = seminorms.iter().flat_map(|p| p.matrix.iter().copied()).collect();
    complex_rank(rows, dim, &data) == dim
}

/// `E` together with its defining seminorm family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorSpaceModel {
    dimension: usize,
    seminorms: Vec<Seminorm>,
}

impl VectorSpaceModel {
    pub fn new(dimension: usize, seminorms: Vec<Seminorm>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        if seminorms.is_empty() {
            return Err(Error::InvalidModel("at least one seminorm required".into()));
        }
        if let Some(p) = seminorms.iter().find(|p| p.dim() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: p.dim(),
            });
        }
        if !separating_check(dimension, &seminorms) {
            return Err(Error::InvalidModel("seminorm family is not separating".into()));
        }
        Ok(Self { dimension, seminorms })
    }

    /// `C^d` under the coordinate sup norm.
    pub fn standard(dimension: usize) -> Self {
        Self::new(dimension, vec![Seminorm::identity(dimension)]).expect("identity separates")
    }

    pub fn dim(&self) -> usize {
        self.dimension
    }

    pub fn seminorms(&self) -> &[Seminorm] {
        &self.seminorms
    }

    pub fn is_separating(&self) -> bool {
        separating_check(self.dimension, &self.seminorms)
    }

    pub fn check_vector(&self, u: &ComplexVector) -> Result<()> {
        if u.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: u.dim(),
            });
        }
        Ok(())
    }

    /// Values of every seminorm at `u`.
    pub fn seminorm_values(&self, u: &ComplexVector) -> Result<Vec<f64>> {
        self.seminorms.iter().map(|p| p.eval(u)).collect()
    }

    /// `max_i p_i(u)`.
    pub fn max_seminorm(&self, u: &ComplexVector) -> Result<f64> {
        Ok(self.seminorm_values(u)?.into_iter().fold(0.0, f64::max))
    }

    /// `max_i p_i(u - v)`.
    pub fn distance(&self, u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
        self.max_seminorm(&u.sub(v)?)
    }
}

impl<'de> Deserialize<'de> for VectorSpaceModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dimension: usize,
            seminorms: Vec<Seminorm>,
        }
        let raw = Raw::deserialize(d)?;
        Self::new(raw.dimension, raw.seminorms).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub seminorm: usize,
    pub radius: f64,
}

/// `{u : p_i(u) <= r_i for every listed bound}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNeighborhood")]
pub struct Neighborhood {
    bounds: Vec<Bound>,
}

#[derive(Deserialize)]
struct RawNeighborhood {
    bounds: Vec<Bound>,
}

impl TryFrom<RawNeighborhood> for Neighborhood {
    type Error = Error;

    fn try_from(raw: RawNeighborhood) -> Result<Self> {
        Self::new(raw.bounds)
    }
}

impl Neighborhood {
    pub fn new(bounds: Vec<Bound>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidNeighborhood("no bounds".into()));
        }
        if let Some(b) = bounds.iter().find(|b| !b.radius.is_finite() || b.radius <= 0.0) {
            return Err(Error::InvalidNeighborhood(format!(
                "radius must be positive and finite, got {}",
                b.radius
            )));
        }
        Ok(Self { bounds })
    }

    /// Ball of radius `r` for every seminorm of the model.
    pub fn uniform(model: &VectorSpaceModel, radius: f64) -> Result<Self> {
        Self::new(
            (0..model.seminorms().len())
                .map(|seminorm| Bound { seminorm, radius })
                .collect(),
        )
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// Checks that every bound refers to a seminorm of `model`.
    pub fn validate(&self, model: &VectorSpaceModel) -> Result<()> {
        match self.bounds.iter().find(|b| b.seminorm >= model.seminorms().len()) {
            Some(b) => Err(Error::InvalidNeighborhood(format!(
                "seminorm index {} out of range",
                b.seminorm
            ))),
            None => Ok(()),
        }
    }

    pub fn contains(&self, model: &VectorSpaceModel, u: &ComplexVector) -> Result<bool> {
        self.contains_within(model, u, 0.0)
    }

    /// Membership with each radius relaxed by `slack`.
    pub fn contains_within(&self, model: &VectorSpaceModel, u: &ComplexVector, slack: f64) -> Result<bool> {
        self.validate(model)?;
        model.check_vector(u)?;
        for b in &self.bounds {
            if model.seminorms()[b.seminorm].eval(u)? > b.radius + slack {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn bind<'a>(&'a self, model: &'a VectorSpaceModel) -> BoundNeighborhood<'a> {
        BoundNeighborhood { nbr: self, model }
    }
}

/// Membership rule over `C^d`, abstracted so that non-seminorm sets can be
/// fed to [`check_balanced_convex`].
pub trait Membership {
    fn dim(&self) -> usize;
    fn contains(&self, u: &ComplexVector, slack: f64) -> bool;
    /// Half-width of the initial sampling box.
    fn sampling_radius(&self) -> f64;
}

pub struct BoundNeighborhood<'a> {
    nbr: &'a Neighborhood,
    model: &'a VectorSpaceModel,
}

impl Membership for BoundNeighborhood<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn contains(&self, u: &ComplexVector, slack: f64) -> bool {
        self.nbr.contains_within(self.model, u, slack).unwrap_or(false)
    }

    fn sampling_radius(&self) -> f64 {
        self.nbr.bounds.iter().map(|b| b.radius).fold(0.0, f64::max)
    }
}

/// A failed balancedness or convexity probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeViolation {
    Balanced {
        member: ComplexVector,
        lambda: [f64; 2],
        image: ComplexVector,
    },
    Convex {
        first: ComplexVector,
        second: ComplexVector,
        t: f64,
        combination: ComplexVector,
    },
}

const MAX_DRAWS: usize = 8192;
const DRAWS_PER_SHRINK: usize = 256;

fn draw_member<M: Membership, R: Rng>(set: &M, rng: &mut R) -> Result<ComplexVector> {
    let mut radius = set.sampling_radius().max(f64::MIN_POSITIVE);
    for attempt in 0..MAX_DRAWS {
        if attempt > 0 && attempt % DRAWS_PER_SHRINK == 0 {
            radius *= 0.5;
        }
        let u = ComplexVector(
            (0..set.dim())
                .map(|_| C64::new(rng.gen_range(-radius..=radius), rng.gen_range(-radius..=radius)))
                .collect(),
        );
        if set.contains(&u, 0.0) {
            return Ok(u);
        }
    }
    Err(Error::SamplingFailed(MAX_DRAWS))
}

/// Draws `count` members of `set` by rejection sampling and probes
/// `λu ∈ set` for `|λ| <= 1` and `(1-t)u + tv ∈ set` for `t ∈ [0,1]`.
/// Returns the first violation found, if any. Members are tested with the
/// given slack on every radius.
pub fn check_balanced_convex<M: Membership>(
    set: &M,
    seed: u64,
    count: usize,
    slack: f64,
) -> Result<Option<ShapeViolation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = count.max(1);
    let mut previous: Option<ComplexVector> = None;
    for _ in 0..count {
        let u = draw_member(set, &mut rng)?;
        // uniform in the closed unit disc, with the unit circle hit explicitly
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let modulus = if rng.gen_bool(0.25) {
            1.0
        } else {
            rng.gen_range(0.0f64..=1.0).sqrt()
        };
        let lambda = C64::from_polar(modulus, angle);
        let image = u.scale(lambda);
        if !set.contains(&image, slack) {
            return Ok(Some(ShapeViolation::Balanced {
                member: u,
                lambda: [lambda.re, lambda.im],
                image,
            }));
        }
        if let Some(v) = previous.take() {
            let t: f64 = rng.gen_range(0.0..=1.0);
            let combination = u.scale(C64::new(1.0 - t, 0.0)).add(&v.scale(C64::new(t, 0.0)))?;
            if !set.contains(&combination, slack) {
                return Ok(Some(ShapeViolation::Convex {
                    first: u,
                    second: v,
                    t,
                    combination,
                }));
            }
        }
        previous = Some(u);
    }
    Ok(None)
}
