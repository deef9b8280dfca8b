//! Function tables on finite spaces: `C(X)`, `C(X,E)`, tensors `f⊗u`,
//! ranges and the uniform neighborhoods `V_X(B) = {F : Ran(F) ⊆ B}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lcs::{ComplexVector, Neighborhood, Seminorm, VectorSpaceModel};
use crate::space::{FiniteSpace, Symbol};

pub(crate) fn same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("{:?} vs {:?}", a.labels(), b.labels())))
    }
}

/// An element of `C(X)`.
#[derive(Clone, Debug)]
pub struct ScalarFunction {
    space: Arc<FiniteSpace>,
    values: Vec<C64>,
}

impl PartialEq for ScalarFunction {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.values == other.values
    }
}

impl ScalarFunction {
    pub fn new(space: Arc<FiniteSpace>, values: Vec<C64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidFunction(format!(
                "{} values for {} points",
                values.len(),
                space.len()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn from_fn(space: Arc<FiniteSpace>, f: impl FnMut(usize) -> C64) -> Self {
        let values = (0..space.len()).map(f).collect();
        Self { space, values }
    }

    pub fn constant(space: Arc<FiniteSpace>, c: C64) -> Self {
        Self::from_fn(space, |_| c)
    }

    /// `1_x`.
    pub fn indicator(space: Arc<FiniteSpace>, x: usize) -> Self {
        Self::from_fn(space, |i| C64::new(if i == x { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn real(space: Arc<FiniteSpace>, values: &[f64]) -> Result<Self> {
        Self::new(space, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, i: usize) -> C64 {
        self.values[i]
    }

    fn zip_with(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        check_same_space(&self.space, &other.space)?;
        Ok(Self {
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, lambda: C64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|&a| a * lambda).collect(),
        }
    }

    /// `f ∘ φ`.
    pub fn compose(&self, phi: &Symbol) -> Result<Self> {
        check_same_space(&self.space, phi.target())?;
        Ok(Self {
            space: phi.source().clone(),
            values: phi.table().iter().map(|&x| self.values[x]).collect(),
        })
    }

    /// `f ⊗ u`.
    pub fn tensor(&self, u: &ComplexVector, model: &Arc<VectorSpaceModel>) -> Result<VectorFunction> {
        model.check_vector(u)?;
        Ok(VectorFunction {
            space: self.space.clone(),
            model: model.clone(),
            values: self.values.iter().map(|&a| u.scale(a)).collect(),
        })
    }
}

impl Serialize for ScalarFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.values.len()))?;
        for (i, z) in self.values.iter().enumerate() {
            m.serialize_entry(self.space.label(i), &[z.re, z.im])?;
        }
        m.end()
    }
}

/// An element of `C(X,E)`.
#[derive(Clone, Debug)]
pub struct VectorFunction {
    space: Arc<FiniteSpace>,
    model: Arc<VectorSpaceModel>,
    values: Vec<ComplexVector>,
}

impl PartialEq for VectorFunction {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space)
            && (Arc::ptr_eq(&self.model, &other.model) || self.model == other.model)
            && self.values == other.values
    }
}

impl VectorFunction {
    pub fn new(space: Arc<FiniteSpace>, model: Arc<VectorSpaceModel>, values: Vec<ComplexVector>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidFunction(format!(
                "{} values for {} points",
                values.len(),
                space.len()
            )));
        }
        for v in &values {
            model.check_vector(v)?;
        }
        Ok(Self { space, model, values })
    }

    pub fn zero(space: Arc<FiniteSpace>, model: Arc<VectorSpaceModel>) -> Self {
        Self::constant(space, model.clone(), ComplexVector::zero(model.dim()))
    }

    pub fn constant(space: Arc<FiniteSpace>, model: Arc<VectorSpaceModel>, u: ComplexVector) -> Self {
        assert_eq!(u.dim(), model.dim(), "constant value has wrong dimension");
        let values = vec![u; space.len()];
        Self { space, model, values }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn model(&self) -> &Arc<VectorSpaceModel> {
        &self.model
    }

    pub fn values(&self) -> &[ComplexVector] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &ComplexVector {
        &self.values[i]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(ComplexVector::is_zero)
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        check_same_space(&self.space, &other.space)?;
        if self.model.dim() != other.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                got: other.model.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self {
            space: self.space.clone(),
            model: self.model.clone(),
            values,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(Self {
            space: self.space.clone(),
            model: self.model.clone(),
            values,
        })
    }

    pub fn scale(&self, lambda: C64) -> Self {
        Self {
            space: self.space.clone(),
            model: self.model.clone(),
            values: self.values.iter().map(|v| v.scale(lambda)).collect(),
        }
    }

    /// Replaces the value at point `i`.
    pub fn with_value(&self, i: usize, v: ComplexVector) -> Result<Self> {
        self.model.check_vector(&v)?;
        let mut out = self.clone();
        out.values[i] = v;
        Ok(out)
    }

    /// `Ran(F)` with values closer than `tol` merged onto their first
    /// occurrence in label order.
    pub fn range(&self, tol: f64) -> Result<RangeSet> {
        let mut reps: Vec<ComplexVector> = Vec::new();
        for v in &self.values {
            let mut fresh = true;
            for r in &reps {
                if self.model.distance(r, v)? <= tol {
                    fresh = false;
                    break;
                }
            }
            if fresh {
                reps.push(v.clone());
            }
        }
        Ok(RangeSet {
            model: self.model.clone(),
            representatives: reps,
            tol,
        })
    }

    /// `F ∈ V_X(B)`.
    pub fn in_v(&self, nbr: &Neighborhood) -> Result<bool> {
        for v in &self.values {
            if !nbr.contains(&self.model, v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `max_x p(F(x))`.
    pub fn uniform_seminorm(&self, p: &Seminorm) -> Result<f64> {
        self.values.iter().try_fold(0.0, |acc, v| Ok(f64::max(acc, p.eval(v)?)))
    }

    /// `max_x max_i p_i(F(x))`.
    pub fn uniform_max(&self) -> Result<f64> {
        self.values
            .iter()
            .try_fold(0.0, |acc, v| Ok(f64::max(acc, self.model.max_seminorm(v)?)))
    }

    /// `F ∘ φ`, a function on the source of `φ`.
    pub fn compose(&self, phi: &Symbol) -> Result<Self> {
        check_same_space(&self.space, phi.target())?;
        Ok(Self {
            space: phi.source().clone(),
            model: self.model.clone(),
            values: phi.table().iter().map(|&x| self.values[x].clone()).collect(),
        })
    }

    /// Decodes `{"values": {label: vector}}` against a space and model.
    pub fn from_json(space: Arc<FiniteSpace>, model: Arc<VectorSpaceModel>, value: &serde_json::Value) -> Result<Self> {
        let wire: FunctionValues = serde_json::from_value(value.clone())?;
        wire.resolve(space, model)
    }
}

impl Serialize for VectorFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Values<'a>(&'a VectorFunction);
        impl Serialize for Values<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.values.len()))?;
                for (i, v) in self.0.values.iter().enumerate() {
                    m.serialize_entry(self.0.space.label(i), v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(1))?;
        m.serialize_entry("values", &Values(self))?;
        m.end()
    }
}

/// Wire form `{"values": {label: [[re, im], ...]}}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct FunctionValues {
    pub values: BTreeMap<String, ComplexVector>,
}

impl From<&VectorFunction> for FunctionValues {
    fn from(f: &VectorFunction) -> Self {
        Self {
            values: f.space.labels().iter().cloned().zip(f.values.iter().cloned()).collect(),
        }
    }
}

impl FunctionValues {
    pub fn resolve(&self, space: Arc<FiniteSpace>, model: Arc<VectorSpaceModel>) -> Result<VectorFunction> {
        let mut slots: Vec<Option<ComplexVector>> = vec![None; space.len()];
        for (label, v) in &self.values {
            slots[space.index_of(label)?] = Some(v.clone());
        }
        let values = slots
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::InvalidFunction(format!("no value at `{}`", space.label(i)))))
            .collect::<Result<Vec<_>>>()?;
        VectorFunction::new(space, model, values)
    }
}

/// Wire form of a scalar function: `{label: [re, im]}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(transparent)]
pub struct ScalarValues(pub BTreeMap<String, [f64; 2]>);

impl ScalarValues {
    pub fn resolve(&self, space: Arc<FiniteSpace>) -> Result<ScalarFunction> {
        let mut slots: Vec<Option<C64>> = vec![None; space.len()];
        for (label, [re, im]) in &self.0 {
            slots[space.index_of(label)?] = Some(C64::new(*re, *im));
        }
        let values = slots
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::InvalidFunction(format!("no value at `{}`", space.label(i)))))
            .collect::<Result<Vec<_>>>()?;
        ScalarFunction::new(space, values)
    }
}

/// `Σ_j f_j ⊗ u_j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorSum {
    terms: Vec<TensorTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorTerm {
    pub f: ScalarFunction,
    pub u: ComplexVector,
}

impl TensorSum {
    pub fn new(terms: Vec<(ScalarFunction, ComplexVector)>) -> Result<Self> {
        if let Some((first, rest)) = terms.split_first() {
            for (f, u) in rest {
                check_same_space(first.0.space(), f.space())?;
                if u.dim() != first.1.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: first.1.dim(),
                        got: u.dim(),
                    });
                }
            }
        }
        Ok(Self {
            terms: terms.into_iter().map(|(f, u)| TensorTerm { f, u }).collect(),
        })
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Concatenation of the two term lists.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|t| (t.f.clone(), t.u.clone()))
            .collect();
        Self::new(terms)
    }

    /// Pointwise `Σ_j f_j(x) u_j`.
    pub fn eval(&self, model: &Arc<VectorSpaceModel>) -> Result<VectorFunction> {
        let first = self
            .terms
            .first()
            .ok_or_else(|| Error::InvalidFunction("empty tensor sum has no space".into()))?;
        let space = first.f.space().clone();
        let mut acc = VectorFunction::zero(space, model.clone());
        for t in &self.terms {
            acc = acc.add(&t.f.tensor(&t.u, model)?)?;
        }
        Ok(acc)
    }
}

/// Deduplicated value set of a function.
#[derive(Clone, Debug)]
pub struct RangeSet {
    model: Arc<VectorSpaceModel>,
    representatives: Vec<ComplexVector>,
    tol: f64,
}

impl RangeSet {
    pub fn representatives(&self) -> &[ComplexVector] {
        &self.representatives
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// `(member, nearest)` where `nearest` is the smallest max-seminorm
    /// distance from `v` to a representative and `member` is `nearest <= tol`.
    pub fn contains(&self, v: &ComplexVector, tol: f64) -> Result<(bool, f64)> {
        let mut nearest = f64::INFINITY;
        for r in &self.representatives {
            nearest = nearest.min(self.model.distance(r, v)?);
        }
        Ok((nearest <= tol, nearest))
    }
}
