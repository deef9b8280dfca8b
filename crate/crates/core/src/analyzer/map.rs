use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcspace::{same_space, VectorFunction};
use crate::lcs::VectorSpaceModel;
use crate::space::FiniteSpace;

type Evaluator = dyn Fn(&VectorFunction) -> Result<VectorFunction> + Send + Sync;

/// A black-box map `C(X,E) -> C(Y,E)`. The evaluator must be pure and safe
/// to call from several threads.
#[derive(Clone)]
pub struct MapUnderTest {
    domain: Arc<FiniteSpace>,
    codomain: Arc<FiniteSpace>,
    model: Arc<VectorSpaceModel>,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for MapUnderTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapUnderTest")
            .field("domain", &self.domain.labels())
            .field("codomain", &self.codomain.labels())
            .field("dim", &self.model.dim())
            .finish()
    }
}

impl MapUnderTest {
    pub fn new<F>(
        domain: Arc<FiniteSpace>,
        codomain: Arc<FiniteSpace>,
        model: Arc<VectorSpaceModel>,
        evaluator: F,
    ) -> Self
    where
        F: Fn(&VectorFunction) -> Result<VectorFunction> + Send + Sync + 'static,
    {
        Self {
            domain,
            codomain,
            model,
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn domain(&self) -> &Arc<FiniteSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteSpace> {
        &self.codomain
    }

    pub fn model(&self) -> &Arc<VectorSpaceModel> {
        &self.model
    }

    /// Evaluates `T(F)`, checking that input and output live where they should.
    pub fn eval(&self, f: &VectorFunction) -> Result<VectorFunction> {
        if !same_space(f.space(), &self.domain) {
            return Err(Error::SpaceMismatch("input is not defined on the domain".into()));
        }
        if f.model().dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                got: f.model().dim(),
            });
        }
        let out = (self.evaluator)(f)?;
        if !same_space(out.space(), &self.codomain) {
            return Err(Error::Evaluator("output is not defined on the codomain".into()));
        }
        if out.model().dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                got: out.model().dim(),
            });
        }
        Ok(out)
    }

    pub fn zero_input(&self) -> VectorFunction {
        VectorFunction::zero(self.domain.clone(), self.model.clone())
    }
}

/// Splits `T` into its offset `T(0)` and the normalised map
/// `T'(F) = T(F) - T(0)`, which sends `0` to `0` exactly.
pub fn normalize(map: &MapUnderTest) -> Result<(VectorFunction, MapUnderTest)> {
    let offset = map.eval(&map.zero_input())?;
    let inner = map.clone();
    let off = offset.clone();
    let normalized = MapUnderTest::new(map.domain.clone(), map.codomain.clone(), map.model.clone(), move |f| {
        inner.eval(f)?.sub(&off)
    });
    Ok((offset, normalized))
}
