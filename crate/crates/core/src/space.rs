//! Finite spaces (the compact Hausdorff `X`, `Y`) and symbols `φ: Y -> X`.
//!
//! Every finite discrete space is compact Hausdorff and every map between
//! finite discrete spaces is continuous, so a symbol is just a total table.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const METRIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FiniteSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    metric: Option<Vec<f64>>,
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.metric == other.metric
    }
}

/// First violated metric axiom.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum MetricViolation {
    Shape { expected: usize, got: usize },
    NonFinite { a: usize, b: usize },
    Negative { a: usize, b: usize },
    Symmetry { a: usize, b: usize },
    Indiscernibles { a: usize, b: usize },
    Triangle { a: usize, b: usize, c: usize },
}

/// Checks the metric axioms on an `n × n` row-major matrix, scanning pairs
/// then triples in index order.
pub fn validate_metric_matrix(n: usize, m: &[f64]) -> std::result::Result<(), MetricViolation> {
    if m.len() != n * n {
        return Err(MetricViolation::Shape {
            expected: n * n,
            got: m.len(),
        });
    }
    let d = |a: usize, b: usize| m[a * n + b];
    for a in 0..n {
        for b in 0..n {
            if !d(a, b).is_finite() {
                return Err(MetricViolation::NonFinite { a, b });
            }
            if d(a, b) < 0.0 {
                return Err(MetricViolation::Negative { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if (d(a, b) - d(b, a)).abs() > METRIC_TOL {
                return Err(MetricViolation::Symmetry { a, b });
            }
            let zero = d(a, b) <= METRIC_TOL;
            if zero != (a == b) {
                return Err(MetricViolation::Indiscernibles { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if d(a, c) > d(a, b) + d(b, c) + METRIC_TOL {
                    return Err(MetricViolation::Triangle { a, b, c });
                }
            }
        }
    }
    Ok(())
}

impl FiniteSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("space must be non-empty".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self {
            labels,
            index,
            metric: None,
        })
    }

    /// Attaches a row-major metric matrix, validating every axiom.
    pub fn with_metric(mut self, metric: Vec<f64>) -> Result<Self> {
        validate_metric_matrix(self.len(), &metric)
            .map_err(|v| Error::InvalidSpace(format!("metric violates {v:?}")))?;
        self.metric = Some(metric);
        Ok(self)
    }

    /// Points on the real line with `d(x, y) = |x - y|`, labelled by value.
    pub fn real_points(points: &[f64]) -> Result<Self> {
        let labels = points.iter().map(|p| format!("{p}"));
        let n = points.len();
        let mut metric = Vec::with_capacity(n * n);
        for a in points {
            for b in points {
                metric.push((a - b).abs());
            }
        }
        Self::new(labels)?.with_metric(metric)
    }

    /// Labels `prefix0, prefix1, ...`.
    pub fn numbered(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn metric(&self) -> Option<&[f64]> {
        self.metric.as_deref()
    }

    pub fn distance(&self, a: usize, b: usize) -> Option<f64> {
        self.metric.as_ref().map(|m| m[a * self.len() + b])
    }

    /// Re-checks the attached metric. `None` when no metric is present.
    pub fn validate_metric(&self) -> Option<std::result::Result<(), MetricViolation>> {
        self.metric.as_ref().map(|m| validate_metric_matrix(self.len(), m))
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<Vec<Vec<f64>>>,
}

impl Serialize for FiniteSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawSpace {
            labels: self.labels.clone(),
            metric: self
                .metric
                .as_ref()
                .map(|m| m.chunks(self.len()).map(<[f64]>::to_vec).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpace::deserialize(d)?;
        let space = Self::new(raw.labels).map_err(serde::de::Error::custom)?;
        match raw.metric {
            None => Ok(space),
            Some(rows) => space
                .with_metric(rows.into_iter().flatten().collect())
                .map_err(serde::de::Error::custom),
        }
    }
}

/// A map `φ: Y -> X` stored as a table indexed by `Y` points.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    source: Arc<FiniteSpace>,
    target: Arc<FiniteSpace>,
    table: Vec<usize>,
}

impl Symbol {
    /// `source` is `Y`, `target` is `X`; `table[y]` is the index of `φ(y)`.
    pub fn new(source: Arc<FiniteSpace>, target: Arc<FiniteSpace>, table: Vec<usize>) -> Result<Self> {
        if table.len() != source.len() {
            return Err(Error::InvalidSymbol(format!(
                "table has {} entries for {} source points",
                table.len(),
                source.len()
            )));
        }
        if let Some(&x) = table.iter().find(|&&x| x >= target.len()) {
            return Err(Error::InvalidSymbol(format!("target index {x} out of range")));
        }
        Ok(Self { source, target, table })
    }

    pub fn from_labels(source: Arc<FiniteSpace>, target: Arc<FiniteSpace>, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut table = vec![None; source.len()];
        for (y, x) in pairs {
            let yi = source.index_of(y)?;
            if table[yi].replace(target.index_of(x)?).is_some() {
                return Err(Error::InvalidSymbol(format!("`{y}` mapped twice")));
            }
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| Error::InvalidSymbol(format!("`{}` has no image", source.label(i)))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, table)
    }

    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let table = (0..space.len()).collect();
        Self {
            source: space.clone(),
            target: space,
            table,
        }
    }

    pub fn source(&self) -> &Arc<FiniteSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteSpace> {
        &self.target
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn image_of(&self, y: usize) -> usize {
        self.table[y]
    }

    /// True iff every point of `X` is hit.
    pub fn is_surjective(&self) -> bool {
        self.first_missed().is_none()
    }

    /// First `X` point (label order) outside the image.
    pub fn first_missed(&self) -> Option<usize> {
        let mut hit = vec![false; self.target.len()];
        for &x in &self.table {
            hit[x] = true;
        }
        hit.iter().position(|h| !h)
    }

    /// `Ok(())` when one-to-one, otherwise the first colliding pair `(y1, y2)`
    /// with `y1 < y2` in label order.
    pub fn check_injective(&self) -> std::result::Result<(), (usize, usize)> {
        let mut seen: Vec<Option<usize>> = vec![None; self.target.len()];
        for (y, &x) in self.table.iter().enumerate() {
            if let Some(prev) = seen[x] {
                return Err((prev, y));
            }
            seen[x] = Some(y);
        }
        Ok(())
    }

    pub fn is_injective(&self) -> bool {
        self.check_injective().is_ok()
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        struct Table<'a>(&'a Symbol);
        impl Serialize for Table<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.table.len()))?;
                for (y, &x) in self.0.table.iter().enumerate() {
                    m.serialize_entry(self.0.source.label(y), self.0.target.label(x))?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(1))?;
        m.serialize_entry("table", &Table(self))?;
        m.end()
    }
}

/// Wire form of a symbol, resolved against concrete spaces.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SymbolSpec {
    pub table: std::collections::BTreeMap<String, String>,
}

impl SymbolSpec {
    pub fn resolve(&self, source: Arc<FiniteSpace>, target: Arc<FiniteSpace>) -> Result<Symbol> {
        let pairs: Vec<(&str, &str)> = self.table.iter().map(|(y, x)| (y.as_str(), x.as_str())).collect();
        Symbol::from_labels(source, target, &pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(labels: &[&str]) -> Arc<FiniteSpace> {
        Arc::new(FiniteSpace::new(labels.iter().copied()).unwrap())
    }

    #[test]
    fn space_invariants() {
        assert!(FiniteSpace::new(Vec::<String>::new()).is_err());
        assert!(FiniteSpace::new(["a", "a"]).is_err());
        let s = FiniteSpace::new(["a", "b"]).unwrap();
        assert_eq!(s.index_of("b").unwrap(), 1);
        assert!(matches!(s.index_of("z"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn surjectivity_examples() {
        let x = sp(&["a", "b"]);
        let phi = Symbol::from_labels(sp(&["p", "q"]), x.clone(), &[("p", "a"), ("q", "b")]).unwrap();
        assert!(phi.is_surjective());
        let phi = Symbol::from_labels(sp(&["p"]), x, &[("p", "a")]).unwrap();
        assert!(!phi.is_surjective());
        assert_eq!(phi.first_missed(), Some(1));
        let phi = Symbol::new(sp(&["p", "q", "r"]), sp(&["a"]), vec![0, 0, 0]).unwrap();
        assert!(phi.is_surjective());
    }

    #[test]
    fn injectivity_examples() {
        let x = sp(&["a", "b"]);
        let y = sp(&["p", "q"]);
        assert!(Symbol::from_labels(y.clone(), x.clone(), &[("p", "a"), ("q", "b")])
            .unwrap()
            .is_injective());
        let phi = Symbol::from_labels(y, x.clone(), &[("p", "a"), ("q", "a")]).unwrap();
        assert_eq!(phi.check_injective(), Err((0, 1)));
        let single = Symbol::new(sp(&["p"]), x, vec![1]).unwrap();
        assert!(single.is_injective());
    }

    #[test]
    fn symbol_validation() {
        let x = sp(&["a"]);
        let y = sp(&["p", "q"]);
        assert!(Symbol::new(y.clone(), x.clone(), vec![0]).is_err());
        assert!(Symbol::new(y.clone(), x.clone(), vec![0, 1]).is_err());
        assert!(Symbol::from_labels(y.clone(), x.clone(), &[("p", "a")]).is_err());
        assert!(Symbol::from_labels(y, x, &[("p", "zz"), ("q", "a")]).is_err());
    }

    #[test]
    fn metric_examples() {
        let s = FiniteSpace::real_points(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(s.validate_metric(), Some(Ok(())));
        let asym = vec![0.0, 1.0, 2.0, 0.0];
        assert_eq!(
            validate_metric_matrix(2, &asym),
            Err(MetricViolation::Symmetry { a: 0, b: 1 })
        );
        // d(a,c) = 3 > d(a,b) + d(b,c) = 2
        let tri = vec![0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0];
        assert_eq!(
            validate_metric_matrix(3, &tri),
            Err(MetricViolation::Triangle { a: 0, b: 1, c: 2 })
        );
        assert!(FiniteSpace::new(["a", "b"]).unwrap().with_metric(asym).is_err());
        let zero_off = vec![0.0, 0.0, 0.0, 0.0];
        assert_eq!(
            validate_metric_matrix(2, &zero_off),
            Err(MetricViolation::Indiscernibles { a: 0, b: 1 })
        );
    }

    /// Every triangle violation reported by the scan is real, and a matrix
    /// passes iff an independent enumeration finds no violated triple.
    #[test]
    fn triangle_scan_matches_enumeration() {
        let candidates = [
            vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0],
            vec![0.0, 1.0, 2.5, 1.0, 0.0, 1.0, 2.5, 1.0, 0.0],
            vec![0.0, 4.0, 1.0, 4.0, 0.0, 1.0, 1.0, 1.0, 0.0],
        ];
        for m in &candidates {
            let brute = (0..27).any(|k| {
                let (a, b, c) = (k / 9, (k / 3) % 3, k % 3);
                m[a * 3 + c] > m[a * 3 + b] + m[b * 3 + c] + METRIC_TOL
            });
            let scan = validate_metric_matrix(3, m);
            assert_eq!(brute, matches!(scan, Err(MetricViolation::Triangle { .. })));
        }
    }

    #[test]
    fn space_json_round_trip() {
        let s = FiniteSpace::real_points(&[0.0, 1.0]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"labels":["0","1"],"metric":[[0.0,1.0],[1.0,0.0]]}"#);
        let back: FiniteSpace = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        let bad: std::result::Result<FiniteSpace, _> = serde_json::from_str(r#"{"labels":[]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn symbol_json() {
        let phi = Symbol::from_labels(sp(&["p", "q"]), sp(&["a", "b"]), &[("p", "b"), ("q", "a")]).unwrap();
        assert_eq!(serde_json::to_string(&phi).unwrap(), r#"{"table":{"p":"b","q":"a"}}"#);
        let spec: SymbolSpec = serde_json::from_str(r#"{"table":{"q":"a","p":"b"}}"#).unwrap();
        assert_eq!(spec.resolve(phi.source().clone(), phi.target().clone()).unwrap(), phi);
    }
}
