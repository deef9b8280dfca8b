use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::funcspace::{ScalarFunction, VectorFunction};
use crate::lcs::ComplexVector;
use crate::par::{map_ordered, Execution};
use crate::sample::{self, SampleFamily};
use crate::space::Symbol;
use crate::DEFAULT_TOL;

use super::cache::CachedMap;
use super::checks::{
    check_point_functionals, check_range_preservation, check_tensor_additivity, check_u_independence, extract_symbol,
    scalar_actions, verify_composition,
};
use super::corollary::{corollary_diagnostics, CorollaryRecord};
use super::map::{normalize, MapUnderTest};
use super::witness::{Law, Witness, WitnessKind};

/// Seeds, tolerance and sample budgets. Reports echo everything here except
/// the execution mode, which never changes the outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub seed: u64,
    pub tol: f64,
    /// Range-preservation pairs.
    pub pairs: usize,
    /// Random scalar functions added to the indicator/constant probes.
    pub scalar_samples: usize,
    pub representation_samples: usize,
    pub additivity_samples: usize,
    pub corollary_pairs: usize,
    pub family: SampleFamily,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: DEFAULT_TOL,
            pairs: 256,
            scalar_samples: 8,
            representation_samples: 64,
            additivity_samples: 16,
            corollary_pairs: 64,
            family: SampleFamily::Mixed,
            execution: Execution::default(),
        }
    }
}

impl AnalysisConfig {
    fn rng(&self, stage: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stage))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CompositionConsistent,
    Violated,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub range_distance: f64,
    pub expansion: f64,
    pub colinearity: f64,
    pub linearity: f64,
    pub multiplicativity: f64,
    pub unit: f64,
    pub u_independence: f64,
    pub additivity: f64,
    pub representation: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        [
            self.range_distance,
            self.expansion,
            self.colinearity,
            self.linearity,
            self.multiplicativity,
            self.unit,
            self.u_independence,
            self.additivity,
            self.representation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub verdict: Verdict,
    pub offset: Option<VectorFunction>,
    pub symbol: Option<Symbol>,
    /// Nearest symbol when extraction was ambiguous; the representation
    /// residual is measured against it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_fit_symbol: Option<Symbol>,
    pub probe_u: ComplexVector,
    pub residuals: Residuals,
    /// Per-seminorm expansion `|TF - TG|_p - |F - G|_p` over pairs that
    /// passed the range check.
    pub expansion_on_passing: Vec<f64>,
    pub witnesses: Vec<Witness>,
    pub corollary: Option<CorollaryRecord>,
    pub evaluations: usize,
    pub config: AnalysisConfig,
}

impl AnalysisReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::CompositionConsistent
    }

    pub fn has_witness(&self, kind: WitnessKind) -> bool {
        self.witnesses.iter().any(|w| w.kind() == kind)
    }

    pub fn witness_kinds(&self) -> Vec<WitnessKind> {
        self.witnesses.iter().map(Witness::kind).collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// `e_1, 2e_1`, then `e_2..e_d` and `e_1 + e_2` when `d >= 2`. The list
/// contains linearly dependent and (for `d >= 2`) independent pairs.
pub fn default_probes(dim: usize) -> Vec<ComplexVector> {
    let e1 = ComplexVector::basis(dim, 0);
    let mut probes = vec![e1.clone(), e1.scale(C64::new(2.0, 0.0))];
    if dim >= 2 {
        probes.extend((1..dim).map(|k| ComplexVector::basis(dim, k)));
        probes.push(e1.add(&ComplexVector::basis(dim, 1)).expect("same dimension"));
    }
    probes
}

const LAMBDAS: [C64; 4] = [
    C64::new(0.0, 1.0),
    C64::new(2.0, 0.0),
    C64::new(-1.0, 0.0),
    C64::new(1.0, 1.0),
];

/// `(f_k, f_{k+1}, λ_k)` cyclically over the samples, plus `(1_x, 1_x, i)`
/// for every indicator.
fn functional_triples(fs: &[ScalarFunction], n_indicators: usize) -> Vec<(ScalarFunction, ScalarFunction, C64)> {
    let n = fs.len();
    let mut out: Vec<_> = (0..n)
        .map(|k| (fs[k].clone(), fs[(k + 1) % n].clone(), LAMBDAS[k % LAMBDAS.len()]))
        .collect();
    out.extend((0..n_indicators).map(|x| (fs[x].clone(), fs[x].clone(), LAMBDAS[0])));
    out
}

struct Stages<'a> {
    t: &'a MapUnderTest,
    cfg: &'a AnalysisConfig,
    report: &'a mut AnalysisReport,
}

impl Stages<'_> {
    fn run(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let mode = cfg.execution;
        let tol = cfg.tol;
        let x = self.t.domain().clone();
        let model = self.t.model().clone();

        let (offset, tn) = normalize(self.t)?;
        self.report.offset = Some(offset.clone());

        let pairs = sample::range_pairs(&mut cfg.rng(1), &x, &model, cfg.pairs, cfg.family);
        let range = check_range_preservation(self.t, &pairs, tol, mode)?;
        self.report.residuals.range_distance = range.max_distance;
        self.report.residuals.expansion = range.expansion();
        self.report.expansion_on_passing = range.expansion_on_passing.clone();
        self.report.witnesses.extend(range.witness);

        let probes = default_probes(model.dim());
        let fs = sample::scalar_samples(&mut cfg.rng(2), &x, cfg.scalar_samples, cfg.family);

        let mut colinearity_witness = None;
        for u in &probes {
            let actions = scalar_actions(&tn, u, &fs, mode)?;
            for (f, a) in fs.iter().zip(&actions) {
                self.report.residuals.colinearity = self.report.residuals.colinearity.max(a.residual);
                if colinearity_witness.is_none() {
                    if let Some(y) = a.residuals.iter().position(|r| *r > tol) {
                        colinearity_witness = Some(Witness::Colinearity {
                            u: u.clone(),
                            f: f.clone(),
                            y: self.t.codomain().label(y).to_string(),
                            coefficient: [a.g.at(y).re, a.g.at(y).im],
                            residual: a.residuals[y],
                        });
                    }
                }
            }
        }
        self.report.witnesses.extend(colinearity_witness);

        let extraction = extract_symbol(&tn, &probes[0], tol, mode)?;
        self.report.residuals.colinearity = self.report.residuals.colinearity.max(extraction.colinearity());
        self.report.witnesses.extend(extraction.ambiguities());
        let symbol = extraction.symbol();
        let phi = match &symbol {
            Some(s) => s.clone(),
            None => {
                let b = extraction.best_fit();
                self.report.best_fit_symbol = Some(b.clone());
                b
            }
        };
        self.report.symbol = symbol;

        let triples = functional_triples(&fs, x.len());
        let functionals = check_point_functionals(&tn, &probes[0], &triples, tol, mode)?;
        let mut functional_witness = None;
        for rep in &functionals {
            let r = &mut self.report.residuals;
            r.linearity = r.linearity.max(rep.linearity);
            r.multiplicativity = r.multiplicativity.max(rep.multiplicativity);
            r.unit = r.unit.max(rep.unit);
            if let (None, Some((law, k, residual))) = (&functional_witness, rep.first_violation) {
                let (f, g, lambda) = &triples[k];
                functional_witness = Some(Witness::PointFunctional {
                    u: probes[0].clone(),
                    y: rep.y.clone(),
                    law,
                    f: f.clone(),
                    g: if law == Law::Unit { f.clone() } else { g.clone() },
                    lambda: [lambda.re, lambda.im],
                    residual,
                });
            }
        }
        self.report.witnesses.extend(functional_witness);

        let uind = check_u_independence(&tn, &probes, &fs, tol, mode)?;
        self.report.residuals.u_independence = uind.residual;
        self.report.witnesses.extend(uind.witness);

        let zero = ComplexVector::zero(model.dim());
        let mut probe_pairs = vec![(probes[0].clone(), probes[1].clone())];
        if model.dim() >= 2 {
            let e2 = &probes[2];
            let sum = probes.last().expect("non-empty");
            probe_pairs.push((probes[0].clone(), e2.clone()));
            probe_pairs.push((probes[0].clone(), sum.clone()));
            probe_pairs.push((e2.clone(), sum.clone()));
        }
        probe_pairs.push((probes[0].clone(), zero));
        let mut rng = cfg.rng(3);
        let combos: Vec<_> = (0..cfg.additivity_samples.max(probe_pairs.len()))
            .map(|k| {
                let (u, v) = probe_pairs[k % probe_pairs.len()].clone();
                let f = fs[rng.gen_range(0..fs.len())].clone();
                let g = fs[rng.gen_range(0..fs.len())].clone();
                (f, u, g, v)
            })
            .collect();
        let additivity = map_ordered(&combos, mode, |(f, u, g, v)| check_tensor_additivity(&tn, f, u, g, v));
        let mut additivity_witness = None;
        for (res, (f, u, g, v)) in additivity.into_iter().zip(&combos) {
            let r = res?;
            self.report.residuals.additivity = self.report.residuals.additivity.max(r);
            if r > tol && additivity_witness.is_none() {
                additivity_witness = Some(Witness::Additivity {
                    f: f.clone(),
                    u: u.clone(),
                    g: g.clone(),
                    v: v.clone(),
                    residual: r,
                });
            }
        }
        self.report.witnesses.extend(additivity_witness);

        let samples =
            sample::representation_samples(&mut cfg.rng(4), &x, &model, cfg.representation_samples, cfg.family);
        let rep = verify_composition(self.t, &phi, &offset, &samples, tol, mode)?;
        self.report.residuals.representation = rep.residual;
        self.report.witnesses.extend(rep.witness);
        Ok(())
    }
}

fn record_failure(report: &mut AnalysisReport, cached: &CachedMap, err: crate::Error) {
    report.witnesses.push(Witness::Evaluation {
        input: cached.first_error().map(|(f, _)| f),
        message: err.to_string(),
    });
}

/// Runs every stage on `map` and aggregates a deterministic report. The
/// verdict is `composition-consistent` iff no witness was produced and every
/// residual is within `cfg.tol`; only then are the corollary diagnostics run.
pub fn classify(map: &MapUnderTest, cfg: &AnalysisConfig) -> AnalysisReport {
    let cached = CachedMap::new(map.clone());
    let t = cached.as_map();
    let mut report = AnalysisReport {
        verdict: Verdict::Violated,
        offset: None,
        symbol: None,
        best_fit_symbol: None,
        probe_u: ComplexVector::basis(map.model().dim(), 0),
        residuals: Residuals::default(),
        expansion_on_passing: vec![0.0; map.model().seminorms().len()],
        witnesses: Vec::new(),
        corollary: None,
        evaluations: 0,
        config: cfg.clone(),
    };
    let outcome = Stages {
        t: &t,
        cfg,
        report: &mut report,
    }
    .run();
    if let Err(e) = outcome {
        record_failure(&mut report, &cached, e);
    }
    report.witnesses.extend(cached.replay(cfg.execution));

    if report.witnesses.is_empty() && report.residuals.max() <= cfg.tol {
        let phi = report.symbol.clone().expect("no ambiguity witness implies a symbol");
        let offset = report.offset.clone().expect("offset computed");
        match corollary_diagnostics(&t, &phi, &offset, cfg) {
            Ok(rec) => {
                report.corollary = Some(rec);
                report.verdict = Verdict::CompositionConsistent;
            }
            Err(e) => record_failure(&mut report, &cached, e),
        }
    }
    report.evaluations = cached.len();
    report
}
