//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rangepres_core::analyzer::{
    check_range_preservation, classify, extract_symbol, normalize, AnalysisConfig, MapUnderTest, Verdict,
};
use rangepres_core::approx::{tensor_approximate, Strategy};
use rangepres_core::funcspace::{FunctionValues, VectorFunction};
use rangepres_core::harness::{
    composition_spec, generate_spec, oracle_extract, spec_symbol, CatalogKind, InstanceSpec, MapSpec, PERTURBATION,
    SCHEMA_VERSION,
};
use rangepres_core::ksfunc::{analyze_functional, functional_catalog, FunctionalSpec, KsWitness};
use rangepres_core::lcs::{ComplexVector, Neighborhood, Seminorm, VectorSpaceModel};
use rangepres_core::par::Execution;
use rangepres_core::sample::{self, SampleFamily};
use rangepres_core::space::{FiniteSpace, SymbolSpec};

const TAU: f64 = 1e-9;
const SEEDS: u64 = 50;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cfg_for(spec: &InstanceSpec) -> AnalysisConfig {
    AnalysisConfig {
        seed: spec.seed,
        tol: spec.tol,
        family: spec.family,
        ..AnalysisConfig::default()
    }
}

/// 100 random compositions at τ = 0 with integer data: symbol and offset
/// recovered exactly, under 10 s in total.
fn round_trip_extraction() -> Outcome {
    let start = Instant::now();
    for seed in 0..100 {
        let mut spec = composition_spec(seed);
        spec.tol = 0.0;
        spec.family = SampleFamily::Integer;
        let inst = spec.instantiate().map_err(|e| e.to_string())?;
        let report = classify(&inst.map, &cfg_for(&spec));
        ensure(report.verdict == Verdict::CompositionConsistent, || {
            format!("seed {seed}: {:?} {:?}", report.verdict, report.witness_kinds())
        })?;
        let expected_table = spec_symbol(&spec).expect("composition");
        let got = report.symbol.as_ref().expect("consistent report has a symbol");
        let got_table: BTreeMap<String, String> = (0..inst.y.len())
            .map(|y| (inst.y.label(y).to_string(), inst.x.label(got.image_of(y)).to_string()))
            .collect();
        ensure(&got_table == expected_table, || {
            format!("seed {seed}: symbol {got_table:?} vs {expected_table:?}")
        })?;
        let MapSpec::Composition { offset: Some(off), .. } = &spec.map else {
            unreachable!("catalog compositions carry an offset")
        };
        let expected_offset = off
            .resolve(inst.y.clone(), inst.model.clone())
            .map_err(|e| e.to_string())?;
        ensure(report.offset.as_ref() == Some(&expected_offset), || {
            format!("seed {seed}: offset differs")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "100 instances exact at tol 0 in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

/// Every catalog kind over 50 seeds: compositions accepted, adversaries
/// rejected with their expected witness kind.
fn catalog_soundness() -> Outcome {
    let (mut accepts, mut rejects) = (0, 0);
    for kind in CatalogKind::ALL {
        for seed in 0..SEEDS {
            let spec = generate_spec(kind, seed);
            let inst = spec.instantiate().map_err(|e| e.to_string())?;
            let report = classify(&inst.map, &cfg_for(&spec));
            match kind.expected_witness() {
                None => {
                    ensure(report.is_consistent(), || {
                        format!("false reject: {kind} seed {seed} {:?}", report.witness_kinds())
                    })?;
                    accepts += 1;
                }
                Some(w) => {
                    ensure(!report.is_consistent(), || format!("false accept: {kind} seed {seed}"))?;
                    ensure(report.has_witness(w), || {
                        format!("{kind} seed {seed}: expected {w:?}, got {:?}", report.witness_kinds())
                    })?;
                    if kind == CatalogKind::Perturbed {
                        let r = report.residuals.representation;
                        ensure(r >= PERTURBATION - spec.tol, || {
                            format!("perturbed seed {seed}: representation {r}")
                        })?;
                    }
                    rejects += 1;
                }
            }
        }
    }
    Ok(format!(
        "{accepts} compositions accepted, {rejects} adversaries rejected with the expected witness"
    ))
}

fn check_oracle(map: &MapUnderTest, seed: u64, tol: f64, label: &str) -> Result<bool, String> {
    let u = ComplexVector::basis(map.model().dim(), 0);
    let oracle = oracle_extract(map, &u, seed).map_err(|e| format!("{label}: {e}"))?;
    let (_, tn) = normalize(map).map_err(|e| e.to_string())?;
    let ext = extract_symbol(&tn, &u, tol, Execution::Parallel).map_err(|e| e.to_string())?;
    let diff = oracle.disagreements(&ext, tol);
    ensure(diff.is_empty(), || format!("{label}: disagreement at {diff:?}"))?;
    Ok(oracle.rows.iter().any(|r| r.candidates.len() > 1))
}

/// Analyzer extraction agrees with the exhaustive oracle on every catalog
/// instance, on equal-weight (tied) averages, and on larger compositions up
/// to the guard.
fn oracle_equivalence() -> Outcome {
    let mut count = 0;
    let mut tied = 0;
    for kind in CatalogKind::ALL {
        for seed in 0..SEEDS {
            let spec = generate_spec(kind, seed);
            let inst = spec.instantiate().map_err(|e| e.to_string())?;
            tied += usize::from(check_oracle(&inst.map, seed, spec.tol, &format!("{kind} seed {seed}"))?);
            count += 1;
        }
    }
    for n in 2..=4 {
        let x = Arc::new(FiniteSpace::numbered("x", n).unwrap());
        let y = Arc::new(FiniteSpace::numbered("y", 2).unwrap());
        let model = Arc::new(VectorSpaceModel::standard(1));
        let weights = x.labels().iter().map(|l| (l.clone(), 1.0 / n as f64)).collect();
        let map = rangepres_core::harness::generate(&MapSpec::Averaging { weights }, &x, &y, &model).unwrap();
        let has_tie = check_oracle(&map, n as u64, TAU, "equal averaging")?;
        // Random probes separate the candidates once there are three or more.
        ensure(n > 2 || has_tie, || "no tie for two points".to_string())?;
        tied += usize::from(has_tie);
        count += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for (nx, ny) in [(8, 8), (16, 4), (4, 16), (64, 1), (1, 64)] {
        let x = Arc::new(FiniteSpace::numbered("x", nx).unwrap());
        let y = Arc::new(FiniteSpace::numbered("y", ny).unwrap());
        let model = Arc::new(VectorSpaceModel::standard(2));
        let table = SymbolSpec {
            table: (0..ny)
                .map(|j| (y.label(j).to_string(), x.label(rng.gen_range(0..nx)).to_string()))
                .collect(),
        };
        let map = rangepres_core::harness::generate(
            &MapSpec::Composition {
                symbol: table,
                offset: None,
            },
            &x,
            &y,
            &model,
        )
        .unwrap();
        check_oracle(&map, 5, 0.0, &format!("composition {nx}x{ny}"))?;
        count += 1;
    }
    Ok(format!("{count} instances agree, {tied} with tied candidates"))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (VectorFunction, bool) {
    let n = rng.gen_range(1..=6);
    let dim = rng.gen_range(1..=2);
    let with_metric = rng.gen_bool(0.5);
    let space = if with_metric {
        let points: Vec<f64> = (0..n).map(|i| i as f64 + rng.gen_range(0.0..0.5)).collect();
        FiniteSpace::real_points(&points).unwrap()
    } else {
        FiniteSpace::numbered("x", n).unwrap()
    };
    let model = if dim == 2 && rng.gen_bool(0.5) {
        VectorSpaceModel::new(2, vec![Seminorm::coordinate(2, 0), Seminorm::coordinate(2, 1)]).unwrap()
    } else {
        VectorSpaceModel::standard(dim)
    };
    let f = sample::random_function(rng, &Arc::new(space), &Arc::new(model), false);
    (f, with_metric)
}

/// `F - G` measured directly: every point of the difference must satisfy
/// every bound of `B`.
fn in_v_directly(f: &VectorFunction, g: &VectorFunction, nbr: &Neighborhood) -> bool {
    let model = f.model();
    (0..f.space().len()).all(|x| {
        let d = f.at(x).sub(g.at(x)).unwrap();
        nbr.bounds()
            .iter()
            .all(|b| model.seminorms()[b.seminorm].eval(&d).unwrap() <= b.radius)
    })
}

/// 100 random `(F, B)` over a sweep of radii: certificate true and
/// independently confirmed; exact reproduction when `B` forces singletons.
fn tensor_certificate() -> Outcome {
    const RADII: [f64; 9] = [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 100.0];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0;
    for i in 0..100 {
        let (f, with_metric) = random_instance(&mut rng);
        let model = f.model().clone();
        let min_gap = (0..f.space().len())
            .flat_map(|a| (0..a).map(move |b| (a, b)))
            .map(|(a, b)| model.max_seminorm(&f.at(a).sub(f.at(b)).unwrap()).unwrap())
            .fold(f64::INFINITY, f64::min);
        let mut radii = RADII.to_vec();
        if min_gap.is_finite() {
            radii.push(min_gap / 2.0);
        }
        for &r in &radii {
            let nbr = Neighborhood::uniform(&model, r).unwrap();
            let strategies: &[Strategy] = if with_metric {
                &[Strategy::Assignment, Strategy::Hat]
            } else {
                &[Strategy::Assignment]
            };
            for &strategy in strategies {
                let (sum, cert) = tensor_approximate(&f, &nbr, strategy).map_err(|e| format!("instance {i}: {e}"))?;
                let g = sum.eval(&model).map_err(|e| e.to_string())?;
                ensure(cert.in_v && in_v_directly(&f, &g, &nbr), || {
                    format!("instance {i} radius {r} {strategy:?}: not in V")
                })?;
                if r < min_gap && strategy == Strategy::Assignment {
                    ensure(cert.cover_centers.len() == f.space().len(), || {
                        format!("instance {i}: cover not singleton")
                    })?;
                    ensure(cert.errors_per_seminorm.iter().all(|e| *e == 0.0) && g == f, || {
                        format!("instance {i}: singleton cover did not reproduce F")
                    })?;
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} certificates confirmed over 100 instances"))
}

/// Every symbol between spaces of size at most 3: injectivity and
/// surjectivity of the operator track surjectivity and injectivity of the
/// symbol, with both witnesses verified exactly.
fn corollary_equivalences() -> Outcome {
    let mut instances = 0;
    for nx in 1..=3usize {
        for ny in 1..=3usize {
            let x = FiniteSpace::numbered("x", nx).unwrap();
            let y = FiniteSpace::numbered("y", ny).unwrap();
            for code in 0..nx.pow(ny as u32) {
                let table: Vec<usize> = (0..ny).map(|j| (code / nx.pow(j as u32)) % nx).collect();
                let dim = 1 + (code + nx + ny) % 2;
                let offset = FunctionValues {
                    values: y
                        .labels()
                        .iter()
                        .enumerate()
                        .map(|(j, l)| (l.clone(), ComplexVector::real(&vec![j as f64 - 1.0; dim]).unwrap()))
                        .collect(),
                };
                let spec = InstanceSpec {
                    schema: SCHEMA_VERSION,
                    x: x.clone(),
                    y: y.clone(),
                    model: VectorSpaceModel::standard(dim),
                    map: MapSpec::Composition {
                        symbol: SymbolSpec {
                            table: table
                                .iter()
                                .enumerate()
                                .map(|(j, &i)| (y.label(j).to_string(), x.label(i).to_string()))
                                .collect(),
                        },
                        offset: Some(offset),
                    },
                    seed: code as u64,
                    tol: 0.0,
                    family: SampleFamily::Integer,
                };
                let label = format!("|X|={nx} |Y|={ny} table {table:?}");
                let inst = spec.instantiate().map_err(|e| e.to_string())?;
                let report = classify(&inst.map, &cfg_for(&spec));
                let cor = report
                    .corollary
                    .as_ref()
                    .ok_or_else(|| format!("{label}: no diagnostics"))?;
                let surjective = (0..nx).all(|i| table.contains(&i));
                let injective = (0..ny).all(|a| (0..a).all(|b| table[a] != table[b]));
                ensure(
                    cor.t_injective == surjective && cor.range_equality == surjective,
                    || format!("{label}: injectivity flag"),
                )?;
                ensure(cor.t_surjective == injective, || format!("{label}: surjectivity flag"))?;
                ensure(
                    cor.injectivity_witness
                        .as_ref()
                        .map_or(surjective, |w| !surjective && w.verified),
                    || format!("{label}: separating witness"),
                )?;
                ensure(
                    cor.preimage
                        .as_ref()
                        .map_or(!injective, |p| injective && p.verified && p.residual == 0.0),
                    || format!("{label}: preimage"),
                )?;
                ensure(
                    cor.surjectivity_witness
                        .as_ref()
                        .map_or(injective, |w| !injective && w.verified),
                    || format!("{label}: unattainable target"),
                )?;
                let spot = &cor.range_equality_spot;
                ensure(spot.pairs == 64 && (spot.failures == 0) == surjective, || {
                    format!("{label}: range spot check {spot:?}")
                })?;
                instances += 1;
            }
        }
    }
    Ok(format!("{instances} symbols checked exhaustively"))
}

/// For every catalog map that passes the range check, every seminorm and
/// every pair: `|TF - TG|_p <= |F - G|_p + 1e-9`; some adversary breaks it.
fn non_expansiveness() -> Outcome {
    let mut passing_maps = 0;
    let mut checked_pairs = 0;
    let mut breaker = None;
    for kind in CatalogKind::ALL {
        for seed in 0..SEEDS {
            let spec = generate_spec(kind, seed);
            let inst = spec.instantiate().map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs = sample::range_pairs(&mut rng, &inst.x, &inst.model, 256, SampleFamily::Mixed);
            let range =
                check_range_preservation(&inst.map, &pairs, TAU, Execution::Parallel).map_err(|e| e.to_string())?;
            for (f, g) in &pairs {
                let out = inst.map.eval(f).unwrap().sub(&inst.map.eval(g).unwrap()).unwrap();
                let input = f.sub(g).unwrap();
                for p in inst.model.seminorms() {
                    let excess = out.uniform_seminorm(p).unwrap() - input.uniform_seminorm(p).unwrap();
                    if range.witness.is_none() {
                        ensure(excess <= TAU, || format!("{kind} seed {seed}: expansion {excess}"))?;
                    } else if excess > TAU && breaker.is_none() {
                        breaker = Some(format!("{kind} seed {seed}"));
                    }
                }
            }
            if range.witness.is_none() {
                passing_maps += 1;
                checked_pairs += pairs.len();
                ensure(range.expansion_on_passing.iter().all(|e| *e <= TAU), || {
                    format!(
                        "{kind} seed {seed}: reported expansion {:?}",
                        range.expansion_on_passing
                    )
                })?;
            }
        }
    }
    let breaker = breaker.ok_or("no adversary violates the bound")?;
    Ok(format!(
        "{passing_maps} range-preserving maps, {checked_pairs} pairs within bound; violated by {breaker}"
    ))
}

/// Point evaluations pass both checks with zero residuals, averaging and
/// conjugation fail the hypothesis, and across the functional catalog on
/// up to 3 points the hypothesis holds exactly when the conclusion does.
fn scalar_functionals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0;
    for n in 1..=3 {
        let x = Arc::new(FiniteSpace::numbered("x", n).unwrap());
        for at in x.labels() {
            let d = FunctionalSpec::Evaluation { at: at.clone() }.build(&x).unwrap();
            let rep = analyze_functional(&d, &mut rng, 0, 0.0, Execution::Parallel).unwrap();
            ensure(rep.hypothesis.passed() && rep.hypothesis.max_distance == 0.0, || {
                format!("evaluation at {at}")
            })?;
            ensure(
                rep.conclusion.max_residual() == 0.0
                    && rep.conclusion.representing_point.as_deref() == Some(at.as_str()),
                || format!("evaluation at {at}: conclusion"),
            )?;
        }
        if n >= 2 {
            let weights = x.labels().iter().map(|l| (l.clone(), 1.0 / n as f64)).collect();
            let avg = FunctionalSpec::Averaging { weights }.build(&x).unwrap();
            let conj = FunctionalSpec::Conjugate { at: x.label(0).into() }.build(&x).unwrap();
            for (name, d) in [("averaging", avg), ("conjugate", conj)] {
                let rep = analyze_functional(&d, &mut rng, 0, 0.0, Execution::Parallel).unwrap();
                ensure(
                    matches!(rep.hypothesis.witness, Some(KsWitness::Spectrum { .. })),
                    || format!("{name} on {n} points: no hypothesis witness"),
                )?;
            }
        }
        for spec in functional_catalog(&x) {
            let d = spec.build(&x).unwrap();
            let rep = analyze_functional(&d, &mut rng, 0, 0.0, Execution::Parallel).unwrap();
            ensure(rep.hypothesis.passed() == rep.consistent(0.0), || {
                format!("{spec:?} on {n} points")
            })?;
            total += 1;
        }
    }
    Ok(format!(
        "{total} catalog functionals: hypothesis holds iff conclusion holds"
    ))
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_rangepres"))
}

/// `verify` twice on the same spec and seed, in parallel and sequential
/// mode: byte-identical reports.
fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("rangepres-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut runs = 0;
    for kind in CatalogKind::ALL {
        for seed in [1u64, 17] {
            let spec_path = dir.join(format!("{kind}-{seed}.json"));
            std::fs::write(&spec_path, generate_spec(kind, seed).to_json_pretty()).map_err(|e| e.to_string())?;
            let mut reports = Vec::new();
            for (i, extra) in [None, None, Some("--sequential")].into_iter().enumerate() {
                let report = dir.join(format!("{kind}-{seed}-{i}.report.json"));
                let mut cmd = Command::new(bin());
                cmd.arg("verify")
                    .arg("--instance")
                    .arg(&spec_path)
                    .arg("--report")
                    .arg(&report);
                cmd.args(extra);
                let status = cmd.status().map_err(|e| e.to_string())?;
                let expected = if kind.expected_witness().is_none() { 0 } else { 1 };
                ensure(status.code() == Some(expected), || {
                    format!("{kind} seed {seed}: exit {status}")
                })?;
                reports.push(std::fs::read(&report).map_err(|e| e.to_string())?);
                runs += 1;
            }
            ensure(reports.windows(2).all(|w| w[0] == w[1]), || {
                format!("{kind} seed {seed}: reports differ")
            })?;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{runs} runs, reports byte-identical across repeats and execution modes"
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("round-trip extraction", round_trip_extraction),
        ("catalog soundness", catalog_soundness),
        ("oracle equivalence", oracle_equivalence),
        ("tensor approximation certificate", tensor_certificate),
        ("injectivity/surjectivity equivalences", corollary_equivalences),
        ("non-expansiveness", non_expansiveness),
        ("scalar functional hypothesis and conclusion", scalar_functionals),
        ("deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail}; {secs:.2} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({detail}; {secs:.2} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
