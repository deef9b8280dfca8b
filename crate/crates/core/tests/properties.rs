use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rangepres_core::analyzer::{
    check_u_independence, classify, normalize, preimage_construct, AnalysisConfig, MapUnderTest, Verdict,
};
use rangepres_core::approx::{tensor_approximate, Strategy};
use rangepres_core::funcspace::{ScalarFunction, VectorFunction};
use rangepres_core::ksfunc::spectrum;
use rangepres_core::lcs::{ComplexVector, Neighborhood, VectorSpaceModel};
use rangepres_core::par::Execution;
use rangepres_core::sample::{random_function, random_scalar_function, SampleFamily};
use rangepres_core::space::{FiniteSpace, Symbol};

struct Setup {
    x: Arc<FiniteSpace>,
    y: Arc<FiniteSpace>,
    model: Arc<VectorSpaceModel>,
    phi: Symbol,
    offset: VectorFunction,
    rng: ChaCha8Rng,
}

fn setup(nx: usize, ny: usize, d: usize, seed: u64) -> Setup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Arc::new(FiniteSpace::numbered("x", nx).unwrap());
    let y = Arc::new(FiniteSpace::numbered("y", ny).unwrap());
    let model = Arc::new(VectorSpaceModel::standard(d));
    let table = (0..ny).map(|_| rng.gen_range(0..nx)).collect();
    let phi = Symbol::new(y.clone(), x.clone(), table).unwrap();
    let offset = random_function(&mut rng, &y, &model, true);
    Setup {
        x,
        y,
        model,
        phi,
        offset,
        rng,
    }
}

fn composition_map(s: &Setup) -> MapUnderTest {
    let (phi, offset) = (s.phi.clone(), s.offset.clone());
    MapUnderTest::new(s.x.clone(), s.y.clone(), s.model.clone(), move |f| {
        offset.add(&f.compose(&phi)?)
    })
}

fn exact() -> AnalysisConfig {
    AnalysisConfig {
        tol: 0.0,
        family: SampleFamily::Integer,
        pairs: 64,
        ..AnalysisConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_round_trips(nx in 1usize..5, ny in 1usize..5, d in 1usize..3, seed in any::<u64>()) {
        let s = setup(nx, ny, d, seed);
        let report = classify(&composition_map(&s), &AnalysisConfig { seed, ..exact() });
        prop_assert_eq!(report.verdict, Verdict::CompositionConsistent);
        prop_assert_eq!(report.symbol.as_ref(), Some(&s.phi));
        prop_assert_eq!(report.offset.as_ref(), Some(&s.offset));
        let cor = report.corollary.unwrap();
        prop_assert_eq!(cor.t_injective, s.phi.is_surjective());
        prop_assert_eq!(cor.t_surjective, s.phi.is_injective());
    }

    #[test]
    fn compositions_preserve_ranges(nx in 1usize..6, ny in 1usize..6, d in 1usize..4, seed in any::<u64>()) {
        let mut s = setup(nx, ny, d, seed);
        let t = composition_map(&s);
        let f = random_function(&mut s.rng, &s.x, &s.model, false);
        let g = random_function(&mut s.rng, &s.x, &s.model, false);
        let lhs = t.eval(&f).unwrap().sub(&t.eval(&g).unwrap()).unwrap();
        let diff = f.sub(&g).unwrap();
        let ran = diff.range(1e-12).unwrap();
        for v in lhs.values() {
            prop_assert!(ran.contains(v, 1e-12).unwrap().0);
        }
        for p in s.model.seminorms() {
            prop_assert!(lhs.uniform_seminorm(p).unwrap() <= diff.uniform_seminorm(p).unwrap() + 1e-12);
        }
    }

    #[test]
    fn spectrum_is_the_scalar_range(n in 1usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Arc::new(FiniteSpace::numbered("x", n).unwrap());
        let model = Arc::new(VectorSpaceModel::standard(1));
        let f = ScalarFunction::from_fn(x.clone(), |_| C64::new(rng.gen_range(-2..=2) as f64, rng.gen_range(-1..=1) as f64));
        let sigma = spectrum(&f, 0.0);
        let as_vector = f.tensor(&ComplexVector::basis(1, 0), &model).unwrap();
        let ran = as_vector.range(0.0).unwrap();
        prop_assert_eq!(sigma.len(), ran.len());
        for z in sigma.values() {
            prop_assert!(ran.contains(&ComplexVector::new(vec![*z]).unwrap(), 0.0).unwrap().0);
        }
    }

    #[test]
    fn linear_maps_are_probe_independent_in_one_dimension(nx in 1usize..5, ny in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Arc::new(FiniteSpace::numbered("x", nx).unwrap());
        let y = Arc::new(FiniteSpace::numbered("y", ny).unwrap());
        let model = Arc::new(VectorSpaceModel::standard(1));
        let m: Vec<Vec<C64>> = (0..ny).map(|_| (0..nx).map(|_| C64::new(rng.gen(), rng.gen())).collect()).collect();
        let (y2, model2) = (y.clone(), model.clone());
        let t = MapUnderTest::new(x.clone(), y, model, move |f| {
            let values = m.iter().map(|row| {
                let s: C64 = row.iter().zip(f.values()).map(|(a, v)| a * v.entries()[0]).sum();
                ComplexVector::new(vec![s]).unwrap()
            }).collect();
            VectorFunction::new(y2.clone(), model2.clone(), values)
        });
        let (_, tn) = normalize(&t).unwrap();
        let us = [C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, -3.0)].map(|z| ComplexVector::new(vec![z]).unwrap());
        let fs: Vec<_> = (0..4).map(|_| random_scalar_function(&mut rng, &x, false)).collect();
        let report = check_u_independence(&tn, &us, &fs, 1e-9, Execution::Sequential).unwrap();
        prop_assert!(report.residual <= 1e-9, "{}", report.residual);
    }

    #[test]
    fn tensor_certificate_holds(n in 1usize..8, d in 1usize..3, radius in 1e-3f64..100.0, seed in any::<u64>(), hat in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = if hat {
            let points: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
            Arc::new(FiniteSpace::real_points(&points).unwrap())
        } else {
            Arc::new(FiniteSpace::numbered("x", n).unwrap())
        };
        let model = Arc::new(VectorSpaceModel::standard(d));
        let f = random_function(&mut rng, &x, &model, false);
        let nbr = Neighborhood::uniform(&model, radius).unwrap();
        let strategy = if hat { Strategy::Hat } else { Strategy::Assignment };
        let (g, cert) = tensor_approximate(&f, &nbr, strategy).unwrap();
        prop_assert!(cert.in_v);
        prop_assert!(g.len() <= n);
        let diff = f.sub(&g.eval(&model).unwrap()).unwrap();
        prop_assert!(diff.in_v(&nbr).unwrap());
        for e in &cert.errors_per_seminorm {
            prop_assert!(*e <= radius);
        }
    }

    #[test]
    fn preimage_hits_every_target(nx in 1usize..5, ny in 1usize..5, d in 1usize..3, seed in any::<u64>()) {
        let mut s = setup(nx.max(ny), ny, d, seed);
        // Force an injective symbol.
        let table: Vec<usize> = (0..ny).collect();
        s.phi = Symbol::new(s.y.clone(), s.x.clone(), table).unwrap();
        let h = random_function(&mut s.rng, &s.y, &s.model, true);
        let f = preimage_construct(&s.phi, &s.offset, &h).unwrap();
        prop_assert_eq!(composition_map(&s).eval(&f).unwrap(), h);
    }

    #[test]
    fn execution_mode_is_invisible(nx in 1usize..5, ny in 1usize..4, d in 1usize..3, seed in any::<u64>()) {
        let s = setup(nx, ny, d, seed);
        let t = composition_map(&s);
        let base = AnalysisConfig { seed, pairs: 32, ..AnalysisConfig::default() };
        let seq = classify(&t, &AnalysisConfig { execution: Execution::Sequential, ..base.clone() });
        let par = classify(&t, &AnalysisConfig { execution: Execution::Parallel, ..base });
        prop_assert_eq!(seq.to_json_pretty(), par.to_json_pretty());
    }
}

#[test]
fn squaring_is_not_probe_independent() {
    let x = Arc::new(FiniteSpace::numbered("x", 2).unwrap());
    let model = Arc::new(VectorSpaceModel::standard(1));
    let t = MapUnderTest::new(x.clone(), x.clone(), model, |f| {
        let values = f
            .values()
            .iter()
            .map(|v| ComplexVector::new(vec![v.entries()[0] * v.entries()[0]]).unwrap())
            .collect();
        VectorFunction::new(f.space().clone(), f.model().clone(), values)
    });
    let us = [1.0, 2.0].map(|r| ComplexVector::real(&[r]).unwrap());
    let fs = vec![ScalarFunction::indicator(x, 0)];
    let report = check_u_independence(&t, &us, &fs, 1e-9, Execution::Sequential).unwrap();
    assert!(report.residual > 0.5);
    assert!(report.witness.is_some());
}

#[test]
fn neighborhood_json_is_validated() {
    let ok: Neighborhood = serde_json::from_str(r#"{"bounds":[{"seminorm":0,"radius":0.5}]}"#).unwrap();
    assert_eq!(ok.bounds().len(), 1);
    for bad in [
        r#"{"bounds":[{"seminorm":0,"radius":0.0}]}"#,
        r#"{"bounds":[{"seminorm":0,"radius":-1.0}]}"#,
        r#"{"bounds":[]}"#,
    ] {
        assert!(serde_json::from_str::<Neighborhood>(bad).is_err(), "{bad}");
    }
}
