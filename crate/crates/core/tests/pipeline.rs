//! Library-level runs through parse, check, search and abstraction.

use std::sync::Arc;

use proptest::prelude::*;

use scenegen_core::fss;
use scenegen_core::logic::PartialModel;
use scenegen_core::mapping::{check_refinement, fun_to_log, log_to_fun, MappingConfig};
use scenegen_core::roadmap::RoadMap;
use scenegen_core::search::{build_problem, run, AlgoConfig, Algorithm, HeadingMode, Status, Strategy};

fn closed(text: &str) -> PartialModel {
    fss::build_model(&fss::parse(text).unwrap()).apply_validity_rules(&[]).0
}

#[test]
fn strip_pair_round_trip() {
    let model = closed(include_str!("fixtures/strip_pair.fss"));
    assert!(model.find_inconsistencies().is_empty());
    let cfg = MappingConfig::default();
    let map = Arc::new(RoadMap::bundled("strip").unwrap());
    let n = fun_to_log(&model, "strip", map, &cfg.dims, &cfg.params).unwrap();
    let mp = build_problem(n, Strategy::Actor, HeadingMode::Lane).unwrap();
    let r = run(&mp, &AlgoConfig::new(Algorithm::Nsga2).with_seed(0)).unwrap();
    assert_eq!(r.status, Status::Solved);
    let scene = r.scene.unwrap();
    let ev = mp.problem.evaluator();
    assert!(check_refinement(&model, &scene, &ev).unwrap());

    // the abstraction, printed and re-read, still refines the input
    let text = fss::format(&log_to_fun(&scene, &ev).unwrap());
    assert!(PartialModel::refines(&model, &closed(&text)).unwrap());
}

#[test]
fn full_scene_in_free_heading_mode_with_every_algorithm() {
    let model = closed(include_str!("fixtures/full_scene.fss"));
    let cfg = MappingConfig::default();
    let map = Arc::new(RoadMap::bundled("cross").unwrap());
    for (algo, strategy) in [
        (Algorithm::Ga, Strategy::Global),
        (Algorithm::Nsga2, Strategy::Actor),
        (Algorithm::Nsga3, Strategy::WeightedDependency),
    ] {
        let n = fun_to_log(&model, "cross", map.clone(), &cfg.dims, &cfg.params).unwrap();
        let mp = build_problem(n, strategy, HeadingMode::Free).unwrap();
        assert_eq!(mp.n_var(), 9);
        let r = run(&mp, &AlgoConfig::new(algo).with_seed(3).with_budget(Some(400_000), None)).unwrap();
        assert_eq!(r.per_constraint.len(), mp.constraints().len());
        if r.status == Status::Solved {
            assert!(r.per_constraint.iter().all(|c| c.distance < 1e-3));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // raising one constraint's distance never lowers an objective
    #[test]
    fn objectives_are_monotone_in_each_distance(seed in any::<u64>(), strategy in 0usize..6) {
        use rand::{Rng, SeedableRng};
        let model = closed(include_str!("fixtures/full_scene.fss"));
        let cfg = MappingConfig::default();
        let map = Arc::new(RoadMap::bundled("cross").unwrap());
        let n = fun_to_log(&model, "cross", map, &cfg.dims, &cfg.params).unwrap();
        let mp = build_problem(n, Strategy::ALL[strategy], HeadingMode::Free).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bounds = mp.bounds();
        let g: Vec<f64> = bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect();
        let e = mp.evaluate(&g);
        let k = rng.gen_range(0..e.distances.len());
        for (gi, group) in mp.groups.iter().enumerate() {
            let raised: f64 = group
                .members
                .iter()
                .map(|m| if *m == k { e.distances[*m] + 1.0 } else { e.distances[*m] })
                .sum::<f64>()
                .powi(group.weight_exponent as i32);
            prop_assert!(raised >= e.objectives[gi] - 1e-12);
        }
    }
}
