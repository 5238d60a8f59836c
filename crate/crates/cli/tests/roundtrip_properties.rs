use adaprox::SparseDesign;
use adaprox_cli::{parse_libsvm, write_libsvm, ExperimentConfig, ProblemSpec, RhoChoice, SolverKind, SolverSpec, TraceFormat};
use proptest::prelude::*;

fn design() -> impl Strategy<Value = SparseDesign> {
    (1usize..30).prop_flat_map(|n_cols| {
        let row = (
            prop::collection::btree_map(0..n_cols, prop::num::f64::NORMAL | prop::num::f64::ZERO, 0..n_cols.min(8)),
            any::<bool>(),
        );
        (Just(n_cols), prop::collection::vec(row, 0..20)).prop_map(|(n_cols, rows)| {
            let mut d = SparseDesign::new(n_cols);
            for (entries, label) in rows {
                let e: Vec<(usize, f64)> = entries.into_iter().collect();
                d.push_row(&e, if label { 1.0 } else { 0.0 }).unwrap();
            }
            d
        })
    })
}

fn solver() -> impl Strategy<Value = SolverSpec> {
    (
        prop::sample::select(vec![SolverKind::Adapgnc, SolverKind::Relaxed, SolverKind::Bb, SolverKind::Adgd, SolverKind::Fixed, SolverKind::Gdls]),
        prop::sample::select(vec![RhoChoice::Rho1, RhoChoice::Rho2, RhoChoice::Zero]),
        1e-6f64..1e3,
        prop::option::of(1e-4f64..1.0),
        0.0f64..1e-3,
        1usize..100_000,
        prop::option::of(1e-3f64..1e4),
        any::<bool>(),
    )
        .prop_map(|(solver, rho, lambda0, step, tol, max_iters, max_seconds, monitor)| SolverSpec {
            name: None,
            solver,
            rho,
            lambda0,
            step,
            tol,
            max_iters,
            max_seconds,
            monitor,
        })
}

fn problem() -> impl Strategy<Value = ProblemSpec> {
    prop_oneof![
        (1usize..50, 1.0f64..1e4).prop_map(|(dim, cond)| ProblemSpec::Quadratic { dim, cond }),
        (1usize..500, 1usize..50, prop::option::of(1e-6f64..1.0), any::<bool>()).prop_map(|(m, n, gamma, file)| {
            ProblemSpec::Logistic { m, n, dataset: file.then(|| "data/train.svm".into()), gamma }
        }),
        (1usize..500, 1usize..50).prop_map(|(m, n)| ProblemSpec::Lasso { m, n }),
        (1usize..300, 1usize..10, 1usize..300).prop_map(|(n, r, m)| ProblemSpec::Nmf { n, r, m }),
        (1usize..100, 1usize..100, 1usize..5, 1usize..1000, 0.0f64..1.0)
            .prop_map(|(p, q, r, n_obs, noise)| ProblemSpec::Mc { p, q, r, n_obs, noise }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn libsvm_write_then_parse_is_identity(d in design()) {
        let mut buf = Vec::new();
        write_libsvm(&d, &mut buf).unwrap();
        let mut back = parse_libsvm(&buf[..]).unwrap();
        // The text only records the largest index that occurs.
        prop_assert!(back.n_cols() <= d.n_cols());
        back.set_n_cols(d.n_cols()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn config_round_trip_is_idempotent(
        seeds in prop::collection::btree_set(any::<u64>(), 1..6),
        solvers in prop::collection::vec(solver(), 1..4),
        problem in problem(),
        json in any::<bool>(),
        jobs in 1usize..16,
        record_time in any::<bool>(),
    ) {
        let solvers: Vec<SolverSpec> = solvers
            .into_iter()
            .enumerate()
            .map(|(i, s)| SolverSpec { name: Some(format!("s{i}")), ..s })
            .collect();
        let cfg = ExperimentConfig {
            seeds: seeds.into_iter().collect(),
            output_dir: "runs/x".into(),
            format: if json { TraceFormat::Json } else { TraceFormat::Csv },
            jobs,
            record_time,
            problem,
            solvers,
        };
        let text = cfg.to_toml().unwrap();
        let back: ExperimentConfig = text.parse().unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}
