//! Property tests for the library invariants: feature algebra, classifier
//! totality, fitting determinism, prediction linearity, solver argmax
//! behavior, and the synthetic oracle's monotonicity and interference signs.

use proptest::prelude::*;

use migopt_core::model::{
    fit_solo, predict_rperf, CoefficientEntry, CoefficientTable, SliceKey, TrainingSample,
};
use migopt_core::oracle::{self, OracleConfig, SyntheticApp};
use migopt_core::policy::{
    evaluate_candidates, hill_climb, select_best, solve, CandidateEvaluation, PolicyError,
    PolicyKind, PolicyProblem,
};
use migopt_core::profiles::{ApplicationProfile, CounterVector};
use migopt_core::statespace::{
    default_state_space, private_memory_modules, HardwareState, MemoryOption, PartitionState,
    DEFAULT_POWER_MENU_W, SLICE_GPC_CHOICES,
};

fn profile_from(f: [f64; 8]) -> ApplicationProfile {
    ApplicationProfile::new(
        "p",
        CounterVector {
            compute_throughput: f[0],
            memory_throughput: f[1],
            dram_throughput: f[2],
            l2_hit_rate: f[3],
            occupancy: f[4],
            tensor_mixed: f[5],
            tensor_double: f[6],
            tensor_integer: f[7],
        },
    )
    .unwrap()
}

prop_compose! {
    /// Valid profile with a live compute pipe and tensor counters that sum
    /// within full scale.
    fn arb_profile()(
        f1 in 0.02f64..=100.0,
        f2 in 0.0f64..=100.0,
        f3 in 0.0f64..=100.0,
        f4 in 0.0f64..=100.0,
        f5 in 0.0f64..=100.0,
        f6 in 0.0f64..=33.0,
        f7 in 0.0f64..=33.0,
        f8 in 0.0f64..=33.0,
    ) -> ApplicationProfile {
        profile_from([f1, f2, f3, f4, f5, f6, f7, f8])
    }
}

prop_compose! {
    fn arb_app()(
        compute in 0.001f64..=1.0,
        bandwidth in 0.0f64..=1.0,
        tensor in 0.0f64..=1.0,
        l2 in 0.0f64..=1.0,
    ) -> SyntheticApp {
        SyntheticApp::new("app", compute, bandwidth, tensor, l2).unwrap()
    }
}

fn arb_gpcs() -> impl Strategy<Value = u32> {
    proptest::sample::select(SLICE_GPC_CHOICES.to_vec())
}

fn arb_power() -> impl Strategy<Value = u32> {
    proptest::sample::select(DEFAULT_POWER_MENU_W.to_vec())
}

fn arb_option() -> impl Strategy<Value = MemoryOption> {
    prop_oneof![Just(MemoryOption::Shared), Just(MemoryOption::Private)]
}

proptest! {
    #[test]
    fn h1_plus_h2_equals_compute_fraction(profile in arb_profile()) {
        let h = profile.feature_h().unwrap();
        let expected = profile.counters.compute_throughput / 100.0;
        prop_assert!((h.0[0] + h.0[1] - expected).abs() < 1e-12);
        prop_assert_eq!(h.0[5], 1.0);
        prop_assert!(h.0[0] + h.0[1] <= 1.0 + 1e-9);
    }

    #[test]
    fn classify_returns_exactly_one_class(
        profile in arb_profile(),
        rperf in 0.0f64..=2.0,
    ) {
        // totality outside the degenerate memory-pipe branch
        prop_assume!(profile.counters.memory_throughput > 0.02);
        let class = profile.classify(rperf).unwrap();
        let all = [
            migopt_core::WorkloadClass::TI,
            migopt_core::WorkloadClass::CI,
            migopt_core::WorkloadClass::MI,
            migopt_core::WorkloadClass::US,
        ];
        prop_assert_eq!(all.iter().filter(|c| **c == class).count(), 1);
    }

    #[test]
    fn classify_is_scale_free_above_threshold(
        profile in arb_profile(),
        r1 in 0.9001f64..=10.0,
        r2 in 0.9001f64..=10.0,
    ) {
        prop_assume!(profile.counters.memory_throughput > 0.02);
        prop_assert_eq!(profile.classify(r1).unwrap(), profile.classify(r2).unwrap());
    }

    #[test]
    fn memory_modules_monotone(g1 in arb_gpcs(), g2 in arb_gpcs()) {
        prop_assume!(g1 <= g2);
        prop_assert!(private_memory_modules(g1).unwrap() <= private_memory_modules(g2).unwrap());
    }
}

fn solo_samples(profiles: &[ApplicationProfile], rperfs: &[f64]) -> Vec<TrainingSample> {
    profiles
        .iter()
        .zip(rperfs)
        .map(|(p, &r)| TrainingSample {
            subject: p.clone(),
            partners: vec![],
            state: HardwareState::new(PartitionState::solo(3, MemoryOption::Private), 250),
            subject_slot: 0,
            measured_rperf: r,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitting_ignores_sample_order(
        seeds in proptest::collection::vec(0.05f64..=1.0, 8),
        permutation in Just(()).prop_perturb(|_, mut rng| {
            use proptest::prelude::Rng;
            let mut order: Vec<usize> = (0..8).collect();
            for i in (1..8).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            order
        }),
    ) {
        let profiles: Vec<ApplicationProfile> = (0..8)
            .map(|i| {
                let x = i as f64;
                profile_from([
                    20.0 + 70.0 * ((x * 0.37).sin().abs()),
                    5.0 + 90.0 * ((x * 0.53 + 1.0).sin().abs()),
                    100.0 * ((x * 0.71 + 2.0).sin().abs()),
                    100.0 * ((x * 0.29 + 3.0).sin().abs()),
                    100.0 * ((x * 0.61 + 4.0).sin().abs()),
                    10.0 * ((x * 0.43 + 5.0).sin().abs()),
                    0.0,
                    0.0,
                ])
            })
            .collect();
        let samples = solo_samples(&profiles, &seeds);
        let mut shuffled = Vec::with_capacity(samples.len());
        for &index in &permutation {
            shuffled.push(samples[index].clone());
        }

        let table_a = fit_solo(&samples).unwrap();
        let table_b = fit_solo(&shuffled).unwrap();
        // canonical in-group ordering makes the fit bit-identical
        prop_assert_eq!(table_a, table_b);
    }

    #[test]
    fn prediction_is_linear_in_coefficients(
        profile in arb_profile(),
        component in 0usize..6,
        delta in -0.5f64..=0.5,
    ) {
        let key = SliceKey { gpcs: 3, option: MemoryOption::Shared, power_w: 250 };
        let base_c = [0.1, 0.1, 0.05, 0.1, 0.1, 2.0]; // large constant keeps us off the clamp
        let mut table = CoefficientTable::new();
        table.insert(key, CoefficientEntry {
            c: base_c, d: None, n_solo: 6, n_corun: 0, rms_solo: 0.0, rms_corun: None,
        });
        let mut bumped = CoefficientTable::new();
        let mut c = base_c;
        c[component] += delta;
        bumped.insert(key, CoefficientEntry {
            c, d: None, n_solo: 6, n_corun: 0, rms_solo: 0.0, rms_corun: None,
        });

        let before = predict_rperf(&profile, &[], &key, &table).unwrap();
        let after = predict_rperf(&profile, &[], &key, &bumped).unwrap();
        // linearity is promised only above the zero clamp
        prop_assume!(before > 0.0 && after > 0.0);
        let h = profile.feature_h().unwrap();
        prop_assert!((after - before - delta * h.0[component]).abs() < 1e-9);
    }

    #[test]
    fn partner_term_is_linear_in_d(
        subject in arb_profile(),
        partner in arb_profile(),
        component in 0usize..3,
        delta in -0.3f64..=0.3,
    ) {
        let key = SliceKey { gpcs: 3, option: MemoryOption::Shared, power_w: 250 };
        let base_d = [-0.05, 0.02, 2.0];
        let entry = |d: [f64; 3]| CoefficientEntry {
            c: [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            d: Some(d), n_solo: 6, n_corun: 3, rms_solo: 0.0, rms_corun: Some(0.0),
        };
        let mut table = CoefficientTable::new();
        table.insert(key, entry(base_d));
        let mut d = base_d;
        d[component] += delta;
        let mut bumped = CoefficientTable::new();
        bumped.insert(key, entry(d));

        let before = predict_rperf(&subject, &[&partner], &key, &table).unwrap();
        let after = predict_rperf(&subject, &[&partner], &key, &bumped).unwrap();
        prop_assume!(before > 0.0 && after > 0.0);
        let j = partner.feature_j();
        prop_assert!((after - before - delta * j.0[component]).abs() < 1e-9);
    }

    #[test]
    fn solo_prediction_never_reads_d(
        profile in arb_profile(),
        d1 in -1.0f64..=1.0,
        d2 in -1.0f64..=1.0,
        d3 in -1.0f64..=1.0,
    ) {
        let key = SliceKey { gpcs: 4, option: MemoryOption::Private, power_w: 190 };
        let c = [0.2, 0.1, 0.0, 0.3, 0.1, 0.5];
        let mut with_d = CoefficientTable::new();
        with_d.insert(key, CoefficientEntry {
            c, d: Some([d1, d2, d3]), n_solo: 6, n_corun: 3, rms_solo: 0.0, rms_corun: Some(0.0),
        });
        let mut without_d = CoefficientTable::new();
        without_d.insert(key, CoefficientEntry {
            c, d: None, n_solo: 6, n_corun: 0, rms_solo: 0.0, rms_corun: None,
        });
        let a = predict_rperf(&profile, &[], &key, &with_d).unwrap();
        let b = predict_rperf(&profile, &[], &key, &without_d).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// Constant-prediction table over the default slice keys.
fn constant_table(values: &[f64; 24]) -> CoefficientTable {
    let mut table = CoefficientTable::new();
    let mut index = 0;
    for gpcs in [3u32, 4] {
        for option in [MemoryOption::Shared, MemoryOption::Private] {
            for power_w in DEFAULT_POWER_MENU_W {
                table.insert(
                    SliceKey { gpcs, option, power_w },
                    CoefficientEntry {
                        c: [0.0, 0.0, 0.0, 0.0, 0.0, values[index % 24]],
                        d: Some([0.0, 0.0, 0.0]),
                        n_solo: 6,
                        n_corun: 3,
                        rms_solo: 0.0,
                        rms_corun: Some(0.0),
                    },
                );
                index += 1;
            }
        }
    }
    table
}

fn two_apps() -> Vec<ApplicationProfile> {
    vec![
        profile_from([80.0, 40.0, 30.0, 60.0, 50.0, 10.0, 0.0, 0.0]),
        profile_from([30.0, 90.0, 80.0, 20.0, 90.0, 0.0, 0.0, 0.0]),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_grid_has_full_cardinality(
        n_states in 1usize..=4,
        n_powers in 1usize..=6,
        values in proptest::array::uniform24(0.05f64..=1.2),
    ) {
        let states: Vec<PartitionState> = default_state_space().into_iter().take(n_states).collect();
        let powers: Vec<u32> = DEFAULT_POWER_MENU_W.into_iter().take(n_powers).collect();
        let table = constant_table(&values);
        let problem = PolicyProblem::efficiency(two_apps(), 0.0);
        let evals = evaluate_candidates(&problem, &states, &powers, &table).unwrap();
        prop_assert_eq!(evals.len(), n_states * n_powers);
    }

    #[test]
    fn argmax_invariant_under_positive_rescaling(
        values in proptest::array::uniform24(0.05f64..=1.2),
        scale in 0.01f64..=100.0,
        kind in prop_oneof![Just(PolicyKind::Throughput), Just(PolicyKind::Efficiency)],
    ) {
        let evals: Vec<CandidateEvaluation> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| CandidateEvaluation {
                state_index: i / 6,
                power_index: i % 6,
                state_id: format!("S{}", i / 6 + 1),
                power_w: DEFAULT_POWER_MENU_W[i % 6],
                rperfs: vec![v, v],
                throughput: 2.0 * v,
                fairness: v,
                feasible: v > 0.1,
            })
            .collect();
        let scaled: Vec<CandidateEvaluation> = evals
            .iter()
            .cloned()
            .map(|mut e| {
                e.throughput *= scale;
                e
            })
            .collect();
        let a = select_best(kind, &evals).map(|e| (e.state_id.clone(), e.power_w));
        let b = select_best(kind, &scaled).map(|e| (e.state_id.clone(), e.power_w));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn selection_permutation_invariant_for_distinct_objectives(
        values in proptest::array::uniform24(0.05f64..=1.2),
        rotation in 0usize..24,
    ) {
        let evals: Vec<CandidateEvaluation> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| CandidateEvaluation {
                state_index: i / 6,
                power_index: i % 6,
                state_id: format!("c{i}"),
                // distinct objective per candidate: perturb by index
                power_w: DEFAULT_POWER_MENU_W[i % 6],
                rperfs: vec![v + i as f64 * 1e-4],
                throughput: v + i as f64 * 1e-4,
                fairness: v,
                feasible: v > 0.1,
            })
            .collect();
        let mut rotated = evals.clone();
        rotated.rotate_left(rotation);
        let a = select_best(PolicyKind::Throughput, &evals).map(|e| e.state_id.clone());
        let b = select_best(PolicyKind::Throughput, &rotated).map(|e| e.state_id.clone());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hill_climb_never_exceeds_exhaustive(
        values in proptest::array::uniform24(0.05f64..=1.2),
        alpha in 0.0f64..=1.0,
        start_state in 0usize..4,
        start_power in 0usize..6,
    ) {
        let states = default_state_space();
        let table = constant_table(&values);
        let problem = PolicyProblem::efficiency(two_apps(), alpha);
        let exhaustive = solve(&problem, &states, &DEFAULT_POWER_MENU_W, &table);
        let local = hill_climb(
            &problem,
            &states,
            &DEFAULT_POWER_MENU_W,
            &table,
            (start_state, start_power),
        );
        match (exhaustive, local) {
            (Ok(best), Ok(found)) => prop_assert!(found.objective <= best.objective + 1e-12),
            (Err(PolicyError::Infeasible), Err(PolicyError::Infeasible)) => {}
            (a, b) => prop_assert!(false, "mismatched outcomes: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn fixed_power_equals_restricted_sweep(
        values in proptest::array::uniform24(0.05f64..=1.2),
        power in arb_power(),
    ) {
        let states = default_state_space();
        let table = constant_table(&values);
        let p1 = PolicyProblem::throughput_at(two_apps(), 0.2, power);
        let p2 = PolicyProblem::efficiency(two_apps(), 0.2);
        let a = solve(&p1, &states, &DEFAULT_POWER_MENU_W, &table);
        let b = solve(&p2, &states, &[power], &table);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.state.state_id, b.state.state_id);
                prop_assert_eq!(a.power_w, b.power_w);
                prop_assert!((b.objective - a.objective / power as f64).abs() < 1e-12);
            }
            (Err(PolicyError::Infeasible), Err(PolicyError::Infeasible)) => {}
            (a, b) => prop_assert!(false, "mismatched outcomes: {a:?} vs {b:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solo_rperf_bounded_by_baseline(
        app in arb_app(),
        gpcs in arb_gpcs(),
        option in arb_option(),
        power in arb_power(),
    ) {
        let config = OracleConfig::default();
        let state = HardwareState::new(PartitionState::solo(gpcs, option), power);
        let rperf = oracle::true_rperf(std::slice::from_ref(&app), &state, 0, &config).unwrap();
        prop_assert!(rperf > 0.0, "rperf {rperf} not positive");
        prop_assert!(rperf <= 1.0 + 1e-12, "rperf {rperf} above baseline");
    }

    #[test]
    fn solo_rperf_monotone_in_power(
        app in arb_app(),
        gpcs in arb_gpcs(),
        option in arb_option(),
    ) {
        let config = OracleConfig::default();
        let mut previous = 0.0;
        for power in DEFAULT_POWER_MENU_W {
            let state = HardwareState::new(PartitionState::solo(gpcs, option), power);
            let rperf =
                oracle::true_rperf(std::slice::from_ref(&app), &state, 0, &config).unwrap();
            prop_assert!(rperf >= previous - 1e-12, "rperf {rperf} < {previous} at {power} W");
            previous = rperf;
        }
    }

    #[test]
    fn solo_private_rperf_monotone_in_gpcs(app in arb_app(), power in arb_power()) {
        let config = OracleConfig::default();
        let mut previous = 0.0;
        for gpcs in SLICE_GPC_CHOICES {
            let state = HardwareState::new(
                PartitionState::solo(gpcs, MemoryOption::Private),
                power,
            );
            let rperf =
                oracle::true_rperf(std::slice::from_ref(&app), &state, 0, &config).unwrap();
            prop_assert!(rperf >= previous - 1e-12, "rperf {rperf} < {previous} at {gpcs} GPCs");
            previous = rperf;
        }
    }

    #[test]
    fn private_corun_identical_to_solo(
        a in arb_app(),
        b in arb_app(),
        power in arb_power(),
        mirrored in proptest::bool::ANY,
    ) {
        let config = OracleConfig::default();
        let gpcs: [u32; 2] = if mirrored { [3, 4] } else { [4, 3] };
        let state = HardwareState::new(
            PartitionState::uniform("priv", &gpcs, MemoryOption::Private),
            power,
        );
        let pair = [a.clone(), b.clone()];
        for slot in 0..2 {
            let corun = oracle::true_rperf(&pair, &state, slot, &config).unwrap();
            let solo_state = HardwareState::new(
                PartitionState::solo(gpcs[slot], MemoryOption::Private),
                power,
            );
            let solo = oracle::true_rperf(
                std::slice::from_ref(&pair[slot]),
                &solo_state,
                0,
                &config,
            )
            .unwrap();
            prop_assert_eq!(corun, solo);
        }
    }

    #[test]
    fn shared_corun_never_beats_solo(
        a in arb_app(),
        b in arb_app(),
        power in arb_power(),
    ) {
        let config = OracleConfig::default();
        let state = HardwareState::new(
            PartitionState::uniform("sh", &[4, 3], MemoryOption::Shared),
            power,
        );
        let pair = [a.clone(), b.clone()];
        for slot in 0..2 {
            let corun = oracle::true_rperf(&pair, &state, slot, &config).unwrap();
            let gpcs = state.partition.slices[slot].gpcs;
            let solo_state =
                HardwareState::new(PartitionState::solo(gpcs, MemoryOption::Shared), power);
            let solo = oracle::true_rperf(
                std::slice::from_ref(&pair[slot]),
                &solo_state,
                0,
                &config,
            )
            .unwrap();
            prop_assert!(corun <= solo + 1e-12, "slot {slot}: corun {corun} > solo {solo}");
        }
    }

    /// Memory-bound subjects sharing an oversubscribed pool always lose to
    /// their solo run strictly.
    #[test]
    fn oversubscribed_pool_strictly_slows_memory_bound_subjects(
        subject_compute in 0.02f64..=0.3,
        subject_bw in 0.7f64..=1.0,
        partner_compute in 0.02f64..=1.0,
        partner_bw in 0.5f64..=1.0,
        subject_slot in 0usize..2,
    ) {
        let config = OracleConfig::default();
        let subject = SyntheticApp::new("subj", subject_compute, subject_bw, 0.0, 0.5).unwrap();
        let partner = SyntheticApp::new("part", partner_compute, partner_bw, 0.0, 0.5).unwrap();
        let pair = if subject_slot == 0 {
            [subject.clone(), partner.clone()]
        } else {
            [partner.clone(), subject.clone()]
        };
        let state = HardwareState::new(
            PartitionState::uniform("sh", &[4, 3], MemoryOption::Shared),
            250,
        );
        let corun = oracle::true_rperf(&pair, &state, subject_slot, &config).unwrap();
        let gpcs = state.partition.slices[subject_slot].gpcs;
        let solo_state =
            HardwareState::new(PartitionState::solo(gpcs, MemoryOption::Shared), 250);
        let solo = oracle::true_rperf(
            std::slice::from_ref(&subject),
            &solo_state,
            0,
            &config,
        )
        .unwrap();
        prop_assert!(corun < solo, "corun {corun} !< solo {solo}");
    }
}
