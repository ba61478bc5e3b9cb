use super::*;
use crate::space::ColumnSpace;

fn sign_matrix_of(values: &[[i8; 2]]) -> SignMatrix {
    let data: Vec<i8> = values.iter().flatten().copied().collect();
    SignMatrix::from_parts(data, values.len(), 2)
}

fn signs_from_labels(labels: &LabelCode) -> SignMatrix {
    let (n, k) = (labels.n(), labels.k());
    let mut data = vec![0i8; n * k];
    for i in 0..n {
        for l in 0..k {
            data[i * k + l] = labels.sign(i, l) as i8;
        }
    }
    SignMatrix::from_parts(data, n, k)
}

#[test]
fn init_weights_forced_values() {
    let w = WeightMatrix::init(&LabelCode::new(vec![1], 2), WeightInit::Standard).unwrap();
    assert_eq!(w.as_slice(), &[0.5, 0.5]);

    let w = WeightMatrix::init(&LabelCode::new(vec![1, 3], 3), WeightInit::Standard).unwrap();
    assert_eq!(w.as_slice(), &[0.25, 0.125, 0.125, 0.125, 0.125, 0.25]);
    assert!((w.total() - 1.0).abs() < 1e-12);

    let w = WeightMatrix::init(&LabelCode::new(vec![1, 2, 2], 4), WeightInit::Uniform).unwrap();
    assert!(w.as_slice().iter().all(|&v| v == 1.0 / 12.0));
}

#[test]
fn weight_totals_are_one() {
    for (n, k) in [(1, 2), (7, 3), (40, 10)] {
        let labels = LabelCode::new((0..n).map(|i| (i % k) as u32 + 1).collect(), k);
        for init in [WeightInit::Standard, WeightInit::Uniform] {
            let w = WeightMatrix::init(&labels, init).unwrap();
            assert!((w.total() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn edge_of_perfect_agreement_and_disagreement() {
    let labels = LabelCode::new(vec![1, 2, 1], 2);
    let w = WeightMatrix::init(&labels, WeightInit::Standard).unwrap();
    let h = signs_from_labels(&labels);
    assert!((edge_of(&h, &w, &labels).unwrap() - 1.0).abs() < 1e-12);

    let flipped: Vec<i8> = (0..3 * 2)
        .map(|idx| -(labels.sign(idx / 2, idx % 2) as i8))
        .collect();
    let h = SignMatrix::from_parts(flipped, 3, 2);
    assert!((edge_of(&h, &w, &labels).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn edge_of_matches_double_loop() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
    let labels = LabelCode::new(vec![2, 1, 3, 2], 3);
    let mut w = vec![0.0; 12];
    for v in w.iter_mut() {
        *v = rng.random::<f64>();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let data: Vec<i8> = (0..12)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let h = SignMatrix::from_parts(data.clone(), 4, 3);
    let wm = WeightMatrix {
        w: w.clone(),
        n: 4,
        k: 3,
    };

    let mut direct = 0.0;
    for i in 0..4 {
        for l in 0..3 {
            direct += w[i * 3 + l] * data[i * 3 + l] as f64 * labels.sign(i, l);
        }
    }
    assert!((edge_of(&h, &wm, &labels).unwrap() - direct).abs() < 1e-14);
}

#[test]
fn edge_of_rejects_shape_mismatch() {
    let labels = LabelCode::new(vec![1, 2], 2);
    let w = WeightMatrix::init(&labels, WeightInit::Standard).unwrap();
    let h = SignMatrix::from_parts(vec![1; 6], 2, 3);
    assert!(edge_of(&h, &w, &labels).is_err());
}

#[test]
fn alpha_formula_and_cap() {
    assert_eq!(alpha_of(0.0), 0.0);
    assert!((alpha_of(0.5) - 0.5 * 3.0f64.ln()).abs() < 1e-15);
    // Anything above the cap maps to the capped coefficient.
    assert_eq!(alpha_of(1.0 - 1e-12), alpha_of(EDGE_CAP));
    assert!(alpha_of(1.0 - 1e-12).is_finite());
}

#[test]
fn update_with_zero_alpha_is_identity() {
    let labels = LabelCode::new(vec![1, 2], 2);
    let mut w = WeightMatrix::init(&labels, WeightInit::Standard).unwrap();
    let before = w.as_slice().to_vec();
    let h = sign_matrix_of(&[[1, -1], [-1, 1]]);
    let z = update_weights(&mut w, 0.0, &h, &labels);
    assert_eq!(w.as_slice(), before.as_slice());
    assert!((z - 1.0).abs() < 1e-12);
}

#[test]
fn update_with_perfect_learner_cancels() {
    let labels = LabelCode::new(vec![2, 1, 1], 2);
    let mut w = WeightMatrix::init(&labels, WeightInit::Standard).unwrap();
    let before = w.as_slice().to_vec();
    let h = signs_from_labels(&labels);
    let alpha = alpha_of(0.7);
    let z = update_weights(&mut w, alpha, &h, &labels);
    // Every cell scales by e^{−α}, so renormalization restores the matrix.
    for (a, b) in w.as_slice().iter().zip(&before) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((z - (-alpha).exp()).abs() < 1e-12);
}

#[test]
fn update_matches_hand_evaluation() {
    // 2 instances, 2 classes, mixed agreement.
    let labels = LabelCode::new(vec![1, 2], 2);
    let mut w = WeightMatrix::init(&labels, WeightInit::Standard).unwrap(); // all 0.25
    let h = sign_matrix_of(&[[1, -1], [1, -1]]); // correct on 0, wrong on 1
    let alpha = 0.3;
    let z = update_weights(&mut w, alpha, &h, &labels);

    let ep = (-0.3f64).exp();
    let em = 0.3f64.exp();
    let raw = [0.25 * ep, 0.25 * ep, 0.25 * em, 0.25 * em];
    let zz: f64 = raw.iter().sum();
    for (got, want) in w.as_slice().iter().zip(raw.iter().map(|v| v / zz)) {
        assert!((got - want).abs() < 1e-14);
    }
    assert!((z - zz).abs() < 1e-14);
}

fn gaussian_blobs(n: usize, seed: u64) -> (Matrix, LabelCode) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let centers = [(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)];
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 3;
        let (cx, cy) = centers[c];
        rows.push(vec![
            cx + (rng.random::<f64>() - 0.5),
            cy + (rng.random::<f64>() - 0.5),
        ]);
        labels.push(c as u32 + 1);
    }
    (Matrix::from_rows(&rows).unwrap(), LabelCode::new(labels, 3))
}

fn quick_config(iterations: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        iterations,
        leaves: 4,
        d_prime: 2,
        seed,
        curve_cadence: None,
        weight_init: WeightInit::Standard,
    }
}

#[test]
fn separable_toy_reaches_zero_training_error() {
    let (x, labels) = gaussian_blobs(60, 1);
    let space = ColumnSpace::new("raw", x);
    let outcome = train(TrainJob {
        space: &space,
        labels: &labels,
        config: quick_config(50, 7),
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: vec!["1".into(), "2".into(), "3".into()],
        eval: None,
    })
    .unwrap();
    assert!(outcome.aborted_at.is_none());
    let reached_zero = outcome.curve.points.iter().any(|p| p.train_error == 0.0);
    assert!(reached_zero, "training error never reached 0");
    for s in &outcome.stats {
        assert!((s.weight_total - 1.0).abs() < 1e-9);
        if s.weighted_hamming > 0.0 {
            assert!(s.weighted_hamming.ln() <= s.log_z_product + 1e-9);
        }
    }
    for pair in outcome.stats.windows(2) {
        assert!(pair[1].log_z_product < pair[0].log_z_product);
    }
}

#[test]
fn single_iteration_is_a_single_tree() {
    let (x, labels) = gaussian_blobs(30, 2);
    let space = ColumnSpace::new("raw", x);
    let outcome = train(TrainJob {
        space: &space,
        labels: &labels,
        config: quick_config(1, 3),
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: vec!["1".into(), "2".into(), "3".into()],
        eval: None,
    })
    .unwrap();
    assert_eq!(outcome.ensemble.stages.len(), 1);
    assert_eq!(outcome.curve.points.len(), 1);
    assert!(outcome.ensemble.stages[0].alpha > 0.0);
}

#[test]
fn contradictory_data_aborts_cleanly() {
    // Two identical instances with different labels: every stump has edge 0.
    let x = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
    let labels = LabelCode::new(vec![1, 2], 2);
    let space = ColumnSpace::new("raw", x);
    let outcome = train(TrainJob {
        space: &space,
        labels: &labels,
        config: TrainConfig {
            iterations: 5,
            leaves: 2,
            d_prime: 1,
            seed: 0,
            curve_cadence: None,
            weight_init: WeightInit::Standard,
        },
        schema: SpaceSchema::Raw {
            dim: 1,
            geometry: None,
        },
        label_names: vec!["1".into(), "2".into()],
        eval: None,
    })
    .unwrap();
    assert_eq!(outcome.aborted_at, Some(1));
    assert!(outcome.ensemble.stages.is_empty());
}

#[test]
fn prediction_is_scale_invariant_and_ties_break_low() {
    let (x, labels) = gaussian_blobs(45, 3);
    let space = ColumnSpace::new("raw", x.clone());
    let outcome = train(TrainJob {
        space: &space,
        labels: &labels,
        config: quick_config(10, 11),
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: vec!["1".into(), "2".into(), "3".into()],
        eval: None,
    })
    .unwrap();
    let ens = &outcome.ensemble;

    // Duplicating every stage leaves the argmax unchanged.
    let mut doubled = ens.clone();
    doubled.stages.extend(ens.stages.iter().cloned());
    for i in 0..x.rows() {
        let a = predict_instance(ens, x.row(i)).unwrap().0;
        let b = predict_instance(&doubled, x.row(i)).unwrap().0;
        assert_eq!(a, b);
    }

    assert_eq!(argmax(&[0.5, 0.5, 0.1]), 0);
    assert_eq!(argmax(&[0.1, 0.5, 0.5]), 1);
}

#[test]
fn prediction_matches_brute_force_summation() {
    let (x, labels) = gaussian_blobs(36, 4);
    let space = ColumnSpace::new("raw", x.clone());
    let outcome = train(TrainJob {
        space: &space,
        labels: &labels,
        config: quick_config(8, 13),
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: vec!["1".into(), "2".into(), "3".into()],
        eval: None,
    })
    .unwrap();
    let ens = &outcome.ensemble;
    let mut out = vec![0.0; 3];
    for i in 0..x.rows() {
        let (_, scores) = predict_instance(ens, x.row(i)).unwrap();
        let mut direct = [0.0; 3];
        for stage in &ens.stages {
            stage.tree.output_for_row(&space, i, &mut out);
            for (d, &o) in direct.iter_mut().zip(&out) {
                *d += stage.alpha * o;
            }
        }
        for l in 0..3 {
            assert!((scores[l] - direct[l]).abs() < 1e-12);
        }
    }
}

fn blob_dataset(n: usize, seed: u64) -> Dataset {
    let (x, labels) = gaussian_blobs(n, seed);
    Dataset::new(
        x,
        labels.labels().to_vec(),
        3,
        None,
        vec!["1".into(), "2".into(), "3".into()],
    )
    .unwrap()
}

#[test]
fn evaluate_and_replay_agree_with_naive_recomputation() {
    let ds = blob_dataset(45, 5);
    let space = ColumnSpace::new("raw", ds.matrix().clone());
    let labels = ds.label_code();
    let outcome = train(TrainJob {
        space: &space,
        labels: &labels,
        config: quick_config(30, 17),
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: ds.label_names().to_vec(),
        eval: None,
    })
    .unwrap();
    let ens = &outcome.ensemble;

    let eval = evaluate(ens, &ds).unwrap();
    assert_eq!(eval.error, 0.0, "separable training set");

    let replay = replay_curve(ens, &ds).unwrap();
    assert_eq!(replay.len(), ens.stages.len());
    assert_eq!(*replay.last().unwrap(), eval.error);

    // Naive per-prefix recomputation.
    for prefix in 1..=ens.stages.len() {
        let mut truncated = ens.clone();
        truncated.stages.truncate(prefix);
        let e = evaluate(&truncated, &ds).unwrap();
        assert_eq!(
            (e.error * ds.n() as f64).round() as u32,
            (replay[prefix - 1] * ds.n() as f64).round() as u32
        );
    }
}

#[test]
fn evaluate_rejects_wrong_label_space() {
    let ds = blob_dataset(30, 6);
    let space = ColumnSpace::new("raw", ds.matrix().clone());
    let labels = ds.label_code();
    let ens = train(TrainJob {
        space: &space,
        labels: &labels,
        config: quick_config(2, 19),
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: ds.label_names().to_vec(),
        eval: None,
    })
    .unwrap()
    .ensemble;

    let other = Dataset::new(
        Matrix::zeros(2, 2),
        vec![1, 2],
        2,
        None,
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    assert!(matches!(evaluate(&ens, &other), Err(Error::Schema(_))));
}

#[test]
fn train_test_curve_records_cadence() {
    let ds = blob_dataset(30, 7);
    let test_ds = blob_dataset(15, 8);
    let space = ColumnSpace::new("raw", ds.matrix().clone());
    let test_space = ColumnSpace::new("raw", test_ds.matrix().clone());
    let labels = ds.label_code();
    let test_labels = test_ds.label_code();
    let mut config = quick_config(9, 23);
    config.curve_cadence = Some(4);
    let outcome = train(TrainJob {
        space: &space,
        labels: &labels,
        config,
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: ds.label_names().to_vec(),
        eval: Some(EvalSet {
            space: &test_space,
            labels: &test_labels,
        }),
    })
    .unwrap();
    for p in &outcome.curve.points {
        let expected = p.iteration % 4 == 0 || p.iteration == 9;
        assert_eq!(
            p.test_error.is_some(),
            expected,
            "iteration {}",
            p.iteration
        );
    }
}

#[test]
fn ensemble_file_round_trip_and_version_check() {
    let ds = blob_dataset(30, 9);
    let space = ColumnSpace::new("raw", ds.matrix().clone());
    let labels = ds.label_code();
    let ens = train(TrainJob {
        space: &space,
        labels: &labels,
        config: quick_config(3, 29),
        schema: SpaceSchema::Raw {
            dim: 2,
            geometry: None,
        },
        label_names: ds.label_names().to_vec(),
        eval: None,
    })
    .unwrap()
    .ensemble;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_ensemble(&ens, &path).unwrap();
    let back = load_ensemble(&path).unwrap();
    assert_eq!(back, ens);

    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("\"version\": 1", "\"version\": 2");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(load_ensemble(&path), Err(Error::Schema(_))));
}

#[test]
fn importance_sums_alpha_once_per_stage() {
    let tree_on = |col: u32, alpha: f64| Stage {
        alpha,
        tree: HammingTree {
            nodes: vec![crate::learner::TreeNode {
                stump: crate::learner::Stump {
                    feature: FeatureKey::Column(col),
                    threshold: 0.5,
                    votes: vec![1, -1],
                },
                left: None,
                right: None,
            }],
        },
    };
    let ens = Ensemble {
        k: 2,
        label_names: vec!["1".into(), "2".into()],
        schema: SpaceSchema::Raw {
            dim: 3,
            geometry: None,
        },
        config: quick_config(3, 0),
        stages: vec![tree_on(2, 0.5), tree_on(0, 0.25), tree_on(2, 0.125)],
    };
    let ranked = feature_importance(&ens);
    assert_eq!(
        ranked,
        vec![
            (FeatureKey::Column(2), 0.625),
            (FeatureKey::Column(0), 0.25)
        ]
    );
}
