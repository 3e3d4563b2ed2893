//! End-to-end behavior across modules on small fixtures.

use gaussembed::encoder::{embed, embed_all};
use gaussembed::eval::{
    detect_latent_dimensions, eval_classification, eval_link_prediction, pruning_curve, score_pair,
    ClassificationConfig, SplitPart,
};
use gaussembed::graph::{generate_sbm, split_edges, SbmConfig, SparseRows};
use gaussembed::train::{train_split, EpochRecord};
use gaussembed::{Attributes, EncoderParameters, TrainConfig, TrainingTrace};
use ndarray::Array2;
use proptest::prelude::*;

fn small_config(seed: u64) -> TrainConfig {
    TrainConfig {
        l_half: 8,
        hidden_sizes: vec![32],
        max_epochs: 300,
        seed,
        ..TrainConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn embeddings_do_not_depend_on_batching_or_storage(
        values in proptest::collection::vec(prop_oneof![Just(0.0), -2.0..2.0f64], 5 * 6),
        seed: u64,
    ) {
        let dense = Array2::from_shape_vec((5, 6), values).unwrap();
        let triplets: Vec<_> = dense
            .indexed_iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|((r, c), &v)| (r, c, v))
            .collect();
        let sparse = Attributes::Sparse(SparseRows::from_triplets(5, 6, triplets).unwrap());
        let dense = Attributes::Dense(dense);
        let params = EncoderParameters::init_xavier(6, &[7], 3, seed).unwrap();
        let all = embed_all(&params, &dense).unwrap();
        prop_assert_eq!(&all, &embed_all(&params, &sparse).unwrap());
        for i in 0..5 {
            let one = embed(&params, &dense, &[i]).unwrap();
            prop_assert_eq!(one.get(0).mu, all.get(i).mu);
            prop_assert_eq!(one.get(0).var, all.get(i).var);
        }
        prop_assert!(all.var.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn one_hot_matches_explicit_identity() {
    let params = EncoderParameters::init_xavier(4, &[5], 2, 1).unwrap();
    let a = embed_all(&params, &Attributes::OneHot(4)).unwrap();
    let b = embed_all(&params, &Attributes::Dense(Array2::eye(4))).unwrap();
    assert_eq!(a, b);
}

#[test]
fn training_beats_initialization_and_is_reproducible() {
    let g = generate_sbm(&SbmConfig {
        nodes: 90,
        p_in: 0.3,
        p_out: 0.01,
        seed: 4,
        ..SbmConfig::default()
    })
    .unwrap();
    let split = split_edges(&g, 0.1, 0.1, true, 4).unwrap();
    let out = train_split(&g, &split, &small_config(4)).unwrap();
    let first = &out.trace.records[0];
    let last = out.trace.records.last().unwrap();
    assert!(last.loss < first.loss, "{} -> {}", first.loss, last.loss);
    assert_eq!(
        out.trace.best_val_auc.is_some(),
        out.trace.best_epoch.is_some()
    );

    let again = train_split(&g, &split, &small_config(4)).unwrap();
    assert_eq!(out.params, again.params);
    assert_eq!(out.trace, again.trace);

    // The returned embeddings are those of the returned parameters.
    assert_eq!(
        out.embeddings,
        embed_all(&out.params, g.attributes().unwrap()).unwrap()
    );

    let report = eval_link_prediction(&out.params, &g, &split, SplitPart::Test).unwrap();
    let auc = report.metric("auc").unwrap();
    assert!((0.0..=1.0).contains(&auc));
    let curve = pruning_curve(&out.params, &g, &split, SplitPart::Test).unwrap();
    let rows = &curve.tables["curve"].rows;
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0][2], auc);

    for &(u, v) in split.test_edges.iter().take(10) {
        assert_eq!(
            score_pair(&out.embeddings, u, v, false),
            score_pair(&out.embeddings, v, u, false)
        );
    }

    let classes = eval_classification(
        &out.embeddings,
        g.labels().unwrap(),
        &ClassificationConfig {
            train_fractions: vec![0.5],
            n_trials: 3,
            cross_validate: false,
            ..ClassificationConfig::default()
        },
    )
    .unwrap();
    // Three well-separated blocks.
    assert!(classes.metric("accuracy").unwrap() > 0.9);
}

fn linear_trace(scale: f64) -> TrainingTrace {
    TrainingTrace {
        records: (1..=300)
            .map(|t| EpochRecord {
                epoch: t,
                loss: 0.0,
                val_auc: None,
                mean_variance: vec![scale, scale * (1.0 + 0.01 * t as f64), scale * 2.0],
                triplets_seen: 0,
            })
            .collect(),
        best_epoch: Some(50),
        ..TrainingTrace::default()
    }
}

#[test]
fn latent_rule_flags_growth_and_ignores_scale() {
    let a = detect_latent_dimensions(&linear_trace(1.0), 200, 1e-3).unwrap();
    let b = detect_latent_dimensions(&linear_trace(37.5), 200, 1e-3).unwrap();
    assert_eq!(a.flagged, vec![1]);
    assert_eq!(a.kept, vec![0, 2]);
    assert_eq!(a.flagged, b.flagged);
    let mut short = linear_trace(1.0);
    short.best_epoch = Some(150);
    assert!(detect_latent_dimensions(&short, 200, 1e-3).is_err());
}
