use std::path::PathBuf;

use mrrbf::datasets::{animals_dataset, load_csv, AnimalContext, LabelColumn, LabeledDataset};
use mrrbf::evaluation::{error_rate, kfold_cross_validate, map_stats};
use mrrbf::learning::fit;
use mrrbf::mapexport::{export_json, parse_json, render_svg, snapshot_layer, SvgStyle};
use mrrbf::model::TrainedModel;
use mrrbf::preprocess::Scaling;
use mrrbf::topo::squared_euclidean;
use mrrbf::{GridShape, Network, NetworkConfig};
use proptest::prelude::*;

fn iris() -> LabeledDataset {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    load_csv(path, &LabelColumn::Last, true).unwrap()
}

#[test]
fn iris_train_save_reload_export() {
    let raw = iris();
    assert_eq!((raw.len(), raw.num_features(), raw.num_classes()), (150, 4, 3));
    let prep = Scaling::MinMax.fit(&raw).unwrap();
    let data = prep.apply(&raw).unwrap();

    let mut cfg = NetworkConfig::new(vec![GridShape::new(5, 5), GridShape::new(4, 4)], 4, 3);
    cfg.t_end = 40;
    cfg.rng_seed = 3;
    let mut net = Network::initialize_from_data(cfg, &data).unwrap();
    let curve = fit(&mut net, &data).unwrap();
    assert_eq!(curve.len(), 40);
    assert!(curve.last().unwrap().mean_error < curve[0].mean_error);
    let err = error_rate(&net, &data).unwrap();
    assert!(err < 0.5, "train error {err}");

    let model = TrainedModel {
        network: net,
        preprocessor: prep,
        class_names: data.class_names().to_vec(),
    };
    let text = model.to_json().unwrap();
    let back = TrainedModel::from_json(&text).unwrap();
    assert_eq!(back.to_json().unwrap(), text);
    let rescaled = back.preprocessor.apply(&raw).unwrap();
    assert_eq!(error_rate(&back.network, &rescaled).unwrap().to_bits(), err.to_bits());

    for layer in 1..=2 {
        let snap = snapshot_layer(&back.network, &rescaled, layer).unwrap();
        assert_eq!(snap.total_hits(), 150);
        let doc = parse_json(&export_json(&snap, Some(data.class_names()), None).unwrap()).unwrap();
        assert_eq!(doc.snapshot, snap);
        let svg = render_svg(&snap, data.class_names(), &SvgStyle::default()).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
        let stats = map_stats(&snap).unwrap();
        assert!(stats.num_winner_nodes >= 1 && stats.class_purity > 0.0);
    }
}

#[test]
fn cross_validation_is_reproducible() {
    let data = iris();
    let mut cfg = NetworkConfig::new(vec![GridShape::new(4, 4)], 4, 3);
    cfg.t_end = 15;
    let a = kfold_cross_validate(&cfg, &data, 5, 9, Scaling::MinMax).unwrap();
    let b = kfold_cross_validate(&cfg, &data, 5, 9, Scaling::MinMax).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.folds.iter().map(|f| f.test_size).sum::<usize>(), 150);
    assert!(a.folds.iter().all(|f| f.test_size == 30));
    assert!(a.warnings.is_empty());
}

#[test]
fn animals_contexts_share_features() {
    let sets: Vec<LabeledDataset> = AnimalContext::ALL
        .iter()
        .map(|&c| animals_dataset(c).unwrap())
        .collect();
    for s in &sets {
        assert_eq!(s.len(), 16);
        assert_eq!(s.features(), sets[0].features());
    }
    assert_ne!(sets[0].labels(), sets[2].labels());
}

proptest! {
    #[test]
    fn squared_distance_matches_naive_sum(
        pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..40),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        let fast = squared_euclidean(&a, &b);
        prop_assert!((fast - naive).abs() <= 1e-12 * naive.max(1.0), "{fast} vs {naive}");
    }
}
