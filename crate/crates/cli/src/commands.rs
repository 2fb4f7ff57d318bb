use std::path::{Path, PathBuf};

use mrrbf::datasets::LabeledDataset;
use mrrbf::evaluation::{compare_som, error_rate, kfold_cross_validate, map_stats, MapStats};
use mrrbf::learning::fit_with;
use mrrbf::mapexport::{snapshot_layer, MapSnapshot};
use mrrbf::model::TrainedModel;
use mrrbf::{Network, NetworkConfig};
use serde_json::{json, Value};

use crate::config::{runtime, usage, Failure, LoadedConfig};
use crate::output::{curve_csv, write_atomic, write_json, write_map};

fn echo(config: &LoadedConfig, net: &NetworkConfig) -> Result<Value, Failure> {
    Ok(json!({
        "run": serde_json::to_value(&config.run).map_err(runtime)?,
        "network": serde_json::to_value(net).map_err(runtime)?,
    }))
}

/// Raw data, the fitted preprocessor and the scaled training set.
fn prepared(config: &LoadedConfig) -> Result<(mrrbf::preprocess::Preprocessor, LabeledDataset), Failure> {
    let raw = config.load_dataset()?;
    let prep = config.scaling().fit(&raw).map_err(runtime)?;
    let data = prep.apply(&raw).map_err(runtime)?;
    Ok((prep, data))
}

fn snapshots(net: &Network, data: &LabeledDataset) -> mrrbf::Result<Vec<MapSnapshot>> {
    (1..=net.hidden_layers().len())
        .map(|l| snapshot_layer(net, data, l))
        .collect()
}

fn stats_json(stats: &MapStats) -> Value {
    json!({
        "num_winner_nodes": stats.num_winner_nodes,
        "class_purity": stats.class_purity,
        "min_interclass_margin": stats.min_interclass_margin,
    })
}

pub fn train(config: &LoadedConfig) -> Result<(), Failure> {
    let out = config.out_dir();
    let (prep, data) = prepared(config)?;
    let cfg = config.network_config(data.num_features(), data.num_classes())?;
    let config_echo = echo(config, &cfg)?;
    let mut net = Network::initialize_from_data(cfg, &data).map_err(runtime)?;

    let checkpoints = &config.run.checkpoints;
    let mut taken = Vec::new();
    let curve = fit_with(&mut net, &data, |record, net| {
        if checkpoints.contains(&record.epoch) {
            taken.push((record.epoch, snapshots(net, &data)?));
        }
        Ok(())
    })
    .map_err(runtime)?;

    let maps = out.join("maps");
    let names = data.class_names();
    for (epoch, snaps) in &taken {
        for s in snaps {
            let title = format!("layer {} after epoch {epoch}", s.layer_index);
            write_map(
                &maps,
                &format!("layer{}_epoch{epoch}", s.layer_index),
                s,
                names,
                title,
                &config_echo,
            )?;
        }
    }
    let finals = snapshots(&net, &data).map_err(runtime)?;
    let mut layer_stats = Vec::new();
    for s in &finals {
        write_map(
            &maps,
            &format!("layer{}_final", s.layer_index),
            s,
            names,
            format!("layer {}", s.layer_index),
            &config_echo,
        )?;
        layer_stats.push(stats_json(&map_stats(s).map_err(runtime)?));
    }

    let train_error = error_rate(&net, &data).map_err(runtime)?;
    write_atomic(&out.join("learning_curve.csv"), curve_csv(&curve).as_bytes())?;
    let model = TrainedModel {
        network: net,
        preprocessor: prep,
        class_names: names.to_vec(),
    };
    write_atomic(&out.join("model.json"), model.to_json().map_err(runtime)?.as_bytes())?;
    write_json(
        &out.join("metrics.json"),
        &json!({
            "train_error": train_error,
            "instances": data.len(),
            "layers": layer_stats,
            "config": config_echo,
        }),
    )?;
    println!("train error: {train_error}");
    Ok(())
}

fn load_model(path: &Path) -> Result<TrainedModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    TrainedModel::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Raw data scaled with the preprocessor stored in the model.
fn model_data(config: &LoadedConfig, model: &TrainedModel) -> Result<LabeledDataset, Failure> {
    let raw = config.load_dataset()?;
    if raw.num_features() != model.network.config().input_dim {
        return Err(usage(format!(
            "dataset has {} features, model expects {}",
            raw.num_features(),
            model.network.config().input_dim
        )));
    }
    model.preprocessor.apply(&raw).map_err(usage)
}

fn model_path(config: &LoadedConfig, model: Option<PathBuf>) -> PathBuf {
    model.unwrap_or_else(|| config.out_dir().join("model.json"))
}

pub fn eval(config: &LoadedConfig, model: Option<PathBuf>) -> Result<(), Failure> {
    let path = model_path(config, model);
    let model = load_model(&path)?;
    let data = model_data(config, &model)?;
    let err = error_rate(&model.network, &data).map_err(runtime)?;
    write_json(
        &config.out_dir().join("eval.json"),
        &json!({
            "error_rate": err,
            "instances": data.len(),
            "model": path.display().to_string(),
        }),
    )?;
    println!("error rate: {err}");
    Ok(())
}

pub fn export_map(config: &LoadedConfig, model: Option<PathBuf>, layer: Option<usize>) -> Result<(), Failure> {
    let model = load_model(&model_path(config, model))?;
    let data = model_data(config, &model)?;
    let layers = model.network.hidden_layers().len();
    let wanted: Vec<usize> = match layer {
        Some(l) if l == 0 || l > layers => {
            return Err(usage(format!(
                "layer {l} out of range (model has {layers} hidden layers)"
            )))
        }
        Some(l) => vec![l],
        None => (1..=layers).collect(),
    };
    let config_echo = serde_json::to_value(model.network.config()).map_err(runtime)?;
    let dir = config.out_dir().join("maps");
    for l in wanted {
        let s = snapshot_layer(&model.network, &data, l).map_err(runtime)?;
        write_map(
            &dir,
            &format!("layer{l}"),
            &s,
            &model.class_names,
            format!("layer {l}"),
            &config_echo,
        )?;
        println!("wrote {}", dir.join(format!("layer{l}.svg")).display());
    }
    Ok(())
}

pub fn crossval(config: &LoadedConfig, k: usize) -> Result<(), Failure> {
    let raw = config.load_dataset()?;
    let cfg = config.network_config(raw.num_features(), raw.num_classes())?;
    if k < 2 {
        return Err(usage(format!("k must be at least 2, got {k}")));
    }
    if raw.len() < k {
        return Err(usage(format!("{} instances cannot be split into {k} folds", raw.len())));
    }
    let report = kfold_cross_validate(&cfg, &raw, k, cfg.rng_seed, config.scaling()).map_err(runtime)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let out = config.out_dir();
    let mut csv = String::from("fold,train_error,test_error\n");
    for f in &report.folds {
        csv.push_str(&format!(
            "{},{},{}\n",
            f.fold_index, f.train_error_rate, f.test_error_rate
        ));
    }
    write_atomic(&out.join("cv_folds.csv"), csv.as_bytes())?;
    write_json(
        &out.join("cv_summary.json"),
        &json!({
            "k": report.k,
            "seed": report.seed,
            "fold_seeds": report.folds.iter().map(|f| f.seed).collect::<Vec<_>>(),
            "mean_test_error": report.mean_test_error,
            "std_test_error": report.std_test_error,
            "mean_train_error": report.mean_train_error,
            "std_train_error": report.std_train_error,
            "warnings": report.warnings,
            "config": echo(config, &cfg)?,
        }),
    )?;
    println!("test error: {} ± {}", report.mean_test_error, report.std_test_error);
    Ok(())
}

pub fn compare(config: &LoadedConfig) -> Result<(), Failure> {
    let (_, data) = prepared(config)?;
    let cfg = config.network_config(data.num_features(), data.num_classes())?;
    if cfg.layer_grids.len() != 1 {
        return Err(usage("compare-som needs exactly one grid"));
    }
    let config_echo = echo(config, &cfg)?;
    let cmp = compare_som(&cfg, &data).map_err(runtime)?;

    let out = config.out_dir();
    let names = data.class_names();
    write_map(
        &out,
        "rrbf_map",
        &cmp.rrbf_snapshot,
        names,
        "rRBF hidden map".into(),
        &config_echo,
    )?;
    write_map(
        &out,
        "som_map",
        &cmp.som_snapshot,
        names,
        "SOM map".into(),
        &config_echo,
    )?;
    write_atomic(
        &out.join("rrbf_learning_curve.csv"),
        curve_csv(&cmp.rrbf_curve).as_bytes(),
    )?;
    write_atomic(
        &out.join("som_readout_curve.csv"),
        curve_csv(&cmp.som_readout_curve).as_bytes(),
    )?;
    write_json(
        &out.join("compare.json"),
        &json!({
            "rrbf": { "train_error": cmp.rrbf_error, "map": stats_json(&cmp.rrbf_stats) },
            "som": { "train_error": cmp.som_error, "map": stats_json(&cmp.som_stats) },
            "config": config_echo,
        }),
    )?;
    println!(
        "rrbf: error {} purity {} winners {}",
        cmp.rrbf_error, cmp.rrbf_stats.class_purity, cmp.rrbf_stats.num_winner_nodes
    );
    println!(
        "som:  error {} purity {} winners {}",
        cmp.som_error, cmp.som_stats.class_purity, cmp.som_stats.num_winner_nodes
    );
    Ok(())
}
