//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Experiment criteria load their settings from the shipped presets, so what
//! passes here is what `mrrbf --config presets/...` reproduces.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use mrrbf::datasets::{AnimalContext, LabeledDataset};
use mrrbf::evaluation::{
    compare_som, error_rate, kfold_cross_validate, map_stats, train_plain_som, MapStats, SomSchedule,
};
use mrrbf::gradcheck::{gradient_check_frozen, GradCheckScope};
use mrrbf::learning::{fit, update_hidden_layer};
use mrrbf::mapexport::snapshot_layer;
use mrrbf::model::TrainedModel;
use mrrbf::network::OutputLayer;
use mrrbf::topo::{layer_forward, squared_euclidean, TopographicLayer};
use mrrbf::{GridShape, Network, NetworkConfig};
use mrrbf_cli::config::LoadedConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn preset(name: &str) -> LoadedConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets")
        .join(format!("{name}.json"));
    LoadedConfig::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Scaled data and network config for a preset, with the seed replaced.
fn prepare(config: &LoadedConfig, seed: u64) -> (LabeledDataset, NetworkConfig) {
    let raw = config.load_dataset().expect("preset data loads");
    let data = config.scaling().fit(&raw).unwrap().apply(&raw).unwrap();
    let mut cfg = config
        .network_config(data.num_features(), data.num_classes())
        .expect("preset is valid");
    cfg.rng_seed = seed;
    (data, cfg)
}

fn trained(data: &LabeledDataset, cfg: NetworkConfig) -> (Network, Vec<mrrbf::learning::TrainRecord>) {
    let mut net = Network::initialize_from_data(cfg, data).unwrap();
    let curve = fit(&mut net, data).unwrap();
    (net, curve)
}

fn layer_stats(net: &Network, data: &LabeledDataset, layer: usize) -> MapStats {
    map_stats(&snapshot_layer(net, data, layer).unwrap()).unwrap()
}

fn within(elapsed: Duration, limit: Duration, detail: String, pass: bool) -> Outcome {
    let line = format!("{detail}; {:.1}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs());
    if pass && elapsed <= limit {
        Ok(line)
    } else {
        Err(line)
    }
}

const GRAD_EPSILON: f64 = 1e-3;

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_full, mut worst_out, mut excluded, mut redrawn) = (0.0f64, 0.0f64, 0, 0);
    for i in 0..50 {
        let depth = 1 + i % 2;
        let grids: Vec<GridShape> = (0..depth)
            .map(|_| GridShape::new(rng.gen_range(1..=5), rng.gen_range(1..=5)))
            .collect();
        let dim = rng.gen_range(1..=10);
        let classes = rng.gen_range(2..=4);
        let mut cfg = NetworkConfig::new(grids, dim, classes);
        cfg.rng_seed = rng.gen();
        let net = Network::initialize(cfg, &vec![(0.0, 1.0); dim]).unwrap();
        let mut t = vec![0.0; classes];
        t[rng.gen_range(0..classes)] = 1.0;
        let widths: Vec<f64> = (0..depth).map(|_| rng.gen_range(0.5..4.0)).collect();
        // an input sitting on a BMU tie is a degenerate instance; draw another
        let (full, out) = loop {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen()).collect();
            match gradient_check_frozen(&net, &x, &t, &widths, GRAD_EPSILON, GradCheckScope::Full) {
                Err(mrrbf::Error::DegenerateGradientCheck { .. }) if redrawn < 100 => redrawn += 1,
                full => {
                    let out = gradient_check_frozen(&net, &x, &t, &widths, GRAD_EPSILON, GradCheckScope::OutputOnly);
                    break (full.map_err(|e| e.to_string())?, out.map_err(|e| e.to_string())?);
                }
            }
        };
        worst_full = worst_full.max(full.max_relative_error);
        worst_out = worst_out.max(out.max_relative_error);
        excluded += full.excluded;
    }
    within(
        start.elapsed(),
        Duration::from_secs(60),
        format!("50 nets: full max rel {worst_full:.2e} (< 1e-4), output-only {worst_out:.2e} (< 1e-6), {excluded} BMU-flip exclusions, {redrawn} degenerate inputs redrawn"),
        worst_full < 1e-4 && worst_out < 1e-6,
    )
}

/// Textbook Kohonen step on a flat weight array.
fn classical_kohonen(w: &mut [f64], rows: usize, cols: usize, dim: usize, x: &[f64], s: f64, eta: f64) {
    let mut best = (0, f64::INFINITY);
    for n in 0..rows * cols {
        let d: f64 = (0..dim).map(|j| (w[n * dim + j] - x[j]).powi(2)).sum();
        if d < best.1 {
            best = (n, d);
        }
    }
    let (br, bc) = ((best.0 / cols) as f64, (best.0 % cols) as f64);
    for n in 0..rows * cols {
        let (r, c) = ((n / cols) as f64, (n % cols) as f64);
        let d2 = (r - br).powi(2) + (c - bc).powi(2);
        let h = if d2 == 0.0 { 1.0 } else { (-d2 / s).exp() };
        for j in 0..dim {
            let old = w[n * dim + j];
            w[n * dim + j] = old + eta * (h * (x[j] - old));
        }
    }
}

fn random_layer(rng: &mut ChaCha8Rng) -> (TopographicLayer, Vec<f64>, f64, f64) {
    let (r, c, d) = (rng.gen_range(1..=8), rng.gen_range(1..=8), rng.gen_range(1..=12));
    let w: Vec<f64> = (0..r * c * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let s = rng.gen_range(0.1..20.0);
    let eta = rng.gen_range(0.001..1.0);
    (
        TopographicLayer::from_weights(GridShape::new(r, c), d, w).unwrap(),
        x,
        s,
        eta,
    )
}

fn som_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let (mut layer, x, s, eta) = random_layer(&mut rng);
        let shape = layer.shape();
        let mut reference = layer.weights().to_vec();
        classical_kohonen(&mut reference, shape.rows, shape.cols, layer.input_dim(), &x, s, eta);
        let act = layer_forward(&layer, &x, s).unwrap();
        let unit = vec![1.0; layer.node_count()];
        update_hidden_layer(&mut layer, &unit, &act, &x, eta).unwrap();
        if layer.weights() != reference.as_slice() {
            mismatches += 1;
        }
    }
    within(
        start.elapsed(),
        Duration::from_secs(10),
        format!("{mismatches}/1000 instances differ bitwise from the classical step"),
        mismatches == 0,
    )
}

fn repulsion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut checked, mut failures) = (0usize, 0usize);
    for _ in 0..1000 {
        let (mut layer, x, s, _) = random_layer(&mut rng);
        let eta = rng.gen_range(0.001..0.2);
        let delta: Vec<f64> = (0..layer.node_count()).map(|_| -rng.gen_range(0.01..1.0)).collect();
        let before = layer.clone();
        let act = layer_forward(&layer, &x, s).unwrap();
        update_hidden_layer(&mut layer, &delta, &act, &x, eta).unwrap();
        for k in 0..layer.node_count() {
            let old = squared_euclidean(before.reference(k), &x);
            // nodes far from the winner get a step below rounding; the winner always moves
            if k != act.bmu_index && eta * delta[k].abs() * act.neighborhood[k] < 1e-9 || old == 0.0 {
                continue;
            }
            checked += 1;
            if squared_euclidean(layer.reference(k), &x) <= old {
                failures += 1;
            }
        }
    }
    let detail = format!("{failures} of {checked} nodes with negative delta failed to move away");
    if failures == 0 && checked >= 1000 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn is_pure(s: &MapStats) -> bool {
    s.class_purity == 1.0
}

fn animals() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for ctx in AnimalContext::ALL {
        let config = preset(&format!("animals-{}", ctx.name()));
        let runs: Vec<(MapStats, f64, f64)> = (0..10)
            .map(|seed| {
                let (data, cfg) = prepare(&config, seed);
                let som = train_plain_som(cfg.layer_grids[0], &data, &SomSchedule::from_config(&cfg)).unwrap();
                let som_net = Network::from_parts(
                    cfg.clone(),
                    vec![som],
                    OutputLayer::zeros(cfg.layer_grids[0].node_count(), data.num_classes()),
                )
                .unwrap();
                let som_purity = layer_stats(&som_net, &data, 1).class_purity;
                let (net, _) = trained(&data, cfg);
                (
                    layer_stats(&net, &data, 1),
                    error_rate(&net, &data).unwrap(),
                    som_purity,
                )
            })
            .collect();
        let good = runs
            .iter()
            .filter(|(s, _, _)| is_pure(s) && s.num_winner_nodes <= 10)
            .count();
        let pure = runs.iter().filter(|(s, _, _)| is_pure(s)).count();
        let winners: Vec<usize> = runs.iter().map(|(s, _, _)| s.num_winner_nodes).collect();
        let som_mean = runs.iter().map(|r| r.2).sum::<f64>() / 10.0;
        match ctx {
            AnimalContext::Speed => {
                let data = preset("animals-speed").load_dataset().unwrap();
                let counts = data.class_counts();
                let fits = runs.iter().filter(|r| r.1 == 0.0).count();
                pass &= counts == [7, 6, 3] && fits > 0;
                lines.push(format!(
                    "speed: classes {counts:?}, {fits}/10 seeds fit exactly, pure {pure}/10, winners {winners:?} (not bounded), SOM purity {som_mean:.2}"
                ));
            }
            _ => {
                pass &= good >= 8;
                lines.push(format!(
                    "{}: pure with <= 10 winners {good}/10, winners {winners:?}, SOM purity {som_mean:.2}",
                    ctx.name()
                ));
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(60), lines.join("; "), pass)
}

fn mnist() -> Outcome {
    let start = Instant::now();
    let config = preset("mnist-subset");
    let mut good = 0;
    let mut lines = Vec::new();
    for seed in 0..5 {
        let (data, cfg) = prepare(&config, seed);
        assert_eq!(data.len(), 1269);
        let cmp = compare_som(&cfg, &data).unwrap();
        let ok = cmp.rrbf_error <= 0.01
            && cmp.rrbf_error < cmp.som_error
            && cmp.rrbf_stats.class_purity > cmp.som_stats.class_purity;
        good += usize::from(ok);
        lines.push(format!(
            "seed {seed}: err {:.4} vs SOM {:.4}, purity {:.3} vs {:.3}",
            cmp.rrbf_error, cmp.som_error, cmp.rrbf_stats.class_purity, cmp.som_stats.class_purity
        ));
    }
    let detail = format!("{good}/5 seeds meet all three conditions; {}", lines.join("; "));
    within(start.elapsed(), Duration::from_secs(15 * 60), detail, good >= 4)
}

fn depth_sparsity() -> Outcome {
    let config = preset("iris-depth2");
    let mut good = 0;
    let mut lines = Vec::new();
    for seed in 0..5 {
        let (data, cfg) = prepare(&config, seed);
        let (net, _) = trained(&data, cfg);
        let (l1, l2) = (layer_stats(&net, &data, 1), layer_stats(&net, &data, 2));
        let ok = l2.num_winner_nodes <= l1.num_winner_nodes && l2.margin_or_infinity() >= l1.margin_or_infinity();
        good += usize::from(ok);
        lines.push(format!(
            "seed {seed}: winners {}->{}, margin {:.2}->{:.2}",
            l1.num_winner_nodes,
            l2.num_winner_nodes,
            l1.margin_or_infinity(),
            l2.margin_or_infinity()
        ));
    }
    let detail = format!(
        "{good}/5 seeds sparser with wider margins at layer 2; {}",
        lines.join("; ")
    );
    if good >= 4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn generalization() -> Outcome {
    let start = Instant::now();
    let mut reports = Vec::new();
    for name in ["iris-depth1", "iris-depth2"] {
        let config = preset(name);
        let raw = config.load_dataset().unwrap();
        let cfg = config.network_config(raw.num_features(), raw.num_classes()).unwrap();
        let k = config.run.k.unwrap_or(10);
        reports.push(kfold_cross_validate(&cfg, &raw, k, cfg.rng_seed, config.scaling()).unwrap());
    }
    let (d1, d2) = (&reports[0], &reports[1]);
    let bound = d1.mean_test_error + 2.0 * d1.std_test_error;
    let detail = format!(
        "{}-fold CV seed {}: depth 1 {:.4} ± {:.4}, depth 2 {:.4} ± {:.4} (each <= 0.10; depth 2 <= {bound:.4})",
        d1.k, d1.seed, d1.mean_test_error, d1.std_test_error, d2.mean_test_error, d2.std_test_error
    );
    let pass = d1.mean_test_error <= 0.10 && d2.mean_test_error <= 0.10 && d2.mean_test_error <= bound;
    within(start.elapsed(), Duration::from_secs(300), detail, pass)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mrrbf"))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "mrrbf {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn preset_path(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets")
        .join(format!("{name}.json"));
    p.to_string_lossy().into_owned()
}

fn learning_curve() -> Outcome {
    let config = preset("iris-depth1");
    let mut decreasing = 0;
    for seed in 0..10 {
        let (data, cfg) = prepare(&config, seed);
        let (_, curve) = trained(&data, cfg);
        if curve.last().unwrap().mean_error < curve[0].mean_error {
            decreasing += 1;
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("run");
    cli(&[
        "train",
        "--config",
        &preset_path("iris-depth1"),
        "--out-dir",
        out.to_str().unwrap(),
    ])?;
    let csv = std::fs::read_to_string(out.join("learning_curve.csv")).map_err(|e| e.to_string())?;
    let rows = csv.lines().count() - 1;
    let (_, cfg) = prepare(&config, 0);
    let detail = format!(
        "{decreasing}/10 curves end below their start; CSV has {rows} rows for t_end = {}",
        cfg.t_end
    );
    if decreasing == 10 && rows == cfg.t_end {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn json_file(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let config = preset("iris-depth2");
    let (data, cfg) = prepare(&config, 3);
    let (net, _) = trained(&data, cfg);
    let prep = config.scaling().fit(&config.load_dataset().unwrap()).unwrap();
    let model = TrainedModel {
        network: net,
        preprocessor: prep,
        class_names: data.class_names().to_vec(),
    };
    let reloaded = TrainedModel::from_json(&model.to_json().unwrap()).unwrap();
    let in_process = error_rate(&model.network, &data).unwrap().to_bits()
        == error_rate(&reloaded.network, &data).unwrap().to_bits()
        && reloaded.network == model.network;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = preset_path("iris-depth2");
    let runs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for run in &runs {
        cli(&[
            "train",
            "--config",
            &cfg_path,
            "--out-dir",
            run.to_str().unwrap(),
            "--epochs",
            "60",
        ])?;
    }
    cli(&[
        "eval",
        "--config",
        &cfg_path,
        "--out-dir",
        runs[0].to_str().unwrap(),
        "--epochs",
        "60",
    ])?;
    let read = |p: PathBuf| std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()));
    let identical = read(runs[0].join("model.json"))? == read(runs[1].join("model.json"))?;
    let trained_err = json_file(&runs[0].join("metrics.json"))?["train_error"].as_f64();
    let eval_err = json_file(&runs[0].join("eval.json"))?["error_rate"].as_f64();
    let same_err = trained_err.is_some() && trained_err.map(f64::to_bits) == eval_err.map(f64::to_bits);
    let detail = format!(
        "in-process reload bitwise {in_process}; CLI model files identical {identical}; CLI eval {eval_err:?} vs train {trained_err:?}"
    );
    if in_process && identical && same_err {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zero_context_freeze() -> Outcome {
    let config = preset("iris-depth2");
    let (data, mut cfg) = prepare(&config, 5);
    cfg.t_end = 100;
    cfg.eta_out = 0.0;
    let init = Network::initialize_from_data(cfg.clone(), &data).unwrap();
    let head = OutputLayer::zeros(cfg.layer_grids.last().unwrap().node_count(), data.num_classes());
    let mut net = Network::from_parts(cfg, init.hidden_layers().to_vec(), head).unwrap();
    let before = net.hidden_layers().to_vec();
    fit(&mut net, &data).unwrap();
    let unchanged = net.hidden_layers() == before.as_slice();
    let detail = format!("hidden layers bitwise unchanged after 100 epochs: {unchanged}");
    if unchanged {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("gradient correctness", gradient_correctness),
        ("SOM equivalence", som_equivalence),
        ("repulsion", repulsion),
        ("animals maps", animals),
        ("MNIST subset vs SOM", mnist),
        ("depth and sparsity", depth_sparsity),
        ("generalization", generalization),
        ("learning curve", learning_curve),
        ("determinism and serialization", determinism),
        ("zero-context freeze", zero_context_freeze),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        match check() {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
