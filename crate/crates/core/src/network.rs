//! Network configuration, the sigmoid output head and the full forward pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::topo::{check_width, layer_forward, layer_forward_with_bmu, GridShape, LayerActivation, TopographicLayer};

pub const DEFAULT_S_END: f64 = 0.25;
pub const DEFAULT_ETA_OUT: f64 = 0.1;
pub const DEFAULT_ETA_HID: f64 = 0.05;
pub const DEFAULT_EPOCHS: usize = 300;

/// How reference vectors are seeded.
///
/// With `O_k = exp(−I_k)·σ`, every delta carries a factor `exp(−I_k)`, so a
/// layer whose reference vectors start far from its inputs never receives a
/// usable gradient. Uniform draws are far from the data whenever the input is
/// high-dimensional, which is always the case above the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Layer 1 uniform within the feature ranges, deeper layers uniform in [0, 1].
    Uniform,
    /// Layer 1 uniform within the feature ranges; each deeper node copies the
    /// output of the layer below for a randomly drawn training instance.
    #[default]
    DeepSamples,
    /// Every node copies a randomly drawn training instance, propagated
    /// through the layers below for deeper layers.
    Samples,
}

/// Architecture and hyperparameters of an M-rRBF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Grid of each hidden layer, input side first.
    pub layer_grids: Vec<GridShape>,
    pub input_dim: usize,
    pub num_classes: usize,
    /// Initial neighborhood width.
    pub s0: f64,
    /// Final neighborhood width, also used at inference.
    pub s_end: f64,
    /// Number of training epochs.
    pub t_end: usize,
    pub eta_out: f64,
    pub eta_hid: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub init: InitScheme,
}

impl NetworkConfig {
    /// Config with the default schedule: `s0` covers the map (largest grid
    /// side squared over four), `s_end = 0.25`, 300 epochs.
    pub fn new(layer_grids: Vec<GridShape>, input_dim: usize, num_classes: usize) -> Self {
        let side = layer_grids.iter().map(|g| g.rows.max(g.cols)).max().unwrap_or(1) as f64;
        NetworkConfig {
            layer_grids,
            input_dim,
            num_classes,
            s0: (side * side / 4.0).max(DEFAULT_S_END),
            s_end: DEFAULT_S_END,
            t_end: DEFAULT_EPOCHS,
            eta_out: DEFAULT_ETA_OUT,
            eta_hid: DEFAULT_ETA_HID,
            rng_seed: 0,
            init: InitScheme::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.layer_grids.is_empty() {
            return bad("at least one hidden layer is required");
        }
        if self.layer_grids.iter().any(|g| g.node_count() == 0) {
            return bad("hidden grids must have positive dimensions");
        }
        if self.input_dim == 0 {
            return bad("input_dim must be positive");
        }
        if self.num_classes < 2 {
            return bad("num_classes must be at least 2");
        }
        if !(self.s_end.is_finite() && self.s_end > 0.0 && self.s0.is_finite()) {
            return bad("s0 and s_end must be finite and positive");
        }
        if self.s_end > self.s0 {
            return bad("s_end must not exceed s0");
        }
        if !(self.eta_out.is_finite() && self.eta_out >= 0.0) {
            return bad("eta_out must be finite and non-negative");
        }
        if !(self.eta_hid.is_finite() && self.eta_hid >= 0.0) {
            return bad("eta_hid must be finite and non-negative");
        }
        Ok(())
    }

    pub fn num_hidden_layers(&self) -> usize {
        self.layer_grids.len()
    }

    /// Width used by every layer at inference time.
    pub fn inference_widths(&self) -> Vec<f64> {
        vec![self.s_end; self.layer_grids.len()]
    }
}

/// Annealed neighborhood width `s0·(s_end/s0)^(t/t_end)` at epoch `t`.
pub fn anneal_width(t: usize, config: &NetworkConfig) -> Result<f64> {
    if t > config.t_end {
        return Err(Error::EpochOutOfRange {
            epoch: t,
            t_end: config.t_end,
        });
    }
    if t == 0 {
        return Ok(config.s0);
    }
    if t == config.t_end {
        return Ok(config.s_end);
    }
    let frac = t as f64 / config.t_end as f64;
    Ok(config.s0 * (config.s_end / config.s0).powf(frac))
}

/// Dense sigmoid head. `weights[k * num_classes + l]` connects hidden node `k`
/// of the last layer to output `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputLayer {
    num_hidden: usize,
    num_classes: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

/// Output-layer net inputs `I_l` and activations `y_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputActivation {
    pub pre: Vec<f64>,
    pub y: Vec<f64>,
}

impl OutputLayer {
    pub fn zeros(num_hidden: usize, num_classes: usize) -> Self {
        OutputLayer {
            num_hidden,
            num_classes,
            weights: vec![0.0; num_hidden * num_classes],
            biases: vec![0.0; num_classes],
        }
    }

    pub fn from_parts(num_hidden: usize, num_classes: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        Error::check_dim("output weights", num_hidden * num_classes, weights.len())?;
        Error::check_dim("output biases", num_classes, biases.len())?;
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("output layer"));
        }
        Ok(OutputLayer {
            num_hidden,
            num_classes,
            weights,
            biases,
        })
    }

    pub fn num_hidden(&self) -> usize {
        self.num_hidden
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn weight(&self, hidden: usize, class: usize) -> f64 {
        self.weights[hidden * self.num_classes + class]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.is_finite())
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `I_l = Σ_k v_kl·O_k − θ_l`, `y_l = sigmoid(I_l)`.
pub fn output_forward(output: &OutputLayer, hidden_out: &[f64]) -> Result<OutputActivation> {
    Error::check_dim("output layer input", output.num_hidden, hidden_out.len())?;
    let mut pre: Vec<f64> = output.biases.iter().map(|b| -b).collect();
    for (row, &o) in output.weights.chunks_exact(output.num_classes).zip(hidden_out) {
        if o == 0.0 {
            continue;
        }
        for (acc, v) in pre.iter_mut().zip(row) {
            *acc += v * o;
        }
    }
    let y = pre.iter().map(|&i| sigmoid(i)).collect();
    Ok(OutputActivation { pre, y })
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn check_ranges(feature_ranges: &[(f64, f64)]) -> Result<()> {
    if feature_ranges
        .iter()
        .any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(Error::InvalidConfig(
            "feature ranges must be finite with min <= max".into(),
        ));
    }
    Ok(())
}

/// First hidden layer with components uniform within the feature ranges.
pub(crate) fn init_input_layer(
    grid: GridShape,
    feature_ranges: &[(f64, f64)],
    rng: &mut ChaCha8Rng,
) -> Result<TopographicLayer> {
    TopographicLayer::from_fn(grid, feature_ranges.len(), |j| {
        let (lo, hi) = feature_ranges[j];
        uniform(rng, lo, hi)
    })
}

/// First hidden layer under `scheme`. Shared with the plain SOM so both start
/// from the same map for a seed.
pub(crate) fn init_first_layer(
    grid: GridShape,
    data: &LabeledDataset,
    scheme: InitScheme,
    rng: &mut ChaCha8Rng,
) -> Result<TopographicLayer> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match scheme {
        InitScheme::Samples => {
            let mut weights = Vec::with_capacity(grid.node_count() * data.num_features());
            for _ in 0..grid.node_count() {
                weights.extend_from_slice(data.row(rng.gen_range(0..data.len())));
            }
            TopographicLayer::from_weights(grid, data.num_features(), weights)
        }
        InitScheme::Uniform | InitScheme::DeepSamples => {
            let ranges = data.feature_ranges()?;
            check_ranges(&ranges)?;
            init_input_layer(grid, &ranges, rng)
        }
    }
}

/// Output of `layers` for instance `x` at width `s` on every layer.
fn propagate(layers: &[TopographicLayer], x: &[f64], s: f64) -> Result<Vec<f64>> {
    let mut signal = x.to_vec();
    for layer in layers {
        signal = layer_forward(layer, &signal, s)?.outputs;
    }
    Ok(signal)
}

fn init_output_layer(num_hidden: usize, num_classes: usize, rng: &mut ChaCha8Rng) -> Result<OutputLayer> {
    let weights = (0..num_hidden * num_classes).map(|_| uniform(rng, -0.5, 0.5)).collect();
    OutputLayer::from_parts(num_hidden, num_classes, weights, vec![0.0; num_classes])
}

/// Hidden stack plus output head.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    hidden_layers: Vec<TopographicLayer>,
    output_layer: OutputLayer,
    config: NetworkConfig,
}

/// Every intermediate quantity of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub activations: Vec<LayerActivation>,
    pub output: OutputActivation,
}

impl ForwardPass {
    pub fn y(&self) -> &[f64] {
        &self.output.y
    }

    /// Output of the last hidden layer, the input of the sigmoid head.
    pub fn top_hidden(&self) -> &[f64] {
        &self.activations.last().expect("at least one hidden layer").outputs
    }
}

impl Network {
    /// Seeded initialization with the uniform rule whatever `config.init`
    /// says: layer-1 components uniform within `feature_ranges[j]`, deeper
    /// layers uniform in [0, 1], output weights uniform in [−0.5, 0.5],
    /// biases zero.
    pub fn initialize(config: NetworkConfig, feature_ranges: &[(f64, f64)]) -> Result<Self> {
        config.validate()?;
        Error::check_dim("feature ranges", config.input_dim, feature_ranges.len())?;
        check_ranges(feature_ranges)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let mut hidden_layers = Vec::with_capacity(config.layer_grids.len());
        hidden_layers.push(init_input_layer(config.layer_grids[0], feature_ranges, &mut rng)?);
        let mut input_dim = config.layer_grids[0].node_count();
        for &grid in &config.layer_grids[1..] {
            hidden_layers.push(TopographicLayer::from_fn(grid, input_dim, |_| {
                uniform(&mut rng, 0.0, 1.0)
            })?);
            input_dim = grid.node_count();
        }
        let output_layer = init_output_layer(input_dim, config.num_classes, &mut rng)?;
        Ok(Network {
            hidden_layers,
            output_layer,
            config,
        })
    }

    /// Seeded initialization following `config.init`, drawing samples from
    /// `data` where the scheme asks for them. Deeper layers see their
    /// samples through the layers below at width `s0`, the width of the
    /// first epoch. Output weights and biases as in [`Network::initialize`].
    pub fn initialize_from_data(config: NetworkConfig, data: &LabeledDataset) -> Result<Self> {
        config.validate()?;
        Error::check_dim("dataset features", config.input_dim, data.num_features())?;
        if config.init == InitScheme::Uniform {
            return Network::initialize(config, &data.feature_ranges()?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let mut hidden_layers = Vec::with_capacity(config.layer_grids.len());
        hidden_layers.push(init_first_layer(config.layer_grids[0], data, config.init, &mut rng)?);
        for &grid in &config.layer_grids[1..] {
            let mut weights = Vec::new();
            for _ in 0..grid.node_count() {
                let x = data.row(rng.gen_range(0..data.len()));
                weights.extend(propagate(&hidden_layers, x, config.s0)?);
            }
            let dim = hidden_layers.last().map_or(0, TopographicLayer::node_count);
            hidden_layers.push(TopographicLayer::from_weights(grid, dim, weights)?);
        }
        let top = hidden_layers.last().map_or(0, TopographicLayer::node_count);
        let output_layer = init_output_layer(top, config.num_classes, &mut rng)?;
        Ok(Network {
            hidden_layers,
            output_layer,
            config,
        })
    }

    pub fn from_parts(
        config: NetworkConfig,
        hidden_layers: Vec<TopographicLayer>,
        output_layer: OutputLayer,
    ) -> Result<Self> {
        config.validate()?;
        Error::check_dim("hidden layer count", config.layer_grids.len(), hidden_layers.len())?;
        let mut dim = config.input_dim;
        for (layer, &grid) in hidden_layers.iter().zip(&config.layer_grids) {
            if layer.shape() != grid {
                return Err(Error::InvalidConfig(format!(
                    "layer grid {} does not match configured {}",
                    layer.shape(),
                    grid
                )));
            }
            Error::check_dim("hidden layer input", dim, layer.input_dim())?;
            dim = layer.node_count();
        }
        Error::check_dim("output layer rows", dim, output_layer.num_hidden())?;
        Error::check_dim("output layer classes", config.num_classes, output_layer.num_classes())?;
        Ok(Network {
            hidden_layers,
            output_layer,
            config,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn hidden_layers(&self) -> &[TopographicLayer] {
        &self.hidden_layers
    }

    pub fn hidden_layers_mut(&mut self) -> &mut [TopographicLayer] {
        &mut self.hidden_layers
    }

    pub fn output_layer(&self) -> &OutputLayer {
        &self.output_layer
    }

    pub fn output_layer_mut(&mut self) -> &mut OutputLayer {
        &mut self.output_layer
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [TopographicLayer], &mut OutputLayer) {
        (&mut self.hidden_layers, &mut self.output_layer)
    }

    pub fn is_finite(&self) -> bool {
        self.hidden_layers.iter().all(|l| l.is_finite()) && self.output_layer.is_finite()
    }

    /// Number of trainable scalars (reference components, output weights and biases).
    pub fn parameter_count(&self) -> usize {
        self.hidden_layers.iter().map(|l| l.weights().len()).sum::<usize>()
            + self.output_layer.weights.len()
            + self.output_layer.biases.len()
    }
}

/// Chains every hidden layer (one width each) and the output head.
pub fn network_forward(net: &Network, x: &[f64], widths: &[f64]) -> Result<ForwardPass> {
    Error::check_dim("network input", net.config.input_dim, x.len())?;
    Error::check_dim("widths", net.hidden_layers.len(), widths.len())?;
    let mut activations: Vec<LayerActivation> = Vec::with_capacity(net.hidden_layers.len());
    for (layer, &s) in net.hidden_layers.iter().zip(widths) {
        let input = activations.last().map_or(x, |a| a.outputs.as_slice());
        let act = layer_forward(layer, input, s)?;
        activations.push(act);
    }
    let output = output_forward(&net.output_layer, &activations.last().unwrap().outputs)?;
    Ok(ForwardPass { activations, output })
}

/// Forward pass with every layer's BMU imposed.
pub fn network_forward_with_bmus(net: &Network, x: &[f64], widths: &[f64], bmus: &[usize]) -> Result<ForwardPass> {
    Error::check_dim("network input", net.config.input_dim, x.len())?;
    Error::check_dim("widths", net.hidden_layers.len(), widths.len())?;
    Error::check_dim("imposed BMUs", net.hidden_layers.len(), bmus.len())?;
    let mut activations: Vec<LayerActivation> = Vec::with_capacity(net.hidden_layers.len());
    for ((layer, &s), &bmu) in net.hidden_layers.iter().zip(widths).zip(bmus) {
        check_width(s)?;
        let input = activations.last().map_or(x, |a| a.outputs.as_slice());
        activations.push(layer_forward_with_bmu(layer, input, bmu, s)?);
    }
    let output = output_forward(&net.output_layer, &activations.last().unwrap().outputs)?;
    Ok(ForwardPass { activations, output })
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Class with the largest output at the inference width `s_end`; ties go to
/// the lowest class index.
pub fn predict(net: &Network, x: &[f64]) -> Result<usize> {
    let pass = network_forward(net, x, &net.config.inference_widths())?;
    Ok(argmax(pass.y()))
}
