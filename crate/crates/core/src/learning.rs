//! Update rules and the training loop.
//!
//! One presentation runs a single forward pass, derives every delta from the
//! pre-update state, then applies the output-layer update and the hidden
//! updates from the top layer down.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::network::{anneal_width, network_forward, ForwardPass, Network, OutputLayer};
use crate::topo::{LayerActivation, TopographicLayer};

/// Sign applied when propagating weight changes to the layer below.
///
/// The chain rule gives `∂E/∂O^{M-1}_b = Σ_k ΔW^M_kb` at every depth, so the
/// delta of every deeper layer is `−(Σ_k ΔW^M_kb)·exp(−I_b)`: the sign is
/// negative at each step and does not alternate. `gradcheck` verifies this
/// against central differences on three-layer stacks.
pub const PROPAGATION_SIGN: f64 = -1.0;

/// How the propagation sign evolves with depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConvention {
    /// `−1` at every step (the chain-rule result, used for training).
    ConstantNegative,
    /// `−1` at the first step below the top layer, flipping at each further step.
    Alternating,
}

impl SignConvention {
    /// Sign for the `step`-th propagation (1 = from layer N to N−1).
    pub fn sign(self, step: usize) -> f64 {
        match self {
            SignConvention::ConstantNegative => PROPAGATION_SIGN,
            SignConvention::Alternating => {
                if step % 2 == 1 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// One row of the learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub epoch: usize,
    /// Mean quadratic error over the epoch's presentations (measured before each update).
    pub mean_error: f64,
    pub width_per_layer: Vec<f64>,
}

/// Every error signal of one presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSignals {
    /// `δ_l = (y_l − T_l)·y_l·(1 − y_l)`.
    pub output_deltas: Vec<f64>,
    /// `δ^M_k` per hidden layer, input side first.
    pub hidden_deltas: Vec<Vec<f64>>,
    /// Unscaled `ΔW^M` per hidden layer, laid out like the layer's reference vectors.
    pub weight_changes: Vec<Vec<f64>>,
}

/// `½ Σ_l (y_l − T_l)²`.
pub fn loss(y: &[f64], target: &[f64]) -> Result<f64> {
    Error::check_dim("loss target", y.len(), target.len())?;
    Ok(0.5 * y.iter().zip(target).map(|(a, t)| (a - t) * (a - t)).sum::<f64>())
}

pub fn output_deltas(y: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim("output delta target", y.len(), target.len())?;
    Ok(y.iter().zip(target).map(|(&y, &t)| (y - t) * y * (1.0 - y)).collect())
}

/// Gradient step on the output weights and biases.
///
/// `∂E/∂v_kl = δ_l·O_k` and, since the bias enters `I_l` with a minus sign,
/// `∂E/∂θ_l = −δ_l`.
pub fn update_output_layer(output: &mut OutputLayer, hidden_out: &[f64], deltas: &[f64], eta_out: f64) -> Result<()> {
    Error::check_dim("output update input", output.num_hidden(), hidden_out.len())?;
    Error::check_dim("output update deltas", output.num_classes(), deltas.len())?;
    let classes = output.num_classes();
    for (row, &o) in output.weights_mut().chunks_exact_mut(classes).zip(hidden_out) {
        for (v, &d) in row.iter_mut().zip(deltas) {
            *v -= eta_out * d * o;
        }
    }
    for (theta, &d) in output.biases_mut().iter_mut().zip(deltas) {
        *theta += eta_out * d;
    }
    Ok(())
}

/// `δ^N_k = −(Σ_l δ_l·v_kl)·exp(−I^N_k)`.
pub fn top_hidden_delta(output: &OutputLayer, deltas: &[f64], pre_top: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim("top delta outputs", output.num_classes(), deltas.len())?;
    Error::check_dim("top delta pre-activations", output.num_hidden(), pre_top.len())?;
    Ok(output
        .weights()
        .chunks_exact(output.num_classes())
        .zip(pre_top)
        .map(|(row, &i)| {
            let back: f64 = row.iter().zip(deltas).map(|(v, d)| v * d).sum();
            -back * (-i).exp()
        })
        .collect())
}

/// Unscaled change `ΔW_kj = δ_k·σ_k·(input_j − W_kj)` for every node.
pub fn hidden_weight_changes(
    layer: &TopographicLayer,
    delta: &[f64],
    activation: &LayerActivation,
    input: &[f64],
) -> Result<Vec<f64>> {
    let nodes = layer.node_count();
    let dim = layer.input_dim();
    Error::check_dim("hidden delta", nodes, delta.len())?;
    Error::check_dim("hidden activation", nodes, activation.neighborhood.len())?;
    Error::check_dim("hidden update input", dim, input.len())?;
    let mut changes = vec![0.0; nodes * dim];
    for (k, out) in changes.chunks_exact_mut(dim).enumerate() {
        let gain = delta[k] * activation.neighborhood[k];
        if gain == 0.0 {
            continue;
        }
        for ((c, &w), &x) in out.iter_mut().zip(layer.reference(k)).zip(input) {
            *c = gain * (x - w);
        }
    }
    Ok(changes)
}

/// Applies `W ← W + eta_hid·ΔW` and returns the unscaled `ΔW`.
///
/// A positive `δ_k` pulls node `k` toward the input as in a plain SOM; a
/// negative one pushes it away.
pub fn update_hidden_layer(
    layer: &mut TopographicLayer,
    delta: &[f64],
    activation: &LayerActivation,
    input: &[f64],
    eta_hid: f64,
) -> Result<Vec<f64>> {
    let changes = hidden_weight_changes(layer, delta, activation, input)?;
    apply_changes(layer, &changes, eta_hid);
    Ok(changes)
}

fn apply_changes(layer: &mut TopographicLayer, changes: &[f64], eta_hid: f64) {
    for (w, &c) in layer.weights_mut().iter_mut().zip(changes) {
        *w += eta_hid * c;
    }
}

/// `δ^M_b = sign·(Σ_k ΔW^{M+1}_kb)·exp(−I^M_b)`.
///
/// `changes_above` is laid out node-major over the layer above, so its row
/// length equals the node count of layer `M`.
pub fn propagate_delta(changes_above: &[f64], pre_below: &[f64], sign: f64) -> Result<Vec<f64>> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidConfig(format!("propagation sign must be ±1, got {sign}")));
    }
    let dim = pre_below.len();
    if dim == 0 || !changes_above.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            context: "propagated weight changes",
            expected: dim,
            actual: changes_above.len(),
        });
    }
    let mut sums = vec![0.0; dim];
    for row in changes_above.chunks_exact(dim) {
        for (s, &c) in sums.iter_mut().zip(row) {
            *s += c;
        }
    }
    Ok(sums
        .iter()
        .zip(pre_below)
        .map(|(&s, &i)| sign * s * (-i).exp())
        .collect())
}

/// Derives all deltas and unscaled weight changes from one forward pass,
/// without touching the network.
pub fn compute_deltas(
    net: &Network,
    pass: &ForwardPass,
    x: &[f64],
    target: &[f64],
    convention: SignConvention,
) -> Result<DeltaSignals> {
    let layers = net.hidden_layers();
    let n = layers.len();
    Error::check_dim("forward pass layers", n, pass.activations.len())?;
    let out_deltas = output_deltas(pass.y(), target)?;

    let mut hidden_deltas = vec![Vec::new(); n];
    let mut weight_changes = vec![Vec::new(); n];
    let mut delta = top_hidden_delta(
        net.output_layer(),
        &out_deltas,
        &pass.activations[n - 1].pre_activations,
    )?;
    for m in (0..n).rev() {
        let input = if m == 0 { x } else { &pass.activations[m - 1].outputs };
        let changes = hidden_weight_changes(&layers[m], &delta, &pass.activations[m], input)?;
        let next = if m > 0 {
            let step = n - m;
            Some(propagate_delta(
                &changes,
                &pass.activations[m - 1].pre_activations,
                convention.sign(step),
            )?)
        } else {
            None
        };
        hidden_deltas[m] = std::mem::take(&mut delta);
        weight_changes[m] = changes;
        if let Some(d) = next {
            delta = d;
        }
    }
    Ok(DeltaSignals {
        output_deltas: out_deltas,
        hidden_deltas,
        weight_changes,
    })
}

/// One presentation at epoch `epoch`: forward with the annealed width, then
/// update the output layer and every hidden layer (top down) from the
/// pre-update state. Returns the loss measured before the update.
pub fn train_sample(net: &mut Network, x: &[f64], target: &[f64], epoch: usize) -> Result<(f64, DeltaSignals)> {
    let t_end = net.config().t_end;
    if epoch >= t_end {
        return Err(Error::EpochOutOfRange { epoch, t_end });
    }
    let s = anneal_width(epoch, net.config())?;
    let widths = vec![s; net.hidden_layers().len()];
    let pass = network_forward(net, x, &widths)?;
    let err = loss(pass.y(), target)?;
    let signals = compute_deltas(net, &pass, x, target, SignConvention::ConstantNegative)?;

    let (eta_out, eta_hid) = (net.config().eta_out, net.config().eta_hid);
    let (hidden, output) = net.parts_mut();
    update_output_layer(output, pass.top_hidden(), &signals.output_deltas, eta_out)?;
    for (layer, changes) in hidden.iter_mut().zip(&signals.weight_changes).rev() {
        apply_changes(layer, changes, eta_hid);
    }
    Ok((err, signals))
}

/// What [`train_sample`] does, without materializing the first layer's
/// weight changes: nothing below it needs them, and at MNIST scale they are
/// the largest allocation of a presentation. Bitwise identical updates.
fn train_step(net: &mut Network, x: &[f64], target: &[f64], epoch: usize) -> Result<f64> {
    let s = anneal_width(epoch, net.config())?;
    let n = net.hidden_layers().len();
    let pass = network_forward(net, x, &vec![s; n])?;
    let err = loss(pass.y(), target)?;
    let out_deltas = output_deltas(pass.y(), target)?;
    let layers = net.hidden_layers();
    let mut delta = top_hidden_delta(
        net.output_layer(),
        &out_deltas,
        &pass.activations[n - 1].pre_activations,
    )?;
    let mut upper = Vec::with_capacity(n - 1);
    for m in (1..n).rev() {
        let below = &pass.activations[m - 1];
        let changes = hidden_weight_changes(&layers[m], &delta, &pass.activations[m], &below.outputs)?;
        delta = propagate_delta(&changes, &below.pre_activations, PROPAGATION_SIGN)?;
        upper.push((m, changes));
    }

    let (eta_out, eta_hid) = (net.config().eta_out, net.config().eta_hid);
    let (hidden, output) = net.parts_mut();
    update_output_layer(output, pass.top_hidden(), &out_deltas, eta_out)?;
    for (m, changes) in upper {
        apply_changes(&mut hidden[m], &changes, eta_hid);
    }
    let first = &mut hidden[0];
    let neighborhood = &pass.activations[0].neighborhood;
    for (k, &d) in delta.iter().enumerate() {
        let gain = d * neighborhood[k];
        if gain == 0.0 {
            continue;
        }
        for (w, &xj) in first.reference_mut(k).iter_mut().zip(x) {
            let c = gain * (xj - *w);
            *w += eta_hid * c;
        }
    }
    Ok(err)
}

pub(crate) fn check_dataset(net: &Network, data: &LabeledDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Error::check_dim("dataset features", net.config().input_dim, data.num_features())?;
    Error::check_dim("dataset classes", net.config().num_classes, data.num_classes())
}

/// Presentation order for every epoch, drawn from a seeded stream separate
/// from the initialization stream.
pub(crate) fn presentation_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub(crate) fn epoch_order(len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(rng);
    order
}

/// Trains for `t_end` epochs and returns the learning curve.
pub fn fit(net: &mut Network, data: &LabeledDataset) -> Result<Vec<TrainRecord>> {
    fit_with(net, data, |_, _| Ok(()))
}

/// Like [`fit`], calling `observer` after every epoch.
pub fn fit_with(
    net: &mut Network,
    data: &LabeledDataset,
    mut observer: impl FnMut(&TrainRecord, &Network) -> Result<()>,
) -> Result<Vec<TrainRecord>> {
    check_dataset(net, data)?;
    let t_end = net.config().t_end;
    let mut rng = presentation_rng(net.config().rng_seed);
    let mut curve = Vec::with_capacity(t_end);
    for epoch in 0..t_end {
        let order = epoch_order(data.len(), &mut rng);
        let mut total = 0.0;
        for &i in &order {
            let target = data.target(i);
            let err = train_step(net, data.row(i), &target, epoch)?;
            total += err;
        }
        if !net.is_finite() {
            return Err(Error::NonFinite("network parameters after epoch"));
        }
        let s = anneal_width(epoch, net.config())?;
        let record = TrainRecord {
            epoch,
            mean_error: total / data.len() as f64,
            width_per_layer: vec![s; net.hidden_layers().len()],
        };
        observer(&record, net)?;
        curve.push(record);
    }
    Ok(curve)
}
