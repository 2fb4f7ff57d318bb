//! Unsupervised Kohonen baseline and a sigmoid readout trained on top of it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::learning::{epoch_order, loss, output_deltas, presentation_rng, update_output_layer, TrainRecord};
use crate::network::{anneal_width, init_first_layer, network_forward, InitScheme, Network, NetworkConfig};
use crate::topo::{GridShape, TopographicLayer};

/// Annealing schedule and step size of a plain SOM run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SomSchedule {
    pub s0: f64,
    pub s_end: f64,
    pub t_end: usize,
    pub eta: f64,
    pub seed: u64,
    /// Only the first-layer part of the scheme applies.
    pub init: InitScheme,
}

impl SomSchedule {
    /// Same widths, epochs and seed as an rRBF config, stepping with `eta_hid`.
    pub fn from_config(config: &NetworkConfig) -> Self {
        SomSchedule {
            s0: config.s0,
            s_end: config.s_end,
            t_end: config.t_end,
            eta: config.eta_hid,
            seed: config.rng_seed,
            init: config.init,
        }
    }

    fn width(&self, epoch: usize) -> Result<f64> {
        let mut c = NetworkConfig::new(vec![GridShape::new(1, 1)], 1, 2);
        c.s0 = self.s0;
        c.s_end = self.s_end;
        c.t_end = self.t_end;
        anneal_width(epoch, &c)
    }
}

/// One classical Kohonen step: every node moves toward `x` by
/// `eta·h(bmu, k)·(x − W_k)` with a Gaussian `h` of width `s` over the grid.
pub fn kohonen_step(layer: &mut TopographicLayer, x: &[f64], s: f64, eta: f64) -> Result<()> {
    let bmu = layer.best_matching_unit(x)?;
    let shape = layer.shape();
    let (br, bc) = (bmu / shape.cols, bmu % shape.cols);
    for node in 0..layer.node_count() {
        let (r, c) = (node / shape.cols, node % shape.cols);
        let dr = r as f64 - br as f64;
        let dc = c as f64 - bc as f64;
        let h = if node == bmu {
            1.0
        } else {
            (-(dr * dr + dc * dc) / s).exp()
        };
        for (w, &xi) in layer.reference_mut(node).iter_mut().zip(x) {
            *w += eta * (h * (xi - *w));
        }
    }
    Ok(())
}

/// Label-blind SOM training. Starts from the same initial map an rRBF with
/// the same seed would, and presents instances in the same shuffled order.
pub fn train_plain_som(grid: GridShape, data: &LabeledDataset, schedule: &SomSchedule) -> Result<TopographicLayer> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut layer = init_first_layer(grid, data, schedule.init, &mut init_rng)?;
    let mut rng = presentation_rng(schedule.seed);
    for epoch in 0..schedule.t_end {
        let s = schedule.width(epoch)?;
        for i in epoch_order(data.len(), &mut rng) {
            kohonen_step(&mut layer, data.row(i), s, schedule.eta)?;
        }
    }
    if !layer.is_finite() {
        return Err(Error::NonFinite("SOM reference vectors"));
    }
    Ok(layer)
}

/// Single-hidden-layer network whose hidden layer is `som`; the output head
/// is initialized exactly as an rRBF with the same config would be.
pub fn som_classifier(som: TopographicLayer, config: &NetworkConfig, data: &LabeledDataset) -> Result<Network> {
    if config.layer_grids != [som.shape()] {
        return Err(Error::InvalidConfig(
            "SOM classifier needs a single hidden layer matching the SOM grid".into(),
        ));
    }
    let init = Network::initialize_from_data(config.clone(), data)?;
    Network::from_parts(config.clone(), vec![som], init.output_layer().clone())
}

/// Trains only the output head for `t_end` epochs on frozen hidden
/// activations at the inference width.
pub fn fit_readout(net: &mut Network, data: &LabeledDataset) -> Result<Vec<TrainRecord>> {
    crate::learning::check_dataset(net, data)?;
    let widths = net.config().inference_widths();
    let (t_end, eta) = (net.config().t_end, net.config().eta_out);
    // Hidden outputs never change, so compute them once.
    let hidden: Vec<Vec<f64>> = data
        .rows()
        .map(|x| Ok(network_forward(net, x, &widths)?.top_hidden().to_vec()))
        .collect::<Result<_>>()?;
    let mut rng = presentation_rng(net.config().rng_seed);
    let mut curve = Vec::with_capacity(t_end);
    for epoch in 0..t_end {
        let mut total = 0.0;
        for i in epoch_order(data.len(), &mut rng) {
            let target = data.target(i);
            let out = crate::network::output_forward(net.output_layer(), &hidden[i])?;
            total += loss(&out.y, &target)?;
            let deltas = output_deltas(&out.y, &target)?;
            update_output_layer(net.output_layer_mut(), &hidden[i], &deltas, eta)?;
        }
        curve.push(TrainRecord {
            epoch,
            mean_error: total / data.len() as f64,
            width_per_layer: widths.clone(),
        });
    }
    Ok(curve)
}
