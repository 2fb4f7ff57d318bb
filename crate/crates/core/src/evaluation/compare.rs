use super::{error_rate, fit_readout, map_stats, som_classifier, train_plain_som, MapStats, SomSchedule};
use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::learning::{fit, TrainRecord};
use crate::mapexport::{snapshot_layer, MapSnapshot};
use crate::network::{Network, NetworkConfig};

/// rRBF against a plain SOM with a sigmoid readout, same grid, schedule and seed.
#[derive(Debug, Clone)]
pub struct SomComparison {
    pub rrbf: Network,
    pub rrbf_curve: Vec<TrainRecord>,
    pub rrbf_error: f64,
    pub rrbf_snapshot: MapSnapshot,
    pub rrbf_stats: MapStats,
    pub som: Network,
    pub som_readout_curve: Vec<TrainRecord>,
    pub som_error: f64,
    pub som_snapshot: MapSnapshot,
    pub som_stats: MapStats,
}

/// Trains both classifiers on `data` and reports training-set error and map
/// structure for each.
pub fn compare_som(config: &NetworkConfig, data: &LabeledDataset) -> Result<SomComparison> {
    if config.layer_grids.len() != 1 {
        return Err(Error::InvalidConfig(
            "SOM comparison needs exactly one hidden layer".into(),
        ));
    }
    let (rrbf, som) = rayon::join(
        || -> Result<_> {
            let mut net = Network::initialize_from_data(config.clone(), data)?;
            let curve = fit(&mut net, data)?;
            Ok((net, curve))
        },
        || -> Result<_> {
            let layer = train_plain_som(config.layer_grids[0], data, &SomSchedule::from_config(config))?;
            let mut net = som_classifier(layer, config, data)?;
            let curve = fit_readout(&mut net, data)?;
            Ok((net, curve))
        },
    );
    let (rrbf, rrbf_curve) = rrbf?;
    let (som, som_readout_curve) = som?;
    let rrbf_snapshot = snapshot_layer(&rrbf, data, 1)?;
    let som_snapshot = snapshot_layer(&som, data, 1)?;
    Ok(SomComparison {
        rrbf_error: error_rate(&rrbf, data)?,
        rrbf_stats: map_stats(&rrbf_snapshot)?,
        som_error: error_rate(&som, data)?,
        som_stats: map_stats(&som_snapshot)?,
        rrbf,
        rrbf_curve,
        rrbf_snapshot,
        som,
        som_readout_curve,
        som_snapshot,
    })
}
