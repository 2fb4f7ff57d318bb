//! Metrics, cross-validation, the plain-SOM baseline and map statistics.

mod compare;
mod crossval;
mod som;
mod stats;

pub use compare::{compare_som, SomComparison};
pub use crossval::{kfold_cross_validate, stratified_folds, CvReport, FoldResult};
pub use som::{fit_readout, kohonen_step, som_classifier, train_plain_som, SomSchedule};
pub use stats::{map_stats, MapStats};

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::learning::check_dataset;
use crate::network::{predict, Network};

/// Predicted class of every instance.
pub fn predictions(net: &Network, data: &LabeledDataset) -> Result<Vec<usize>> {
    check_dataset(net, data)?;
    data.rows().map(|x| predict(net, x)).collect()
}

/// Fraction of instances whose prediction differs from the label.
pub fn error_rate(net: &Network, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let wrong = predictions(net, data)?
        .iter()
        .zip(data.labels())
        .filter(|(p, l)| p != l)
        .count();
    Ok(wrong as f64 / data.len() as f64)
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
