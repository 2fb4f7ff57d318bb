use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Per-feature min-max scaling fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    /// Scales one row into [0, 1], clamping values outside the fitted range.
    /// Constant features map to 0.
    pub fn apply_row(&self, row: &mut [f64]) {
        for ((v, &lo), &hi) in row.iter_mut().zip(&self.min).zip(&self.max) {
            *v = if hi > lo {
                ((*v - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }

    /// Inverse of [`apply_row`](Self::apply_row) for non-constant features.
    pub fn denormalize_row(&self, row: &mut [f64]) {
        for ((v, &lo), &hi) in row.iter_mut().zip(&self.min).zip(&self.max) {
            *v = if hi > lo { lo + *v * (hi - lo) } else { lo };
        }
    }
}

pub fn fit_normalizer(data: &LabeledDataset) -> Result<NormalizationParams> {
    let ranges = data.feature_ranges()?;
    Ok(NormalizationParams {
        min: ranges.iter().map(|r| r.0).collect(),
        max: ranges.iter().map(|r| r.1).collect(),
    })
}

pub fn apply_normalizer(params: &NormalizationParams, data: &LabeledDataset) -> Result<LabeledDataset> {
    Error::check_dim("normalization params", data.num_features(), params.min.len())?;
    let mut out = data.clone();
    out.map_rows(|row| params.apply_row(row))?;
    Ok(out)
}
