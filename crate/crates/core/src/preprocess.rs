//! Feature scaling applied before training, fitted on training data only.

use serde::{Deserialize, Serialize};

use crate::datasets::{fit_normalizer, LabeledDataset, NormalizationParams};
use crate::error::{Error, Result};

/// Which scaling to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    /// Leave features as loaded.
    None,
    /// Per-feature min-max to [0, 1].
    #[default]
    MinMax,
    /// Each instance divided by its Euclidean norm. Keeps half squared
    /// distances within [0, 2] whatever the input dimension.
    UnitLength,
}

/// A fitted scaling, stored with models so held-out data is treated alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Preprocessor {
    Identity,
    MinMax(NormalizationParams),
    UnitLength,
}

impl Scaling {
    pub fn fit(self, train: &LabeledDataset) -> Result<Preprocessor> {
        Ok(match self {
            Scaling::None => Preprocessor::Identity,
            Scaling::MinMax => Preprocessor::MinMax(fit_normalizer(train)?),
            Scaling::UnitLength => Preprocessor::UnitLength,
        })
    }
}

impl Preprocessor {
    pub fn apply_row(&self, row: &mut [f64]) {
        match self {
            Preprocessor::Identity => {}
            Preprocessor::MinMax(p) => p.apply_row(row),
            Preprocessor::UnitLength => {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                // All-zero rows have no direction and are left alone.
                if norm > 0.0 {
                    row.iter_mut().for_each(|v| *v /= norm);
                }
            }
        }
    }

    pub fn apply(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        if let Preprocessor::MinMax(p) = self {
            Error::check_dim("normalization params", data.num_features(), p.min.len())?;
        }
        let mut out = data.clone();
        out.map_rows(|row| self.apply_row(row))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_length_rows() {
        let data = LabeledDataset::new(vec![3.0, 4.0, 0.0, 0.0], 2, vec![0, 1], vec!["a".into(), "b".into()]).unwrap();
        let out = Scaling::UnitLength.fit(&data).unwrap().apply(&data).unwrap();
        assert_eq!(out.row(0), &[0.6, 0.8]);
        assert_eq!(out.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn scaling_names() {
        assert_eq!(serde_json::to_string(&Scaling::UnitLength).unwrap(), "\"unit-length\"");
        assert_eq!(serde_json::from_str::<Scaling>("\"none\"").unwrap(), Scaling::None);
    }

    proptest! {
        #[test]
        fn unit_length_norm_is_one(row in prop::collection::vec(-100.0f64..100.0, 1..20)) {
            prop_assume!(row.iter().any(|v| v.abs() > 1e-6));
            let mut r = row.clone();
            Preprocessor::UnitLength.apply_row(&mut r);
            let n: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
