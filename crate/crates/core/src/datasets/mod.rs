//! Labeled datasets and their loaders.

mod animals;
mod idx;
mod normalize;
mod tabular;

pub use animals::{animals_dataset, AnimalContext, ANIMAL_NAMES};
pub use idx::{load_idx, parse_idx, split_caps, IdxQuery};
pub use normalize::{apply_normalizer, fit_normalizer, NormalizationParams};
pub use tabular::{load_csv, LabelColumn};

use crate::error::{Error, Result};

/// Feature matrix with class labels.
///
/// Features are stored row-major. Targets are kept as class indices and
/// expanded to one-hot rows on demand, so every target row has exactly one 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    num_features: usize,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(features: Vec<f64>, num_features: usize, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(Error::TooFewClasses(class_names.len()));
        }
        if num_features == 0 {
            return Err(Error::InvalidConfig("dataset needs at least one feature".into()));
        }
        Error::check_dim("feature matrix", labels.len() * num_features, features.len())?;
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidConfig(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features"));
        }
        Ok(LabeledDataset {
            features,
            num_features,
            labels,
            class_names,
            feature_names: None,
        })
    }

    /// A dataset with no instances.
    pub fn empty(num_features: usize, class_names: Vec<String>) -> Self {
        LabeledDataset {
            features: Vec::new(),
            num_features,
            labels: Vec::new(),
            class_names,
            feature_names: None,
        }
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        Error::check_dim("feature names", self.num_features, names.len())?;
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_features..(i + 1) * self.num_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.num_features)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// One-hot teacher vector of instance `i`.
    pub fn target(&self, i: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.num_classes()];
        t[self.labels[i]] = 1.0;
        t
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.num_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        LabeledDataset {
            features,
            num_features: self.num_features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same features with different labels.
    pub fn relabeled(&self, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        let mut out = LabeledDataset::new(self.features.clone(), self.num_features, labels, class_names)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    /// Per-feature (min, max).
    pub fn feature_ranges(&self) -> Result<Vec<(f64, f64)>> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.num_features];
        for row in self.rows() {
            for (r, &v) in ranges.iter_mut().zip(row) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        Ok(ranges)
    }

    /// Applies `f` to every row in place.
    pub fn map_rows(&mut self, mut f: impl FnMut(&mut [f64])) -> Result<()> {
        for row in self.features.chunks_exact_mut(self.num_features) {
            f(row);
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features"));
        }
        Ok(())
    }
}
