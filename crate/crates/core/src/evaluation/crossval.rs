use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{error_rate, mean_std};
use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::learning::{fit, TrainRecord};
use crate::network::{Network, NetworkConfig};
use crate::preprocess::Scaling;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold_index: usize,
    pub train_error_rate: f64,
    pub test_error_rate: f64,
    pub test_size: usize,
    pub seed: u64,
    pub learning_curve: Vec<TrainRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean_test_error: f64,
    pub std_test_error: f64,
    pub mean_train_error: f64,
    pub std_train_error: f64,
    /// Classes too small to stratify.
    pub warnings: Vec<String>,
}

/// Stratified assignment of instance indices to `k` folds.
///
/// Each class is shuffled and dealt round-robin, continuing the deal from
/// where the previous class stopped so fold sizes stay within one of each
/// other. Classes with fewer than `k` members are pooled, shuffled and dealt
/// the same way, and reported in the returned warnings.
pub fn stratified_folds(
    labels: &[usize],
    num_classes: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec<usize>>, Vec<String>)> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be at least 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::InvalidConfig(format!(
            "{} instances cannot be split into {k} folds",
            labels.len()
        )));
    }
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut folds = vec![Vec::new(); k];
    let mut warnings = Vec::new();
    let mut pooled = Vec::new();
    let mut next = 0;
    for (class, mut members) in by_class.into_iter().enumerate() {
        members.shuffle(rng);
        if members.len() < k {
            if !members.is_empty() {
                warnings.push(format!(
                    "class {class} has {} instances (< {k}); not stratified",
                    members.len()
                ));
            }
            pooled.extend(members);
            continue;
        }
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    pooled.shuffle(rng);
    for i in pooled {
        folds[next % k].push(i);
        next += 1;
    }
    Ok((folds, warnings))
}

/// Stratified k-fold cross-validation.
///
/// Fold `i` trains with seed `seed + i`; scaling is fitted on the training
/// folds only. Folds run in parallel and results do not depend on scheduling.
pub fn kfold_cross_validate(
    config: &NetworkConfig,
    data: &LabeledDataset,
    k: usize,
    seed: u64,
    scaling: Scaling,
) -> Result<CvReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let (folds, warnings) = stratified_folds(data.labels(), data.num_classes(), k, &mut rng)?;

    let results = folds
        .par_iter()
        .enumerate()
        .map(|(fold_index, test_idx)| {
            let mut in_test = vec![false; data.len()];
            for &i in test_idx {
                in_test[i] = true;
            }
            let train_idx: Vec<usize> = (0..data.len()).filter(|&i| !in_test[i]).collect();
            let raw_train = data.subset(&train_idx);
            let prep = scaling.fit(&raw_train)?;
            let train = prep.apply(&raw_train)?;
            let test = prep.apply(&data.subset(test_idx))?;

            let fold_seed = seed.wrapping_add(fold_index as u64);
            let mut cfg = config.clone();
            cfg.rng_seed = fold_seed;
            let mut net = Network::initialize_from_data(cfg, &train)?;
            let learning_curve = fit(&mut net, &train)?;
            Ok(FoldResult {
                fold_index,
                train_error_rate: error_rate(&net, &train)?,
                test_error_rate: error_rate(&net, &test)?,
                test_size: test.len(),
                seed: fold_seed,
                learning_curve,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (mean_test_error, std_test_error) = mean_std(&results.iter().map(|f| f.test_error_rate).collect::<Vec<_>>());
    let (mean_train_error, std_train_error) = mean_std(&results.iter().map(|f| f.train_error_rate).collect::<Vec<_>>());
    Ok(CvReport {
        k,
        seed,
        folds: results,
        mean_test_error,
        std_test_error,
        mean_train_error,
        std_train_error,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topo::GridShape;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn folds_partition_and_stratify(
            labels in prop::collection::vec(0usize..4, 10..120),
            k in 2usize..11,
            seed in any::<u64>(),
        ) {
            prop_assume!(labels.len() >= k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (folds, warnings) = stratified_folds(&labels, 4, k, &mut rng).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());

            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);

            for class in 0..4 {
                let total = labels.iter().filter(|&&l| l == class).count();
                if total < k {
                    let tag = format!("class {class} ");
                    prop_assert!(total == 0 || warnings.iter().any(|w| w.contains(&tag)));
                    continue;
                }
                let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
                prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn iris_sized_folds() {
        let labels: Vec<usize> = (0..150).map(|i| i / 50).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (folds, warnings) = stratified_folds(&labels, 3, 10, &mut rng).unwrap();
        assert!(folds.iter().all(|f| f.len() == 15));
        assert!(warnings.is_empty());
    }

    #[test]
    fn rejects_bad_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(stratified_folds(&[0, 1, 0], 2, 1, &mut rng).is_err());
        assert!(stratified_folds(&[0, 1, 0], 2, 4, &mut rng).is_err());
    }

    #[test]
    fn small_cv_is_deterministic() {
        let features: Vec<f64> = (0..40)
            .map(|i| (i % 20) as f64 + if i < 20 { 0.0 } else { 30.0 })
            .collect();
        let labels: Vec<usize> = (0..40).map(|i| usize::from(i >= 20)).collect();
        let data = LabeledDataset::new(features, 1, labels, vec!["a".into(), "b".into()]).unwrap();
        let mut cfg = NetworkConfig::new(vec![GridShape::new(3, 3)], 1, 2);
        cfg.t_end = 20;
        let a = kfold_cross_validate(&cfg, &data, 4, 3, Scaling::MinMax).unwrap();
        let b = kfold_cross_validate(&cfg, &data, 4, 3, Scaling::MinMax).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.folds.len(), 4);
        assert_eq!(a.folds.iter().map(|f| f.test_size).sum::<usize>(), 40);
        assert!(a.folds.iter().all(|f| (0.0..=1.0).contains(&f.test_error_rate)));
        assert_eq!(a.folds[2].seed, 5);
    }
}
