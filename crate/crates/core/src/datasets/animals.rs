//! The bundled 16-animal table with its three label contexts.

use std::str::FromStr;

use super::LabeledDataset;
use crate::error::{Error, Result};

const ANIMALS: &str = include_str!("../../data/animals.txt");

pub const ANIMAL_NAMES: [&str; 16] = [
    "dove", "hen", "duck", "goose", "owl", "hawk", "eagle", "fox", "dog", "wolf", "cat", "tiger", "lion", "horse",
    "zebra", "cow",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnimalContext {
    Carnivore,
    Speed,
    Avian,
}

impl AnimalContext {
    pub const ALL: [AnimalContext; 3] = [AnimalContext::Carnivore, AnimalContext::Speed, AnimalContext::Avian];

    pub fn name(self) -> &'static str {
        match self {
            AnimalContext::Carnivore => "carnivore",
            AnimalContext::Speed => "speed",
            AnimalContext::Avian => "avian",
        }
    }

    fn classes(self) -> &'static [&'static str] {
        match self {
            AnimalContext::Carnivore => &["carnivore", "herbivore"],
            AnimalContext::Speed => &["fast", "medium", "slow"],
            AnimalContext::Avian => &["avian", "non-avian"],
        }
    }
}

impl FromStr for AnimalContext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnimalContext::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownContext(s.to_string()))
    }
}

impl std::fmt::Display for AnimalContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The 16×16 binary animal matrix labeled under `context`.
pub fn animals_dataset(context: AnimalContext) -> Result<LabeledDataset> {
    let bad = |m: String| Error::Format(format!("bundled animals table: {m}"));
    let mut lines = ANIMALS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("missing header".into()))?
        .split_whitespace()
        .collect();
    let label_col = header
        .iter()
        .position(|&h| h == context.name())
        .ok_or_else(|| bad(format!("no {} column", context.name())))?;
    let num_features = header
        .iter()
        .position(|&h| h == "carnivore")
        .ok_or_else(|| bad("no label columns".into()))?
        - 1;
    let feature_names = header[1..=num_features].iter().map(|s| s.to_string()).collect();

    let classes = context.classes();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != header.len() {
            return Err(bad(format!("row {:?} has {} cells", cells.first(), cells.len())));
        }
        for cell in &cells[1..=num_features] {
            features.push(
                cell.parse::<f64>()
                    .map_err(|_| bad(format!("non-numeric cell {cell:?}")))?,
            );
        }
        let label = cells[label_col];
        labels.push(
            classes
                .iter()
                .position(|&c| c == label)
                .ok_or_else(|| bad(format!("unknown {} label {label:?}", context.name())))?,
        );
    }
    LabeledDataset::new(
        features,
        num_features,
        labels,
        classes.iter().map(|s| s.to_string()).collect(),
    )?
    .with_feature_names(feature_names)
}
