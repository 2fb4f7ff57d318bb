use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapexport::MapSnapshot;

/// Structure of a winner map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapStats {
    /// Nodes that won at least one instance.
    pub num_winner_nodes: usize,
    /// Hit-weighted fraction of each winner node's hits that belong to its majority class.
    pub class_purity: f64,
    /// Smallest grid distance between winner nodes whose majority classes
    /// differ; `None` when every winner node has the same majority class.
    pub min_interclass_margin: Option<f64>,
}

impl MapStats {
    /// Margin with "no opposing cluster" treated as infinitely far.
    pub fn margin_or_infinity(&self) -> f64 {
        self.min_interclass_margin.unwrap_or(f64::INFINITY)
    }
}

/// Majority class of a node; ties go to the lowest class index.
fn majority(counts: &[u64]) -> (usize, u64) {
    let mut best = (0, counts[0]);
    for (c, &n) in counts.iter().enumerate().skip(1) {
        if n > best.1 {
            best = (c, n);
        }
    }
    best
}

pub fn map_stats(snapshot: &MapSnapshot) -> Result<MapStats> {
    let total = snapshot.total_hits();
    if total == 0 {
        return Err(Error::EmptySnapshot);
    }
    let nodes: Vec<_> = snapshot
        .node_counts()
        .into_iter()
        .map(|(coord, counts)| (coord, majority(&counts)))
        .collect();
    let majority_hits: u64 = nodes.iter().map(|(_, (_, n))| n).sum();
    let mut margin: Option<f64> = None;
    for (i, (a, (ca, _))) in nodes.iter().enumerate() {
        for (b, (cb, _)) in &nodes[i + 1..] {
            if ca != cb {
                let d = a.distance(*b);
                margin = Some(margin.map_or(d, |m| m.min(d)));
            }
        }
    }
    Ok(MapStats {
        num_winner_nodes: nodes.len(),
        class_purity: majority_hits as f64 / total as f64,
        min_interclass_margin: margin,
    })
}
