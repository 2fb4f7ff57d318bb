use std::collections::BTreeMap;

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::learning::check_dataset;
use crate::network::{network_forward, Network};
use crate::topo::{GridCoord, GridShape};

/// Per-node, per-class winner counts of one layer over a dataset pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSnapshot {
    /// 1-based hidden layer index.
    pub layer_index: usize,
    pub grid: GridShape,
    pub num_classes: usize,
    pub hits: BTreeMap<(GridCoord, usize), u64>,
    /// BMU of every instance, in dataset order.
    pub instance_assignments: Option<Vec<GridCoord>>,
}

impl MapSnapshot {
    /// Aggregates BMU assignments with their class labels.
    pub fn from_assignments(
        layer_index: usize,
        grid: GridShape,
        num_classes: usize,
        assignments: Vec<GridCoord>,
        labels: &[usize],
    ) -> Result<Self> {
        Error::check_dim("snapshot labels", assignments.len(), labels.len())?;
        let mut hits = BTreeMap::new();
        for (&coord, &label) in assignments.iter().zip(labels) {
            if !grid.contains(coord) {
                return Err(Error::InvalidConfig(format!(
                    "coordinate ({}, {}) outside {grid} grid",
                    coord.row, coord.col
                )));
            }
            if label >= num_classes {
                return Err(Error::InvalidConfig(format!("label {label} out of range")));
            }
            *hits.entry((coord, label)).or_insert(0) += 1;
        }
        Ok(MapSnapshot {
            layer_index,
            grid,
            num_classes,
            hits,
            instance_assignments: Some(assignments),
        })
    }

    pub fn total_hits(&self) -> u64 {
        self.hits.values().sum()
    }

    /// Per-class counts of every node with at least one hit, in row-major order.
    pub fn node_counts(&self) -> BTreeMap<GridCoord, Vec<u64>> {
        let mut nodes: BTreeMap<GridCoord, Vec<u64>> = BTreeMap::new();
        for (&(coord, class), &n) in &self.hits {
            if n > 0 {
                nodes.entry(coord).or_insert_with(|| vec![0; self.num_classes])[class] += n;
            }
        }
        nodes
    }
}

/// BMU of layer `layer_index` (1-based) for every instance, at inference widths.
pub fn snapshot_layer(net: &Network, data: &LabeledDataset, layer_index: usize) -> Result<MapSnapshot> {
    let layers = net.hidden_layers().len();
    if layer_index == 0 || layer_index > layers {
        return Err(Error::LayerOutOfRange {
            index: layer_index,
            layers,
        });
    }
    check_dataset(net, data)?;
    let widths = net.config().inference_widths();
    let layer = &net.hidden_layers()[layer_index - 1];
    let assignments = data
        .rows()
        .map(|x| {
            let pass = network_forward(net, x, &widths)?;
            Ok(pass.activations[layer_index - 1].bmu)
        })
        .collect::<Result<Vec<_>>>()?;
    MapSnapshot::from_assignments(
        layer_index,
        layer.shape(),
        data.num_classes(),
        assignments,
        data.labels(),
    )
}
