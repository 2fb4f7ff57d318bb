use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::MapSnapshot;
use crate::error::{Error, Result};
use crate::topo::{GridCoord, GridShape};

pub const MAP_SCHEMA: &str = "crsom-map/1";

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    row: usize,
    col: usize,
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    schema: String,
    layer_index: usize,
    grid: GridShape,
    num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_names: Option<Vec<String>>,
    nodes: Vec<NodeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    assignments: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<Value>,
}

/// A parsed map file.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDocument {
    pub snapshot: MapSnapshot,
    pub class_names: Option<Vec<String>>,
    pub config: Option<Value>,
}

/// Serializes a snapshot as `crsom-map/1` JSON with sorted keys.
pub fn export_json(snapshot: &MapSnapshot, class_names: Option<&[String]>, config: Option<&Value>) -> Result<String> {
    let doc = MapJson {
        schema: MAP_SCHEMA.to_string(),
        layer_index: snapshot.layer_index,
        grid: snapshot.grid,
        num_classes: snapshot.num_classes,
        class_names: class_names.map(<[String]>::to_vec),
        nodes: snapshot
            .node_counts()
            .into_iter()
            .map(|(c, counts)| NodeRecord {
                row: c.row,
                col: c.col,
                counts,
            })
            .collect(),
        assignments: snapshot
            .instance_assignments
            .as_ref()
            .map(|a| a.iter().map(|c| [c.row, c.col]).collect()),
        config: config.cloned(),
    };
    // Going through Value sorts object keys.
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(doc)?)?;
    text.push('\n');
    Ok(text)
}

pub fn parse_json(text: &str) -> Result<MapDocument> {
    let doc: MapJson = serde_json::from_str(text)?;
    if doc.schema != MAP_SCHEMA {
        return Err(Error::Format(format!("unsupported map schema {:?}", doc.schema)));
    }
    let mut hits = BTreeMap::new();
    for node in &doc.nodes {
        let coord = GridCoord::new(node.row, node.col);
        if !doc.grid.contains(coord) || node.counts.len() != doc.num_classes {
            return Err(Error::Format(format!(
                "bad node record at ({}, {})",
                node.row, node.col
            )));
        }
        for (class, &n) in node.counts.iter().enumerate() {
            if n > 0 {
                hits.insert((coord, class), n);
            }
        }
    }
    let instance_assignments = doc
        .assignments
        .map(|a| a.into_iter().map(|[r, c]| GridCoord::new(r, c)).collect());
    Ok(MapDocument {
        snapshot: MapSnapshot {
            layer_index: doc.layer_index,
            grid: doc.grid,
            num_classes: doc.num_classes,
            hits,
            instance_assignments,
        },
        class_names: doc.class_names,
        config: doc.config,
    })
}
