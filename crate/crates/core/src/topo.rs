//! Topographic hidden layers: a 2-D grid of nodes, each holding a reference
//! vector, with Gaussian activations gated by a neighborhood centered on the
//! best matching unit (BMU).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of a node on a layer's grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCoord {
    pub row: usize,
    pub col: usize,
}

impl GridCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        GridCoord { row, col }
    }

    /// Squared Euclidean distance between two grid positions.
    pub fn squared_distance(self, other: GridCoord) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        dr * dr + dc * dc
    }

    pub fn distance(self, other: GridCoord) -> f64 {
        self.squared_distance(other).sqrt()
    }
}

/// Rows × columns of a topographic layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    pub const fn new(rows: usize, cols: usize) -> Self {
        GridShape { rows, cols }
    }

    pub fn node_count(self) -> usize {
        self.rows * self.cols
    }

    /// Row-major flat index to grid position.
    pub fn coord(self, index: usize) -> GridCoord {
        GridCoord::new(index / self.cols, index % self.cols)
    }

    pub fn index(self, coord: GridCoord) -> usize {
        coord.row * self.cols + coord.col
    }

    pub fn contains(self, coord: GridCoord) -> bool {
        coord.row < self.rows && coord.col < self.cols
    }
}

impl std::fmt::Display for GridShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl std::str::FromStr for GridShape {
    type Err = Error;

    /// Parses `RxC`, e.g. `10x10`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("grid {s:?} is not of the form RxC"));
        let (r, c) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let rows: usize = r.trim().parse().map_err(|_| bad())?;
        let cols: usize = c.trim().parse().map_err(|_| bad())?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig(format!("grid {s:?} has a zero dimension")));
        }
        Ok(GridShape { rows, cols })
    }
}

/// Gaussian neighborhood weight `exp(-|bmu - k|^2 / s)` over grid positions.
pub fn neighborhood_weight(bmu: GridCoord, k: GridCoord, s: f64) -> Result<f64> {
    check_width(s)?;
    Ok(neighborhood_unchecked(bmu, k, s))
}

#[inline]
fn neighborhood_unchecked(bmu: GridCoord, k: GridCoord, s: f64) -> f64 {
    if bmu == k {
        1.0
    } else {
        (-bmu.squared_distance(k) / s).exp()
    }
}

pub(crate) fn check_width(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWidth(s))
    }
}

/// A 2-D grid of reference vectors.
///
/// Reference vectors are stored node-major: node `k` (row-major flat index)
/// occupies `weights[k * input_dim .. (k + 1) * input_dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopographicLayer {
    shape: GridShape,
    input_dim: usize,
    weights: Vec<f64>,
}

impl TopographicLayer {
    pub fn from_weights(shape: GridShape, input_dim: usize, weights: Vec<f64>) -> Result<Self> {
        if shape.node_count() == 0 || input_dim == 0 {
            return Err(Error::InvalidConfig(
                "topographic layer needs at least one node and one input".into(),
            ));
        }
        Error::check_dim("reference vectors", shape.node_count() * input_dim, weights.len())?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("reference vectors"));
        }
        Ok(TopographicLayer {
            shape,
            input_dim,
            weights,
        })
    }

    /// Builds a layer whose reference vector components are drawn by `sample(component)`.
    pub fn from_fn(shape: GridShape, input_dim: usize, mut sample: impl FnMut(usize) -> f64) -> Result<Self> {
        let weights = (0..shape.node_count() * input_dim)
            .map(|i| sample(i % input_dim))
            .collect();
        Self::from_weights(shape, input_dim, weights)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn node_count(&self) -> usize {
        self.shape.node_count()
    }

    pub fn reference(&self, node: usize) -> &[f64] {
        &self.weights[node * self.input_dim..(node + 1) * self.input_dim]
    }

    pub fn reference_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.weights[node * self.input_dim..(node + 1) * self.input_dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    /// `I_k = ½‖W_k − input‖²` for every node.
    pub fn pre_activations(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.input_dim)
            .map(|w| 0.5 * squared_euclidean(w, input))
            .collect()
    }

    /// Node with the smallest pre-activation; lowest flat index wins ties.
    pub fn best_matching_unit(&self, input: &[f64]) -> Result<usize> {
        self.check_input(input)?;
        Ok(argmin(&self.pre_activations(input)))
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        Error::check_dim("layer input", self.input_dim, input.len())?;
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer input"));
        }
        Ok(())
    }
}

/// Result of presenting one input to one topographic layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerActivation {
    /// Half squared distances `I_k` (non-negative).
    pub pre_activations: Vec<f64>,
    /// Neighborhood weights `σ(bmu, k, s)` used to gate the outputs.
    pub neighborhood: Vec<f64>,
    /// `O_k = exp(−I_k)·σ(bmu, k, s)`, in [0, 1].
    pub outputs: Vec<f64>,
    pub bmu: GridCoord,
    pub bmu_index: usize,
}

/// `Σ (a_j − b_j)²`, accumulated in four interleaved lanes so the loop
/// vectorizes. The summation order is fixed, so results are deterministic.
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ha, ta) = a.split_at(a.len() - a.len() % 4);
    let (hb, tb) = b.split_at(ha.len().min(b.len()));
    for (ca, cb) in ha.chunks_exact(4).zip(hb.chunks_exact(4)) {
        for l in 0..4 {
            let d = ca[l] - cb[l];
            acc[l] += d * d;
        }
    }
    let tail: f64 = ta.iter().zip(tb).map(|(x, y)| (x - y) * (x - y)).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Forward pass through one layer with neighborhood width `s`.
pub fn layer_forward(layer: &TopographicLayer, input: &[f64], s: f64) -> Result<LayerActivation> {
    check_width(s)?;
    layer.check_input(input)?;
    let pre_activations = layer.pre_activations(input);
    let bmu_index = argmin(&pre_activations);
    Ok(gate(layer.shape, pre_activations, bmu_index, s))
}

/// Forward pass with the BMU imposed instead of selected.
///
/// Used by the frozen-topology gradient check, where perturbing a reference
/// vector must not move the neighborhood center.
pub fn layer_forward_with_bmu(
    layer: &TopographicLayer,
    input: &[f64],
    bmu_index: usize,
    s: f64,
) -> Result<LayerActivation> {
    check_width(s)?;
    layer.check_input(input)?;
    if bmu_index >= layer.node_count() {
        return Err(Error::DimensionMismatch {
            context: "imposed BMU index",
            expected: layer.node_count(),
            actual: bmu_index,
        });
    }
    Ok(gate(layer.shape, layer.pre_activations(input), bmu_index, s))
}

fn gate(shape: GridShape, pre_activations: Vec<f64>, bmu_index: usize, s: f64) -> LayerActivation {
    let bmu = shape.coord(bmu_index);
    let neighborhood: Vec<f64> = (0..shape.node_count())
        .map(|k| neighborhood_unchecked(bmu, shape.coord(k), s))
        .collect();
    let outputs = pre_activations
        .iter()
        .zip(&neighborhood)
        .map(|(i, h)| (-i).exp() * h)
        .collect();
    LayerActivation {
        pre_activations,
        neighborhood,
        outputs,
        bmu,
        bmu_index,
    }
}
