//! Finite metric-graph domains, sampled scalar fields and random-field generators.
//!
//! A continuous function on a compact connected space is modelled by its values
//! on the vertices of a connected finite graph, interpolated linearly along edges.

mod generators;
mod graph;
mod packing;

pub use generators::{
    fourier_from_coefficients, gen_distance_to_net, gen_fbm, gen_random_fourier,
};
pub use graph::{cycle_graph, graph_distance, grid_graph, path_graph, Edge, MetricGraph};
pub use packing::{cover_by_doubling, greedy_cover, maximal_packing};

use std::sync::Arc;

use crate::{Error, Result};

/// Seed for every random generator in the crate. A fixed seed gives
/// bit-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub(crate) fn rng(self) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Values of a continuous function sampled on the vertices of a [`MetricGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    graph: Arc<MetricGraph>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(graph: Arc<MetricGraph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.vertex_count() {
            return Err(Error::invalid(format!(
                "field has {} values but graph has {} vertices",
                values.len(),
                graph.vertex_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("value at vertex {i} is not finite")));
        }
        Ok(Self { graph, values })
    }

    /// Field on the path graph with uniform spacing `1/(n-1)`.
    pub fn on_path(values: Vec<f64>) -> Result<Self> {
        let graph = match values.len() {
            0 => return Err(Error::invalid("empty field")),
            1 => MetricGraph::new(1, vec![])?,
            n => path_graph(n, 1.0 / (n - 1) as f64)?,
        };
        Self::new(Arc::new(graph), values)
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same graph, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.graph.clone(), values)
    }

    /// `‖f - g‖_∞`; both fields must live on the same graph.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_domain(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_same_domain(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph {
            Ok(())
        } else {
            Err(Error::invalid("fields live on different graphs"))
        }
    }
}
