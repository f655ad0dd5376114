//! One graph plus its filtered features, reproducible from a single seed.

use crate::error::Result;
use crate::graph::GraphSample;
use crate::graphon::Graphon;
use crate::rng;
use crate::signal::{apply_filter, sample_white_features, FeatureMatrix, PolyFilter};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample: GraphSample,
    pub features: FeatureMatrix,
    pub graph_seed: u64,
    pub feature_seed: u64,
}

/// Samples a graph of `n` nodes and `n × d` features `f(𝓛) X₀`.
///
/// The graph uses `seed` directly; the white features use a stream derived
/// from it, so the pair is fixed by `(graphon, filter, n, d, seed)`.
pub fn generate(graphon: &Graphon, filter: &PolyFilter, n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let (graph_seed, feature_seed) = rng::split_seed(seed);
    let sample = graphon.sample(n, graph_seed)?;
    let x0 = sample_white_features(n, d, feature_seed)?;
    let features = apply_filter(filter, &sample, &x0)?;
    Ok(Dataset {
        sample,
        features,
        graph_seed,
        feature_seed,
    })
}
