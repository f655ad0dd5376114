//! Feature heterophily of a graph signal and its spectral expectation.
//!
//! The empirical score is `h = Tr(𝓛 X Xᵀ)/n`, available both as a sum of
//! Laplacian quadratic forms and as a sum of squared feature differences over
//! edges. Its expectation over the white noise is `μₙ = Tr(f(𝓛) 𝓛 f(𝓛))/n`,
//! available both through exact basis-vector traces and through a dense
//! eigendecomposition.

use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSample;
use crate::rng;
use crate::signal::{filter_powers, FeatureMatrix, PolyFilter, SPECTRUM_MAX};

/// Largest `n` accepted by the dense eigensolver route.
pub const DEFAULT_EIGEN_CAP: usize = 4000;

/// Slack on the `[0, 2]` spectrum check.
pub const SPECTRUM_SLACK: f64 = 1e-9;

/// Negative values down to this are rounding noise and clamp to zero.
const NEGATIVE_CLAMP: f64 = -1e-9;

/// Basis vectors pushed through the filter at once by the trace route.
const TRACE_BLOCK: usize = 128;

fn clamp_nonnegative(value: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= NEGATIVE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::InternalConsistency(format!("{what} = {value} is negative")))
    }
}

fn check_rows(sample: &GraphSample, x: &FeatureMatrix) -> Result<()> {
    if x.n() != sample.n() {
        return Err(Error::shape(
            format!("{} feature rows", sample.n()),
            format!("{} feature rows", x.n()),
        ));
    }
    Ok(())
}

/// `h = Tr(𝓛 X Xᵀ)/n`, summed column by column as `x_cᵀ 𝓛 x_c`.
pub fn empirical_heterophily(sample: &GraphSample, x: &FeatureMatrix) -> Result<f64> {
    check_rows(sample, x)?;
    let q = sample.rescaled_laplacian_quadratic(x.values(), x.d());
    clamp_nonnegative(q / sample.n() as f64, "heterophily")
}

/// `h = Σ_{edges u<v} ‖X_u − X_v‖² / n²`, each undirected edge counted once.
pub fn empirical_heterophily_edge_sum(sample: &GraphSample, x: &FeatureMatrix) -> Result<f64> {
    check_rows(sample, x)?;
    let total: f64 = sample
        .edges()
        .map(|(u, v)| {
            x.row(u)
                .iter()
                .zip(x.row(v))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum();
    let n = sample.n() as f64;
    Ok(total / (n * n))
}

/// `Σᵢ (g(𝓛)eᵢ)ᵀ M (g(𝓛)eᵢ)` with `M = 𝓛` or `M = I`, i.e. `Tr(g(𝓛)² 𝓛)` or
/// `Tr(g(𝓛)²)`, by pushing blocks of basis vectors through the filter.
fn basis_trace(sample: &GraphSample, g: &PolyFilter, laplacian_middle: bool) -> Result<f64> {
    let n = sample.n();
    let mut total = 0.0;
    let mut start = 0;
    while start < n {
        let width = TRACE_BLOCK.min(n - start);
        let mut values = vec![0.0; n * width];
        for c in 0..width {
            values[(start + c) * width + c] = 1.0;
        }
        let block = FeatureMatrix::from_row_major(n, width, values)?;
        let filtered = filter_powers(g, sample, &block, |_, _| {})?.into_features(n, width);
        total += if laplacian_middle {
            sample.rescaled_laplacian_quadratic(filtered.values(), width)
        } else {
            filtered.values().iter().map(|v| v * v).sum()
        };
        start += width;
    }
    Ok(total)
}

/// `μₙ = Tr(f(𝓛) 𝓛 f(𝓛))/n`, exact up to floating point.
pub fn expected_heterophily_trace(sample: &GraphSample, filter: &PolyFilter) -> Result<f64> {
    let total = basis_trace(sample, filter, true)?;
    clamp_nonnegative(total / sample.n() as f64, "mu_n")
}

/// Eigenvalues of `𝓛` in ascending order from a dense decomposition.
///
/// Fails when `n` exceeds `cap` or when an eigenvalue leaves `[0, 2]` by more
/// than [`SPECTRUM_SLACK`].
pub fn laplacian_spectrum(sample: &GraphSample, cap: usize) -> Result<Vec<f64>> {
    let n = sample.n();
    if n > cap {
        return Err(Error::EigenCapExceeded { n, cap });
    }
    let mut eig: Vec<f64> = sample
        .dense_rescaled_laplacian()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    eig.sort_by(f64::total_cmp);
    if let Some(&bad) = eig
        .iter()
        .find(|&&l| !(-SPECTRUM_SLACK..=SPECTRUM_MAX + SPECTRUM_SLACK).contains(&l))
    {
        return Err(Error::InternalConsistency(format!(
            "Laplacian eigenvalue {bad} is outside [0, 2]"
        )));
    }
    Ok(eig)
}

/// `μₙ = Σᵢ λᵢ f(λᵢ)² / n` over the spectrum of `𝓛`.
pub fn expected_heterophily_eigen(sample: &GraphSample, filter: &PolyFilter, cap: usize) -> Result<f64> {
    let eig = laplacian_spectrum(sample, cap)?;
    let total: f64 = eig
        .iter()
        .map(|&l| {
            let v = filter.eval(l);
            l * v * v
        })
        .sum();
    clamp_nonnegative(total / sample.n() as f64, "mu_n")
}

/// Hutchinson estimate of `μₙ` from `probes` Rademacher vectors.
///
/// Approximate: the error shrinks like `1/√probes`. Meant for graphs where the
/// exact trace route is too slow.
pub fn expected_heterophily_hutchinson(
    sample: &GraphSample,
    filter: &PolyFilter,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    if probes == 0 {
        return Err(Error::InvalidArgument("at least one probe is required".into()));
    }
    let n = sample.n();
    let mut rng = rng::stream(seed);
    let values = (0..n * probes)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let z = FeatureMatrix::from_row_major(n, probes, values)?;
    let fz = filter_powers(filter, sample, &z, |_, _| {})?.into_features(n, probes);
    let q = sample.rescaled_laplacian_quadratic(fz.values(), probes);
    clamp_nonnegative(q / (n as f64 * probes as f64), "mu_n estimate")
}

/// How `μₙ` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "route")]
pub enum MuRoute {
    Eigen,
    Trace,
    Hutchinson { probes: usize, seed: u64 },
}

/// Computes `μₙ` along the requested route.
pub fn expected_heterophily(sample: &GraphSample, filter: &PolyFilter, route: MuRoute) -> Result<f64> {
    match route {
        MuRoute::Eigen => expected_heterophily_eigen(sample, filter, DEFAULT_EIGEN_CAP),
        MuRoute::Trace => expected_heterophily_trace(sample, filter),
        MuRoute::Hutchinson { probes, seed } => {
            expected_heterophily_hutchinson(sample, filter, probes, seed)
        }
    }
}

/// `Σᵢ λᵢᵐ / n = Tr((D − A)ᵐ) / n^{m+1}` by the trace-of-power route.
pub fn spectral_moment(sample: &GraphSample, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("moment order must be at least 1".into()));
    }
    // λᵐ = g(λ)·λ^{m mod 2}·g(λ) with g(λ) = λ^{⌊m/2⌋}
    let mut coeffs = vec![0.0; (m / 2) as usize + 1];
    coeffs[(m / 2) as usize] = 1.0;
    let g = PolyFilter::new(coeffs)?;
    let total = basis_trace(sample, &g, m % 2 == 1)?;
    clamp_nonnegative(total / sample.n() as f64, "spectral moment")
}

/// `Σᵢ (dᵢ/n)ᵐ / n`.
pub fn degree_moment(sample: &GraphSample, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("moment order must be at least 1".into()));
    }
    let n = sample.n() as f64;
    Ok(sample
        .degrees()
        .iter()
        .map(|&d| (d as f64 / n).powi(m as i32))
        .sum::<f64>()
        / n)
}

/// Heterophily measurements for one graph–feature pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterophilyReport {
    pub h_empirical: f64,
    /// Edge-sum form of the same score.
    pub h_edge_sum: f64,
    /// `|h_empirical − h_edge_sum|`.
    pub formula_gap: f64,
    pub mu_n: Option<f64>,
    pub h_limit: Option<f64>,
    pub n: usize,
    pub d: usize,
    pub seed_graph: Option<u64>,
    pub seed_features: Option<u64>,
    pub library_version: String,
    pub timestamp_unix: u64,
}

impl HeterophilyReport {
    /// Measures `h` by both formulas.
    pub fn measure(sample: &GraphSample, x: &FeatureMatrix) -> Result<Self> {
        let h_empirical = empirical_heterophily(sample, x)?;
        let h_edge_sum = empirical_heterophily_edge_sum(sample, x)?;
        Ok(HeterophilyReport {
            h_empirical,
            h_edge_sum,
            formula_gap: (h_empirical - h_edge_sum).abs(),
            mu_n: None,
            h_limit: None,
            n: sample.n(),
            d: x.d(),
            seed_graph: sample.seed(),
            seed_features: None,
            library_version: crate::VERSION.to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        })
    }

    pub fn with_mu(mut self, mu_n: f64) -> Self {
        self.mu_n = Some(mu_n);
        self
    }

    pub fn with_limit(mut self, h_limit: f64) -> Self {
        self.h_limit = Some(h_limit);
        self
    }

    pub fn with_feature_seed(mut self, seed: u64) -> Self {
        self.seed_features = Some(seed);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
