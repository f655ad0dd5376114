//! Monte Carlo studies of how the empirical heterophily concentrates around
//! `μₙ` and converges to the graphon limit as `n` grows.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset;
use crate::error::{Error, Result};
use crate::graphon::Graphon;
use crate::heterophily::{empirical_heterophily, expected_heterophily, MuRoute};
use crate::rng::trial_seed;
use crate::signal::{default_dimension, PolyFilter};

/// Above this `n`, `μₙ` switches from the eigen route to the trace route.
pub const DEFAULT_EIGEN_MAX_N: usize = 2000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionPolicy {
    /// `d = n`.
    #[default]
    Default,
    Fixed(usize),
}

impl DimensionPolicy {
    pub fn dimension(&self, n: usize) -> usize {
        match *self {
            DimensionPolicy::Default => default_dimension(n),
            DimensionPolicy::Fixed(d) => d,
        }
    }
}

fn default_eigen_max_n() -> usize {
    DEFAULT_EIGEN_MAX_N
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graphon: Graphon,
    pub filter: PolyFilter,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub d_policy: DimensionPolicy,
    #[serde(default = "default_eigen_max_n")]
    pub eigen_max_n: usize,
}

impl ExperimentConfig {
    pub fn new(graphon: Graphon, filter: PolyFilter, sizes: Vec<usize>, trials: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            graphon,
            filter,
            sizes,
            trials,
            base_seed,
            d_policy: DimensionPolicy::Default,
            eigen_max_n: DEFAULT_EIGEN_MAX_N,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("at least one size is required".into()));
        }
        if self.sizes[0] == 0 {
            return Err(Error::InvalidArgument("sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("sizes must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if let DimensionPolicy::Fixed(0) = self.d_policy {
            return Err(Error::InvalidArgument("fixed feature dimension must be positive".into()));
        }
        Ok(())
    }

    fn mu_route(&self, n: usize) -> MuRoute {
        if n <= self.eigen_max_n {
            MuRoute::Eigen
        } else {
            MuRoute::Trace
        }
    }
}

/// One line of an experiment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub mean_h: f64,
    /// Mean `μₙ` over trials (concentration) or the graphon limit (convergence).
    pub reference: f64,
    pub mean_abs_dev: f64,
    /// Sample standard deviation of the absolute deviations.
    pub std_dev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Concentration,
    Convergence,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concentration" => Ok(ExperimentKind::Concentration),
            "convergence" => Ok(ExperimentKind::Convergence),
            other => Err(Error::InvalidArgument(format!("unknown experiment kind {other:?}"))),
        }
    }
}

struct Trial {
    h: f64,
    reference: f64,
}

fn run_trials(cfg: &ExperimentConfig, n: usize, trial: impl Fn(u64, usize) -> Result<Trial> + Sync) -> Result<ExperimentRow> {
    let d = cfg.d_policy.dimension(n);
    let trials: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial(trial_seed(cfg.base_seed, n, t), d))
        .collect::<Result<_>>()?;
    let count = trials.len() as f64;
    let devs: Vec<f64> = trials.iter().map(|t| (t.h - t.reference).abs()).collect();
    let mean_abs_dev = devs.iter().sum::<f64>() / count;
    let std_dev = if trials.len() > 1 {
        (devs.iter().map(|v| (v - mean_abs_dev).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(ExperimentRow {
        n,
        d,
        trials: trials.len(),
        mean_h: trials.iter().map(|t| t.h).sum::<f64>() / count,
        reference: trials.iter().map(|t| t.reference).sum::<f64>() / count,
        mean_abs_dev,
        std_dev,
    })
}

/// Deviation of `h` from the graph-specific `μₙ`, per size.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    cfg.sizes
        .iter()
        .map(|&n| {
            run_trials(cfg, n, |seed, d| {
                let data = dataset::generate(&cfg.graphon, &cfg.filter, n, d, seed)?;
                let h = empirical_heterophily(&data.sample, &data.features)?;
                let reference = expected_heterophily(&data.sample, &cfg.filter, cfg.mu_route(n))?;
                Ok(Trial { h, reference })
            })
        })
        .collect()
}

/// Deviation of `h` from the graphon limit, per size.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let limit = cfg.graphon.limit_heterophily(&cfg.filter);
    cfg.sizes
        .iter()
        .map(|&n| {
            run_trials(cfg, n, |seed, d| {
                let data = dataset::generate(&cfg.graphon, &cfg.filter, n, d, seed)?;
                let h = empirical_heterophily(&data.sample, &data.features)?;
                Ok(Trial { h, reference: limit })
            })
        })
        .collect()
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    match kind {
        ExperimentKind::Concentration => run_concentration(cfg),
        ExperimentKind::Convergence => run_convergence(cfg),
    }
}

pub const CSV_HEADER: &str = "n,d,trials,mean_h,reference,mean_abs_dev,std_dev";

/// Rows as CSV text. Floats use the shortest round-trip representation.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n, r.d, r.trials, r.mean_h, r.reference, r.mean_abs_dev, r.std_dev
        );
    }
    out
}

/// Log–log SVG of `mean_abs_dev` against `n`, with a slope −1/2 guide
/// through the first plotted point.
pub fn rows_to_svg(rows: &[ExperimentRow], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mean_abs_dev > 0.0)
        .map(|r| ((r.n as f64).log10(), r.mean_abs_dev.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (x0, y0) = pts[0];
    let guide = |x: f64| y0 - 0.5 * (x - x0);
    let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let ys = pts.iter().map(|p| p.1).chain([guide(xmin), guide(xmax)]);
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let span = |lo: f64, hi: f64| if hi - lo > 1e-12 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let (xmin, xmax) = span(xmin, xmax);
    let (ymin, ymax) = span(ymin, ymax);
    let sx = |x: f64| PAD + (x - xmin) / (xmax - xmin) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - ymin) / (ymax - ymin) * (H - 2.0 * PAD);

    let _ = writeln!(
        svg,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6,4"/>"#,
        sx(xmin),
        sy(guide(xmin)),
        sx(xmax),
        sy(guide(xmax))
    );
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        path.join(" ")
    );
    for &(x, y) in &pts {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(x), sy(y));
    }
    for r in rows.iter().filter(|r| r.mean_abs_dev > 0.0) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            sx((r.n as f64).log10()),
            H - PAD + 18.0,
            r.n
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">n (log scale)</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 {})">mean |deviation| (log scale)</text>"#,
        H / 2.0,
        H / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
