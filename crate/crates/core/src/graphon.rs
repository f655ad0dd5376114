//! Graphon models: evaluation, degree functions, sampling and the limiting
//! heterophily of the filtered-noise signal model.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::graph::GraphSample;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::rng;
use crate::signal::PolyFilter;

const SUM_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const VALIDATION_GRID: usize = 101;

/// A Lipschitz constant for the kernel, when one exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzBound {
    Finite(f64),
    /// Step functions jump at block boundaries.
    NotApplicable,
}

/// Smooth kernels with a known closed-form degree function.
#[derive(Debug, Clone, PartialEq)]
pub enum ParametricKernel {
    /// `W(x, y) = x·y`.
    Product,
    /// `W(x, y) = σ(c·(x + y) + b)` with the logistic `σ`.
    Logistic { c: f64, b: f64 },
    /// `W(x, y) = a + b·(x + y)`.
    Affine { a: f64, b: f64 },
}

impl ParametricKernel {
    fn from_params(id: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            match params.get(key).copied().or(default) {
                Some(v) if v.is_finite() => Ok(v),
                Some(v) => Err(Error::InvalidGraphon(format!("parameter {key} = {v} is not finite"))),
                None => Err(Error::InvalidGraphon(format!("kernel {id} needs parameter {key}"))),
            }
        };
        let allowed: &[&str] = match id {
            "product" => &[],
            "logistic" => &["c", "b"],
            "affine" => &["a", "b"],
            other => return Err(Error::InvalidGraphon(format!("unknown kernel {other:?}"))),
        };
        if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidGraphon(format!("kernel {id} has no parameter {extra}")));
        }
        Ok(match id {
            "product" => ParametricKernel::Product,
            "logistic" => ParametricKernel::Logistic {
                c: get("c", None)?,
                b: get("b", Some(0.0))?,
            },
            _ => ParametricKernel::Affine {
                a: get("a", None)?,
                b: get("b", None)?,
            },
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            ParametricKernel::Product => "product",
            ParametricKernel::Logistic { .. } => "logistic",
            ParametricKernel::Affine { .. } => "affine",
        }
    }

    fn params(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        match *self {
            ParametricKernel::Product => {}
            ParametricKernel::Logistic { c, b } => {
                map.insert("c".into(), c);
                map.insert("b".into(), b);
            }
            ParametricKernel::Affine { a, b } => {
                map.insert("a".into(), a);
                map.insert("b".into(), b);
            }
        }
        map
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            ParametricKernel::Product => x * y,
            ParametricKernel::Logistic { c, b } => logistic(c * (x + y) + b),
            ParametricKernel::Affine { a, b } => a + b * (x + y),
        }
    }

    /// Closed-form `δ(x) = ∫₀¹ W(x, y) dy`.
    pub fn analytic_degree(&self, x: f64) -> f64 {
        match *self {
            ParametricKernel::Product => 0.5 * x,
            ParametricKernel::Logistic { c, b } => {
                if c == 0.0 {
                    logistic(b)
                } else {
                    (softplus(c * (x + 1.0) + b) - softplus(c * x + b)) / c
                }
            }
            ParametricKernel::Affine { a, b } => a + b * (x + 0.5),
        }
    }

    fn lipschitz(&self) -> f64 {
        match *self {
            ParametricKernel::Product => 1.0,
            ParametricKernel::Logistic { c, .. } => 0.25 * c.abs(),
            ParametricKernel::Affine { b, .. } => b.abs(),
        }
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// The three supported graphon families.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphonFamily {
    /// Erdős–Rényi: `W ≡ p`.
    Constant(f64),
    /// Stochastic block model with block fractions and a symmetric
    /// probability matrix.
    StepFunction {
        block_fractions: Vec<f64>,
        prob_matrix: Vec<Vec<f64>>,
    },
    Parametric(ParametricKernel),
}

/// Serialized form of a graphon.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphonSpec {
    Constant {
        p: f64,
    },
    Sbm {
        alpha: Vec<f64>,
        #[serde(rename = "P")]
        probs: Vec<Vec<f64>>,
    },
    Parametric {
        kernel: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

/// A validated graphon `W : [0,1]² → [0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphonSpec", into = "GraphonSpec")]
pub struct Graphon {
    family: GraphonFamily,
    lipschitz: LipschitzBound,
    /// Right end of each block for step functions; the last is exactly 1.
    boundaries: Vec<f64>,
    /// Degree value of each block for step functions.
    block_degrees: Vec<f64>,
}

impl TryFrom<GraphonSpec> for Graphon {
    type Error = Error;

    fn try_from(spec: GraphonSpec) -> Result<Self> {
        match spec {
            GraphonSpec::Constant { p } => Graphon::constant(p),
            GraphonSpec::Sbm { alpha, probs } => Graphon::step_function(alpha, probs),
            GraphonSpec::Parametric { kernel, params } => {
                Graphon::parametric(ParametricKernel::from_params(&kernel, &params)?)
            }
        }
    }
}

impl From<Graphon> for GraphonSpec {
    fn from(g: Graphon) -> Self {
        match g.family {
            GraphonFamily::Constant(p) => GraphonSpec::Constant { p },
            GraphonFamily::StepFunction {
                block_fractions,
                prob_matrix,
            } => GraphonSpec::Sbm {
                alpha: block_fractions,
                probs: prob_matrix,
            },
            GraphonFamily::Parametric(k) => GraphonSpec::Parametric {
                kernel: k.id().to_string(),
                params: k.params(),
            },
        }
    }
}

impl Graphon {
    /// Erdős–Rényi graphon `W ≡ p`.
    pub fn constant(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidGraphon(format!("p = {p} is outside [0, 1]")));
        }
        Ok(Graphon {
            family: GraphonFamily::Constant(p),
            lipschitz: LipschitzBound::Finite(0.0),
            boundaries: Vec::new(),
            block_degrees: Vec::new(),
        })
    }

    /// Step-function (SBM) graphon.
    pub fn step_function(block_fractions: Vec<f64>, prob_matrix: Vec<Vec<f64>>) -> Result<Self> {
        let r = block_fractions.len();
        if r == 0 {
            return Err(Error::InvalidGraphon("no blocks".into()));
        }
        if block_fractions.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidGraphon("block fractions must be nonnegative".into()));
        }
        let total: f64 = block_fractions.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidGraphon(format!("block fractions sum to {total}, not 1")));
        }
        if prob_matrix.len() != r || prob_matrix.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidGraphon(format!("probability matrix must be {r}×{r}")));
        }
        for i in 0..r {
            for j in 0..r {
                let v = prob_matrix[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidGraphon(format!("P[{i}][{j}] = {v} is outside [0, 1]")));
                }
                if v != prob_matrix[j][i] {
                    return Err(Error::InvalidGraphon(format!("P is not symmetric at ({i}, {j})")));
                }
            }
        }
        let mut boundaries = Vec::with_capacity(r);
        let mut acc = 0.0;
        for a in &block_fractions {
            acc += a;
            boundaries.push(acc);
        }
        boundaries[r - 1] = 1.0;
        let block_degrees = prob_matrix
            .iter()
            .map(|row| row.iter().zip(&block_fractions).map(|(p, a)| a * p).sum())
            .collect();
        Ok(Graphon {
            family: GraphonFamily::StepFunction {
                block_fractions,
                prob_matrix,
            },
            lipschitz: LipschitzBound::NotApplicable,
            boundaries,
            block_degrees,
        })
    }

    /// Smooth parametric graphon, checked for range and symmetry on a grid.
    pub fn parametric(kernel: ParametricKernel) -> Result<Self> {
        let step = 1.0 / (VALIDATION_GRID - 1) as f64;
        for i in 0..VALIDATION_GRID {
            for j in 0..VALIDATION_GRID {
                let (x, y) = (i as f64 * step, j as f64 * step);
                let w = kernel.eval(x, y);
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::InvalidGraphon(format!(
                        "{} kernel gives W({x}, {y}) = {w}",
                        kernel.id()
                    )));
                }
                if (w - kernel.eval(y, x)).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidGraphon(format!(
                        "{} kernel is not symmetric at ({x}, {y})",
                        kernel.id()
                    )));
                }
            }
        }
        Ok(Graphon {
            lipschitz: LipschitzBound::Finite(kernel.lipschitz()),
            family: GraphonFamily::Parametric(kernel),
            boundaries: Vec::new(),
            block_degrees: Vec::new(),
        })
    }

    /// Parses the JSON document form.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graphon serializes")
    }

    pub fn family(&self) -> &GraphonFamily {
        &self.family
    }

    pub fn lipschitz_bound(&self) -> LipschitzBound {
        self.lipschitz
    }

    fn block_of(&self, x: f64) -> usize {
        let last = self.boundaries.len() - 1;
        self.boundaries[..last].partition_point(|&b| b <= x)
    }

    fn eval_unchecked(&self, x: f64, y: f64) -> f64 {
        match &self.family {
            GraphonFamily::Constant(p) => *p,
            GraphonFamily::StepFunction { prob_matrix, .. } => {
                prob_matrix[self.block_of(x)][self.block_of(y)]
            }
            GraphonFamily::Parametric(k) => k.eval(x, y),
        }
    }

    fn degree_unchecked(&self, x: f64) -> f64 {
        match &self.family {
            GraphonFamily::Constant(p) => *p,
            GraphonFamily::StepFunction { .. } => self.block_degrees[self.block_of(x)],
            GraphonFamily::Parametric(k) => GaussLegendre::degree_rule().integrate(|y| k.eval(x, y)),
        }
    }

    /// `W(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Degree function `δ(x) = ∫₀¹ W(x, y) dy`: closed form for constant and
    /// step graphons, 256-point Gauss–Legendre for parametric kernels.
    pub fn degree_function(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok(self.degree_unchecked(x))
    }

    /// Limiting heterophily `∫₀¹ δ(x) f(δ(x))² dx` of graphs drawn from this
    /// graphon with features filtered by `f`.
    ///
    /// Constant and step graphons use their exact finite sums; parametric
    /// kernels use a 1024-point outer rule.
    pub fn limit_heterophily(&self, filter: &PolyFilter) -> f64 {
        let integrand = |delta: f64| {
            let v = filter.eval(delta);
            delta * v * v
        };
        match &self.family {
            GraphonFamily::Constant(p) => integrand(*p),
            GraphonFamily::StepFunction {
                block_fractions, ..
            } => block_fractions
                .iter()
                .zip(&self.block_degrees)
                .map(|(a, &d)| a * integrand(d))
                .sum(),
            GraphonFamily::Parametric(_) => {
                GaussLegendre::limit_rule().integrate(|x| integrand(self.degree_unchecked(x)))
            }
        }
    }

    /// Draws a graph on `n` nodes.
    ///
    /// Draw order: the `n` latents in index order, then one uniform per
    /// unordered pair `(i, j)`, `i < j`, in lexicographic order. The edge is
    /// present when the uniform falls below `W(u_i, u_j)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<GraphSample> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("n = {n} exceeds u32 node ids")));
        }
        let mut rng = rng::stream(seed);
        let latents: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];

        match &self.family {
            GraphonFamily::StepFunction { prob_matrix, .. } => {
                let blocks: Vec<usize> = latents.iter().map(|&u| self.block_of(u)).collect();
                for i in 0..n {
                    let row = &prob_matrix[blocks[i]];
                    for j in i + 1..n {
                        if rng.random::<f64>() < row[blocks[j]] {
                            link(&mut lists, i, j);
                        }
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in i + 1..n {
                        if rng.random::<f64>() < self.eval_unchecked(latents[i], latents[j]) {
                            link(&mut lists, i, j);
                        }
                    }
                }
            }
        }
        Ok(GraphSample::from_sorted_lists(lists, Some(latents), Some(seed)))
    }

    /// `max_i |d_i / n − δ(u_i)|`: how far empirical degrees sit from the
    /// degree function at each node's latent.
    pub fn max_degree_deviation(&self, sample: &GraphSample) -> Result<f64> {
        let latents = sample.latents().ok_or(Error::MissingLatents)?;
        let n = sample.n() as f64;
        Ok(sample
            .degrees()
            .iter()
            .zip(latents)
            .map(|(&d, &u)| (d as f64 / n - self.degree_unchecked(u)).abs())
            .fold(0.0, f64::max))
    }
}

fn link(lists: &mut [Vec<u32>], i: usize, j: usize) {
    lists[i].push(j as u32);
    lists[j].push(i as u32);
}

/// Free-function form of [`Graphon::sample`].
pub fn sample_graph(graphon: &Graphon, n: usize, seed: u64) -> Result<GraphSample> {
    graphon.sample(n, seed)
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}
