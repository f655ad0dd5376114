//! Stationary graph signals: white Gaussian features pushed through a
//! polynomial in the rescaled Laplacian `𝓛 = (D − A)/n`.

use log::warn;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSample;
use crate::rng;

/// Upper end of the spectrum of `𝓛`.
pub const SPECTRUM_MAX: f64 = 2.0;

/// Polynomial filter `gain · Σₖ aₖ λᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterSpec", into = "FilterSpec")]
pub struct PolyFilter {
    coeffs: Vec<f64>,
    gain: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub coeffs: Vec<f64>,
    #[serde(default = "unit_gain")]
    pub gain: f64,
}

fn unit_gain() -> f64 {
    1.0
}

impl TryFrom<FilterSpec> for PolyFilter {
    type Error = Error;

    fn try_from(spec: FilterSpec) -> Result<Self> {
        PolyFilter::with_gain(spec.coeffs, spec.gain)
    }
}

impl From<PolyFilter> for FilterSpec {
    fn from(f: PolyFilter) -> Self {
        FilterSpec {
            coeffs: f.coeffs,
            gain: f.gain,
        }
    }
}

impl PolyFilter {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        Self::with_gain(coeffs, 1.0)
    }

    pub fn with_gain(coeffs: Vec<f64>, gain: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidFilter("at least one coefficient is required".into()));
        }
        if let Some((k, a)) = coeffs.iter().enumerate().find(|(_, a)| !a.is_finite()) {
            return Err(Error::InvalidFilter(format!("coefficient a{k} = {a} is not finite")));
        }
        if !gain.is_finite() {
            return Err(Error::InvalidFilter(format!("gain {gain} is not finite")));
        }
        // |f(λ)| on [0, 2] is bounded by Σ|aₖ|2ᵏ.
        let bound: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.abs() * SPECTRUM_MAX.powi(k as i32))
            .sum::<f64>()
            * gain.abs();
        if !bound.is_finite() {
            return Err(Error::InvalidFilter("filter overflows on [0, 2]".into()));
        }
        Ok(PolyFilter { coeffs, gain })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("filter serializes")
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Same shape, different gain.
    pub fn rescaled(&self, gain: f64) -> Result<Self> {
        Self::with_gain(self.coeffs.clone(), gain)
    }

    /// `K`, the number of coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `gain · f(λ)` by Horner's rule.
    pub fn eval(&self, lambda: f64) -> f64 {
        self.gain * self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * lambda + a)
    }

    /// Index past the last nonzero coefficient.
    fn effective_len(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&a| a != 0.0)
            .map_or(0, |k| k + 1)
    }
}

/// Row-major `n × d` real matrix; row `i` holds the features of node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(n: usize, d: usize) -> Self {
        FeatureMatrix {
            n,
            d,
            values: vec![0.0; n * d],
        }
    }

    pub fn from_row_major(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * d {
            return Err(Error::shape(format!("{n}×{d} = {} values", n * d), values.len()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Malformed(format!("non-finite feature value {v}")));
        }
        Ok(FeatureMatrix { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Malformed("ragged feature rows".into()));
        }
        Self::from_row_major(n, d, rows.concat())
    }

    /// `n × n` identity, the columns being the basis vectors `eᵢ`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.values[i * self.d + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, c)).collect()
    }

    /// Entrywise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &FeatureMatrix, b: f64) -> Result<Self> {
        if (self.n, self.d) != (other.n, other.d) {
            return Err(Error::shape(
                format!("{}×{}", self.n, self.d),
                format!("{}×{}", other.n, other.d),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(FeatureMatrix { n: self.n, d: self.d, values })
    }

    /// Reorders columns: column `c` of the result is column `perm[c]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.d);
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n {
            let row = self.row(i);
            values.extend(perm.iter().map(|&c| row[c]));
        }
        FeatureMatrix { n: self.n, d: self.d, values }
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> Self {
        let width = end - start;
        let mut values = Vec::with_capacity(self.n * width);
        for i in 0..self.n {
            values.extend_from_slice(&self.row(i)[start..end]);
        }
        FeatureMatrix { n: self.n, d: width, values }
    }
}

/// White features `X₀`: entries i.i.d. `N(0, 1/d)`, drawn row by row.
pub fn sample_white_features(n: usize, d: usize, seed: u64) -> Result<FeatureMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("feature shape {n}×{d} has a zero dimension")));
    }
    let mut rng = rng::stream(seed);
    let scale = 1.0 / (d as f64).sqrt();
    let values = (0..n * d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect();
    Ok(FeatureMatrix { n, d, values })
}

/// Default feature dimension: `d = n`, which satisfies
/// `d^{1/α} ≤ n ≤ d^α` for every `α > 1`.
pub fn default_dimension(n: usize) -> usize {
    n
}

/// Outcome of checking a feature dimension against the proportional regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimensionCheck {
    Accepted,
    /// `n` falls outside `[d^{1/α}, d^α]`; generation still proceeds.
    OutsideRegime { lower: f64, upper: f64 },
}

/// Checks `d^{1/α} ≤ n ≤ d^α` and logs a warning when it fails.
pub fn validate_dimension(n: usize, d: usize, alpha: f64) -> Result<DimensionCheck> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must exceed 1")));
    }
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let (nf, df) = (n as f64, d as f64);
    let lower = df.powf(1.0 / alpha);
    let upper = df.powf(alpha);
    if lower <= nf && nf <= upper {
        Ok(DimensionCheck::Accepted)
    } else {
        warn!("n = {n}, d = {d} is outside the proportional regime [{lower:.3}, {upper:.3}] for alpha = {alpha}");
        Ok(DimensionCheck::OutsideRegime { lower, upper })
    }
}

/// `𝓛 v = (D − A) v / n`.
pub fn rescaled_laplacian_matvec(sample: &GraphSample, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != sample.n() {
        return Err(Error::shape(sample.n(), v.len()));
    }
    let mut out = vec![0.0; v.len()];
    sample.rescaled_laplacian_block(v, 1, &mut out);
    Ok(out)
}

/// `𝓛 X` for a whole feature matrix.
pub fn rescaled_laplacian_apply(sample: &GraphSample, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.n != sample.n() {
        return Err(Error::shape(sample.n(), x.n));
    }
    let mut out = FeatureMatrix::zeros(x.n, x.d);
    sample.rescaled_laplacian_block(&x.values, x.d, &mut out.values);
    Ok(out)
}

/// `X = gain · Σₖ aₖ 𝓛ᵏ X₀`.
///
/// Powers are carried as `Pₖ = 𝓛 Pₖ₋₁` and accumulated term by term; the
/// gain is applied last. Trailing zero coefficients cost no products.
pub fn apply_filter(filter: &PolyFilter, sample: &GraphSample, x0: &FeatureMatrix) -> Result<FeatureMatrix> {
    let mut out = FeatureMatrix::zeros(x0.n, x0.d);
    filter_powers(filter, sample, x0, |_, _| {})?.accumulate_into(&mut out);
    Ok(out)
}

/// Runs the power recurrence, handing every `(k, 𝓛ᵏ X₀)` to `visit`.
pub fn filter_powers(
    filter: &PolyFilter,
    sample: &GraphSample,
    x0: &FeatureMatrix,
    mut visit: impl FnMut(usize, &FeatureMatrix),
) -> Result<FilterOutput> {
    if x0.n != sample.n() {
        return Err(Error::shape(format!("{} rows", sample.n()), format!("{} rows", x0.n)));
    }
    let (n, d) = (x0.n, x0.d);
    let terms = filter.effective_len();
    let mut acc = vec![0.0; n * d];
    if terms == 0 {
        return Ok(FilterOutput { acc, gain: filter.gain });
    }
    let coeffs = filter.coeffs();
    for (a, p) in acc.iter_mut().zip(&x0.values) {
        *a = coeffs[0] * p;
    }
    visit(0, x0);
    let mut power = x0.clone();
    let mut next = FeatureMatrix::zeros(n, d);
    for (k, &a) in coeffs.iter().enumerate().take(terms).skip(1) {
        sample.rescaled_laplacian_block(&power.values, d, &mut next.values);
        std::mem::swap(&mut power, &mut next);
        visit(k, &power);
        if a != 0.0 {
            for (acc, p) in acc.iter_mut().zip(&power.values) {
                *acc += a * p;
            }
        }
    }
    Ok(FilterOutput { acc, gain: filter.gain })
}

/// Un-gained filter sum produced by [`filter_powers`].
pub struct FilterOutput {
    acc: Vec<f64>,
    gain: f64,
}

impl FilterOutput {
    fn accumulate_into(self, out: &mut FeatureMatrix) {
        let gain = self.gain;
        for (o, a) in out.values.iter_mut().zip(self.acc) {
            *o = gain * a;
        }
    }

    pub fn into_features(self, n: usize, d: usize) -> FeatureMatrix {
        let mut out = FeatureMatrix::zeros(n, d);
        self.accumulate_into(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;
    use nalgebra::DMatrix;

    #[test]
    fn filter_validation() {
        assert!(PolyFilter::new(vec![]).is_err());
        assert!(PolyFilter::new(vec![1.0, f64::NAN]).is_err());
        assert!(PolyFilter::with_gain(vec![1.0], f64::INFINITY).is_err());
        assert!(PolyFilter::new(vec![1e308, 1e308]).is_err());
        let f = PolyFilter::with_gain(vec![1.0, -2.0, 0.5], 3.0).unwrap();
        assert_eq!(f.eval(2.0), 3.0 * (1.0 - 4.0 + 2.0));
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn filter_json() {
        let f = PolyFilter::from_json(r#"{"coeffs":[1.0,0.5]}"#).unwrap();
        assert_eq!(f.gain(), 1.0);
        let g = PolyFilter::from_json(r#"{"coeffs":[1.0,0.5],"gain":2.0}"#).unwrap();
        assert_eq!(PolyFilter::from_json(&g.to_json()).unwrap(), g);
        assert!(PolyFilter::from_json(r#"{"coeffs":[]}"#).is_err());
    }

    #[test]
    fn white_feature_shapes() {
        let x = sample_white_features(2, 1, 17).unwrap();
        assert_eq!((x.n(), x.d()), (2, 1));
        assert_eq!(x, sample_white_features(2, 1, 17).unwrap());
        assert_ne!(x, sample_white_features(2, 1, 18).unwrap());
        assert!(sample_white_features(0, 3, 1).is_err());
        assert!(sample_white_features(3, 0, 1).is_err());
    }

    #[test]
    fn white_feature_row_norms() {
        // E‖eᵢ/√d‖² = 1 and the mean of 1000 rows has sd √(2/d)/√1000 ≈ 1.4e-3.
        let x = sample_white_features(1000, 1000, 3).unwrap();
        let mean: f64 = (0..1000)
            .map(|i| x.row(i).iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / 1000.0;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn dimension_policy() {
        assert_eq!(default_dimension(500), 500);
        assert_eq!(validate_dimension(100, 10, 2.0).unwrap(), DimensionCheck::Accepted);
        assert!(matches!(
            validate_dimension(1000, 2, 2.0).unwrap(),
            DimensionCheck::OutsideRegime { .. }
        ));
        assert!(validate_dimension(10, 10, 1.0).is_err());
    }

    #[test]
    fn matvec_examples() {
        let k3 = named::complete(3);
        assert_eq!(rescaled_laplacian_matvec(&k3, &[1.0, 1.0, 1.0]).unwrap(), vec![0.0; 3]);
        let p2 = named::path(2);
        assert_eq!(rescaled_laplacian_matvec(&p2, &[1.0, 0.0]).unwrap(), vec![0.5, -0.5]);
        let e = named::empty(4);
        assert_eq!(rescaled_laplacian_matvec(&e, &[1.0, -2.0, 3.0, 4.0]).unwrap(), vec![0.0; 4]);
        assert!(rescaled_laplacian_matvec(&e, &[1.0]).is_err());
    }

    #[test]
    fn identity_filter_is_exact() {
        let g = named::star(5);
        let x0 = sample_white_features(6, 4, 9).unwrap();
        let x = apply_filter(&PolyFilter::new(vec![1.0]).unwrap(), &g, &x0).unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn laplacian_filter_kills_constants() {
        let k3 = named::complete(3);
        let x0 = FeatureMatrix::from_rows(&[vec![2.0, -1.0], vec![2.0, -1.0], vec![2.0, -1.0]]).unwrap();
        let x = apply_filter(&PolyFilter::new(vec![0.0, 1.0]).unwrap(), &k3, &x0).unwrap();
        assert!(x.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_dense_oracle() {
        let g = GraphSample::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let x0 = sample_white_features(4, 3, 21).unwrap();
        let x = apply_filter(&PolyFilter::new(vec![1.0, 1.0]).unwrap(), &g, &x0).unwrap();
        let l = g.dense_rescaled_laplacian();
        let want = (DMatrix::identity(4, 4) + l) * DMatrix::from_row_slice(4, 3, x0.values());
        for i in 0..4 {
            for c in 0..3 {
                assert!((x.get(i, c) - want[(i, c)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = named::path(3);
        let x0 = sample_white_features(4, 2, 0).unwrap();
        let f = PolyFilter::new(vec![1.0]).unwrap();
        assert!(matches!(apply_filter(&f, &g, &x0), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn zero_filter_gives_zeros() {
        let g = named::complete(4);
        let x0 = sample_white_features(4, 2, 0).unwrap();
        let x = apply_filter(&PolyFilter::new(vec![0.0, 0.0]).unwrap(), &g, &x0).unwrap();
        assert!(x.values().iter().all(|&v| v == 0.0));
    }
}
