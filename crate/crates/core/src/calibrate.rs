//! Choosing the filter gain that hits a heterophily target.
//!
//! The limiting heterophily is quadratic in the filter, so scaling a base
//! shape `f₀` by `g` scales the limit by `g²` and the gain has a closed form.

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::graphon::Graphon;
use crate::heterophily::{empirical_heterophily, expected_heterophily_trace};
use crate::rng;
use crate::signal::PolyFilter;

/// Relative tolerance on the achieved limit.
const ACHIEVED_TOLERANCE: f64 = 1e-12;

/// What the gain is solved against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationReference {
    /// The graphon limit `∫ δ f(δ)² dx`.
    #[default]
    GraphonLimit,
    /// `μₙ` of the pilot graph that is then used for generation.
    PilotSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Gain to put on the base shape (the base filter's own gain is ignored).
    pub gain: f64,
    pub h_target: f64,
    /// Reference value of the base shape at unit gain.
    pub h_base: f64,
    /// Graphon limit under the calibrated filter.
    pub h_limit_achieved: f64,
    pub reference: CalibrationReference,
    pub h_empirical_check: Option<f64>,
    pub verification_n: Option<usize>,
    pub verification_d: Option<usize>,
    pub verification_seed: Option<u64>,
}

impl CalibrationResult {
    /// `f₀` with the calibrated gain.
    pub fn calibrated_filter(&self, base: &PolyFilter) -> Result<PolyFilter> {
        base.rescaled(self.gain)
    }

    /// Relative gap between the verification measurement and the target.
    /// Reported only; finite-sample deviations are expected.
    pub fn relative_check_error(&self) -> Option<f64> {
        let h = self.h_empirical_check?;
        Some(if self.h_target == 0.0 {
            h.abs()
        } else {
            (h - self.h_target).abs() / self.h_target
        })
    }
}

fn check_target(h_target: f64) -> Result<()> {
    if !h_target.is_finite() || h_target < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target heterophily {h_target} must be finite and nonnegative"
        )));
    }
    Ok(())
}

fn solve_gain(h_base: f64, h_target: f64) -> Result<f64> {
    if h_target == 0.0 {
        Ok(0.0)
    } else if h_base > 0.0 {
        Ok((h_target / h_base).sqrt())
    } else {
        Err(Error::UnreachableTarget { target: h_target })
    }
}

fn finish(
    graphon: &Graphon,
    base: &PolyFilter,
    h_base: f64,
    h_target: f64,
    reference: CalibrationReference,
) -> Result<CalibrationResult> {
    let gain = solve_gain(h_base, h_target)?;
    let h_limit_achieved = graphon.limit_heterophily(&base.rescaled(gain)?);
    let h_limit_base = match reference {
        CalibrationReference::GraphonLimit => h_base,
        CalibrationReference::PilotSample => graphon.limit_heterophily(&base.rescaled(1.0)?),
    };
    let expected = gain * gain * h_limit_base;
    if (h_limit_achieved - expected).abs() > ACHIEVED_TOLERANCE * expected.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::InternalConsistency(format!(
            "achieved limit {h_limit_achieved} differs from g²·h₀ = {expected}"
        )));
    }
    Ok(CalibrationResult {
        gain,
        h_target,
        h_base,
        h_limit_achieved,
        reference,
        h_empirical_check: None,
        verification_n: None,
        verification_d: None,
        verification_seed: None,
    })
}

/// Gain `g = √(h* / h₀)` with `h₀` the graphon limit of the base shape.
///
/// A zero target gives gain zero. A positive target with `h₀ = 0` (empty
/// graphon, or a filter vanishing on the degree range) is unreachable.
pub fn calibrate_gain(graphon: &Graphon, base: &PolyFilter, h_target: f64) -> Result<CalibrationResult> {
    check_target(h_target)?;
    let h_base = graphon.limit_heterophily(&base.rescaled(1.0)?);
    finish(graphon, base, h_base, h_target, CalibrationReference::GraphonLimit)
}

/// Calibrates, samples a graph and features under the calibrated filter, and
/// records the measured heterophily of that sample.
pub fn generate_with_target(
    graphon: &Graphon,
    base: &PolyFilter,
    h_target: f64,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<(Dataset, CalibrationResult)> {
    generate_with_target_using(graphon, base, h_target, n, d, seed, CalibrationReference::GraphonLimit)
}

/// [`generate_with_target`] with an explicit calibration reference.
pub fn generate_with_target_using(
    graphon: &Graphon,
    base: &PolyFilter,
    h_target: f64,
    n: usize,
    d: usize,
    seed: u64,
    reference: CalibrationReference,
) -> Result<(Dataset, CalibrationResult)> {
    check_target(h_target)?;
    let mut result = match reference {
        CalibrationReference::GraphonLimit => calibrate_gain(graphon, base, h_target)?,
        CalibrationReference::PilotSample => {
            let (graph_seed, _) = rng::split_seed(seed);
            let pilot = graphon.sample(n, graph_seed)?;
            let mu = expected_heterophily_trace(&pilot, &base.rescaled(1.0)?)?;
            finish(graphon, base, mu, h_target, reference)?
        }
    };
    let filter = result.calibrated_filter(base)?;
    let data = dataset::generate(graphon, &filter, n, d, seed)?;
    result.h_empirical_check = Some(empirical_heterophily(&data.sample, &data.features)?);
    result.verification_n = Some(n);
    result.verification_d = Some(d);
    result.verification_seed = Some(seed);
    Ok((data, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> PolyFilter {
        PolyFilter::new(vec![1.0]).unwrap()
    }

    #[test]
    fn closed_form_gain() {
        let g = Graphon::constant(0.5).unwrap();
        let r = calibrate_gain(&g, &one(), 0.2).unwrap();
        // g²·0.5 = 0.2
        assert!((r.gain - 0.4f64.sqrt()).abs() < 1e-15);
        assert!((r.h_limit_achieved - 0.2).abs() < 1e-15);
        assert_eq!(r.h_base, 0.5);
    }

    #[test]
    fn zero_target_gives_zero_gain() {
        let g = Graphon::constant(0.0).unwrap();
        assert_eq!(calibrate_gain(&g, &one(), 0.0).unwrap().gain, 0.0);
        let g = Graphon::constant(0.4).unwrap();
        assert_eq!(calibrate_gain(&g, &one(), 0.0).unwrap().gain, 0.0);
    }

    #[test]
    fn unreachable_and_invalid_targets() {
        let g = Graphon::constant(0.0).unwrap();
        assert!(matches!(calibrate_gain(&g, &one(), 0.1), Err(Error::UnreachableTarget { .. })));
        // λ − 0.5 vanishes on δ ≡ 0.5
        let g = Graphon::constant(0.5).unwrap();
        let notch = PolyFilter::new(vec![-0.5, 1.0]).unwrap();
        assert!(matches!(calibrate_gain(&g, &notch, 0.1), Err(Error::UnreachableTarget { .. })));
        assert!(calibrate_gain(&g, &one(), -0.1).is_err());
        assert!(calibrate_gain(&g, &one(), f64::NAN).is_err());
    }

    #[test]
    fn base_gain_is_ignored() {
        let g = Graphon::constant(0.5).unwrap();
        let base = PolyFilter::with_gain(vec![1.0], 7.0).unwrap();
        let r = calibrate_gain(&g, &base, 0.2).unwrap();
        assert!((r.gain - 0.4f64.sqrt()).abs() < 1e-15);
        let again = calibrate_gain(&g, &r.calibrated_filter(&base).unwrap(), 0.2).unwrap();
        assert_eq!(again.gain, r.gain);
    }

    #[test]
    fn zero_target_generates_zero_features() {
        let g = Graphon::constant(0.5).unwrap();
        let (data, r) = generate_with_target(&g, &one(), 0.0, 50, 10, 1).unwrap();
        assert!(data.features.values().iter().all(|&v| v == 0.0));
        assert_eq!(r.h_empirical_check, Some(0.0));
    }

    #[test]
    fn pilot_reference() {
        let g = Graphon::constant(0.5).unwrap();
        let (data, r) =
            generate_with_target_using(&g, &one(), 0.2, 300, 300, 4, CalibrationReference::PilotSample)
                .unwrap();
        let mu = expected_heterophily_trace(&data.sample, &r.calibrated_filter(&one()).unwrap()).unwrap();
        assert!((mu - 0.2).abs() < 1e-12, "{mu}");
        assert_eq!(r.reference, CalibrationReference::PilotSample);
        assert!(r.relative_check_error().unwrap() < 0.1);
    }
}
