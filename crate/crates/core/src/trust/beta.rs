use serde::{Deserialize, Serialize};

use super::psm::PsmDatapoint;
use crate::error::{Error, Result};

/// Beta belief over a trust value in [0, 1], held in mean/precision form:
/// α = λφ, β = λ(1 − φ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrust")]
pub struct TrustDistribution {
    mean: f64,
    precision: f64,
}

#[derive(Deserialize)]
struct RawTrust {
    mean: f64,
    precision: f64,
}

impl TryFrom<RawTrust> for TrustDistribution {
    type Error = Error;

    fn try_from(raw: RawTrust) -> Result<Self> {
        Self::new(raw.mean, raw.precision)
    }
}

impl TrustDistribution {
    pub fn new(mean: f64, precision: f64) -> Result<Self> {
        if !(mean > 0.0 && mean < 1.0) {
            return Err(Error::InvalidParameter(format!("trust mean must lie in (0, 1), got {mean}")));
        }
        if !(precision > 0.0 && precision.is_finite()) {
            return Err(Error::InvalidParameter(format!("trust precision must be positive, got {precision}")));
        }
        Ok(Self { mean, precision })
    }

    pub fn from_alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("Beta parameters must be positive, got ({alpha}, {beta})")));
        }
        Self::new(alpha / (alpha + beta), alpha + beta)
    }

    /// Beta(0.5, 0.5) written as φ = 0.5, λ = 1.
    pub fn uninformative() -> Self {
        Self { mean: 0.5, precision: 1.0 }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn alpha(&self) -> f64 {
        self.precision * self.mean
    }

    pub fn beta(&self) -> f64 {
        self.precision * (1.0 - self.mean)
    }

    pub fn variance(&self) -> f64 {
        self.mean * (1.0 - self.mean) / (self.precision + 1.0)
    }

    /// Shrinks precision by `decay`, clamped below at `floor`. The mean is
    /// untouched, so the variance can only grow.
    pub fn apply_process_noise(&self, decay: f64, floor: f64) -> Self {
        Self { mean: self.mean, precision: (decay * self.precision).max(floor.min(self.precision)) }
    }
}

/// Conjugate update: α += Σ c·v, β += Σ c·(1 − v).
pub fn beta_update(dist: &TrustDistribution, psm: &[PsmDatapoint]) -> TrustDistribution {
    if psm.is_empty() {
        return *dist;
    }
    let (da, db) = psm.iter().fold((0.0, 0.0), |(a, b), p| (a + p.confidence * p.value, b + p.confidence * (1.0 - p.value)));
    if da + db == 0.0 {
        return *dist;
    }
    let alpha = dist.alpha() + da;
    let beta = dist.beta() + db;
    TrustDistribution { mean: alpha / (alpha + beta), precision: alpha + beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{AgentId, TrackId};
    use proptest::prelude::*;

    fn dp(value: f64, confidence: f64) -> PsmDatapoint {
        PsmDatapoint { value, confidence, track_id: TrackId(0), agent_id: AgentId(0) }
    }

    #[test]
    fn moments() {
        let d = TrustDistribution::new(0.9, 10.0).unwrap();
        assert!((d.variance() - 0.008_181_818).abs() < 1e-9);
        let d = TrustDistribution::new(0.8, 10.0).unwrap();
        assert!((d.alpha() - 8.0).abs() < 1e-12 && (d.beta() - 2.0).abs() < 1e-12);
        let u = TrustDistribution::uninformative();
        assert_eq!((u.alpha(), u.beta()), (0.5, 0.5));
        assert!(TrustDistribution::new(1.0, 1.0).is_err());
        assert!(TrustDistribution::new(0.5, 0.0).is_err());
    }

    #[test]
    fn update_examples() {
        let d = TrustDistribution::uninformative();
        assert_eq!(beta_update(&d, &[]), d);
        let u = beta_update(&d, &[dp(1.0, 0.9)]);
        assert!((u.alpha() - 1.4).abs() < 1e-12 && (u.beta() - 0.5).abs() < 1e-12);
        assert!((u.mean() - 0.736_842).abs() < 1e-6);

        let skewed = TrustDistribution::new(0.8, 4.0).unwrap();
        let u = beta_update(&skewed, &[dp(1.0, 0.7), dp(0.0, 0.7)]);
        assert!((u.alpha() - skewed.alpha() - 0.7).abs() < 1e-12);
        assert!((u.beta() - skewed.beta() - 0.7).abs() < 1e-12);
        assert!(u.mean() < skewed.mean() && u.mean() > 0.5);
    }

    #[test]
    fn process_noise_examples() {
        let d = TrustDistribution::new(0.7, 10.0).unwrap();
        assert_eq!(d.apply_process_noise(1.0, 0.1), d);
        let n = d.apply_process_noise(0.99, 0.1);
        assert_eq!(n.mean(), 0.7);
        assert!((n.precision() - 9.9).abs() < 1e-12);
        let mut x = d;
        for _ in 0..2000 {
            x = x.apply_process_noise(0.98, 0.1);
            assert!(x.precision() >= 0.1);
        }
        assert_eq!(x.precision(), 0.1);
    }

    fn datapoint() -> impl Strategy<Value = PsmDatapoint> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(v, c)| dp(v, c))
    }

    proptest! {
        #[test]
        fn precision_grows_by_total_confidence(
            mean in 0.01f64..0.99, lambda in 0.1f64..50.0,
            psm in proptest::collection::vec(datapoint(), 0..12),
        ) {
            let d = TrustDistribution::new(mean, lambda).unwrap();
            let u = beta_update(&d, &psm);
            let total: f64 = psm.iter().map(|p| p.confidence).sum();
            prop_assert!((u.precision() - (lambda + total)).abs() < 1e-9);
            prop_assert!(u.mean() > 0.0 && u.mean() < 1.0);
            prop_assert!(u.variance() > 0.0 && u.variance() <= 0.25);
        }

        #[test]
        fn variance_non_decreasing_under_noise(mean in 0.01f64..0.99, lambda in 0.1f64..50.0, decay in 0.01f64..=1.0) {
            let d = TrustDistribution::new(mean, lambda).unwrap();
            let n = d.apply_process_noise(decay, 0.1);
            prop_assert!(n.variance() >= d.variance());
            prop_assert_eq!(n.mean(), d.mean());
        }
    }
}
