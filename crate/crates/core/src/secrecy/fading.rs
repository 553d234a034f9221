use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::db_to_linear;
use crate::error::{Error, Result};

/// Small-scale fading of the channel power, normalised to unit mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingModel {
    Rayleigh,
    Rician { k_db: f64 },
    ShadowedRician { k_db: f64, m: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FadingModel::ShadowedRician { m, .. } if !(m >= 0.5) => {
                Err(Error::InvalidInput(format!("shadowing shape {m} below 0.5")))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn sampler(&self) -> FadingSampler {
        match *self {
            FadingModel::Rayleigh => FadingSampler::Rayleigh,
            FadingModel::Rician { k_db } => {
                let k = db_to_linear(k_db);
                FadingSampler::Rician { los: (k / (k + 1.0)).sqrt(), scatter: (0.5 / (k + 1.0)).sqrt() }
            }
            FadingModel::ShadowedRician { k_db, m } => {
                let k = db_to_linear(k_db);
                let omega = k / (k + 1.0);
                FadingSampler::Shadowed {
                    los_power: Gamma::new(m, omega / m).expect("valid shadowing"),
                    scatter: (0.5 / (k + 1.0)).sqrt(),
                }
            }
        }
    }
}

pub(crate) enum FadingSampler {
    Rayleigh,
    Rician { los: f64, scatter: f64 },
    Shadowed { los_power: Gamma<f64>, scatter: f64 },
}

impl FadingSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSampler::Rayleigh => rng.sample(Exp1),
            FadingSampler::Rician { los, scatter } => {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                (los + scatter * x).powi(2) + (scatter * y).powi(2)
            }
            FadingSampler::Shadowed { los_power, scatter } => {
                let los = los_power.sample(rng).sqrt();
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                (los + scatter * x).powi(2) + (scatter * y).powi(2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::stream_rng;

    fn mean_power(m: FadingModel) -> f64 {
        let s = m.sampler();
        let mut rng = stream_rng(1, 0);
        let n = 400_000;
        (0..n).map(|_| s.sample(&mut rng)).sum::<f64>() / n as f64
    }

    #[test]
    fn unit_mean_power() {
        for m in [
            FadingModel::Rayleigh,
            FadingModel::Rician { k_db: 8.0 },
            FadingModel::ShadowedRician { k_db: 5.0, m: 2.0 },
        ] {
            let v = mean_power(m);
            assert!((v - 1.0).abs() < 0.01, "{m:?}: {v}");
        }
    }

    #[test]
    fn rejects_small_shape() {
        assert!(FadingModel::ShadowedRician { k_db: 1.0, m: 0.4 }.validate().is_err());
    }
}
