use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyKind {
    /// `p(w) = 3 w^2 / wc^3` on `(0, wc)`.
    #[default]
    Debye,
    /// Uniform on `(0, wc)`.
    Box,
}

impl FrequencyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrequencyKind::Debye => "debye",
            FrequencyKind::Box => "box",
        }
    }

    /// Inverse CDF applied to `u` in `[0, 1]`, in units of the cutoff.
    pub fn quantile<T: Real>(self, u: T) -> T {
        match self {
            FrequencyKind::Debye => u.cbrt(),
            FrequencyKind::Box => u,
        }
    }

    /// Target CDF in units of the cutoff.
    pub fn cdf<T: Real>(self, x: T) -> T {
        let x = x.max(T::zero()).min(T::one());
        match self {
            FrequencyKind::Debye => x * x * x,
            FrequencyKind::Box => x,
        }
    }
}

impl std::str::FromStr for FrequencyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "debye" => Ok(Self::Debye),
            "box" => Ok(Self::Box),
            other => Err(format!("unknown distribution `{other}` (expected debye or box)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencySpec<T> {
    pub kind: FrequencyKind,
    pub omega_c: T,
    pub seed: u64,
}

/// Frequency draws use stream 0 of the seeded generator; per-job streams
/// start at 1.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` bath frequencies in `(0, omega_c]`, deterministic in `spec.seed`.
pub fn sample_frequencies<T: Real>(spec: &FrequencySpec<T>, n: usize) -> Vec<T> {
    let mut rng = rng_for(spec.seed, 0);
    (0..n)
        .map(|_| {
            // gen::<f64>() is in [0, 1); mapping u -> 1 - u gives (0, 1].
            let u = 1.0 - rng.gen::<f64>();
            spec.omega_c * spec.kind.quantile(T::lit(u))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_endpoints() {
        assert_eq!(FrequencyKind::Debye.quantile(1.0f64), 1.0);
        assert!((FrequencyKind::Debye.quantile(0.125f64) - 0.5).abs() < 1e-15);
        assert_eq!(FrequencyKind::Box.quantile(0.3f64), 0.3);
    }

    #[test]
    fn draws_are_seeded_and_positive() {
        let spec = FrequencySpec {
            kind: FrequencyKind::Debye,
            omega_c: 1.0f64,
            seed: 7,
        };
        let a = sample_frequencies(&spec, 50);
        assert_eq!(a, sample_frequencies(&spec, 50));
        assert_eq!(&a[..10], &sample_frequencies(&spec, 10)[..]);
        assert!(a.iter().all(|&w| w > 0.0 && w <= 1.0));
        let other = FrequencySpec { seed: 8, ..spec };
        assert_ne!(a, sample_frequencies(&other, 50));
    }
}
