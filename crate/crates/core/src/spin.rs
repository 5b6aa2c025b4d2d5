//! Reservoir primitives: spin polarisation, inverse spin temperature, the
//! initial binomial reservoir distribution and overflow-safe binomial ratios.
//!
//! All angular momenta are in units of ħ.

use crate::error::{Error, Result};

/// Tolerance used when accepting an externally supplied distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Probability that a single reservoir spin is up, restricted to `[0, 0.5]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpinPolarization(f64);

impl SpinPolarization {
    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=0.5).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(Error::Polarization(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Inverse spin temperature γ in units of 1/ħ.
///
/// `f64::INFINITY` is the fully polarised (α = 0) limit; every consumer
/// branches on [`InverseSpinTemperature::is_cold_limit`] rather than
/// evaluating `exp(-∞)` arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct InverseSpinTemperature(f64);

impl InverseSpinTemperature {
    pub const COLD_LIMIT: Self = Self(f64::INFINITY);

    pub fn new(gamma: f64) -> Result<Self> {
        if gamma >= 0.0 {
            Ok(Self(gamma))
        } else {
            Err(Error::InvalidArgument(format!(
                "inverse spin temperature must be non-negative, got {gamma}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_cold_limit(self) -> bool {
        self.0.is_infinite()
    }

    /// `e^{-γ}`, the single-spin up/down odds ratio.
    pub fn boltzmann_factor(self) -> f64 {
        if self.is_cold_limit() {
            0.0
        } else {
            (-self.0).exp()
        }
    }
}

/// γ = ln[(1 − α)/α].
pub fn gamma_of_alpha(alpha: SpinPolarization) -> InverseSpinTemperature {
    let a = alpha.value();
    if a == 0.0 {
        InverseSpinTemperature::COLD_LIMIT
    } else if a == 0.5 {
        InverseSpinTemperature(0.0)
    } else {
        InverseSpinTemperature(((1.0 - a) / a).ln())
    }
}

/// A reservoir of `size` spins prepared at polarisation `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirSpec {
    size: usize,
    alpha: SpinPolarization,
    gamma: InverseSpinTemperature,
}

impl ReservoirSpec {
    pub fn new(size: usize, alpha: f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument(
                "reservoir size must be at least 1".into(),
            ));
        }
        let alpha = SpinPolarization::new(alpha)?;
        Ok(Self {
            size,
            alpha,
            gamma: gamma_of_alpha(alpha),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn gamma(&self) -> InverseSpinTemperature {
        self.gamma
    }

    /// Largest number of erasure cycles the reservoir supports.
    pub fn max_cycles(&self) -> usize {
        self.size - 1
    }
}

/// Probability of `n` up-spins in the reservoir, degeneracy summed out.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirDistribution {
    probs: Vec<f64>,
}

impl ReservoirDistribution {
    /// Accepts `probs[n]` for `n = 0..=N`. Entries must be non-negative and
    /// sum to one within [`NORMALIZATION_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidArgument(
                "reservoir distribution needs at least two levels".into(),
            ));
        }
        if let Some(&bad) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "reservoir probability {bad} is not a finite non-negative number"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// All mass on a single excitation level.
    pub fn delta(size: usize, level: usize) -> Result<Self> {
        if level > size {
            return Err(Error::OutOfRange {
                what: "excitation level",
                value: level,
                size,
            });
        }
        let mut probs = vec![0.0; size + 1];
        probs[level] = 1.0;
        Self::new(probs)
    }

    pub fn size(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `n` up-spins; zero outside `0..=N`.
    pub fn get(&self, n: isize) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.probs.get(n as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean_excitation(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Mean fraction of up-spins.
    pub fn polarization(&self) -> f64 {
        self.mean_excitation() / self.size() as f64
    }
}

/// Binomial equilibrium `C(N,n) e^{-γn} / (1 + e^{-γ})^N`.
pub fn initial_reservoir(spec: &ReservoirSpec) -> ReservoirDistribution {
    let size = spec.size();
    if spec.gamma().is_cold_limit() {
        let mut probs = vec![0.0; size + 1];
        probs[0] = 1.0;
        return ReservoirDistribution::from_raw(probs);
    }
    let alpha = spec.alpha();
    let ln_up = alpha.ln();
    let ln_down = (1.0 - alpha).ln();
    let lnc = LogBinomials::new(size);
    let probs = (0..=size)
        .map(|n| (lnc.get(n) + n as f64 * ln_up + (size - n) as f64 * ln_down).exp())
        .collect();
    ReservoirDistribution::from_raw(probs)
}

/// `C(N,a) / C(N,b)` as a product of `|a − b|` factors `(N − k)/(k + 1)`.
pub fn binom_ratio(size: usize, a: usize, b: usize) -> Result<f64> {
    for (what, value) in [("numerator index", a), ("denominator index", b)] {
        if value > size {
            return Err(Error::OutOfRange { what, value, size });
        }
    }
    let (lo, hi) = if a >= b { (b, a) } else { (a, b) };
    let n = size as f64;
    let product: f64 = (lo..hi)
        .map(|k| (n - k as f64) / (k as f64 + 1.0))
        .product();
    Ok(if a >= b { product } else { 1.0 / product })
}

/// Table of `ln C(N, n)` for `n = 0..=N`.
///
/// Built by accumulating `ln((N − k)/(k + 1))` from both ends towards the
/// middle, so each entry carries at most `N/2` rounding steps.
#[derive(Debug, Clone)]
pub struct LogBinomials {
    values: Vec<f64>,
}

impl LogBinomials {
    pub fn new(size: usize) -> Self {
        let n = size as f64;
        let mut values = vec![0.0; size + 1];
        let half = size / 2;
        for k in 0..half {
            values[k + 1] = values[k] + ((n - k as f64) / (k as f64 + 1.0)).ln();
        }
        for k in 0..=half {
            values[size - k] = values[k];
        }
        Self { values }
    }

    pub fn size(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// `C(N,a)/C(N,b)`; saturates to `inf` or `0` instead of overflowing.
    #[inline]
    pub fn ratio(&self, a: usize, b: usize) -> f64 {
        (self.values[a] - self.values[b]).exp()
    }
}
