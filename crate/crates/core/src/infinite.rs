//! Infinite-reservoir baseline at constant inverse spin temperature.

use crate::error::{Error, Result};
use crate::spin::InverseSpinTemperature;
use crate::stats::{bernoulli_sum, SpinlaborDistribution, Variant};

/// Cycle count used for "run to completion" infinite-reservoir distributions.
pub const DEFAULT_INFINITE_CYCLES: usize = 10_000;

/// Truncation threshold for infinite q-Pochhammer products.
pub const POCHHAMMER_CUTOFF: f64 = 1e-16;

/// Memory up-probability after the equilibration that follows `m` CNOT
/// steps: `e^{−(m+1)γ} / (1 + e^{−(m+1)γ})`.
pub fn q_up(gamma: InverseSpinTemperature, m: usize) -> f64 {
    if gamma.is_cold_limit() {
        return 0.0;
    }
    let x = (-((m + 1) as f64) * gamma.value()).exp();
    x / (1.0 + x)
}

/// Accumulated-cost distribution after `m_max` CNOT steps, support `0..=m_max`.
pub fn infinite_spinlabor_recurrence(
    gamma: InverseSpinTemperature,
    m_max: usize,
) -> SpinlaborDistribution {
    let q: Vec<f64> = (0..m_max).map(|m| q_up(gamma, m)).collect();
    let probs = bernoulli_sum(&q);
    SpinlaborDistribution::from_parts(Variant::Infinite, m_max, probs)
}

/// Length of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terms {
    Finite(usize),
    Infinite,
}

/// `(a; q)_n = Π_{k<n} (1 − a q^k)`, with `(a; q)_0 = 1`.
///
/// The infinite product stops once `|a q^k| < 1e−16`.
pub fn q_pochhammer(a: f64, q: f64, terms: Terms) -> Result<f64> {
    match terms {
        Terms::Finite(n) => {
            let mut product = 1.0;
            let mut aq = a;
            for _ in 0..n {
                product *= 1.0 - aq;
                aq *= q;
            }
            Ok(product)
        }
        Terms::Infinite => {
            if q.abs() >= 1.0 {
                return Err(Error::Divergent("q-Pochhammer product with |q| >= 1"));
            }
            let mut product = 1.0;
            let mut aq = a;
            while aq.abs() >= POCHHAMMER_CUTOFF {
                product *= 1.0 - aq;
                aq *= q;
            }
            Ok(product)
        }
    }
}

/// Limit `m → ∞` of the accumulated-cost distribution:
/// `e^{−n(n+1)γ/2} / [(e^{−γ}; e^{−γ})_n (−e^{−γ}; e^{−γ})_∞]`.
pub fn infinite_analytic_distribution(gamma: InverseSpinTemperature, n: usize) -> Result<f64> {
    if gamma.value() == 0.0 {
        return Err(Error::Divergent(
            "cost distribution of an infinite-temperature reservoir",
        ));
    }
    if gamma.is_cold_limit() {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let q = gamma.boltzmann_factor();
    let numerator = (-0.5 * (n as f64) * (n as f64 + 1.0) * gamma.value()).exp();
    let finite = q_pochhammer(q, q, Terms::Finite(n))?;
    let infinite = q_pochhammer(-q, q, Terms::Infinite)?;
    Ok(numerator / (finite * infinite))
}
