//! Spinlabor accounting: cost distributions, averages, bounds, cost per bit
//! erased and the ancilla reset correction. Costs are in units of ħ.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::finite::ErasureTrace;
use crate::spin::{gamma_of_alpha, InverseSpinTemperature, SpinPolarization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Finite,
    /// Finite reservoir including the ancilla reset CNOTs.
    FiniteWithReset,
    Infinite,
}

/// Probability that the accumulated spinlabor equals `n` after `steps` CNOT
/// steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinlaborDistribution {
    variant: Variant,
    steps: usize,
    probs: Vec<f64>,
}

impl SpinlaborDistribution {
    pub(crate) fn from_parts(variant: Variant, steps: usize, probs: Vec<f64>) -> Self {
        Self {
            variant,
            steps,
            probs,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Indices that exceed both neighbours (edges compare against zero).
    pub fn local_maxima(&self) -> Vec<usize> {
        let p = &self.probs;
        (0..p.len())
            .filter(|&i| {
                let left = if i == 0 { 0.0 } else { p[i - 1] };
                let right = p.get(i + 1).copied().unwrap_or(0.0);
                p[i] > left && p[i] > right
            })
            .collect()
    }
}

/// Convolution of independent Bernoulli costs with the given success
/// probabilities; `probs.len() = steps + 1`.
pub(crate) fn bernoulli_sum(p_up: &[f64]) -> Vec<f64> {
    let mut probs = vec![0.0; p_up.len() + 1];
    probs[0] = 1.0;
    let mut top = 0usize;
    for &up in p_up {
        let down = 1.0 - up;
        let new_top = if up > 0.0 { top + 1 } else { top };
        for n in (1..=new_top).rev() {
            probs[n] = probs[n] * down + probs[n - 1] * up;
        }
        probs[0] *= down;
        top = new_top;
        while top > 0 && probs[top] == 0.0 {
            top -= 1;
        }
    }
    probs
}

/// Accumulated-cost distribution over the cycles recorded in `trace`:
/// the CNOT of cycle `m` costs one quantum with probability `p_{↑,m−1}`.
pub fn finite_spinlabor_distribution(trace: &ErasureTrace) -> SpinlaborDistribution {
    let p_up = trace.up_probabilities();
    let cycles = trace.cycles();
    SpinlaborDistribution::from_parts(Variant::Finite, cycles, bernoulli_sum(&p_up[..cycles]))
}

/// `Σ_{m=1..M} p_{↑,m−1}` over the `M` cycles in the trace.
pub fn avg_spinlabor(trace: &ErasureTrace) -> f64 {
    let p_up = trace.up_probabilities();
    p_up[..trace.cycles()].iter().sum()
}

/// Lower bound from the first CNOT alone:
/// `N e^{−γ} / [(N+1)(1+e^{−γ})] + 1 / [2(N+1)]`.
///
/// Only a bound on the average when at least one cycle is run (`N ≥ 2`).
pub fn finite_bound(size: usize, gamma: InverseSpinTemperature) -> f64 {
    let n = size as f64;
    let x = gamma.boltzmann_factor();
    n * x / ((n + 1.0) * (1.0 + x)) + 1.0 / (2.0 * (n + 1.0))
}

/// Infinite-reservoir bound `γ^{−1} ln(1 + e^{−γ}) = ln(1/(1−α)) / ln((1−α)/α)`.
pub fn infinite_bound(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Polarization(alpha));
    }
    Ok((1.0 / (1.0 - alpha)).ln() / ((1.0 - alpha) / alpha).ln())
}

/// Minimum total spin change `γ^{−1} ln 2` for erasing one bit.
pub fn spin_landauer_bound(gamma: InverseSpinTemperature) -> Result<f64> {
    if gamma.value() <= 0.0 {
        return Err(Error::Divergent("spin Landauer bound at gamma = 0"));
    }
    if gamma.is_cold_limit() {
        return Ok(0.0);
    }
    Ok(LN_2 / gamma.value())
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Average cost divided by the entropy removed from the memory, in bits.
pub fn spinlabor_per_bit(avg: f64, p_up_final: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_up_final) {
        return Err(Error::InvalidArgument(format!(
            "final up-probability {p_up_final} outside [0, 1]"
        )));
    }
    let entropy_drop = LN_2 + xlnx(1.0 - p_up_final) + xlnx(p_up_final);
    if p_up_final >= 0.5 || entropy_drop <= 0.0 {
        return Err(Error::DegenerateErasure(p_up_final));
    }
    Ok(avg * LN_2 / entropy_drop)
}

/// Cost of resetting the `N − 1` ancillas: `(N − 1) p_{↑,f}`.
pub fn reset_cost(size: usize, p_up_final: f64) -> f64 {
    size.saturating_sub(1) as f64 * p_up_final
}

/// Adds the reset cost to a pre-reset finite distribution: with probability
/// `p_{↑,f}` the accumulated cost grows by `N − 1`.
pub fn reset_distribution(
    pre_reset: &SpinlaborDistribution,
    size: usize,
    p_up_final: f64,
) -> SpinlaborDistribution {
    let shift = size.saturating_sub(1);
    let mut probs = vec![0.0; pre_reset.probs.len() + shift];
    for (n, p) in pre_reset.probs.iter().enumerate() {
        probs[n] += p * (1.0 - p_up_final);
        probs[n + shift] += p * p_up_final;
    }
    SpinlaborDistribution::from_parts(Variant::FiniteWithReset, pre_reset.steps + 1, probs)
}

/// Erasure plus reset cost for the trace's final state.
pub fn total_avg_with_reset(trace: &ErasureTrace) -> f64 {
    avg_spinlabor(trace) + trace.cycles() as f64 * trace.final_p_up()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSummary {
    pub avg_spinlabor: f64,
    /// `None` when no entropy was erased.
    pub avg_per_bit: Option<f64>,
    pub bound_finite: f64,
    /// `None` outside `0 < α < 0.5`.
    pub bound_infinite: Option<f64>,
    pub reset_cost: f64,
    pub total_with_reset: f64,
    pub p_up_final: f64,
    pub p_down_final: f64,
}

impl CostSummary {
    pub fn from_trace(trace: &ErasureTrace, alpha: f64) -> Result<Self> {
        let alpha_checked = SpinPolarization::new(alpha)?;
        let avg = avg_spinlabor(trace);
        let p_up_final = trace.final_p_up();
        Ok(Self {
            avg_spinlabor: avg,
            avg_per_bit: spinlabor_per_bit(avg, p_up_final).ok(),
            bound_finite: finite_bound(trace.size(), gamma_of_alpha(alpha_checked)),
            bound_infinite: infinite_bound(alpha).ok(),
            reset_cost: trace.cycles() as f64 * p_up_final,
            total_with_reset: total_avg_with_reset(trace),
            p_up_final,
            p_down_final: 1.0 - p_up_final,
        })
    }
}
