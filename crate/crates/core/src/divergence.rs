//! Kullback-Leibler and Jensen-Shannon divergences over cost distributions,
//! and the search for the smallest finite reservoir whose cost statistics
//! match the infinite reservoir.
//!
//! Everything is in nats. Distributions indexed by cost are zero-padded to
//! a common length before comparison.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finite::FiniteEngine;
use crate::infinite::q_up;
use crate::spin::{gamma_of_alpha, initial_reservoir, ReservoirSpec, SpinPolarization};
use crate::stats::bernoulli_sum;

pub const DEFAULT_TOLERANCE: f64 = 0.005;
pub const DEFAULT_N_MAX_SCAN: usize = 2000;
const INPUT_NORMALIZATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    pub jsd_nats: f64,
    /// `D(P || M)` with `M = (P + Q)/2`.
    pub kl_p_to_m: f64,
    pub kl_q_to_m: f64,
    pub support_union_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub alpha_i: f64,
    pub n_min: usize,
    pub jsd_at_n_min: f64,
    pub p_up_final_at_n_min: f64,
}

fn padded(p: &[f64], i: usize) -> f64 {
    p.get(i).copied().unwrap_or(0.0)
}

/// `Σ_x P(x) ln(P(x)/M(x))`, with `0 · ln(0/·) = 0`.
pub fn kl_divergence(p: &[f64], m: &[f64]) -> Result<f64> {
    let len = p.len().max(m.len());
    let mut total = 0.0;
    for i in 0..len {
        let (pi, mi) = (padded(p, i), padded(m, i));
        if pi == 0.0 {
            continue;
        }
        if mi == 0.0 {
            return Err(Error::Support { index: i, mass: pi });
        }
        total += pi * (pi / mi).ln();
    }
    Ok(total.max(0.0))
}

/// `P ln(2P / (P + Q))`: one half of a JSD term, well defined when the
/// midpoint mass underflows.
#[inline]
fn half_term(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (2.0 * p / (p + q)).ln()
    }
}

fn check_normalized(p: &[f64]) -> Result<()> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > INPUT_NORMALIZATION {
        Err(Error::NotNormalized(total))
    } else {
        Ok(())
    }
}

/// `JSD(P || Q) = [D(P||M) + D(Q||M)] / 2`. Symmetric bit-for-bit.
pub fn jsd(p: &[f64], q: &[f64]) -> Result<DivergenceReport> {
    check_normalized(p)?;
    check_normalized(q)?;
    let len = p.len().max(q.len());
    let (mut kl_p, mut kl_q, mut sum) = (0.0, 0.0, 0.0);
    for i in 0..len {
        let (pi, qi) = (padded(p, i), padded(q, i));
        let a = half_term(pi, qi);
        let b = half_term(qi, pi);
        kl_p += a;
        kl_q += b;
        sum += a + b;
    }
    Ok(DivergenceReport {
        jsd_nats: (0.5 * sum).clamp(0.0, LN_2),
        kl_p_to_m: kl_p.max(0.0),
        kl_q_to_m: kl_q.max(0.0),
        support_union_size: len,
    })
}

/// JSD between the finite and infinite cost distributions after the same
/// `N − 1` cycles, together with the finite run's `p_{↑,f}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPoint {
    pub size: usize,
    pub jsd: f64,
    pub p_up_final: f64,
}

/// Evaluates every `(α, N)` pair for `N ∈ sizes`; result is `[α][size]`.
///
/// Cells for one `N` share their transition probabilities, so the work is
/// fanned out over `N`.
pub fn match_profile(
    alphas: &[f64],
    sizes: &[usize],
    execution: Execution,
) -> Result<Vec<Vec<MatchPoint>>> {
    let specs: Vec<_> = alphas
        .iter()
        .map(|&a| {
            if a > 0.0 {
                SpinPolarization::new(a)
            } else {
                Err(Error::Polarization(a))
            }
        })
        .collect::<Result<_>>()?;
    if let Some(&bad) = sizes.iter().find(|&&s| s == 0) {
        return Err(Error::InvalidArgument(format!("reservoir size {bad}")));
    }
    let columns = execution.map(sizes, |&size| -> Result<Vec<MatchPoint>> {
        let engine = FiniteEngine::new(size)?;
        let reservoirs = alphas
            .iter()
            .map(|&a| ReservoirSpec::new(size, a).map(|s| initial_reservoir(&s)))
            .collect::<Result<Vec<_>>>()?;
        let series = engine.up_probability_series_batch(&reservoirs, 0.5, size - 1)?;
        specs
            .iter()
            .zip(series)
            .map(|(alpha, p_up)| {
                let cycles = size - 1;
                let fin = bernoulli_sum(&p_up[..cycles]);
                let gamma = gamma_of_alpha(*alpha);
                let q: Vec<f64> = (0..cycles).map(|m| q_up(gamma, m)).collect();
                let inf = bernoulli_sum(&q);
                Ok(MatchPoint {
                    size,
                    jsd: jsd(&fin, &inf)?.jsd_nats,
                    p_up_final: p_up[cycles],
                })
            })
            .collect()
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..alphas.len())
        .map(|a| columns.iter().map(|col| col[a]).collect())
        .collect())
}

/// Smallest scanned `N` below tolerance such that every larger scanned `N`
/// is too. `profile` must be sorted by size.
pub fn select_n_min(alpha: f64, tolerance: f64, profile: &[MatchPoint]) -> Result<MatchResult> {
    let not_found = || Error::NotFound {
        alpha,
        tolerance,
        n_max_scan: profile.last().map_or(0, |p| p.size),
    };
    let first_stable = profile
        .iter()
        .rposition(|p| !(p.jsd < tolerance))
        .map_or(0, |i| i + 1);
    let point = profile.get(first_stable).ok_or_else(not_found)?;
    Ok(MatchResult {
        alpha_i: alpha,
        n_min: point.size,
        jsd_at_n_min: point.jsd,
        p_up_final_at_n_min: point.p_up_final,
    })
}

/// `N^min` for several polarisations, scanning `N = 1..=n_max_scan`.
pub fn n_min_scan(
    alphas: &[f64],
    tolerance: f64,
    n_max_scan: usize,
    execution: Execution,
) -> Result<Vec<Result<MatchResult>>> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tolerance}")));
    }
    let sizes: Vec<usize> = (1..=n_max_scan).collect();
    let profile = match_profile(alphas, &sizes, execution)?;
    Ok(alphas
        .iter()
        .zip(&profile)
        .map(|(&a, p)| select_n_min(a, tolerance, p))
        .collect())
}

pub fn n_min_search(alpha_i: f64, tolerance_nats: f64, n_max_scan: usize) -> Result<MatchResult> {
    n_min_scan(&[alpha_i], tolerance_nats, n_max_scan, Execution::default())?
        .pop()
        .expect("one polarisation in, one result out")
}
