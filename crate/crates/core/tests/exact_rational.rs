//! The recurrence engines against exact rational arithmetic.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use spinlabor::finite::{closed_form_up, FiniteEngine};
use spinlabor::infinite::infinite_spinlabor_recurrence;
use spinlabor::spin::{initial_reservoir, InverseSpinTemperature};
use spinlabor::stats::finite_spinlabor_distribution;
use spinlabor::ReservoirSpec;

type Q = BigRational;

fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

fn binom(n: usize, k: usize) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

fn pow(x: &Q, e: usize) -> Q {
    (0..e).fold(Q::one(), |acc, _| acc * x)
}

/// `P_m(n, M)` for every `m`, by pooling each conserved class and
/// splitting it in proportion to the number of microstates on each side.
fn rational_protocol(size: usize, alpha: &Q, cycles: usize) -> Vec<(Vec<Q>, Vec<Q>)> {
    let half = q(1, 2);
    let beta = Q::one() - alpha;
    let mut down: Vec<Q> = (0..=size)
        .map(|n| Q::from(binom(size, n)) * pow(alpha, n) * pow(&beta, size - n) * &half)
        .collect();
    let mut up = down.clone();
    let mut out = Vec::new();
    for m in 0..=cycles {
        let shift = m + 1;
        let mut next_down = vec![Q::zero(); size + 1];
        let mut next_up = vec![Q::zero(); size + 1];
        for total in 0..=size + shift {
            let a = (total <= size).then_some(total);
            let b = (total >= shift && total - shift <= size).then(|| total - shift);
            let mass = a.map_or(Q::zero(), |n| down[n].clone()) + b.map_or(Q::zero(), |n| up[n].clone());
            let wa = a.map_or(BigInt::zero(), |n| binom(size, n));
            let wb = b.map_or(BigInt::zero(), |n| binom(size, n));
            let w = Q::from(wa.clone() + wb.clone());
            if let Some(n) = a {
                next_down[n] = &mass * Q::from(wa) / &w;
            }
            if let Some(n) = b {
                next_up[n] = &mass * Q::from(wb) / &w;
            }
        }
        down = next_down;
        up = next_up;
        out.push((down.clone(), up.clone()));
    }
    out
}

fn f(x: &Q) -> f64 {
    x.to_f64().unwrap()
}

#[test]
fn engine_matches_rationals_on_every_cycle() {
    for size in 1..=9 {
        for (num, den) in [(1, 10), (1, 4), (2, 5), (1, 2)] {
            let alpha = q(num, den);
            let spec = ReservoirSpec::new(size, num as f64 / den as f64).unwrap();
            let engine = FiniteEngine::new(size).unwrap();
            let (history, trace) = engine
                .run_with_history(&initial_reservoir(&spec), 0.5, size - 1)
                .unwrap();
            let exact = rational_protocol(size, &alpha, size - 1);
            for (joint, (down, up)) in history.joints.iter().zip(&exact) {
                for n in 0..=size {
                    assert!((joint.down()[n] - f(&down[n])).abs() < 1e-15, "N={size} α={num}/{den}");
                    assert!((joint.up()[n] - f(&up[n])).abs() < 1e-15, "N={size} α={num}/{den}");
                }
            }
            let p_final: Q = exact.last().unwrap().1.iter().sum();
            assert!((trace.final_p_up() - f(&p_final)).abs() < 1e-15);
        }
    }
}

#[test]
fn two_spin_worked_case() {
    let exact = rational_protocol(2, &q(1, 4), 1);
    assert_eq!(exact[0].1, vec![q(5, 32), q(7, 48), q(1, 32)]);
    assert_eq!(exact[0].0, vec![q(9, 32), q(5, 16), q(7, 96)]);
    let p1: Q = exact[1].1.iter().sum();
    assert_eq!(p1, q(7, 24));
    let spec = ReservoirSpec::new(2, 0.25).unwrap();
    let (_, trace) = FiniteEngine::new(2)
        .unwrap()
        .run(&initial_reservoir(&spec), 0.5, 1)
        .unwrap();
    let dist = finite_spinlabor_distribution(&trace);
    // one CNOT, paid with the first-cycle probability 1/3
    assert!((dist.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
    assert!((dist.probs()[1] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn closed_form_matches_rationals() {
    for size in [3usize, 5, 7] {
        let spec = ReservoirSpec::new(size, 0.25).unwrap();
        let (history, _) = FiniteEngine::new(size)
            .unwrap()
            .run_with_history(&initial_reservoir(&spec), 0.5, size - 1)
            .unwrap();
        let exact = rational_protocol(size, &q(1, 4), size - 1);
        for (m, (_, up)) in exact.iter().enumerate() {
            for n in 0..=size {
                let c = closed_form_up(&history, n, m).unwrap();
                assert!((c - f(&up[n])).abs() < 1e-13, "N={size} m={m} n={n}");
            }
        }
    }
}

#[test]
fn infinite_recurrence_matches_rationals_at_ln3() {
    // e^{-γ} = 1/3, so q_m = 1/(3^{m+1} + 1)
    let gamma = InverseSpinTemperature::new(3f64.ln()).unwrap();
    let steps = 12;
    let mut exact = vec![Q::one()];
    for m in 0..steps {
        let p = Q::one() / Q::from(BigInt::from(3).pow(m as u32 + 1) + BigInt::one());
        let mut next = vec![Q::zero(); exact.len() + 1];
        for (k, x) in exact.iter().enumerate() {
            next[k] += x * (Q::one() - &p);
            next[k + 1] += x * &p;
        }
        exact = next;
    }
    let d = infinite_spinlabor_recurrence(gamma, steps);
    for (k, x) in exact.iter().enumerate() {
        let got = d.probs().get(k).copied().unwrap_or(0.0);
        assert!((got - f(x)).abs() < 1e-15, "bin {k}");
    }
}
