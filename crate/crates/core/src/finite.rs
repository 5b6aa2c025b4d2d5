//! Finite-reservoir erasure protocol.
//!
//! The joint state after each equilibration is tracked at the macrostate
//! level: `P_m(n, M)` with `n` up-spins in the reservoir and memory bit `M`.
//! During the equilibration that follows the `m`-th CNOT step the
//! memory-ancilla block exchanges `m + 1` quanta with the reservoir, so the
//! macrostates `(n, 0)` and `(n − m − 1, 1)` form one conserved class whose
//! mass is shared in proportion to the class' microstate counts.

use crate::error::{Error, Result};
use crate::spin::{
    binom_ratio, initial_reservoir, LogBinomials, ReservoirDistribution, ReservoirSpec,
};

/// Mass drift tolerated after any equilibration.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

fn check_indices(size: usize, cycle: usize, n: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::InvalidArgument("reservoir size must be at least 1".into()));
    }
    if n > size {
        return Err(Error::OutOfRange {
            what: "excitation level",
            value: n,
            size,
        });
    }
    if cycle >= size {
        return Err(Error::OutOfRange {
            what: "cycle",
            value: cycle,
            size,
        });
    }
    Ok(())
}

/// Probability of ending in `(n, 0)` from its equilibration class after the
/// `m`-th CNOT step: `C(N,n) / (C(N,n−m−1) + C(N,n))`, or 1 when `n < m + 1`.
pub fn transition_prob_down(size: usize, m: usize, n: usize) -> Result<f64> {
    check_indices(size, m, n)?;
    if n < m + 1 {
        return Ok(1.0);
    }
    Ok(1.0 / (1.0 + binom_ratio(size, n - m - 1, n)?))
}

/// Probability of ending in `(n, 1)`: `C(N,n) / (C(N,n+m+1) + C(N,n))`,
/// or 1 when `n > N − m − 1`.
pub fn transition_prob_up(size: usize, m: usize, n: usize) -> Result<f64> {
    check_indices(size, m, n)?;
    if n + m + 1 > size {
        return Ok(1.0);
    }
    Ok(1.0 / (1.0 + binom_ratio(size, n + m + 1, n)?))
}

/// Equilibrium joint distribution of reservoir excitation and memory bit
/// after `cycle` completed erasure cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    cycle: usize,
    down: Vec<f64>,
    up: Vec<f64>,
}

impl JointDistribution {
    pub fn size(&self) -> usize {
        self.down.len() - 1
    }

    pub fn cycle(&self) -> usize {
        self.cycle
    }

    /// `P_m(n, 0)` for `n = 0..=N`.
    pub fn down(&self) -> &[f64] {
        &self.down
    }

    /// `P_m(n, 1)` for `n = 0..=N`.
    pub fn up(&self) -> &[f64] {
        &self.up
    }

    /// `P_m(n, M)`, zero outside `0..=N`.
    pub fn get(&self, n: isize, memory_up: bool) -> f64 {
        let table = if memory_up { &self.up } else { &self.down };
        if n < 0 {
            0.0
        } else {
            table.get(n as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn total(&self) -> f64 {
        self.down.iter().sum::<f64>() + self.up.iter().sum::<f64>()
    }

    pub fn normalization_drift(&self) -> f64 {
        (self.total() - 1.0).abs()
    }

    /// Mean total z-angular momentum in units of ħ above the all-down state,
    /// with an up memory counted as `cycle + 1` quanta.
    pub fn mean_total_spin(&self) -> f64 {
        self.mean_reservoir_excitation() + (self.cycle + 1) as f64 * memory_up_probability(self)
    }

    pub fn mean_reservoir_excitation(&self) -> f64 {
        self.down
            .iter()
            .zip(&self.up)
            .enumerate()
            .map(|(n, (d, u))| n as f64 * (d + u))
            .sum()
    }
}

/// One record per completed equilibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub cycle: usize,
    /// `p_{↑,m}` of the memory after the equilibration.
    pub p_up: f64,
    /// Reservoir polarisation `α_m`.
    pub alpha: f64,
    pub normalization_drift: f64,
    /// Change in mean total spin across the equilibration.
    pub spin_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErasureTrace {
    size: usize,
    records: Vec<TraceRecord>,
}

impl ErasureTrace {
    pub fn new(size: usize, records: Vec<TraceRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidArgument(
                "a trace needs at least the first equilibration".into(),
            ));
        }
        if records.len() > size {
            return Err(Error::ProtocolExhausted {
                size,
                max: size - 1,
            });
        }
        Ok(Self { size, records })
    }

    /// Builds a trace from a bare `p_{↑,0..=M}` sequence.
    pub fn from_up_probabilities(size: usize, p_up: &[f64]) -> Result<Self> {
        let records = p_up
            .iter()
            .enumerate()
            .map(|(cycle, &p)| TraceRecord {
                cycle,
                p_up: p,
                alpha: f64::NAN,
                normalization_drift: 0.0,
                spin_drift: 0.0,
            })
            .collect();
        Self::new(size, records)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// Number of completed erasure cycles (CNOT steps).
    pub fn cycles(&self) -> usize {
        self.records.len() - 1
    }

    pub fn up_probabilities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p_up).collect()
    }

    pub fn final_p_up(&self) -> f64 {
        self.records[self.records.len() - 1].p_up
    }

    pub fn max_normalization_drift(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.normalization_drift)
            .fold(0.0, f64::max)
    }

    pub fn max_spin_drift(&self) -> f64 {
        self.records.iter().map(|r| r.spin_drift).fold(0.0, f64::max)
    }
}

/// Transition probabilities for one reservoir size, backed by a log-binomial
/// table so that each `T_m(n, M)` costs a single `exp`.
#[derive(Debug, Clone)]
pub struct FiniteEngine {
    lnc: LogBinomials,
}

impl FiniteEngine {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("reservoir size must be at least 1".into()));
        }
        Ok(Self {
            lnc: LogBinomials::new(size),
        })
    }

    pub fn size(&self) -> usize {
        self.lnc.size()
    }

    /// `(T_m(n, 0), T_m(n − m − 1, 1))` for a paired class `n ≥ m + 1`.
    #[inline]
    fn class_split(&self, m: usize, n: usize) -> (f64, f64) {
        let r = self.lnc.ratio(n - m - 1, n);
        (1.0 / (1.0 + r), 1.0 / (1.0 + r.recip()))
    }

    pub fn t_down(&self, m: usize, n: usize) -> f64 {
        if n < m + 1 {
            1.0
        } else {
            self.class_split(m, n).0
        }
    }

    pub fn t_up(&self, m: usize, n: usize) -> f64 {
        if n + m + 1 > self.size() {
            1.0
        } else {
            self.class_split(m, n + m + 1).1
        }
    }

    /// Equilibration following the `m`-th CNOT step (`m = 0` is the first
    /// contact, before any CNOT).
    fn equilibrate(&self, m: usize, down: &[f64], up: &[f64], out_down: &mut [f64], out_up: &mut [f64]) {
        let size = self.size();
        let shift = m + 1;
        out_down[..shift.min(size + 1)].copy_from_slice(&down[..shift.min(size + 1)]);
        if shift <= size {
            out_up[size + 1 - shift..].copy_from_slice(&up[size + 1 - shift..]);
        }
        for n in shift..=size {
            let k = n - shift;
            let mass = down[n] + up[k];
            let (to_down, to_up) = self.class_split(m, n);
            out_down[n] = to_down * mass;
            out_up[k] = to_up * mass;
        }
    }

    pub fn first_equilibration(
        &self,
        reservoir: &ReservoirDistribution,
        p_up_init: f64,
    ) -> Result<JointDistribution> {
        if reservoir.size() != self.size() {
            return Err(Error::InvalidArgument(format!(
                "reservoir has {} spins, engine expects {}",
                reservoir.size(),
                self.size()
            )));
        }
        if !(0.0..=1.0).contains(&p_up_init) {
            return Err(Error::InvalidArgument(format!(
                "initial memory up-probability {p_up_init} outside [0, 1]"
            )));
        }
        let p_down = 1.0 - p_up_init;
        let down: Vec<f64> = reservoir.probs().iter().map(|p| p * p_down).collect();
        let up: Vec<f64> = reservoir.probs().iter().map(|p| p * p_up_init).collect();
        let size = self.size();
        let mut joint = JointDistribution {
            cycle: 0,
            down: vec![0.0; size + 1],
            up: vec![0.0; size + 1],
        };
        self.equilibrate(0, &down, &up, &mut joint.down, &mut joint.up);
        Ok(joint)
    }

    pub fn erasure_cycle(&self, prev: &JointDistribution) -> Result<JointDistribution> {
        let size = self.size();
        if prev.size() != size {
            return Err(Error::InvalidArgument(format!(
                "joint distribution has {} spins, engine expects {}",
                prev.size(),
                size
            )));
        }
        if prev.cycle + 1 > size - 1 {
            return Err(Error::ProtocolExhausted {
                size,
                max: size - 1,
            });
        }
        let m = prev.cycle + 1;
        let mut next = JointDistribution {
            cycle: m,
            down: vec![0.0; size + 1],
            up: vec![0.0; size + 1],
        };
        self.equilibrate(m, &prev.down, &prev.up, &mut next.down, &mut next.up);
        Ok(next)
    }

    /// Runs the protocol and keeps every intermediate joint distribution.
    pub fn run_with_history(
        &self,
        reservoir: &ReservoirDistribution,
        p_up_init: f64,
        cycles: usize,
    ) -> Result<(ProtocolHistory, ErasureTrace)> {
        self.check_cycles(cycles)?;
        let mut joint = self.first_equilibration(reservoir, p_up_init)?;
        let initial_spin = reservoir.mean_excitation() + p_up_init;
        let mut records = vec![record(&joint, initial_spin)];
        let mut joints = Vec::with_capacity(cycles + 1);
        for _ in 0..cycles {
            let before = joint.mean_reservoir_excitation()
                + (joint.cycle + 2) as f64 * memory_up_probability(&joint);
            let next = self.erasure_cycle(&joint)?;
            records.push(record(&next, before));
            joints.push(std::mem::replace(&mut joint, next));
        }
        joints.push(joint);
        let history = ProtocolHistory {
            reservoir: reservoir.clone(),
            p_up_init,
            joints,
        };
        Ok((history, ErasureTrace::new(self.size(), records)?))
    }

    /// Runs the protocol keeping only the current joint distribution.
    pub fn run(
        &self,
        reservoir: &ReservoirDistribution,
        p_up_init: f64,
        cycles: usize,
    ) -> Result<(JointDistribution, ErasureTrace)> {
        self.check_cycles(cycles)?;
        let size = self.size();
        let mut joint = self.first_equilibration(reservoir, p_up_init)?;
        let initial_spin = reservoir.mean_excitation() + p_up_init;
        let mut records = Vec::with_capacity(cycles + 1);
        records.push(record(&joint, initial_spin));
        let mut scratch = joint.clone();
        for m in 1..=cycles {
            // after the CNOT an up memory carries one more quantum
            let before = joint.mean_reservoir_excitation()
                + (m + 1) as f64 * memory_up_probability(&joint);
            self.equilibrate(m, &joint.down, &joint.up, &mut scratch.down, &mut scratch.up);
            scratch.cycle = m;
            std::mem::swap(&mut joint, &mut scratch);
            records.push(record(&joint, before));
        }
        debug_assert_eq!(joint.size(), size);
        Ok((joint, ErasureTrace::new(size, records)?))
    }

    /// `p_{↑,0..=cycles}` for several starting reservoirs at once.
    ///
    /// Transition probabilities depend only on `(N, m, n)`, so each one is
    /// evaluated once and applied to every reservoir. The state is stored
    /// reservoir-minor (`[n][r]`) to keep the inner loop contiguous.
    pub fn up_probability_series_batch(
        &self,
        reservoirs: &[ReservoirDistribution],
        p_up_init: f64,
        cycles: usize,
    ) -> Result<Vec<Vec<f64>>> {
        self.check_cycles(cycles)?;
        if !(0.0..=1.0).contains(&p_up_init) {
            return Err(Error::InvalidArgument(format!(
                "initial memory up-probability {p_up_init} outside [0, 1]"
            )));
        }
        let size = self.size();
        let width = reservoirs.len();
        if let Some(r) = reservoirs.iter().find(|r| r.size() != size) {
            return Err(Error::InvalidArgument(format!(
                "reservoir has {} spins, engine expects {}",
                r.size(),
                size
            )));
        }
        let levels = size + 1;
        let mut down = vec![0.0; levels * width];
        let mut up = vec![0.0; levels * width];
        for (j, r) in reservoirs.iter().enumerate() {
            for (n, p) in r.probs().iter().enumerate() {
                down[n * width + j] = p * (1.0 - p_up_init);
                up[n * width + j] = p * p_up_init;
            }
        }
        let mut next_down = vec![0.0; levels * width];
        let mut next_up = vec![0.0; levels * width];
        let mut series = vec![Vec::with_capacity(cycles + 1); width];

        for m in 0..=cycles {
            let shift = m + 1;
            let kept = shift.min(levels) * width;
            next_down[..kept].copy_from_slice(&down[..kept]);
            if shift <= size {
                let from = (levels - shift) * width;
                next_up[from..].copy_from_slice(&up[from..]);
            }
            for n in shift..=size {
                let k = n - shift;
                let (to_down, to_up) = self.class_split(m, n);
                let (d_src, u_src) = (&down[n * width..][..width], &up[k * width..][..width]);
                let d_dst = &mut next_down[n * width..][..width];
                for j in 0..width {
                    d_dst[j] = to_down * (d_src[j] + u_src[j]);
                }
                let u_dst = &mut next_up[k * width..][..width];
                for j in 0..width {
                    u_dst[j] = to_up * (d_src[j] + u_src[j]);
                }
            }
            std::mem::swap(&mut down, &mut next_down);
            std::mem::swap(&mut up, &mut next_up);
            let mut totals = vec![0.0; width];
            for row in up.chunks_exact(width) {
                for (t, v) in totals.iter_mut().zip(row) {
                    *t += v;
                }
            }
            for (s, t) in series.iter_mut().zip(totals) {
                s.push(t);
            }
        }
        Ok(series)
    }

    fn check_cycles(&self, cycles: usize) -> Result<()> {
        if cycles > self.size() - 1 {
            Err(Error::ProtocolExhausted {
                size: self.size(),
                max: self.size() - 1,
            })
        } else {
            Ok(())
        }
    }
}

fn record(joint: &JointDistribution, spin_before: f64) -> TraceRecord {
    let reservoir_mean = joint.mean_reservoir_excitation();
    TraceRecord {
        cycle: joint.cycle,
        p_up: memory_up_probability(joint),
        alpha: reservoir_mean / joint.size() as f64,
        normalization_drift: joint.normalization_drift(),
        spin_drift: (joint.mean_total_spin() - spin_before).abs(),
    }
}

/// Initial conditions plus `P_0 .. P_m` from one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolHistory {
    pub reservoir: ReservoirDistribution,
    pub p_up_init: f64,
    pub joints: Vec<JointDistribution>,
}

pub fn first_equilibration(
    reservoir: &ReservoirDistribution,
    p_up_init: f64,
) -> Result<JointDistribution> {
    FiniteEngine::new(reservoir.size())?.first_equilibration(reservoir, p_up_init)
}

pub fn erasure_cycle(prev: &JointDistribution) -> Result<JointDistribution> {
    FiniteEngine::new(prev.size())?.erasure_cycle(prev)
}

/// `p_{↑,m} = Σ_n P_m(n, 1)`.
pub fn memory_up_probability(joint: &JointDistribution) -> f64 {
    joint.up.iter().sum()
}

/// `P_m(n, 1)` from the unrolled product form of the up-memory recurrence:
///
/// `Π_{d=0..m} T_d(n,1) · (A_0 + Σ_{d=1..m} P_{d−1}(n+d+1, 0) / Π_{k<d} T_k(n,1))`
///
/// with `A_0 = P_↑(n) p_↑ + P_↑(n+1) p_↓`. Needs `P_0 .. P_{m−1}` in the
/// history; the transition probabilities come from exact binomial ratios,
/// not from the engine's log table.
pub fn closed_form_up(history: &ProtocolHistory, n: usize, m: usize) -> Result<f64> {
    let size = history.reservoir.size();
    if history.joints.len() < m {
        return Err(Error::MissingHistory {
            cycle: m,
            needed: m,
            available: history.joints.len(),
        });
    }
    if n > size {
        return Err(Error::OutOfRange {
            what: "excitation level",
            value: n,
            size,
        });
    }
    let p_up = history.p_up_init;
    let ni = n as isize;
    let a0 = history.reservoir.get(ni) * p_up + history.reservoir.get(ni + 1) * (1.0 - p_up);
    let mut t_prefix = transition_prob_up(size, 0, n)?;
    let mut correction = 0.0;
    for d in 1..=m {
        correction += history.joints[d - 1].get(ni + d as isize + 1, false) / t_prefix;
        t_prefix *= transition_prob_up(size, d, n)?;
    }
    Ok(t_prefix * (a0 + correction))
}

/// Fresh memory (`p_↑ = p_up_init`) erased over `cycles` cycles.
pub fn run_protocol(
    spec: &ReservoirSpec,
    p_up_init: f64,
    cycles: usize,
) -> Result<(JointDistribution, ErasureTrace)> {
    FiniteEngine::new(spec.size())?.run(&initial_reservoir(spec), p_up_init, cycles)
}

/// Reservoir marginal `Σ_M P_m(n, M)`; not renormalised.
pub fn extract_reservoir(joint: &JointDistribution) -> ReservoirDistribution {
    ReservoirDistribution::from_raw(joint.down.iter().zip(&joint.up).map(|(d, u)| d + u).collect())
}

/// Erases one fresh memory (`p_↑ = 1/2`) over all `N − 1` cycles using the
/// supplied reservoir state; returns the reservoir afterwards and `p_{↑,f}`.
pub fn reuse_iteration(
    spec: &ReservoirSpec,
    reservoir: &ReservoirDistribution,
) -> Result<(ReservoirDistribution, f64)> {
    if reservoir.size() != spec.size() {
        return Err(Error::InvalidArgument(format!(
            "reservoir has {} spins, spec says {}",
            reservoir.size(),
            spec.size()
        )));
    }
    let total = reservoir.total();
    if (total - 1.0).abs() > DRIFT_TOLERANCE {
        return Err(Error::NotNormalized(total));
    }
    let engine = FiniteEngine::new(spec.size())?;
    let (joint, trace) = engine.run(reservoir, 0.5, spec.max_cycles())?;
    Ok((extract_reservoir(&joint), trace.final_p_up()))
}

/// One row per reuse of the same reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReuseStep {
    pub iteration: usize,
    pub p_up_final: f64,
    /// Mean number of up-spins in the reservoir after this iteration.
    pub reservoir_mean_excitation: f64,
}

/// Repeats [`reuse_iteration`] starting from the equilibrium reservoir.
pub fn reuse_series(spec: &ReservoirSpec, iterations: usize) -> Result<Vec<ReuseStep>> {
    let mut reservoir = initial_reservoir(spec);
    let mut steps = Vec::with_capacity(iterations);
    for iteration in 1..=iterations {
        let (next, p_up_final) = reuse_iteration(spec, &reservoir)?;
        steps.push(ReuseStep {
            iteration,
            p_up_final,
            reservoir_mean_excitation: next.mean_excitation(),
        });
        reservoir = next;
    }
    Ok(steps)
}
