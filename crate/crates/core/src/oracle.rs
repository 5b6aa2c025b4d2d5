//! Small-system validators for the recurrence engines.
//!
//! [`MicrostateEnsemble`] keeps one weight per full microstate (reservoir
//! bit pattern plus memory bit) and equilibrates by spreading each conserved
//! class uniformly over its members, counted by enumeration. The sampler
//! draws whole protocol trajectories at the microstate level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finite::{FiniteEngine, JointDistribution};
use crate::spin::{initial_reservoir, ReservoirSpec};

pub const MAX_ORACLE_SIZE: usize = 12;
pub const MIN_SAMPLER_RUNS: usize = 10_000;
pub const SAMPLER_GENERATOR: &str = "ChaCha8Rng";
/// Runs per independently seeded sampler stream.
const CHUNK_RUNS: usize = 4096;

fn check_size(size: usize) -> Result<()> {
    if size == 0 {
        Err(Error::InvalidArgument("reservoir size must be at least 1".into()))
    } else if size > MAX_ORACLE_SIZE {
        Err(Error::OracleTooLarge {
            size,
            max: MAX_ORACLE_SIZE,
        })
    } else {
        Ok(())
    }
}

/// Reservoir bit patterns grouped by number of up-spins.
fn patterns_by_level(size: usize) -> Vec<Vec<u32>> {
    let mut levels = vec![Vec::new(); size + 1];
    for pattern in 0..(1u32 << size) {
        levels[pattern.count_ones() as usize].push(pattern);
    }
    levels
}

/// Probability of every microstate `|pattern, M⟩`, stored at index
/// `pattern | M << N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrostateEnsemble {
    size: usize,
    weights: Vec<f64>,
}

impl MicrostateEnsemble {
    /// Independent spins at polarisation `α` and a memory that is up with
    /// probability `p_up`.
    pub fn product_state(spec: &ReservoirSpec, p_up: f64) -> Result<Self> {
        check_size(spec.size())?;
        let size = spec.size();
        let alpha = spec.alpha();
        let mut weights = vec![0.0; 2usize << size];
        for pattern in 0..(1usize << size) {
            let ups = pattern.count_ones() as i32;
            let w = alpha.powi(ups) * (1.0 - alpha).powi(size as i32 - ups);
            weights[pattern] = w * (1.0 - p_up);
            weights[pattern | 1 << size] = w * p_up;
        }
        Ok(Self { size, weights })
    }

    /// Every spin down, memory included.
    pub fn ground_state(size: usize) -> Result<Self> {
        check_size(size)?;
        let mut weights = vec![0.0; 2usize << size];
        weights[0] = 1.0;
        Ok(Self { size, weights })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, pattern: u32, memory_up: bool) -> f64 {
        self.weights[pattern as usize | (memory_up as usize) << self.size]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Macrostate marginals `(P(n, 0), P(n, 1))`.
    pub fn macrostates(&self) -> (Vec<f64>, Vec<f64>) {
        let mut down = vec![0.0; self.size + 1];
        let mut up = vec![0.0; self.size + 1];
        for pattern in 0..(1u32 << self.size) {
            let n = pattern.count_ones() as usize;
            down[n] += self.weight(pattern, false);
            up[n] += self.weight(pattern, true);
        }
        (down, up)
    }

    /// Largest weight difference between two microstates of the same
    /// macrostate.
    pub fn macrostate_spread(&self) -> f64 {
        let mut spread: f64 = 0.0;
        for level in patterns_by_level(self.size) {
            for memory_up in [false, true] {
                let ws = level.iter().map(|&p| self.weight(p, memory_up));
                let (lo, hi) = ws.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
                    (lo.min(w), hi.max(w))
                });
                spread = spread.max(hi - lo);
            }
        }
        spread
    }
}

/// Equilibration after the `m`-th CNOT step: the memory-ancilla block
/// exchanges `m + 1` quanta, so `|n, 0⟩` and `|n − m − 1, 1⟩` microstates
/// share a total and their pooled weight is spread evenly over all of them.
pub fn enumerate_equilibration(
    ensemble: &MicrostateEnsemble,
    m: usize,
) -> Result<MicrostateEnsemble> {
    let size = ensemble.size;
    if m >= size {
        return Err(Error::ProtocolExhausted {
            size,
            max: size - 1,
        });
    }
    let levels = patterns_by_level(size);
    let up_bit = 1usize << size;
    let mut weights = vec![0.0; ensemble.weights.len()];
    let shift = m + 1;
    // total spin of a class: reservoir ups + (m + 1) for an up memory
    for total in 0..=(size + shift) {
        let mut members: Vec<usize> = Vec::new();
        if total <= size {
            members.extend(levels[total].iter().map(|&p| p as usize));
        }
        if total >= shift && total - shift <= size {
            members.extend(levels[total - shift].iter().map(|&p| p as usize | up_bit));
        }
        if members.is_empty() {
            continue;
        }
        let pooled: f64 = members.iter().map(|&i| ensemble.weights[i]).sum();
        let share = pooled / members.len() as f64;
        for i in members {
            weights[i] = share;
        }
    }
    Ok(MicrostateEnsemble { size, weights })
}

/// Macrostate tables `(P_m(·,0), P_m(·,1))` for `m = 0..=cycles`.
pub fn oracle_protocol(
    spec: &ReservoirSpec,
    p_up_init: f64,
    cycles: usize,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut ensemble = MicrostateEnsemble::product_state(spec, p_up_init)?;
    let mut tables = Vec::with_capacity(cycles + 1);
    for m in 0..=cycles {
        ensemble = enumerate_equilibration(&ensemble, m)?;
        tables.push(ensemble.macrostates());
    }
    Ok(tables)
}

/// Largest `|P_m(n, M)|` difference between the microstate oracle and the
/// recurrence engine over every cycle of a full `N − 1`-cycle run.
pub fn max_deviation_from_engine(spec: &ReservoirSpec) -> Result<f64> {
    let cycles = spec.max_cycles();
    let oracle = oracle_protocol(spec, 0.5, cycles)?;
    let engine = FiniteEngine::new(spec.size())?;
    let (history, _) = engine.run_with_history(&initial_reservoir(spec), 0.5, cycles)?;
    Ok(oracle
        .iter()
        .zip(&history.joints)
        .map(|((down, up), joint)| table_deviation(down, up, joint))
        .fold(0.0, f64::max))
}

fn table_deviation(down: &[f64], up: &[f64], joint: &JointDistribution) -> f64 {
    down.iter()
        .zip(joint.down())
        .chain(up.iter().zip(joint.up()))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Histogram of sampled accumulated spinlabor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    pub counts: Vec<u64>,
    pub runs: usize,
    pub seed: u64,
    pub generator: &'static str,
}

impl EmpiricalDistribution {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.runs as f64)
            .collect()
    }
}

/// Samples `runs` full-protocol trajectories (`N − 1` cycles, fresh memory
/// with `p_↑ = 1/2`). Each CNOT costs one quantum when the memory is up.
///
/// Runs are split into fixed chunks of 4096, chunk `i` drawing from stream
/// `i` of a ChaCha8 generator seeded with `rng_seed`; the histogram is
/// therefore independent of the execution mode.
pub fn sample_spinlabor(
    spec: &ReservoirSpec,
    runs: usize,
    rng_seed: u64,
    execution: Execution,
) -> Result<EmpiricalDistribution> {
    check_size(spec.size())?;
    if runs < MIN_SAMPLER_RUNS {
        return Err(Error::InvalidArgument(format!(
            "sampler needs at least {MIN_SAMPLER_RUNS} runs, got {runs}"
        )));
    }
    let size = spec.size();
    let levels = patterns_by_level(size);
    let chunks: Vec<(u64, usize)> = (0..runs.div_ceil(CHUNK_RUNS))
        .map(|i| (i as u64, CHUNK_RUNS.min(runs - i * CHUNK_RUNS)))
        .collect();
    let partials = execution.map(&chunks, |&(stream, count)| {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(stream);
        let mut counts = vec![0u64; size];
        for _ in 0..count {
            counts[sample_trajectory(spec, &levels, &mut rng)] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; size];
    for part in partials {
        for (c, p) in counts.iter_mut().zip(part) {
            *c += p;
        }
    }
    Ok(EmpiricalDistribution {
        counts,
        runs,
        seed: rng_seed,
        generator: SAMPLER_GENERATOR,
    })
}

fn sample_trajectory<R: Rng>(spec: &ReservoirSpec, levels: &[Vec<u32>], rng: &mut R) -> usize {
    let size = spec.size();
    let alpha = spec.alpha();
    let mut pattern = 0u32;
    for bit in 0..size {
        if rng.random::<f64>() < alpha {
            pattern |= 1 << bit;
        }
    }
    let mut memory_up = rng.random::<f64>() < 0.5;
    let mut cost = 0usize;
    for m in 0..size {
        if m > 0 && memory_up {
            cost += 1;
        }
        let shift = m + 1;
        let total = pattern.count_ones() as usize + if memory_up { shift } else { 0 };
        let down_members = if total <= size { &levels[total][..] } else { &[][..] };
        let up_members = if total >= shift { &levels[total - shift][..] } else { &[][..] };
        let pick = rng.random_range(0..down_members.len() + up_members.len());
        if pick < down_members.len() {
            pattern = down_members[pick];
            memory_up = false;
        } else {
            pattern = up_members[pick - down_members.len()];
            memory_up = true;
        }
    }
    cost
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spin_first_equilibration() {
        let spec = ReservoirSpec::new(2, 0.25).unwrap();
        let tables = oracle_protocol(&spec, 0.5, 0).unwrap();
        let (down, up) = &tables[0];
        for (got, want) in up.iter().zip([5.0 / 32.0, 7.0 / 48.0, 1.0 / 32.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in down.iter().zip([9.0 / 32.0, 5.0 / 16.0, 7.0 / 96.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn ground_state_is_fixed_point() {
        let g = MicrostateEnsemble::ground_state(5).unwrap();
        for m in 0..5 {
            assert_eq!(enumerate_equilibration(&g, m).unwrap(), g);
        }
    }

    #[test]
    fn three_spin_cycles_match_engine() {
        let spec = ReservoirSpec::new(3, 0.4).unwrap();
        assert!(max_deviation_from_engine(&spec).unwrap() < 1e-12);
    }

    #[test]
    fn size_cap() {
        let spec = ReservoirSpec::new(13, 0.3).unwrap();
        assert!(matches!(
            MicrostateEnsemble::product_state(&spec, 0.5),
            Err(Error::OracleTooLarge { size: 13, .. })
        ));
        assert!(sample_spinlabor(&spec, MIN_SAMPLER_RUNS, 1, Execution::Sequential).is_err());
    }

    #[test]
    fn equilibration_levels_microstates() {
        let spec = ReservoirSpec::new(6, 0.2).unwrap();
        let mut e = MicrostateEnsemble::product_state(&spec, 0.5).unwrap();
        for m in 0..6 {
            e = enumerate_equilibration(&e, m).unwrap();
            assert!(e.macrostate_spread() < 1e-14);
            assert!((e.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_is_seed_deterministic() {
        let spec = ReservoirSpec::new(4, 0.3).unwrap();
        let a = sample_spinlabor(&spec, 20_000, 7, Execution::Sequential).unwrap();
        let b = sample_spinlabor(&spec, 20_000, 7, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = sample_spinlabor(&spec, 20_000, 8, Execution::Sequential).unwrap();
        assert_ne!(a.counts, c.counts);
        assert!(sample_spinlabor(&spec, 100, 7, Execution::Sequential).is_err());
    }

    #[test]
    fn cold_single_spin_never_pays() {
        let spec = ReservoirSpec::new(1, 0.0).unwrap();
        let h = sample_spinlabor(&spec, MIN_SAMPLER_RUNS, 3, Execution::Sequential).unwrap();
        assert_eq!(h.counts, vec![MIN_SAMPLER_RUNS as u64]);
    }
}
