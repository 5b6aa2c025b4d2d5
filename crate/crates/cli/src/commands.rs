use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use spinlabor::divergence::{self, match_profile, n_min_scan, select_n_min};
use spinlabor::finite::{reuse_series, run_protocol};
use spinlabor::infinite::{infinite_spinlabor_recurrence, DEFAULT_INFINITE_CYCLES};
use spinlabor::oracle::{max_deviation_from_engine, sample_spinlabor};
use spinlabor::spin::{gamma_of_alpha, SpinPolarization};
use spinlabor::stats::{
    finite_spinlabor_distribution, reset_distribution, spinlabor_per_bit, SpinlaborDistribution,
};
use spinlabor::{CostSummary, Execution, ReservoirSpec};

use crate::table::{open, sci, Table};
use crate::{CliError, Global};

pub const ORACLE_THRESHOLD: f64 = 1e-10;
const DIST_SUM_TOLERANCE: f64 = 1e-9;

fn emit(table: &Table, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = open(out).map_err(CliError::io)?;
    table.write_to(&mut w).map_err(CliError::io)?;
    w.flush().map_err(CliError::io)
}

fn spec(n: usize, alpha: f64) -> Result<ReservoirSpec, CliError> {
    ReservoirSpec::new(n, alpha).map_err(|e| CliError::Usage(e.to_string()))
}

pub struct EraseArgs {
    pub n: usize,
    pub alpha: f64,
    pub cycles: Option<usize>,
}

pub fn erase(g: &Global, a: EraseArgs) -> Result<(), CliError> {
    let spec = spec(a.n, a.alpha)?;
    let cycles = a.cycles.unwrap_or(spec.max_cycles());
    if cycles > spec.max_cycles() {
        return Err(CliError::Usage(format!(
            "--cycles {cycles} exceeds N - 1 = {}",
            spec.max_cycles()
        )));
    }
    let (_, trace) = run_protocol(&spec, 0.5, cycles)?;
    let mut rows = Table::new(&["m", "p_up_m", "alpha_m", "incremental_avg_cost", "norm_drift"]);
    let mut cost = 0.0;
    for r in trace.records() {
        rows.push(vec![
            r.cycle.to_string(),
            sci(r.p_up),
            sci(r.alpha),
            sci(cost),
            sci(r.normalization_drift),
        ]);
        cost += r.p_up;
    }
    let s = CostSummary::from_trace(&trace, a.alpha)?;
    let mut summary = Table::new(&["avg", "bound", "per_bit", "reset", "total", "p_up_final"]);
    summary.push(vec![
        sci(s.avg_spinlabor),
        sci(s.bound_finite),
        s.avg_per_bit.map(sci).unwrap_or_default(),
        sci(s.reset_cost),
        sci(s.total_with_reset),
        sci(s.p_up_final),
    ]);
    match &g.out {
        Some(path) => {
            emit(&rows, Some(path))?;
            emit(&summary, Some(&summary_path(path)))
        }
        None => {
            let mut w = open(None).map_err(CliError::io)?;
            rows.write_to(&mut w).map_err(CliError::io)?;
            writeln!(w).map_err(CliError::io)?;
            summary.write_to(&mut w).map_err(CliError::io)?;
            w.flush().map_err(CliError::io)
        }
    }
}

/// `trace.csv` -> `trace.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{}.summary.csv", stem.unwrap_or_default()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistVariant {
    Fin,
    Inf,
    FinReset,
}

impl FromStr for DistVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fin" => Ok(Self::Fin),
            "inf" => Ok(Self::Inf),
            "fin-reset" => Ok(Self::FinReset),
            _ => Err(format!("unknown variant {s:?} (fin, inf, fin-reset)")),
        }
    }
}

pub struct DistArgs {
    pub variant: DistVariant,
    pub n: Option<usize>,
    pub alpha: f64,
    pub m_max: Option<usize>,
}

pub fn dist(g: &Global, a: DistArgs) -> Result<(), CliError> {
    let dist = match a.variant {
        DistVariant::Inf => {
            let alpha = SpinPolarization::new(a.alpha).map_err(|e| CliError::Usage(e.to_string()))?;
            infinite_spinlabor_recurrence(
                gamma_of_alpha(alpha),
                a.m_max.unwrap_or(DEFAULT_INFINITE_CYCLES),
            )
        }
        DistVariant::Fin | DistVariant::FinReset => {
            let n = a
                .n
                .ok_or_else(|| CliError::Usage("--n is required for finite variants".into()))?;
            let spec = spec(n, a.alpha)?;
            let cycles = a.m_max.unwrap_or(spec.max_cycles());
            if cycles > spec.max_cycles() {
                return Err(CliError::Usage(format!(
                    "--m-max {cycles} exceeds N - 1 = {}",
                    spec.max_cycles()
                )));
            }
            let (_, trace) = run_protocol(&spec, 0.5, cycles)?;
            let pre = finite_spinlabor_distribution(&trace);
            if a.variant == DistVariant::FinReset {
                reset_distribution(&pre, n, trace.final_p_up())
            } else {
                pre
            }
        }
    };
    check_total(&dist)?;
    let mut t = Table::new(&["n_cost", "probability"]);
    for (k, p) in dist.probs().iter().enumerate() {
        t.push(vec![k.to_string(), sci(*p)]);
    }
    emit(&t, g.out.as_deref())
}

fn check_total(d: &SpinlaborDistribution) -> Result<(), CliError> {
    let total = d.total();
    if (total - 1.0).abs() > DIST_SUM_TOLERANCE {
        Err(CliError::Breach(format!(
            "distribution sums to {total}, off by more than {DIST_SUM_TOLERANCE}"
        )))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    AvgSpinlabor,
    AvgPerBit,
    ResetCost,
    PUpFinal,
    Jsd,
    NMin,
    SpinlaborDist,
    ReuseSeries,
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "avg_spinlabor" => Self::AvgSpinlabor,
            "avg_per_bit" => Self::AvgPerBit,
            "reset_cost" => Self::ResetCost,
            "p_up_final" => Self::PUpFinal,
            "jsd" => Self::Jsd,
            "n_min" => Self::NMin,
            "spinlabor_dist" => Self::SpinlaborDist,
            "reuse_series" => Self::ReuseSeries,
            _ => return Err(format!("unknown quantity {s:?}")),
        })
    }
}

impl Quantity {
    fn label(self) -> &'static str {
        match self {
            Self::AvgSpinlabor => "avg_spinlabor",
            Self::AvgPerBit => "avg_per_bit",
            Self::ResetCost => "reset_cost",
            Self::PUpFinal => "p_up_final",
            Self::Jsd => "jsd",
            Self::NMin => "n_min",
            Self::SpinlaborDist => "spinlabor_dist",
            Self::ReuseSeries => "reuse_series",
        }
    }
}

/// `a,b,c` or `from:to:step`.
pub fn parse_reals(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse value list {s:?}"));
    if let Some((from, rest)) = s.split_once(':') {
        let (to, step) = rest.split_once(':').ok_or_else(bad)?;
        let (from, to, step): (f64, f64, f64) = (
            from.parse().map_err(|_| bad())?,
            to.parse().map_err(|_| bad())?,
            step.parse().map_err(|_| bad())?,
        );
        real_range(from, to, step)
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
    }
}

pub fn real_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(to >= from) {
        return Err(CliError::Usage(format!("bad range {from}:{to}:{step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse size list {s:?}"));
    if let Some((from, rest)) = s.split_once(':') {
        let (to, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let (from, to, step): (usize, usize, usize) = (
            from.parse().map_err(|_| bad())?,
            to.parse().map_err(|_| bad())?,
            step.parse().map_err(|_| bad())?,
        );
        if step == 0 || to < from {
            return Err(bad());
        }
        Ok((from..=to).step_by(step).collect())
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
    }
}

pub struct SweepArgs {
    pub alphas: Vec<f64>,
    pub sizes: Vec<usize>,
    pub quantity: Quantity,
    pub tolerance: f64,
    pub iterations: usize,
}

type Cell = Vec<(String, f64)>;

fn sweep_cell(q: Quantity, alpha: f64, n: usize, iterations: usize) -> spinlabor::Result<Cell> {
    let label = |s: &str| s.to_string();
    let spec = ReservoirSpec::new(n, alpha)?;
    Ok(match q {
        Quantity::ReuseSeries => reuse_series(&spec, iterations)?
            .iter()
            .map(|s| (format!("reuse_series:{}", s.iteration), s.p_up_final))
            .collect(),
        Quantity::Jsd => {
            let profile = match_profile(&[alpha], &[n], Execution::Sequential)?;
            vec![(label("jsd"), profile[0][0].jsd)]
        }
        _ => {
            let (_, trace) = run_protocol(&spec, 0.5, spec.max_cycles())?;
            let s = CostSummary::from_trace(&trace, alpha)?;
            match q {
                Quantity::AvgSpinlabor => vec![(label("avg_spinlabor"), s.avg_spinlabor)],
                Quantity::AvgPerBit => vec![(
                    label("avg_per_bit"),
                    spinlabor_per_bit(s.avg_spinlabor, s.p_up_final)?,
                )],
                Quantity::ResetCost => vec![(label("reset_cost"), s.reset_cost)],
                Quantity::PUpFinal => vec![(label("p_up_final"), s.p_up_final)],
                Quantity::SpinlaborDist => finite_spinlabor_distribution(&trace)
                    .probs()
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (format!("spinlabor_dist:{k}"), *p))
                    .collect(),
                _ => unreachable!("handled above"),
            }
        }
    })
}

fn sorted_unique_reals(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn sweep(g: &Global, a: SweepArgs) -> Result<(), CliError> {
    let alphas = sorted_unique_reals(&a.alphas);
    let sizes: Vec<usize> = a.sizes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if alphas.is_empty() || sizes.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    if let Some(bad) = alphas.iter().find(|&&x| !(x > 0.0 && x <= 0.5)) {
        return Err(CliError::Usage(format!("alpha {bad} outside (0, 0.5]")));
    }
    if sizes[0] == 0 {
        return Err(CliError::Usage("reservoir sizes must be at least 1".into()));
    }
    let mut t = Table::new(&["alpha", "N", "quantity", "value"]);
    let mut failures = Vec::new();
    if a.quantity == Quantity::NMin {
        let profile = match_profile(&alphas, &sizes, Execution::default())?;
        let last = *sizes.last().expect("non-empty");
        for (&alpha, p) in alphas.iter().zip(&profile) {
            match select_n_min(alpha, a.tolerance, p) {
                Ok(r) => t.push(vec![sci(alpha), last.to_string(), "n_min".into(), sci(r.n_min as f64)]),
                Err(e) => failures.push(format!("alpha={alpha}: {e}")),
            }
        }
    } else {
        let cells: Vec<(f64, usize)> = alphas
            .iter()
            .flat_map(|&al| sizes.iter().map(move |&n| (al, n)))
            .collect();
        let results = Execution::default().map(&cells, |&(alpha, n)| {
            sweep_cell(a.quantity, alpha, n, a.iterations)
        });
        for ((alpha, n), r) in cells.iter().zip(results) {
            match r {
                Ok(values) => {
                    for (q, v) in values {
                        t.push(vec![sci(*alpha), n.to_string(), q, sci(v)]);
                    }
                }
                Err(e) => failures.push(format!("alpha={alpha} N={n}: {e}")),
            }
        }
    }
    emit(&t, g.out.as_deref())?;
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("failed cell {} {f}", a.quantity.label());
        }
        Err(CliError::Compute(anyhow::anyhow!(
            "{} of the requested cells failed",
            failures.len()
        )))
    }
}

pub struct MatchArgs {
    pub alphas: Vec<f64>,
    pub tolerance: f64,
    pub n_max_scan: usize,
}

pub fn match_cmd(g: &Global, a: MatchArgs) -> Result<(), CliError> {
    if a.n_max_scan == 0 {
        return Err(CliError::Usage("--n-max-scan must be at least 1".into()));
    }
    if !(a.tolerance > 0.0) {
        return Err(CliError::Usage(format!("tolerance {}", a.tolerance)));
    }
    if let Some(bad) = a.alphas.iter().find(|&&x| !(x > 0.0 && x < 0.5)) {
        return Err(CliError::Usage(format!("alpha {bad} outside (0, 0.5)")));
    }
    let results = n_min_scan(&a.alphas, a.tolerance, a.n_max_scan, Execution::default())?;
    let mut t = Table::new(&["alpha_i", "n_min", "jsd", "p_up_final"]);
    for (alpha, r) in a.alphas.iter().zip(results) {
        match r {
            Ok(m) => t.push(vec![
                sci(m.alpha_i),
                m.n_min.to_string(),
                sci(m.jsd_at_n_min),
                sci(m.p_up_final_at_n_min),
            ]),
            Err(e) => {
                eprintln!("alpha={alpha}: {e}");
                t.push(vec![sci(*alpha), "not_found".into(), String::new(), String::new()]);
            }
        }
    }
    emit(&t, g.out.as_deref())
}

pub use divergence::{DEFAULT_N_MAX_SCAN, DEFAULT_TOLERANCE};

pub struct ReuseArgs {
    pub n: usize,
    pub alpha: f64,
    pub iterations: usize,
}

pub fn reuse(g: &Global, a: ReuseArgs) -> Result<(), CliError> {
    let spec = spec(a.n, a.alpha)?;
    let mut t = Table::new(&["iteration", "p_up_final", "reservoir_mean_excitation"]);
    for s in reuse_series(&spec, a.iterations)? {
        t.push(vec![
            s.iteration.to_string(),
            sci(s.p_up_final),
            sci(s.reservoir_mean_excitation),
        ]);
    }
    emit(&t, g.out.as_deref())
}

pub struct OracleArgs {
    pub n: usize,
    pub alpha: f64,
    pub runs: usize,
}

pub fn oracle_check(g: &Global, a: OracleArgs) -> Result<(), CliError> {
    let spec = spec(a.n, a.alpha)?;
    let deviation = max_deviation_from_engine(&spec).map_err(|e| match e {
        spinlabor::Error::OracleTooLarge { .. } => CliError::Usage(e.to_string()),
        e => e.into(),
    })?;
    let mut t = Table::new(&[
        "n",
        "alpha",
        "max_deviation",
        "runs",
        "seed",
        "generator",
        "sampled_mean_cost",
        "avg_spinlabor",
        "max_bin_deviation_vs_fin",
    ]);
    let mut row = vec![a.n.to_string(), sci(a.alpha), sci(deviation)];
    if a.runs > 0 {
        let sampled = sample_spinlabor(&spec, a.runs, g.seed, Execution::default())?;
        let (_, trace) = run_protocol(&spec, 0.5, spec.max_cycles())?;
        let fin = finite_spinlabor_distribution(&trace);
        let freq = sampled.frequencies();
        let mean: f64 = freq.iter().enumerate().map(|(k, f)| k as f64 * f).sum();
        let bin_dev = freq
            .iter()
            .enumerate()
            .map(|(k, f)| (f - fin.probs().get(k).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max);
        row.extend([
            a.runs.to_string(),
            g.seed.to_string(),
            sampled.generator.to_string(),
            sci(mean),
            sci(fin.mean()),
            sci(bin_dev),
        ]);
    } else {
        row.extend(std::iter::repeat_n(String::new(), 6));
    }
    t.push(row);
    emit(&t, g.out.as_deref())?;
    if deviation < ORACLE_THRESHOLD {
        Ok(())
    } else {
        Err(CliError::Breach(format!(
            "oracle deviation {deviation:e} is not below {ORACLE_THRESHOLD:e}"
        )))
    }
}
