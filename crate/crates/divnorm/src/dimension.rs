//! s-gale evaluation and finite-state dimension bounds.
//!
//! An s-gale scales a gambler's capital by the sequence's payoff mass
//! raised to 1−s, so in log domain its value at a prefix w is
//! (1−s)·log₂α^{|w|}(w) + log₂d(w). Whether that value climbs or sinks as
//! the exponent s varies locates the sequence's finite-state dimension:
//! the smallest s at which some gambler's s-gale still grows. True
//! divergence to infinity is not decidable from a prefix, so growth is
//! judged by the least-squares slope over the tail half of the
//! checkpoints, reported as an estimate alongside the closed-form bounds
//! `1 − rate/c` derived from a divergence profile.

use num_rational::BigRational;
use num_traits::One;

use crate::divergence::{
    divergence_profile, Checkpoints, DivergenceProfile, DEFAULT_TAIL_FRACTION,
};
use crate::error::{Error, Result};
use crate::gambler::{run, CapitalTrace, Fsg, RunOptions};
use crate::measures::{log2_rational, ExtReal, Mode, Prob};
use crate::sequences::SequenceSpec;
use crate::synthesis::empirical_exploit;
use std::io::Write;

/// Tail slopes within this many bits per symbol of zero count as "not
/// sinking", which is what the success rule below needs; strictly above
/// it counts as growth.
pub const DEFAULT_SLOPE_THRESHOLD: f64 = 0.01;

/// 0 to 1 in steps of 1/32.
pub fn default_s_grid() -> Vec<f64> {
    (0..=32).map(|i| i as f64 / 32.0).collect()
}

/// Log-domain s-gale values of one gambler at one exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct SGaleTrace {
    pub s: f64,
    /// Checkpoint steps.
    pub steps: Vec<u64>,
    /// log₂ of the s-gale value at each checkpoint; −∞ once bankrupt.
    pub values: Vec<f64>,
    /// Least-squares slope in bits per symbol over the final half of the
    /// checkpoints; −∞ if the window contains a bankrupt value.
    pub tail_slope: f64,
    /// Tail slope strictly above the threshold.
    pub diverges: bool,
    pub slope_threshold: f64,
}

/// Per-symbol log₂ payoff masses, for accumulating log₂α^{|w|}(w).
fn symbol_logs(alpha: &Prob) -> Result<Vec<f64>> {
    if !alpha.is_strictly_positive() {
        return Err(Error::InvalidProbability(
            "s-gales need a strictly positive payoff measure".into(),
        ));
    }
    Ok((0..alpha.len())
        .map(|a| match alpha.rational(a) {
            Some(r) => log2_rational(r),
            None => alpha.weight_f64(a).log2(),
        })
        .collect())
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParam(format!(
            "s-gale exponent must lie in [0, 1], got {s}"
        )));
    }
    Ok(())
}

/// Least-squares slope over the final half of the points, in value per
/// step. A single point has slope 0; a −∞ value makes the slope −∞.
fn tail_slope(steps: &[u64], values: &[f64]) -> f64 {
    let len = steps.len();
    if len < 2 {
        return 0.0;
    }
    // at least two points so the window is never degenerate
    let window = len.div_ceil(2).max(2);
    let xs = &steps[len - window..];
    let ys = &values[len - window..];
    if ys.iter().any(|v| v.is_infinite()) {
        return f64::NEG_INFINITY;
    }
    let n = window as f64;
    let x_mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x as f64 - x_mean;
        num += dx * (y - y_mean);
        den += dx * dx;
    }
    num / den
}

/// Assemble an s-gale trace from a finished capital run and the running
/// log-payoff series. At s = 1 the scaling term is multiplied by an exact
/// 0.0, so the values equal the capital series bit for bit.
fn assemble(
    s: f64,
    steps: &[u64],
    cumulative_log_payoff: &[f64],
    trace: &CapitalTrace,
    slope_threshold: f64,
) -> SGaleTrace {
    let values: Vec<f64> = steps
        .iter()
        .map(|&t| (1.0 - s) * cumulative_log_payoff[t as usize] + trace.log2_capital[t as usize])
        .collect();
    let slope = tail_slope(steps, &values);
    SGaleTrace {
        s,
        steps: steps.to_vec(),
        values,
        tail_slope: slope,
        diverges: slope > slope_threshold,
        slope_threshold,
    }
}

/// Evaluate one gambler's s-gale along a sequence prefix at the given
/// checkpoints.
pub fn sgale_trace(
    g: &Fsg,
    alpha: &Prob,
    s: f64,
    spec: &SequenceSpec,
    checkpoints: &Checkpoints,
    slope_threshold: f64,
) -> Result<SGaleTrace> {
    check_s(s)?;
    let logs = symbol_logs(alpha)?;
    let options = RunOptions {
        checkpoints: Some(checkpoints.clone()),
        skip_risk: true,
        gamma: None,
    };
    let trace = run(g, alpha, spec, &options)?;
    let mut cumulative = Vec::with_capacity(trace.symbols.len() + 1);
    let mut acc = 0.0f64;
    cumulative.push(acc);
    for &a in &trace.symbols {
        acc += logs[a as usize];
        cumulative.push(acc);
    }
    Ok(assemble(s, &trace.checkpoints, &cumulative, &trace, slope_threshold))
}

/// One (exponent, block length) cell of a dimension estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct SGaleEvaluation {
    pub block_len: usize,
    pub trace: SGaleTrace,
    /// Tail slope ≥ −threshold: the gambler holds its ground at this s.
    pub succeeded: bool,
}

/// Dimension bounds, and optionally a grid-search estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    /// log₂(1/min_a α(a)), the per-symbol capacity the bounds divide by.
    pub c_bits: f64,
    /// 1 − upper_rate/c, clamped to [0, 1].
    pub upper_bound_dim: f64,
    /// 1 − lower_rate/c, clamped to [0, 1].
    pub upper_bound_strong_dim: f64,
    /// Smallest grid s at which some synthesized gambler's s-gale holds
    /// its ground; absent for bounds-only reports and when every gambler
    /// sinks at every s.
    pub estimated_dim: Option<f64>,
    pub block_len_max: usize,
    pub s_grid: Vec<f64>,
    pub slope_threshold: f64,
    /// Every grid cell evaluated, in (block length, s) order.
    pub evaluations: Vec<SGaleEvaluation>,
}

impl DimensionReport {
    /// Flat key-value text block.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("c_bits {}\n", self.c_bits));
        out.push_str(&format!("upper_bound_dim {}\n", self.upper_bound_dim));
        out.push_str(&format!(
            "upper_bound_strong_dim {}\n",
            self.upper_bound_strong_dim
        ));
        match self.estimated_dim {
            Some(d) => out.push_str(&format!("estimated_dim {d}\n")),
            None => out.push_str("estimated_dim none\n"),
        }
        out.push_str(&format!("block_len_max {}\n", self.block_len_max));
        if !self.s_grid.is_empty() {
            let grid: Vec<String> = self.s_grid.iter().map(f64::to_string).collect();
            out.push_str(&format!("s_grid {}\n", grid.join(",")));
        }
        out.push_str(&format!("slope_threshold {}\n", self.slope_threshold));
        out
    }
}

/// The capacity constant c = log₂(1/min_a α(a)), exact where the weights
/// allow it.
fn capacity_bits(alpha: &Prob) -> Result<f64> {
    if alpha.space().word_len() != 1 {
        return Err(Error::InvalidParam(
            "dimension bounds need a symbol measure".into(),
        ));
    }
    if !alpha.is_strictly_positive() {
        return Err(Error::InvalidProbability(
            "dimension bounds need a strictly positive payoff measure".into(),
        ));
    }
    Ok(match alpha.mode() {
        Mode::Exact => {
            let min = alpha
                .rationals()
                .expect("exact mode")
                .iter()
                .min()
                .expect("alphabets are nonempty");
            log2_rational(&(BigRational::one() / min))
        }
        Mode::Float => -alpha.min_weight_f64().log2(),
    })
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn bound_from_rate(rate: ExtReal, c: f64) -> f64 {
    match rate {
        ExtReal::Infinite => 0.0,
        ExtReal::Finite(r) => clamp_unit(1.0 - r / c),
    }
}

/// Theorem-style dimension bounds from a divergence profile: the
/// estimated upper rate bounds the dimension, the lower rate bounds the
/// strong dimension. Bounds only; no grid search.
pub fn dim_upper_bounds(profile: &DivergenceProfile, alpha: &Prob) -> Result<DimensionReport> {
    if alpha != &profile.alpha {
        return Err(Error::InvalidParam(
            "payoff measure differs from the one the profile was built against".into(),
        ));
    }
    let c = capacity_bits(alpha)?;
    let upper_bound_dim = bound_from_rate(profile.upper_rate, c);
    let upper_bound_strong_dim = bound_from_rate(profile.lower_rate, c);
    debug_assert!(upper_bound_dim <= upper_bound_strong_dim);
    Ok(DimensionReport {
        c_bits: c,
        upper_bound_dim,
        upper_bound_strong_dim,
        estimated_dim: None,
        block_len_max: profile.block_len_max(),
        s_grid: Vec::new(),
        slope_threshold: DEFAULT_SLOPE_THRESHOLD,
        evaluations: Vec::new(),
    })
}

/// Grid-search dimension estimate: for every block length up to the
/// limit, fit the empirical exploit gambler to the whole prefix, evaluate
/// its s-gale at block-aligned checkpoints across the exponent grid, and
/// report the smallest s where some gambler holds its ground. The
/// closed-form bounds ride along for cross-checking.
pub fn estimate_dimension(
    spec: &SequenceSpec,
    alpha: &Prob,
    block_len_max: usize,
    s_grid: &[f64],
    checkpoints: &Checkpoints,
    slope_threshold: f64,
) -> Result<DimensionReport> {
    if s_grid.is_empty() {
        return Err(Error::InvalidParam("the s grid is empty".into()));
    }
    for pair in s_grid.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::InvalidParam(
                "the s grid must be strictly ascending".into(),
            ));
        }
    }
    for &s in s_grid {
        check_s(s)?;
    }
    if !(slope_threshold >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "slope threshold must be nonnegative, got {slope_threshold}"
        )));
    }
    let logs = symbol_logs(alpha)?;

    let profile = divergence_profile(spec, alpha, block_len_max, checkpoints, DEFAULT_TAIL_FRACTION)?;
    let mut report = dim_upper_bounds(&profile, alpha)?;
    report.s_grid = s_grid.to_vec();
    report.slope_threshold = slope_threshold;

    let total = spec.count_symbols()?;
    for block_len in 1..=block_len_max {
        let capacity = total / block_len as u64;
        if capacity == 0 {
            continue;
        }
        let (block_grid, _) = checkpoints.resolve(capacity);
        let Some(&fit_blocks) = block_grid.last() else {
            continue;
        };
        let steps: Vec<u64> = block_grid.iter().map(|&n| n * block_len as u64).collect();
        let g = empirical_exploit(spec, fit_blocks, block_len)?;
        let options = RunOptions {
            checkpoints: Some(Checkpoints::List(steps.clone())),
            skip_risk: true,
            gamma: None,
        };
        let trace = run(&g, alpha, spec, &options)?;
        let mut cumulative = Vec::with_capacity(trace.symbols.len() + 1);
        let mut acc = 0.0f64;
        cumulative.push(acc);
        for &a in &trace.symbols {
            acc += logs[a as usize];
            cumulative.push(acc);
        }
        for &s in s_grid {
            let sg = assemble(s, &steps, &cumulative, &trace, slope_threshold);
            let succeeded = sg.tail_slope >= -slope_threshold;
            report.evaluations.push(SGaleEvaluation {
                block_len,
                trace: sg,
                succeeded,
            });
        }
    }

    report.estimated_dim = s_grid
        .iter()
        .copied()
        .find(|&s| {
            report
                .evaluations
                .iter()
                .any(|e| e.trace.s == s && e.succeeded)
        });
    Ok(report)
}

pub const SGALE_CSV_HEADER: &str = "s,l,steps,log2_sgale,tail_slope,diverges";

/// One row per checkpoint of every evaluation, in the stored order.
pub fn write_sgale_csv(out: &mut dyn Write, evaluations: &[SGaleEvaluation]) -> Result<()> {
    writeln!(out, "{SGALE_CSV_HEADER}")?;
    for eval in evaluations {
        let t = &eval.trace;
        for (&step, &value) in t.steps.iter().zip(&t.values) {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t.s, eval.block_len, step, value, t.tail_slope, t.diverges
            )?;
        }
    }
    Ok(())
}
