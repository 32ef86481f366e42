//! Divergence traces, tail-window limit estimates, and the divergence
//! characterization of normality at finite scale.
//!
//! For a prefix of a sequence S and a target symbol measure α, the trace at
//! block length ℓ records D(π_n ‖ α^(ℓ)) at a grid of checkpoints, where
//! π_n is the empirical measure of the first n aligned ℓ-blocks. True
//! liminf/limsup values are not computable from a prefix, so limits are
//! estimated by the min/max over a tail window of checkpoints and every
//! consumer labels them estimates.
//!
//! A profile aggregates traces for ℓ = 1..ℓ_max into two rates in bits per
//! symbol: the lower estimate max_ℓ lower(ℓ)/ℓ and the upper estimate
//! max_ℓ upper(ℓ)/ℓ. Truncating the supremum at ℓ_max makes both reported
//! rates lower bounds on their untruncated counterparts.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::alphabet::Space;
use crate::empirical::BlockCounter;
use crate::error::{Error, Result};
use crate::measures::{log2_rational, rational_to_f64, ExtReal, Mode, Prob};
use crate::sequences::SequenceSpec;

/// Checkpoint schedule, resolved against the number of available blocks.
#[derive(Clone, Debug, PartialEq)]
pub enum Checkpoints {
    /// n_k = ceil(first * ratio^k), deduplicated, with a final checkpoint
    /// at the last full block.
    Geometric { first: u64, ratio: f64 },
    /// start, start+step, ..., with a final checkpoint at the last full
    /// block.
    Linear { start: u64, step: u64 },
    /// Exactly these block counts; entries beyond the data are dropped and
    /// the trace is flagged truncated.
    List(Vec<u64>),
}

impl Checkpoints {
    pub const DEFAULT_FIRST: u64 = 16;
    pub const DEFAULT_RATIO: f64 = 1.25;

    pub fn default_geometric() -> Self {
        Checkpoints::Geometric {
            first: Self::DEFAULT_FIRST,
            ratio: Self::DEFAULT_RATIO,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Checkpoints::Geometric { first, ratio } => {
                if *first == 0 {
                    return Err(Error::InvalidParam("first checkpoint must be >= 1".into()));
                }
                if !(*ratio > 1.0) || !ratio.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "geometric checkpoint ratio must be a finite value > 1, got {ratio}"
                    )));
                }
            }
            Checkpoints::Linear { start, step } => {
                if *start == 0 || *step == 0 {
                    return Err(Error::InvalidParam(
                        "linear checkpoints need start >= 1 and step >= 1".into(),
                    ));
                }
            }
            Checkpoints::List(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidParam("checkpoint list is empty".into()));
                }
                if list[0] == 0 || list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParam(
                        "checkpoint list must be strictly increasing and start at >= 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Concrete strictly increasing block counts, all <= capacity. Returns
    /// the schedule and whether requested points beyond capacity were
    /// dropped.
    pub(crate) fn resolve(&self, capacity: u64) -> (Vec<u64>, bool) {
        if capacity == 0 {
            let dropped = !matches!(self, Checkpoints::List(l) if l.is_empty());
            return (Vec::new(), dropped);
        }
        match self {
            Checkpoints::Geometric { first, ratio } => {
                let mut out = Vec::new();
                for k in 0u32.. {
                    let v = (*first as f64) * ratio.powi(k as i32);
                    if !(v < capacity as f64) {
                        break;
                    }
                    let n = v.ceil() as u64;
                    if n >= capacity {
                        break;
                    }
                    if out.last() != Some(&n) {
                        out.push(n);
                    }
                }
                out.push(capacity);
                (out, false)
            }
            Checkpoints::Linear { start, step } => {
                let mut out = Vec::new();
                let mut n = *start;
                while n < capacity {
                    out.push(n);
                    n = match n.checked_add(*step) {
                        Some(v) => v,
                        None => break,
                    };
                }
                out.push(capacity);
                (out, false)
            }
            Checkpoints::List(list) => {
                let kept: Vec<u64> = list.iter().copied().filter(|&n| n <= capacity).collect();
                let dropped = kept.len() < list.len();
                (kept, dropped)
            }
        }
    }
}

/// One evaluated checkpoint: block count, divergence in bits, and the L1
/// distance between the empirical measure and the target.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub blocks: u64,
    pub divergence: ExtReal,
    pub l1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceTrace {
    pub block_len: usize,
    pub rows: Vec<TraceRow>,
    /// Requested checkpoints fell beyond the end of the data.
    pub truncated: bool,
}

/// Tail-window estimates of the liminf and limsup of a trace, in bits per
/// block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitEstimate {
    pub lower: ExtReal,
    pub upper: ExtReal,
}

/// Min/max of the trace values over the final `tail_fraction` of
/// checkpoints. Infinite values win the max; the min ignores them unless
/// the whole window is infinite.
pub fn estimate_limits(trace: &DivergenceTrace, tail_fraction: f64) -> Result<LimitEstimate> {
    if trace.rows.is_empty() {
        return Err(Error::InvalidParam(
            "cannot estimate limits of an empty trace".into(),
        ));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "tail fraction must be in (0, 1], got {tail_fraction}"
        )));
    }
    let len = trace.rows.len();
    let window = ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len);
    let tail = &trace.rows[len - window..];
    let upper = tail
        .iter()
        .map(|r| r.divergence)
        .fold(ExtReal::ZERO, ExtReal::max);
    let lower = tail
        .iter()
        .map(|r| r.divergence)
        .filter(|v| !v.is_infinite())
        .fold(None, |acc: Option<ExtReal>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        })
        .unwrap_or(ExtReal::Infinite);
    Ok(LimitEstimate { lower, upper })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileEntry {
    pub trace: DivergenceTrace,
    /// Absent when the prefix was too short for even one block.
    pub limits: Option<LimitEstimate>,
}

/// Traces for ℓ = 1..=block_len_max, plus aggregate estimated divergence
/// rates in bits per symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceProfile {
    pub alpha: Prob,
    pub entries: Vec<ProfileEntry>,
    pub tail_fraction: f64,
    pub symbols_used: u64,
    /// Estimate of the lower divergence rate: max over ℓ of lower(ℓ)/ℓ.
    pub lower_rate: ExtReal,
    /// Estimate of the upper divergence rate: max over ℓ of upper(ℓ)/ℓ.
    pub upper_rate: ExtReal,
}

impl DivergenceProfile {
    pub fn block_len_max(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, block_len: usize) -> Option<&ProfileEntry> {
        self.entries.get(block_len.wrapping_sub(1))
    }
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const DEFAULT_BLOCK_LEN_MAX: usize = 8;

/// Target the empirical measure is compared against at each checkpoint.
pub(crate) enum Target<'a> {
    /// Product extension α^(ℓ), evaluated per outcome from the symbol
    /// measure without materializing the full table.
    Product(&'a Prob),
    /// A measure given directly on the block space.
    Measure(&'a Prob),
    /// Another empirical measure, given by its block counts.
    Counts(&'a [u64]),
}

impl Target<'_> {
    fn mode_is_float(&self) -> bool {
        matches!(self, Target::Product(p) | Target::Measure(p) if p.mode() == Mode::Float)
    }
}

/// Divergence and L1 distance of counts/n from the target, visiting only
/// outcomes with nonzero count. With q_total = 1 the identity
/// sum_omega |p - q| = sum_{p>0} (|p - q| - q) + 1 evaluates the L1
/// distance exactly without touching zero-count outcomes; the divergence
/// likewise only needs p > 0 terms. Term-for-term this matches
/// kl_divergence on the materialized measures, so both routes agree
/// bit-for-bit.
pub(crate) fn evaluate_row(
    space: &Space,
    counts: &[u64],
    blocks: u64,
    target: &Target,
) -> (ExtReal, f64) {
    debug_assert!(blocks > 0);
    if target.mode_is_float() {
        let n = blocks as f64;
        let mut div = 0.0f64;
        let mut l1 = 0.0f64;
        let mut infinite = false;
        for (idx, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p = c as f64 / n;
            let q = match target {
                Target::Product(alpha) => alpha.product_weight_f64(&space.word_digits(idx)),
                Target::Measure(pi) => pi.weight_f64(idx),
                Target::Counts(_) => unreachable!("empirical targets are exact"),
            };
            l1 += (p - q).abs() - q;
            if q == 0.0 {
                infinite = true;
            } else if !infinite {
                div += p * (p / q).log2();
            }
        }
        let div = if infinite {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(div.max(0.0))
        };
        return (div, l1 + 1.0);
    }

    let n = BigInt::from(blocks);
    let mut div = 0.0f64;
    let mut l1 = BigRational::zero();
    let mut infinite = false;
    for (idx, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let p = BigRational::new(BigInt::from(c), n.clone());
        let q = match target {
            Target::Product(alpha) => alpha
                .product_weight(&space.word_digits(idx))
                .expect("exact target"),
            Target::Measure(pi) => pi.rational(idx).expect("exact target").clone(),
            Target::Counts(other) => BigRational::new(BigInt::from(other[idx]), n.clone()),
        };
        l1 += (&p - &q).abs() - &q;
        if q.is_zero() {
            infinite = true;
        } else if !infinite {
            div += rational_to_f64(&p) * log2_rational(&(p / q));
        }
    }
    l1 += BigRational::one();
    let div = if infinite {
        ExtReal::Infinite
    } else {
        ExtReal::Finite(div.max(0.0))
    };
    (div, rational_to_f64(&l1))
}

/// A counter plus its checkpoint schedule, evaluated exactly at block
/// boundaries during the streaming pass.
struct TraceBuilder<'a> {
    counter: BlockCounter,
    schedule: Vec<u64>,
    next: usize,
    rows: Vec<TraceRow>,
    truncated: bool,
    target: Target<'a>,
}

impl TraceBuilder<'_> {
    fn feed(&mut self, chunk: &[u8]) -> Result<()> {
        let l = self.counter.block_len() as u64;
        let mut rest = chunk;
        while !rest.is_empty() {
            if self.next >= self.schedule.len() {
                self.counter.feed(rest)?;
                return Ok(());
            }
            let boundary = self.schedule[self.next] * l;
            let need = (boundary - self.counter.symbols_fed()) as usize;
            if rest.len() < need {
                self.counter.feed(rest)?;
                return Ok(());
            }
            let (now, later) = rest.split_at(need);
            self.counter.feed(now)?;
            self.evaluate();
            rest = later;
        }
        Ok(())
    }

    fn evaluate(&mut self) {
        let blocks = self.counter.blocks();
        debug_assert_eq!(blocks, self.schedule[self.next]);
        let (divergence, l1) = evaluate_row(
            self.counter.space(),
            self.counter.counts(),
            blocks,
            &self.target,
        );
        self.rows.push(TraceRow {
            blocks,
            divergence,
            l1,
        });
        self.next += 1;
    }

    fn finish(mut self) -> DivergenceTrace {
        self.truncated |= self.next < self.schedule.len();
        DivergenceTrace {
            block_len: self.counter.block_len(),
            rows: self.rows,
            truncated: self.truncated,
        }
    }
}

fn stream_traces(
    spec: &SequenceSpec,
    mut builders: Vec<TraceBuilder>,
) -> Result<(Vec<DivergenceTrace>, u64)> {
    let mut stream = spec.stream()?;
    let mut buf = [0u8; 8192];
    let mut total = 0u64;
    loop {
        let got = stream.read(&mut buf)?;
        if got == 0 {
            break;
        }
        total += got as u64;
        for b in builders.iter_mut() {
            b.feed(&buf[..got])?;
        }
    }
    Ok((builders.into_iter().map(TraceBuilder::finish).collect(), total))
}

fn check_alpha(spec: &SequenceSpec, alpha: &Prob) -> Result<()> {
    if alpha.space().alphabet() != &spec.alphabet || alpha.space().word_len() != 1 {
        return Err(Error::InvalidParam(
            "target must be a symbol measure on the sequence's alphabet".into(),
        ));
    }
    Ok(())
}

/// Divergence of the empirical block statistics of `spec` from α^(ℓ) at
/// each checkpoint, in one streaming pass.
pub fn divergence_trace(
    spec: &SequenceSpec,
    alpha: &Prob,
    block_len: usize,
    checkpoints: &Checkpoints,
) -> Result<DivergenceTrace> {
    check_alpha(spec, alpha)?;
    checkpoints.validate()?;
    let capacity = spec.count_symbols()? / block_len as u64;
    let (schedule, truncated) = checkpoints.resolve(capacity);
    let builder = TraceBuilder {
        counter: BlockCounter::new(spec.alphabet.clone(), block_len)?,
        schedule,
        next: 0,
        rows: Vec::new(),
        truncated,
        target: Target::Product(alpha),
    };
    let (mut traces, _) = stream_traces(spec, vec![builder])?;
    Ok(traces.pop().expect("one builder in, one trace out"))
}

/// Traces for every block length 1..=block_len_max plus the aggregate
/// lower/upper divergence rate estimates, all in one streaming pass.
pub fn divergence_profile(
    spec: &SequenceSpec,
    alpha: &Prob,
    block_len_max: usize,
    checkpoints: &Checkpoints,
    tail_fraction: f64,
) -> Result<DivergenceProfile> {
    check_alpha(spec, alpha)?;
    checkpoints.validate()?;
    if block_len_max == 0 {
        return Err(Error::InvalidParam("block_len_max must be >= 1".into()));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "tail fraction must be in (0, 1], got {tail_fraction}"
        )));
    }
    let total_symbols = spec.count_symbols()?;
    let mut builders = Vec::with_capacity(block_len_max);
    for l in 1..=block_len_max {
        let (schedule, truncated) = checkpoints.resolve(total_symbols / l as u64);
        builders.push(TraceBuilder {
            counter: BlockCounter::new(spec.alphabet.clone(), l)?,
            schedule,
            next: 0,
            rows: Vec::new(),
            truncated,
            target: Target::Product(alpha),
        });
    }
    let (traces, symbols_used) = stream_traces(spec, builders)?;

    let mut entries = Vec::with_capacity(traces.len());
    let mut lower_rate: Option<ExtReal> = None;
    let mut upper_rate: Option<ExtReal> = None;
    for trace in traces {
        let limits = if trace.rows.is_empty() {
            None
        } else {
            Some(estimate_limits(&trace, tail_fraction)?)
        };
        if let Some(lim) = &limits {
            let l = trace.block_len as f64;
            let lo = lim.lower.div_scalar(l);
            let hi = lim.upper.div_scalar(l);
            lower_rate = Some(lower_rate.map_or(lo, |a| a.max(lo)));
            upper_rate = Some(upper_rate.map_or(hi, |a| a.max(hi)));
        }
        entries.push(ProfileEntry { trace, limits });
    }
    let (lower_rate, upper_rate) = match (lower_rate, upper_rate) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            return Err(Error::InvalidParam(format!(
                "prefix of {symbols_used} symbols has no complete blocks at any requested checkpoint"
            )))
        }
    };
    Ok(DivergenceProfile {
        alpha: alpha.clone(),
        entries,
        tail_fraction,
        symbols_used,
        lower_rate,
        upper_rate,
    })
}

/// Divergence between the empirical block statistics of two sequences at
/// matching checkpoints. Support mismatches record +∞.
pub fn sequence_divergence(
    s: &SequenceSpec,
    t: &SequenceSpec,
    block_len: usize,
    checkpoints: &Checkpoints,
) -> Result<DivergenceTrace> {
    if s.alphabet != t.alphabet {
        return Err(Error::InvalidParam(format!(
            "sequences use different alphabets: \"{}\" vs \"{}\"",
            s.alphabet, t.alphabet
        )));
    }
    checkpoints.validate()?;
    let capacity = (s.count_symbols()?.min(t.count_symbols()?)) / block_len as u64;
    let (schedule, truncated) = checkpoints.resolve(capacity);

    let mut s_counter = BlockCounter::new(s.alphabet.clone(), block_len)?;
    let mut t_counter = BlockCounter::new(s.alphabet.clone(), block_len)?;
    let mut s_stream = s.stream()?;
    let mut t_stream = t.stream()?;
    let mut rows = Vec::with_capacity(schedule.len());
    let mut buf = [0u8; 8192];
    'outer: for &cp in &schedule {
        for (counter, stream) in [
            (&mut s_counter, &mut s_stream),
            (&mut t_counter, &mut t_stream),
        ] {
            let boundary = cp * block_len as u64;
            while counter.symbols_fed() < boundary {
                let want = ((boundary - counter.symbols_fed()) as usize).min(buf.len());
                let got = stream.read(&mut buf[..want])?;
                if got == 0 {
                    break 'outer;
                }
                counter.feed(&buf[..got])?;
            }
        }
        let (divergence, l1) = evaluate_row(
            s_counter.space(),
            s_counter.counts(),
            cp,
            &Target::Counts(t_counter.counts()),
        );
        rows.push(TraceRow {
            blocks: cp,
            divergence,
            l1,
        });
    }
    let truncated = truncated || rows.len() < schedule.len();
    Ok(DivergenceTrace {
        block_len,
        rows,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelVerdict {
    pub block_len: usize,
    /// Tail-window upper estimate in bits per block; absent when the
    /// prefix yielded no checkpoints at this level.
    pub upper_estimate: Option<ExtReal>,
    /// L1 distance to the target at the last checkpoint.
    pub last_l1: Option<f64>,
    pub pass: bool,
}

/// Per-level test "upper estimate <= epsilon" and its conjunction.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalityVerdict {
    pub epsilon: f64,
    pub levels: Vec<LevelVerdict>,
    pub overall: bool,
}

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Apply the threshold test to every level of a profile. A level with no
/// data only passes under a vacuous (infinite) threshold.
pub fn normality_check(profile: &DivergenceProfile, epsilon: f64) -> Result<NormalityVerdict> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let eps = ExtReal::from_f64(epsilon);
    let levels: Vec<LevelVerdict> = profile
        .entries
        .iter()
        .map(|e| {
            let upper = e.limits.as_ref().map(|l| l.upper);
            LevelVerdict {
                block_len: e.trace.block_len,
                upper_estimate: upper,
                last_l1: e.trace.rows.last().map(|r| r.l1),
                pass: upper.map_or(eps.is_infinite(), |u| u <= eps),
            }
        })
        .collect();
    let overall = levels.iter().all(|l| l.pass);
    Ok(NormalityVerdict {
        epsilon,
        levels,
        overall,
    })
}

fn write_rows(out: &mut dyn Write, trace: &DivergenceTrace) -> Result<()> {
    for row in &trace.rows {
        writeln!(
            out,
            "{},{},{},{}",
            trace.block_len, row.blocks, row.divergence, row.l1
        )?;
    }
    Ok(())
}

pub const TRACE_CSV_HEADER: &str = "l,n,divergence_bits,l1_distance";

/// CSV rows `l,n,divergence_bits,l1_distance`, one per checkpoint, with a
/// literal `inf` for infinite divergence.
pub fn write_trace_csv(out: &mut dyn Write, trace: &DivergenceTrace) -> Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    write_rows(out, trace)
}

/// CSV rows for every level of a profile, ordered by block length then
/// checkpoint.
pub fn write_profile_csv(out: &mut dyn Write, profile: &DivergenceProfile) -> Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for entry in &profile.entries {
        write_rows(out, &entry.trace)?;
    }
    Ok(())
}
