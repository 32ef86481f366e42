//! Finite-state gamblers: capital evolution against a payoff measure,
//! risk accounting, state-visit statistics, and structural analysis of the
//! transition graph.
//!
//! A gambler starts with capital 1 and, in state q, splits its capital
//! over the next symbol according to the betting row B(q). When symbol a
//! appears the capital is multiplied by B(q)(a)/α(a). Capital is tracked
//! in the log₂ domain so long runs cannot overflow; for short runs with an
//! exact payoff measure the exact rational capital is kept as well.
//!
//! The risk of state q is D(α ‖ B(q)), the divergence of the bet from not
//! betting; the total risk along a prefix is the sum of the risks of the
//! states the gambler bet from. The trace stores that series as the dot
//! product of visit counts with per-state risks, in state order, which
//! pins down the floating-point rounding so recomputation reproduces it
//! bit for bit.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::alphabet::{Alphabet, Space};
use crate::divergence::Checkpoints;
use crate::error::{Error, Result};
use crate::measures::{kl_divergence, log2_rational, rational_to_f64, ExtReal, Mode, Prob};
use crate::scc::Condensation;
use crate::sequences::SequenceSpec;

/// Steps up to which an exact-rational capital is carried alongside the
/// log-domain series.
pub const EXACT_CAPITAL_STEP_LIMIT: u64 = 10_000;

/// FNV-1a, enough to fingerprint a gambler or measure for provenance
/// checks between a trace and the inputs that produced it.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn payoff_digest(alpha: &Prob) -> u64 {
    fnv1a(format!("{}|{}", alpha.mode(), alpha.serialize()).as_bytes())
}

/// Deterministic finite-state gambler: a total transition function and one
/// exact betting measure per state.
#[derive(Clone, Debug, PartialEq)]
pub struct Fsg {
    alphabet: Alphabet,
    /// Row-major: δ(q, a) = transitions[q·k + a].
    transitions: Vec<u32>,
    bets: Vec<Prob>,
    start: u32,
}

impl Fsg {
    pub fn new(
        alphabet: Alphabet,
        transitions: Vec<u32>,
        bets: Vec<Prob>,
        start: u32,
    ) -> Result<Self> {
        let k = alphabet.size();
        let states = bets.len();
        if states == 0 {
            return Err(Error::InvalidParam("a gambler needs at least one state".into()));
        }
        if transitions.len() != states * k {
            return Err(Error::InvalidParam(format!(
                "expected {} transitions for {states} states over {k} symbols, got {}",
                states * k,
                transitions.len()
            )));
        }
        if let Some(&bad) = transitions.iter().find(|&&t| t as usize >= states) {
            return Err(Error::InvalidParam(format!(
                "transition target {bad} out of range for {states} states"
            )));
        }
        if start as usize >= states {
            return Err(Error::InvalidParam(format!(
                "start state {start} out of range for {states} states"
            )));
        }
        for (q, bet) in bets.iter().enumerate() {
            if bet.space().alphabet() != &alphabet || bet.space().word_len() != 1 {
                return Err(Error::InvalidParam(format!(
                    "betting row of state {q} is not a symbol measure on the gambler's alphabet"
                )));
            }
            if bet.mode() != Mode::Exact {
                return Err(Error::InvalidParam(format!(
                    "betting row of state {q} must have exact rational weights"
                )));
            }
        }
        Ok(Fsg {
            alphabet,
            transitions,
            bets,
            start,
        })
    }

    /// Bypasses betting-row validation. Exists so tests can build a
    /// deliberately broken gambler and watch the fairness check fail.
    #[doc(hidden)]
    pub fn new_unchecked(
        alphabet: Alphabet,
        transitions: Vec<u32>,
        bets: Vec<Prob>,
        start: u32,
    ) -> Self {
        Fsg {
            alphabet,
            transitions,
            bets,
            start,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.bets.len()
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    /// Same gambler started elsewhere.
    pub fn with_start(&self, start: u32) -> Result<Fsg> {
        if start as usize >= self.states() {
            return Err(Error::InvalidParam(format!(
                "start state {start} out of range for {} states",
                self.states()
            )));
        }
        let mut g = self.clone();
        g.start = start;
        Ok(g)
    }

    pub fn transition(&self, state: u32, symbol: u8) -> u32 {
        self.transitions[state as usize * self.alphabet.size() + symbol as usize]
    }

    pub fn bet(&self, state: u32) -> &Prob {
        &self.bets[state as usize]
    }

    /// State after reading a word from the start state.
    pub fn walk(&self, word: &[u8]) -> u32 {
        word.iter().fold(self.start, |q, &a| self.transition(q, a))
    }

    /// Parse the line-oriented text format. `origin` names the source in
    /// errors (a path or a pseudo-name like "<arg>").
    pub fn parse(text: &str, origin: &str) -> Result<Fsg> {
        let fail = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut alphabet: Option<Alphabet> = None;
        let mut states: Option<usize> = None;
        let mut start: Option<u32> = None;
        let mut trans: Vec<Option<u32>> = Vec::new();
        let mut bets: Vec<Option<BigRational>> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().expect("nonempty trimmed line");
            let rest: Vec<&str> = tokens.collect();
            match keyword {
                "alphabet" => {
                    if alphabet.is_some() {
                        return Err(fail(lineno, "duplicate alphabet line".into()));
                    }
                    if rest.len() != 1 {
                        return Err(fail(lineno, "expected: alphabet <symbols>".into()));
                    }
                    alphabet = Some(Alphabet::new(rest[0]).map_err(|e| fail(lineno, e.to_string()))?);
                }
                "states" => {
                    if states.is_some() {
                        return Err(fail(lineno, "duplicate states line".into()));
                    }
                    let n: usize = rest
                        .first()
                        .and_then(|t| t.parse().ok())
                        .filter(|&n| n > 0 && rest.len() == 1)
                        .ok_or_else(|| fail(lineno, "expected: states <positive count>".into()))?;
                    let k = alphabet
                        .as_ref()
                        .ok_or_else(|| fail(lineno, "states line must follow alphabet line".into()))?
                        .size();
                    states = Some(n);
                    trans = vec![None; n * k];
                    bets = vec![None; n * k];
                }
                "start" => {
                    if start.is_some() {
                        return Err(fail(lineno, "duplicate start line".into()));
                    }
                    let n = states
                        .ok_or_else(|| fail(lineno, "start line must follow states line".into()))?;
                    let s: u32 = rest
                        .first()
                        .and_then(|t| t.parse().ok())
                        .filter(|&s| (s as usize) < n && rest.len() == 1)
                        .ok_or_else(|| fail(lineno, format!("expected: start <index < {n}>")))?;
                    start = Some(s);
                }
                "trans" | "bet" => {
                    let n = states.ok_or_else(|| {
                        fail(lineno, format!("{keyword} line must follow states line"))
                    })?;
                    let k = alphabet.as_ref().expect("states implies alphabet").size();
                    if rest.len() != 3 {
                        return Err(fail(
                            lineno,
                            format!("expected: {keyword} <state> <symbol> <value>"),
                        ));
                    }
                    let q: usize = rest[0]
                        .parse()
                        .ok()
                        .filter(|&q| q < n)
                        .ok_or_else(|| fail(lineno, format!("state index out of range: {}", rest[0])))?;
                    let mut chars = rest[1].chars();
                    let (sym, extra) = (chars.next(), chars.next());
                    let a = match (sym, extra) {
                        (Some(c), None) => alphabet
                            .as_ref()
                            .expect("checked")
                            .index_of(c)
                            .ok_or_else(|| fail(lineno, format!("symbol '{c}' not in alphabet")))?,
                        _ => return Err(fail(lineno, format!("expected one symbol, got {}", rest[1]))),
                    };
                    let slot = q * k + a as usize;
                    if keyword == "trans" {
                        if trans[slot].is_some() {
                            return Err(fail(lineno, format!("duplicate trans for state {q} symbol {}", rest[1])));
                        }
                        let target: u32 = rest[2]
                            .parse()
                            .ok()
                            .filter(|&t| (t as usize) < n)
                            .ok_or_else(|| {
                                fail(lineno, format!("transition target out of range: {}", rest[2]))
                            })?;
                        trans[slot] = Some(target);
                    } else {
                        if bets[slot].is_some() {
                            return Err(fail(lineno, format!("duplicate bet for state {q} symbol {}", rest[1])));
                        }
                        let w = crate::measures::parse_rational(rest[2])
                            .map_err(|e| fail(lineno, e))?;
                        if w.is_negative() {
                            return Err(fail(lineno, format!("negative bet weight: {}", rest[2])));
                        }
                        bets[slot] = Some(w);
                    }
                }
                other => return Err(fail(lineno, format!("unknown keyword: {other}"))),
            }
        }

        let alphabet = alphabet
            .ok_or_else(|| fail(0, "missing alphabet line".into()))?;
        let n = states.ok_or_else(|| fail(0, "missing states line".into()))?;
        let start = start.ok_or_else(|| fail(0, "missing start line".into()))?;
        let k = alphabet.size();
        let mut transitions = Vec::with_capacity(n * k);
        let mut rows = Vec::with_capacity(n);
        for q in 0..n {
            for a in 0..k {
                transitions.push(trans[q * k + a].ok_or_else(|| {
                    fail(0, format!("missing trans line for state {q} symbol '{}'", alphabet.symbol(a as u8)))
                })?);
            }
            let mut weights = Vec::with_capacity(k);
            for a in 0..k {
                weights.push(bets[q * k + a].clone().ok_or_else(|| {
                    fail(0, format!("missing bet line for state {q} symbol '{}'", alphabet.symbol(a as u8)))
                })?);
            }
            let row = Prob::from_rationals(Space::symbols(alphabet.clone()), weights)
                .map_err(|e| fail(0, format!("betting row of state {q}: {e}")))?;
            rows.push(row);
        }
        Fsg::new(alphabet, transitions, rows, start)
    }

    /// Canonical text form; parsing it back yields an equal gambler and
    /// re-serializing yields identical bytes.
    pub fn serialize(&self) -> String {
        let k = self.alphabet.size();
        let mut out = String::new();
        out.push_str(&format!("alphabet {}\n", self.alphabet));
        out.push_str(&format!("states {}\n", self.states()));
        out.push_str(&format!("start {}\n", self.start));
        for q in 0..self.states() {
            for a in 0..k {
                out.push_str(&format!(
                    "trans {q} {} {}\n",
                    self.alphabet.symbol(a as u8),
                    self.transitions[q * k + a]
                ));
            }
        }
        for q in 0..self.states() {
            let row = &self.bets[q];
            for a in 0..k {
                let w = row.rational(a).expect("betting rows are exact");
                out.push_str(&format!(
                    "bet {q} {} {}\n",
                    self.alphabet.symbol(a as u8),
                    crate::measures::format_rational(w)
                ));
            }
        }
        out
    }

    /// Adjacency lists of the transition graph, successors deduplicated.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let k = self.alphabet.size();
        (0..self.states())
            .map(|q| {
                let mut succ: Vec<usize> = self.transitions[q * k..(q + 1) * k]
                    .iter()
                    .map(|&t| t as usize)
                    .collect();
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect()
    }
}

impl fmt::Display for Fsg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gambler over \"{}\" with {} states, start {}",
            self.alphabet,
            self.states(),
            self.start
        )
    }
}

/// Divergence of the bet at q from not betting: D(α ‖ B(q)). Zero exactly
/// when the state does not bet; +∞ when the bet abandons a symbol that α
/// can produce.
pub fn state_risk(g: &Fsg, state: u32, alpha: &Prob) -> Result<ExtReal> {
    let bet = g.bet(state);
    match alpha.mode() {
        Mode::Exact => kl_divergence(alpha, bet),
        Mode::Float => kl_divergence(alpha, &bet.to_float()),
    }
}

fn risk_vector(g: &Fsg, alpha: &Prob) -> Result<Vec<f64>> {
    (0..g.states() as u32)
        .map(|q| Ok(state_risk(g, q, alpha)?.as_f64()))
        .collect()
}

/// Σ_q counts(q)·risk(q) in state order, skipping unvisited states so an
/// infinite risk at an unvisited state cannot poison the sum with 0·∞.
fn risk_dot(counts: &[u64], risks: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (c, r) in counts.iter().zip(risks) {
        if *c > 0 {
            sum += *c as f64 * r;
        }
    }
    sum
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Steps at which dichotomy comparisons and invariant checks happen.
    /// None: the default geometric grid.
    pub checkpoints: Option<Checkpoints>,
    /// Skip the per-step risk series (saves |Q| work per step).
    pub skip_risk: bool,
    /// Comparison exponent recorded in the trace for dichotomy reports.
    /// None: 0.9.
    pub gamma: Option<f64>,
}

pub const DEFAULT_GAMMA: f64 = 0.9;

/// Everything observed while a gambler reads a prefix. Series are indexed
/// by step: entry 0 is the empty prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct CapitalTrace {
    pub alphabet: Alphabet,
    pub steps: u64,
    /// log₂ capital after each step; −∞ once bankrupt.
    pub log2_capital: Vec<f64>,
    /// Cumulative risk in bits after each step; absent when skipped.
    pub total_risk: Option<Vec<f64>>,
    /// State before each step; last entry is the final state.
    pub states: Vec<u32>,
    pub symbols: Vec<u8>,
    /// Times each state was bet from (final state not counted).
    pub visit_counts: Vec<u64>,
    /// Times symbol a was read from state q, row-major.
    pub edge_counts: Vec<u64>,
    pub bankrupt_at: Option<u64>,
    /// Step checkpoints used by dichotomy reports.
    pub checkpoints: Vec<u64>,
    /// Default comparison exponent for dichotomy reports.
    pub gamma: f64,
    /// Exact capital after the full run, when α is exact and the run is
    /// short enough.
    pub exact_capital: Option<BigRational>,
    /// Fingerprints of the gambler and payoff measure that produced the
    /// trace, for provenance checks.
    pub gambler_digest: u64,
    pub payoff_digest: u64,
}

impl CapitalTrace {
    pub fn final_log2_capital(&self) -> f64 {
        *self.log2_capital.last().expect("series never empty")
    }

    pub fn is_bankrupt(&self) -> bool {
        self.bankrupt_at.is_some()
    }
}

/// Run a gambler over a sequence. One pass; exact ratio logs are
/// precomputed per (state, symbol) so each step is O(1) plus the optional
/// O(|Q|) risk dot product.
pub fn run(g: &Fsg, alpha: &Prob, spec: &SequenceSpec, options: &RunOptions) -> Result<CapitalTrace> {
    if alpha.space().alphabet() != &spec.alphabet || alpha.space().word_len() != 1 {
        return Err(Error::InvalidParam(
            "payoff measure must be a symbol measure on the sequence's alphabet".into(),
        ));
    }
    if g.alphabet() != &spec.alphabet {
        return Err(Error::InvalidParam(format!(
            "gambler alphabet \"{}\" does not match sequence alphabet \"{}\"",
            g.alphabet(),
            spec.alphabet
        )));
    }
    let gamma = options.gamma.unwrap_or(DEFAULT_GAMMA);
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParam(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let k = g.alphabet().size();
    let states = g.states();

    // log₂(B(q)(a)/α(a)) per edge; −∞ encodes a zero bet, NaN a zero α
    // weight (turned into an error only if that symbol is observed).
    let mut edge_log: Vec<f64> = Vec::with_capacity(states * k);
    let mut edge_ratio: Vec<Option<BigRational>> = Vec::with_capacity(states * k);
    let exact_alpha = alpha.mode() == Mode::Exact;
    for q in 0..states {
        let bet = g.bet(q as u32);
        for a in 0..k {
            if alpha.is_zero_at(a) {
                edge_log.push(f64::NAN);
                edge_ratio.push(None);
                continue;
            }
            if bet.is_zero_at(a) {
                edge_log.push(f64::NEG_INFINITY);
                edge_ratio.push(Some(BigRational::zero()));
                continue;
            }
            if exact_alpha {
                let ratio = bet.rational(a).expect("bets are exact")
                    / alpha.rational(a).expect("exact mode");
                edge_log.push(log2_rational(&ratio));
                edge_ratio.push(Some(ratio));
            } else {
                edge_log.push((bet.weight_f64(a) / alpha.weight_f64(a)).log2());
                edge_ratio.push(None);
            }
        }
    }

    let risks = if options.skip_risk {
        None
    } else {
        Some(risk_vector(g, alpha)?)
    };

    let total_steps = spec.count_symbols()?;
    let (checkpoints, _) = options
        .checkpoints
        .clone()
        .unwrap_or_else(Checkpoints::default_geometric)
        .resolve(total_steps);

    // Absorption invariant: once in a bottom component, never leave it.
    let condensation = Condensation::new(&g.adjacency());
    let bottoms: BTreeSet<usize> = condensation.bottom_components().into_iter().collect();

    let cap = usize::try_from(total_steps).map_err(|_| {
        Error::InvalidParam(format!("run of {total_steps} steps does not fit in memory"))
    })?;
    let mut log2_capital = Vec::with_capacity(cap + 1);
    log2_capital.push(0.0);
    let mut total_risk = risks.as_ref().map(|_| {
        let mut v = Vec::with_capacity(cap + 1);
        v.push(0.0);
        v
    });
    let mut state_seq = Vec::with_capacity(cap + 1);
    state_seq.push(g.start());
    let mut symbols = Vec::with_capacity(cap);
    let mut visit_counts = vec![0u64; states];
    let mut edge_counts = vec![0u64; states * k];
    let mut bankrupt_at = None;
    let mut exact_capital = if exact_alpha {
        Some(BigRational::one())
    } else {
        None
    };
    let mut entered_bottom: Option<usize> = None;

    let mut stream = spec.stream()?;
    let mut buf = [0u8; 8192];
    let mut step = 0u64;
    let mut log_cap = 0.0f64;
    let mut state = g.start();
    loop {
        let got = stream.read(&mut buf)?;
        if got == 0 {
            break;
        }
        for &a in &buf[..got] {
            step += 1;
            let slot = state as usize * k + a as usize;
            if alpha.is_zero_at(a as usize) {
                return Err(Error::PayoffUndefined {
                    symbol: g.alphabet().symbol(a),
                    step,
                });
            }
            visit_counts[state as usize] += 1;
            edge_counts[slot] += 1;
            let lr = edge_log[slot];
            if lr == f64::NEG_INFINITY && bankrupt_at.is_none() {
                bankrupt_at = Some(step);
            }
            log_cap += lr;
            log2_capital.push(log_cap);
            if let Some(series) = total_risk.as_mut() {
                series.push(risk_dot(&visit_counts, risks.as_ref().expect("risk tracked")));
            }
            if exact_capital.is_some() {
                if step > EXACT_CAPITAL_STEP_LIMIT {
                    exact_capital = None;
                } else if let Some(capital) = exact_capital.as_mut() {
                    *capital *= edge_ratio[slot].as_ref().expect("exact edge");
                }
            }
            state = g.transition(state, a);
            state_seq.push(state);
            symbols.push(a);

            let comp = condensation.comp_of[state as usize];
            match entered_bottom {
                None if bottoms.contains(&comp) => entered_bottom = Some(comp),
                Some(home) => debug_assert_eq!(
                    comp, home,
                    "left bottom component {home} for {comp} at step {step}"
                ),
                None => {}
            }
        }
    }
    debug_assert_eq!(visit_counts.iter().sum::<u64>(), step);

    Ok(CapitalTrace {
        alphabet: g.alphabet().clone(),
        steps: step,
        log2_capital,
        total_risk,
        states: state_seq,
        symbols,
        visit_counts,
        edge_counts,
        bankrupt_at,
        checkpoints,
        gamma,
        exact_capital,
        gambler_digest: fnv1a(g.serialize().as_bytes()),
        payoff_digest: payoff_digest(alpha),
    })
}

/// The trace must have been recorded with exactly this gambler; catches
/// trace/gambler mix-ups before statistics are recomputed.
pub(crate) fn check_provenance(trace: &CapitalTrace, g: &Fsg) -> Result<()> {
    if trace.gambler_digest == fnv1a(g.serialize().as_bytes()) {
        Ok(())
    } else {
        Err(Error::InvalidParam(
            "trace was not produced by this gambler".into(),
        ))
    }
}

pub(crate) fn check_payoff_provenance(trace: &CapitalTrace, alpha: &Prob) -> Result<()> {
    if trace.payoff_digest == payoff_digest(alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParam(
            "trace was not produced with this payoff measure".into(),
        ))
    }
}

/// Recompute the cumulative risk series from the trace's state sequence.
/// Performs the same dot product in the same order as the recording run,
/// so the result equals the stored series bit for bit.
pub fn total_risk(trace: &CapitalTrace, g: &Fsg, alpha: &Prob) -> Result<Vec<f64>> {
    check_provenance(trace, g)?;
    check_payoff_provenance(trace, alpha)?;
    let risks = risk_vector(g, alpha)?;
    let mut counts = vec![0u64; g.states()];
    let mut series = Vec::with_capacity(trace.states.len());
    series.push(0.0);
    for (i, _) in trace.symbols.iter().enumerate() {
        counts[trace.states[i] as usize] += 1;
        series.push(risk_dot(&counts, &risks));
    }
    Ok(series)
}

/// Exact martingale identity at one prefix: Σ_a α(a)·d(wa) = d(w), with
/// both sides as exact rationals.
pub fn fairness_check(g: &Fsg, alpha: &Prob, word: &[u8]) -> Result<bool> {
    if alpha.mode() != Mode::Exact {
        return Err(Error::ModeMismatch);
    }
    if alpha.space().alphabet() != g.alphabet() || alpha.space().word_len() != 1 {
        return Err(Error::InvalidParam(
            "payoff measure must be a symbol measure on the gambler's alphabet".into(),
        ));
    }
    if !alpha.is_strictly_positive() {
        return Err(Error::InvalidParam(
            "fairness needs a strictly positive payoff measure".into(),
        ));
    }
    let k = g.alphabet().size();
    let mut capital = BigRational::one();
    let mut state = g.start();
    for &a in word {
        let ratio = g.bet(state).rational(a as usize).expect("bets are exact")
            / alpha.rational(a as usize).expect("exact mode");
        capital *= ratio;
        state = g.transition(state, a);
    }
    // Σ_a α(a) · d(w)·B(q)(a)/α(a) telescopes to d(w)·Σ_a B(q)(a); the
    // identity is exactly the row's stochasticity.
    let mut expectation = BigRational::zero();
    for a in 0..k {
        let d_wa = &capital * g.bet(state).rational(a).expect("bets are exact")
            / alpha.rational(a).expect("exact mode");
        expectation += alpha.rational(a).expect("exact mode") * d_wa;
    }
    Ok(expectation == capital)
}

/// |final log₂ capital − Σ_{q,a} edge_counts(q,a)·log₂(B(q)(a)/α(a))|.
/// Exactly 0 when the exact capital is available; otherwise a float
/// residual bounded by accumulation error.
pub fn log_capital_decomposition(trace: &CapitalTrace, g: &Fsg, alpha: &Prob) -> Result<f64> {
    check_provenance(trace, g)?;
    check_payoff_provenance(trace, alpha)?;
    if trace.is_bankrupt() {
        return Err(Error::InvalidParam(
            "bankrupt trace: the decomposition has infinite terms".into(),
        ));
    }
    let k = g.alphabet().size();
    if let (Some(exact), Mode::Exact) = (&trace.exact_capital, alpha.mode()) {
        // Π (B(q)(a)/α(a))^count as an exact rational, compared to the
        // stepwise exact capital.
        let mut product = BigRational::one();
        for q in 0..g.states() {
            for a in 0..k {
                let count = trace.edge_counts[q * k + a];
                if count == 0 {
                    continue;
                }
                let ratio = g.bet(q as u32).rational(a).expect("bets are exact")
                    / alpha.rational(a).expect("exact mode");
                product *= pow_rational(&ratio, count);
            }
        }
        return Ok(if product == *exact { 0.0 } else {
            (rational_to_f64(exact) - rational_to_f64(&product)).abs()
        });
    }

    let mut decomposed = 0.0f64;
    for q in 0..g.states() {
        let bet = g.bet(q as u32);
        for a in 0..k {
            let count = trace.edge_counts[q * k + a];
            if count == 0 {
                continue;
            }
            let log_ratio = match alpha.mode() {
                Mode::Exact => {
                    let ratio = bet.rational(a).expect("bets are exact")
                        / alpha.rational(a).expect("exact mode");
                    log2_rational(&ratio)
                }
                Mode::Float => (bet.weight_f64(a) / alpha.weight_f64(a)).log2(),
            };
            decomposed += count as f64 * log_ratio;
        }
    }
    Ok((trace.final_log2_capital() - decomposed).abs())
}

pub(crate) fn pow_rational(r: &BigRational, mut e: u64) -> BigRational {
    let mut base = r.clone();
    let mut acc = BigRational::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Bottom strongly connected components of the transition graph, and
/// which of them each state can reach.
#[derive(Clone, Debug, PartialEq)]
pub struct BottomSccReport {
    /// Each bottom component as a sorted state list; components ordered by
    /// smallest state.
    pub bottoms: Vec<Vec<u32>>,
    /// Per state: indices into `bottoms` of the components it can reach.
    pub reachable: Vec<Vec<usize>>,
}

pub fn bottom_sccs(g: &Fsg) -> BottomSccReport {
    let condensation = Condensation::new(&g.adjacency());
    let bottom_comps = condensation.bottom_components();
    let bottoms: Vec<Vec<u32>> = bottom_comps
        .iter()
        .map(|&c| condensation.components[c].iter().map(|&v| v as u32).collect())
        .collect();
    let comp_reach = condensation.reachable_bottoms();
    let reachable = (0..g.states())
        .map(|q| {
            comp_reach[condensation.comp_of[q]]
                .iter()
                .map(|&c| bottom_comps.iter().position(|&b| b == c).expect("bottom set"))
                .collect()
        })
        .collect();
    BottomSccReport { bottoms, reachable }
}

/// Observed conditional next-symbol frequencies for one state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateFrequencies {
    pub state: u32,
    pub visits: u64,
    pub frequencies: Vec<f64>,
    /// L1 distance between the frequency vector and α.
    pub l1: f64,
}

/// Per-state conditional frequency table over visited states only.
pub fn agafonov_stats(trace: &CapitalTrace, g: &Fsg, alpha: &Prob) -> Result<Vec<StateFrequencies>> {
    check_provenance(trace, g)?;
    let k = g.alphabet().size();
    let mut rows = Vec::new();
    for q in 0..g.states() {
        let visits = trace.visit_counts[q];
        if visits == 0 {
            continue;
        }
        let frequencies: Vec<f64> = (0..k)
            .map(|a| trace.edge_counts[q * k + a] as f64 / visits as f64)
            .collect();
        let l1 = frequencies
            .iter()
            .enumerate()
            .map(|(a, f)| (f - alpha.weight_f64(a)).abs())
            .sum();
        rows.push(StateFrequencies {
            state: q as u32,
            visits,
            frequencies,
            l1,
        });
    }
    Ok(rows)
}

/// One dichotomy comparison at a checkpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DichotomyRow {
    pub step: u64,
    pub log2_capital: f64,
    pub risk_bits: f64,
    /// log₂ d(w) < −γ·Risk(w)?
    pub pass: bool,
    /// Risk is exactly 0, so the comparison degenerates to 0 < 0.
    pub boundary: bool,
    /// log₂ d(w) / Risk(w); absent at boundary rows.
    pub ratio: Option<f64>,
}

/// Checkpointed comparison of capital against the vanishing rate the
/// total risk prescribes.
#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyReport {
    pub gamma: f64,
    pub rows: Vec<DichotomyRow>,
    pub last_violation: Option<u64>,
    pub final_ratio: Option<f64>,
}

pub fn dichotomy_check_part2(trace: &CapitalTrace, gamma: f64) -> Result<DichotomyReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParam(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let risk = trace.total_risk.as_ref().ok_or_else(|| {
        Error::InvalidParam("trace was recorded without risk tracking".into())
    })?;
    let mut rows = Vec::with_capacity(trace.checkpoints.len());
    let mut last_violation = None;
    for &step in &trace.checkpoints {
        let idx = step as usize;
        let log2_capital = trace.log2_capital[idx];
        let risk_bits = risk[idx];
        let boundary = risk_bits == 0.0;
        let pass = log2_capital < -gamma * risk_bits;
        if !pass {
            last_violation = Some(step);
        }
        rows.push(DichotomyRow {
            step,
            log2_capital,
            risk_bits,
            pass,
            boundary,
            ratio: (!boundary).then(|| log2_capital / risk_bits),
        });
    }
    let final_ratio = rows.last().and_then(|r| r.ratio);
    Ok(DichotomyReport {
        gamma,
        rows,
        last_violation,
        final_ratio,
    })
}

pub const TRACE_CSV_HEADER: &str = "step,state,symbol,log2_capital,total_risk_bits";

/// CSV rows `step,state,symbol,log2_capital,total_risk_bits`: the state
/// the bet was made from, the symbol read, and both series after the
/// step. Requires a risk-tracked trace.
pub fn write_capital_csv(out: &mut dyn Write, trace: &CapitalTrace) -> Result<()> {
    let risk = trace.total_risk.as_ref().ok_or_else(|| {
        Error::InvalidParam("trace was recorded without risk tracking".into())
    })?;
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for i in 0..trace.symbols.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            i + 1,
            trace.states[i],
            trace.alphabet.symbol(trace.symbols[i]),
            trace.log2_capital[i + 1],
            risk[i + 1],
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::SequenceKind;

    fn binary() -> Alphabet {
        Alphabet::new("01").unwrap()
    }

    fn uniform() -> Prob {
        Prob::uniform(Space::symbols(binary()))
    }

    fn row(text: &str) -> Prob {
        Prob::parse(Space::symbols(binary()), text).unwrap()
    }

    fn single_state(bets: &str) -> Fsg {
        Fsg::new(binary(), vec![0, 0], vec![row(bets)], 0).unwrap()
    }

    fn alternating_spec(len: u64) -> SequenceSpec {
        SequenceSpec::new(binary(), SequenceKind::Periodic(vec![0, 1]), Some(len)).unwrap()
    }

    fn default_run(g: &Fsg, alpha: &Prob, spec: &SequenceSpec) -> CapitalTrace {
        run(g, alpha, spec, &RunOptions::default()).unwrap()
    }

    #[test]
    fn never_betting_gambler_keeps_capital_and_takes_no_risk() {
        let g = single_state("1/2,1/2");
        let trace = default_run(&g, &uniform(), &alternating_spec(100));
        assert!(trace.log2_capital.iter().all(|&v| v == 0.0));
        assert!(trace.total_risk.unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(trace.exact_capital, Some(BigRational::one()));
        assert_eq!(trace.bankrupt_at, None);
    }

    #[test]
    fn all_in_on_zeros_doubles_every_step() {
        let g = single_state("1,0");
        let zeros = SequenceSpec::new(binary(), SequenceKind::Periodic(vec![0]), Some(50)).unwrap();
        let trace = default_run(&g, &uniform(), &zeros);
        for (t, &v) in trace.log2_capital.iter().enumerate() {
            assert_eq!(v, t as f64);
        }
        assert_eq!(
            trace.exact_capital,
            Some(BigRational::from_integer(BigInt::from(1u128 << 50)))
        );
        // The abandoned symbol makes the state's risk infinite.
        assert_eq!(state_risk(&g, 0, &uniform()).unwrap(), ExtReal::Infinite);
        assert_eq!(trace.total_risk.unwrap()[1], f64::INFINITY);
    }

    #[test]
    fn bankruptcy_is_sticky_and_recorded() {
        let g = single_state("1,0");
        let trace = default_run(&g, &uniform(), &alternating_spec(10));
        // Doubles on the 0, dies on the 1.
        assert_eq!(trace.log2_capital[1], 1.0);
        assert_eq!(trace.bankrupt_at, Some(2));
        assert!(trace.log2_capital[2..].iter().all(|&v| v == f64::NEG_INFINITY));
        assert_eq!(trace.exact_capital, Some(BigRational::zero()));
        // Counting continues after bankruptcy.
        assert_eq!(trace.visit_counts, vec![10]);
    }

    #[test]
    fn zero_payoff_weight_on_observed_symbol_is_refused() {
        let g = single_state("1/2,1/2");
        let alpha = row("1,0");
        let err = run(&g, &alpha, &alternating_spec(10), &RunOptions::default()).unwrap_err();
        match err {
            Error::PayoffUndefined { symbol, step } => {
                assert_eq!(symbol, '1');
                assert_eq!(step, 2);
            }
            other => panic!("expected payoff error, got {other:?}"),
        }
    }

    #[test]
    fn state_risk_known_values() {
        assert_eq!(state_risk(&single_state("1/2,1/2"), 0, &uniform()).unwrap(), ExtReal::ZERO);
        let skewed = state_risk(&single_state("1/4,3/4"), 0, &uniform()).unwrap();
        let expected = 1.0 - 0.5 * 3f64.log2();
        assert!((skewed.as_f64() - expected).abs() < 1e-12);
    }

    #[test]
    fn two_state_alternating_risk_matches_visit_count_form() {
        // State 0 bets (1/4, 3/4), state 1 bets (1/3, 2/3); both switch
        // state every step.
        let g = Fsg::new(
            binary(),
            vec![1, 1, 0, 0],
            vec![row("1/4,3/4"), row("1/3,2/3")],
            0,
        )
        .unwrap();
        let alpha = uniform();
        let trace = default_run(&g, &alpha, &alternating_spec(101));
        let r0 = state_risk(&g, 0, &alpha).unwrap().as_f64();
        let r1 = state_risk(&g, 1, &alpha).unwrap().as_f64();
        let series = trace.total_risk.as_ref().unwrap();
        for t in 0..=101u64 {
            let expected = ((t + 1) / 2) as f64 * r0 + (t / 2) as f64 * r1;
            assert_eq!(series[t as usize], expected, "step {t}");
        }
    }

    #[test]
    fn recomputed_risk_series_is_bit_identical() {
        let g = Fsg::new(
            binary(),
            vec![1, 0, 0, 1],
            vec![row("1/4,3/4"), row("2/5,3/5")],
            0,
        )
        .unwrap();
        let spec = SequenceSpec::new(binary(), SequenceKind::Champernowne, Some(400)).unwrap();
        let trace = default_run(&g, &uniform(), &spec);
        let recomputed = total_risk(&trace, &g, &uniform()).unwrap();
        assert_eq!(trace.total_risk.as_ref().unwrap(), &recomputed);
    }

    #[test]
    fn provenance_mismatch_is_detected() {
        let g = single_state("1/4,3/4");
        let other = single_state("1/3,2/3");
        let trace = default_run(&g, &uniform(), &alternating_spec(20));
        assert!(total_risk(&trace, &other, &uniform()).is_err());
    }

    #[test]
    fn count_conservation_holds() {
        let g = Fsg::new(
            binary(),
            vec![1, 0, 1, 0],
            vec![row("1/2,1/2"), row("1/4,3/4")],
            0,
        )
        .unwrap();
        let spec = SequenceSpec::new(binary(), SequenceKind::Champernowne, Some(333)).unwrap();
        let trace = default_run(&g, &uniform(), &spec);
        assert_eq!(trace.visit_counts.iter().sum::<u64>(), trace.steps);
        let k = 2;
        for q in 0..2 {
            let row_sum: u64 = trace.edge_counts[q * k..(q + 1) * k].iter().sum();
            assert_eq!(row_sum, trace.visit_counts[q]);
        }
    }

    #[test]
    fn fairness_holds_for_valid_gamblers_and_fails_for_broken_rows() {
        let g = Fsg::new(
            binary(),
            vec![1, 1, 0, 0],
            vec![row("1/4,3/4"), row("5/6,1/6")],
            0,
        )
        .unwrap();
        let alpha = row("1/3,2/3");
        for word in [&[][..], &[0][..], &[0, 1, 1][..], &[1, 0, 1, 0, 1][..]] {
            assert!(fairness_check(&g, &alpha, word).unwrap());
        }

        // Negative control: a row summing to 5/6 slips past validation
        // only through the unchecked constructors, and the martingale
        // identity catches it.
        let bad_row = Prob::from_rationals_unchecked(
            Space::symbols(binary()),
            vec![
                BigRational::new(BigInt::from(1), BigInt::from(2)),
                BigRational::new(BigInt::from(1), BigInt::from(3)),
            ],
        );
        let broken = Fsg::new_unchecked(binary(), vec![0, 0], vec![bad_row], 0);
        assert!(!fairness_check(&broken, &alpha, &[0, 1]).unwrap());
    }

    #[test]
    fn decomposition_residual_zero_in_exact_mode() {
        let g = Fsg::new(
            binary(),
            vec![1, 0, 0, 1],
            vec![row("1/4,3/4"), row("2/3,1/3")],
            0,
        )
        .unwrap();
        let spec = SequenceSpec::new(binary(), SequenceKind::Champernowne, Some(500)).unwrap();
        let trace = default_run(&g, &uniform(), &spec);
        assert!(trace.exact_capital.is_some());
        assert_eq!(log_capital_decomposition(&trace, &g, &uniform()).unwrap(), 0.0);
    }

    #[test]
    fn decomposition_residual_small_in_float_mode() {
        let g = Fsg::new(
            binary(),
            vec![1, 0, 0, 1],
            vec![row("1/4,3/4"), row("2/3,1/3")],
            0,
        )
        .unwrap();
        let alpha = Prob::from_floats(Space::symbols(binary()), vec![0.5, 0.5]).unwrap();
        let spec = SequenceSpec::new(
            binary(),
            SequenceKind::Iid {
                alpha: uniform(),
                seed: 5,
            },
            Some(100_000),
        )
        .unwrap();
        let trace = default_run(&g, &alpha, &spec);
        assert!(trace.exact_capital.is_none(), "float mode has no exact capital");
        let residual = log_capital_decomposition(&trace, &g, &alpha).unwrap();
        assert!(residual <= 1e-4, "residual {residual}");
    }

    #[test]
    fn decomposition_refuses_bankrupt_traces() {
        let g = single_state("1,0");
        let trace = default_run(&g, &uniform(), &alternating_spec(10));
        assert!(log_capital_decomposition(&trace, &g, &uniform()).is_err());
    }

    #[test]
    fn bottom_scc_shapes() {
        let single = single_state("1/2,1/2");
        let report = bottom_sccs(&single);
        assert_eq!(report.bottoms, vec![vec![0]]);
        assert_eq!(report.reachable, vec![vec![0]]);

        // State 0 always leaves for state 1, which loops forever.
        let transient = Fsg::new(
            binary(),
            vec![1, 1, 1, 1],
            vec![row("1/2,1/2"), row("1/2,1/2")],
            0,
        )
        .unwrap();
        let report = bottom_sccs(&transient);
        assert_eq!(report.bottoms, vec![vec![1]]);
        assert_eq!(report.reachable[0], vec![0]);

        // 0 forks to absorbing states 1 and 2.
        let fork = Fsg::new(
            binary(),
            vec![1, 2, 1, 1, 2, 2],
            vec![row("1/2,1/2"), row("1/2,1/2"), row("1/2,1/2")],
            0,
        )
        .unwrap();
        let report = bottom_sccs(&fork);
        assert_eq!(report.bottoms, vec![vec![1], vec![2]]);
        assert_eq!(report.reachable[0], vec![0, 1]);
        assert_eq!(report.reachable[1], vec![0]);
    }

    #[test]
    fn conditional_frequencies_on_alternating_input() {
        let g = single_state("1/2,1/2");
        let trace = default_run(&g, &uniform(), &alternating_spec(100));
        let stats = agafonov_stats(&trace, &g, &uniform()).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].frequencies, vec![0.5, 0.5]);
        assert_eq!(stats[0].l1, 0.0);
        assert_eq!(stats[0].visits, 100);
    }

    #[test]
    fn unvisited_states_are_excluded_from_frequency_table() {
        // State 1 is unreachable from the start.
        let g = Fsg::new(
            binary(),
            vec![0, 0, 1, 1],
            vec![row("1/2,1/2"), row("1/4,3/4")],
            0,
        )
        .unwrap();
        let trace = default_run(&g, &uniform(), &alternating_spec(40));
        let stats = agafonov_stats(&trace, &g, &uniform()).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].state, 0);
    }

    #[test]
    fn dichotomy_boundary_on_never_betting_gambler() {
        let g = single_state("1/2,1/2");
        let trace = default_run(&g, &uniform(), &alternating_spec(64));
        let report = dichotomy_check_part2(&trace, 0.9).unwrap();
        assert!(!report.rows.is_empty());
        for row in &report.rows {
            assert!(row.boundary);
            assert!(!row.pass, "0 < 0 is false");
            assert_eq!(row.ratio, None);
        }
        assert_eq!(report.final_ratio, None);
        assert_eq!(report.last_violation, Some(64));
    }

    #[test]
    fn dichotomy_ratio_approaches_minus_one_on_iid_input() {
        let g = single_state("1/4,3/4");
        let spec = SequenceSpec::new(
            binary(),
            SequenceKind::Iid {
                alpha: uniform(),
                seed: 17,
            },
            Some(20_000),
        )
        .unwrap();
        let trace = default_run(&g, &uniform(), &spec);
        let report = dichotomy_check_part2(&trace, 0.9).unwrap();
        let final_ratio = report.final_ratio.unwrap();
        assert!(
            (final_ratio + 1.0).abs() < 0.25,
            "final ratio {final_ratio}"
        );
        let tail = &report.rows[report.rows.len() / 2..];
        assert!(tail.iter().all(|r| r.pass), "tail rows: {tail:?}");
    }

    #[test]
    fn text_format_round_trips_bit_exactly() {
        let g = Fsg::new(
            binary(),
            vec![1, 0, 0, 1],
            vec![row("1/4,3/4"), row("1,0")],
            1,
        )
        .unwrap();
        let text = g.serialize();
        let parsed = Fsg::parse(&text, "<test>").unwrap();
        assert_eq!(parsed, g);
        assert_eq!(parsed.serialize(), text);
    }

    #[test]
    fn parser_reports_line_numbers_and_rejects_bad_input() {
        let missing_bet = "alphabet 01\nstates 1\nstart 0\ntrans 0 0 0\ntrans 0 1 0\nbet 0 0 1/2\n";
        match Fsg::parse(missing_bet, "<t>").unwrap_err() {
            Error::Parse { message, .. } => assert!(message.contains("missing bet"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }

        let bad_sum = "alphabet 01\nstates 1\nstart 0\ntrans 0 0 0\ntrans 0 1 0\nbet 0 0 1/2\nbet 0 1 1/3\n";
        assert!(Fsg::parse(bad_sum, "<t>").is_err());

        let dup = "alphabet 01\nstates 1\nstart 0\ntrans 0 0 0\ntrans 0 0 0\ntrans 0 1 0\nbet 0 0 1/2\nbet 0 1 1/2\n";
        match Fsg::parse(dup, "<t>").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }

        let comments = "# header\nalphabet 01\n\nstates 1\nstart 0\n# body\ntrans 0 0 0\ntrans 0 1 0\nbet 0 0 1/2\nbet 0 1 1/2\n";
        assert!(Fsg::parse(comments, "<t>").is_ok());
    }

    #[test]
    fn capital_csv_shape() {
        let g = single_state("1/4,3/4");
        let trace = default_run(&g, &uniform(), &alternating_spec(2));
        let mut out = Vec::new();
        write_capital_csv(&mut out, &trace).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,state,symbol,log2_capital,total_risk_bits");
        assert!(lines[1].starts_with("1,0,0,-1,"), "line: {}", lines[1]);
        assert_eq!(lines.len(), 3);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_fsg(max_states: usize) -> impl Strategy<Value = Fsg> {
            (1..=max_states).prop_flat_map(|n| {
                let transitions = proptest::collection::vec(0..n as u32, n * 2);
                let weights = proptest::collection::vec((1u64..50, 1u64..50), n);
                let start = 0..n as u32;
                (transitions, weights, start).prop_map(move |(t, w, s)| {
                    let rows = w
                        .into_iter()
                        .map(|(x, y)| {
                            let total = BigInt::from(x + y);
                            Prob::from_rationals(
                                Space::symbols(Alphabet::new("01").unwrap()),
                                vec![
                                    BigRational::new(BigInt::from(x), total.clone()),
                                    BigRational::new(BigInt::from(y), total),
                                ],
                            )
                            .unwrap()
                        })
                        .collect();
                    Fsg::new(Alphabet::new("01").unwrap(), t, rows, s).unwrap()
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn fairness_is_exact_for_random_gamblers(
                g in arb_fsg(5),
                word in proptest::collection::vec(0u8..2, 0..100),
                num in 1u64..20,
            ) {
                let den = num + 7;
                let alpha = Prob::from_rationals(
                    Space::symbols(Alphabet::new("01").unwrap()),
                    vec![
                        BigRational::new(BigInt::from(num), BigInt::from(den)),
                        BigRational::new(BigInt::from(den - num), BigInt::from(den)),
                    ],
                ).unwrap();
                prop_assert!(fairness_check(&g, &alpha, &word).unwrap());
            }

            #[test]
            fn run_invariants_on_random_gamblers(
                g in arb_fsg(6),
                symbols in proptest::collection::vec(0u8..2, 1..300),
            ) {
                let spec = SequenceSpec::from_symbols(Alphabet::new("01").unwrap(), symbols).unwrap();
                let alpha = uniform();
                let trace = default_run(&g, &alpha, &spec);
                // Count conservation.
                prop_assert_eq!(trace.visit_counts.iter().sum::<u64>(), trace.steps);
                for q in 0..g.states() {
                    let row_sum: u64 = trace.edge_counts[q * 2..q * 2 + 2].iter().sum();
                    prop_assert_eq!(row_sum, trace.visit_counts[q]);
                }
                // Risk series is nondecreasing.
                let risk = trace.total_risk.as_ref().unwrap();
                prop_assert!(risk.windows(2).all(|w| w[0] <= w[1]));
                // Recomputation route agrees bit for bit.
                prop_assert_eq!(risk, &total_risk(&trace, &g, &alpha).unwrap());
                // Exact decomposition when solvent.
                if !trace.is_bankrupt() {
                    prop_assert_eq!(log_capital_decomposition(&trace, &g, &alpha).unwrap(), 0.0);
                }
            }

            #[test]
            fn serialization_round_trips(g in arb_fsg(6)) {
                let text = g.serialize();
                let back = Fsg::parse(&text, "<prop>").unwrap();
                prop_assert_eq!(&back, &g);
                prop_assert_eq!(back.serialize(), text);
            }
        }
    }
}
