//! Gamblers compiled from block measures.
//!
//! A [`BlockMeasure`] is an exact measure on length-ℓ blocks together with
//! the masses it induces on every shorter prefix. [`exploit_gambler`]
//! turns one into a gambler whose states are the words of length < ℓ:
//! reading a symbol appends it, a completed block resets to the empty
//! word, and the bet placed at word w is the conditional mass of the next
//! symbol. Over a full-support measure the per-block capital multiplier
//! telescopes to π₀(u)/α^(ℓ)(u), so capital growth is exactly the gap
//! between the sequence's block statistics and the payoff measure;
//! [`verify_growth_bound`] checks that identity on a recorded run.
//!
//! [`select_pi0`] picks the block measure the way the divergence trace
//! suggests: the empirical measure at the tail checkpoint where the
//! divergence from the target was largest.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::alphabet::{Alphabet, Space};
use crate::divergence::{divergence_trace, evaluate_row, Checkpoints, Target};
use crate::empirical::BlockCounter;
use crate::error::{Error, Result};
use crate::gambler::{
    check_payoff_provenance, check_provenance, pow_rational, CapitalTrace, Fsg,
    EXACT_CAPITAL_STEP_LIMIT,
};
use crate::measures::{format_rational, parse_rational, ExtReal, Mode, Prob};
use crate::sequences::SequenceSpec;

/// An exact measure on the length-ℓ block space plus the prefix masses
/// π(w) = Σ_a π(wa) for every shorter word, down to π(λ) = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMeasure {
    measure: Prob,
    /// levels[j] holds the masses of the k^j words of length j;
    /// levels[block_len()] is the measure itself.
    levels: Vec<Vec<BigRational>>,
}

impl BlockMeasure {
    pub fn new(measure: Prob) -> Result<Self> {
        if measure.mode() != Mode::Exact {
            return Err(Error::InvalidParam(
                "block measures need exact rational weights".into(),
            ));
        }
        let k = measure.space().alphabet().size();
        let l = measure.space().word_len();
        let mut levels: Vec<Vec<BigRational>> = Vec::with_capacity(l + 1);
        levels.push(measure.rationals().expect("exact mode checked").to_vec());
        for _ in 0..l {
            let child = levels.last().expect("never empty");
            let parent: Vec<BigRational> = child
                .chunks(k)
                .map(|c| c.iter().fold(BigRational::zero(), |s, w| s + w))
                .collect();
            levels.push(parent);
        }
        levels.reverse();
        debug_assert!(levels[0][0].is_one());
        Ok(BlockMeasure { measure, levels })
    }

    pub fn block_len(&self) -> usize {
        self.measure.space().word_len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.measure.space().alphabet()
    }

    pub fn measure(&self) -> &Prob {
        &self.measure
    }

    pub fn is_full_support(&self) -> bool {
        self.measure.is_strictly_positive()
    }

    /// Mass of a word of length ≤ ℓ; the empty word has mass 1.
    pub fn prefix_mass(&self, word: &[u8]) -> Result<&BigRational> {
        let l = self.block_len();
        if word.len() > l {
            return Err(Error::InvalidParam(format!(
                "word length {} exceeds block length {l}",
                word.len()
            )));
        }
        let idx = self.index_of(word)?;
        Ok(&self.levels[word.len()][idx])
    }

    /// Conditional mass of `symbol` after `word`, which must be shorter
    /// than the block length. A zero-mass prefix falls back to the
    /// uniform row so the result is always a probability.
    pub fn conditional(&self, word: &[u8], symbol: u8) -> Result<BigRational> {
        let l = self.block_len();
        if word.len() >= l {
            return Err(Error::InvalidParam(format!(
                "conditional needs a word shorter than the block length {l}, got length {}",
                word.len()
            )));
        }
        let k = self.alphabet().size();
        if symbol as usize >= k {
            return Err(Error::InvalidParam(format!(
                "symbol index {symbol} out of range for alphabet of size {k}"
            )));
        }
        let idx = self.index_of(word)?;
        Ok(self.conditional_row(word.len(), idx)[symbol as usize].clone())
    }

    fn index_of(&self, word: &[u8]) -> Result<usize> {
        let k = self.alphabet().size();
        let mut idx = 0usize;
        for &d in word {
            if d as usize >= k {
                return Err(Error::InvalidParam(format!(
                    "symbol index {d} out of range for alphabet of size {k}"
                )));
            }
            idx = idx * k + d as usize;
        }
        Ok(idx)
    }

    /// Bet row at the word with the given level and index: conditional
    /// next-symbol masses, or the uniform fallback over a zero-mass
    /// prefix. Either way the row sums to exactly 1.
    fn conditional_row(&self, level: usize, idx: usize) -> Vec<BigRational> {
        let k = self.alphabet().size();
        let parent = &self.levels[level][idx];
        if parent.is_zero() {
            vec![BigRational::new(BigInt::one(), BigInt::from(k)); k]
        } else {
            (0..k)
                .map(|a| &self.levels[level + 1][idx * k + a] / parent)
                .collect()
        }
    }

    /// Text form: a `block-measure <l>` header, then one `mass <word>
    /// <value>` line per nonzero weight in outcome order. Omitted words
    /// have mass zero.
    pub fn serialize(&self) -> String {
        let space = self.measure.space();
        let mut out = format!("block-measure {}\n", self.block_len());
        let weights = self.measure.rationals().expect("block measures are exact");
        for (idx, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            out.push_str(&format!(
                "mass {} {}\n",
                space.word_string(idx),
                format_rational(w)
            ));
        }
        out
    }

    /// Parse the text form. The format carries no alphabet of its own, so
    /// the caller supplies one; `origin` names the source in errors.
    pub fn parse(alphabet: Alphabet, text: &str, origin: &str) -> Result<BlockMeasure> {
        let fail = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut space: Option<Space> = None;
        let mut weights: Vec<BigRational> = Vec::new();
        let mut seen: Vec<bool> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            match toks.next().expect("nonempty line") {
                "block-measure" => {
                    if space.is_some() {
                        return Err(fail(lineno, "duplicate block-measure header".into()));
                    }
                    let l: usize = toks
                        .next()
                        .ok_or_else(|| fail(lineno, "block-measure needs a block length".into()))?
                        .parse()
                        .map_err(|_| fail(lineno, "block length must be a positive integer".into()))?;
                    let sp = Space::new(alphabet.clone(), l).map_err(|e| fail(lineno, e.to_string()))?;
                    weights = vec![BigRational::zero(); sp.outcome_count()];
                    seen = vec![false; sp.outcome_count()];
                    space = Some(sp);
                }
                "mass" => {
                    let sp = space
                        .as_ref()
                        .ok_or_else(|| fail(lineno, "mass line before the block-measure header".into()))?;
                    let word = toks
                        .next()
                        .ok_or_else(|| fail(lineno, "mass needs a word and a value".into()))?;
                    let value = toks
                        .next()
                        .ok_or_else(|| fail(lineno, "mass needs a value".into()))?;
                    let idx = sp
                        .word_index_str(word)
                        .map_err(|e| fail(lineno, e.to_string()))?;
                    if seen[idx] {
                        return Err(fail(lineno, format!("duplicate mass for word {word}")));
                    }
                    let r = parse_rational(value).map_err(|m| fail(lineno, m))?;
                    if r < BigRational::zero() {
                        return Err(fail(lineno, format!("mass for {word} is negative")));
                    }
                    weights[idx] = r;
                    seen[idx] = true;
                }
                other => {
                    return Err(fail(lineno, format!("unknown keyword {other}")));
                }
            }
            if toks.next().is_some() {
                return Err(fail(lineno, "trailing tokens".into()));
            }
        }
        let sp = space.ok_or_else(|| fail(0, "missing block-measure header".into()))?;
        let prob = Prob::from_rationals(sp, weights).map_err(|e| fail(0, e.to_string()))?;
        BlockMeasure::new(prob)
    }
}

/// `offsets[j]` = number of words strictly shorter than j, so the gambler
/// state for the j-length word with index i is `offsets[j] + i`.
fn level_offsets(k: usize, l: usize) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(l + 1);
    offsets.push(0usize);
    let mut width = 1usize;
    for _ in 0..l {
        offsets.push(offsets.last().expect("seeded") + width);
        width *= k;
    }
    offsets
}

/// Compile a block measure into a gambler over the words shorter than ℓ.
/// The state count is (k^ℓ − 1)/(k − 1); the start state is the empty
/// word, and every length-(ℓ−1) word transitions back to it.
pub fn exploit_gambler(pi0: &BlockMeasure) -> Result<Fsg> {
    let alphabet = pi0.alphabet().clone();
    let k = alphabet.size();
    let l = pi0.block_len();
    let offsets = level_offsets(k, l);
    let states = offsets[l];
    let symbol_space = Space::symbols(alphabet.clone());
    let mut transitions: Vec<u32> = Vec::with_capacity(states * k);
    let mut bets: Vec<Prob> = Vec::with_capacity(states);
    for j in 0..l {
        let level_size = offsets[j + 1] - offsets[j];
        for idx in 0..level_size {
            for a in 0..k {
                let target = if j + 1 < l { offsets[j + 1] + idx * k + a } else { 0 };
                transitions.push(target as u32);
            }
            bets.push(Prob::from_rationals(
                symbol_space.clone(),
                pi0.conditional_row(j, idx),
            )?);
        }
    }
    Fsg::new(alphabet, transitions, bets, 0)
}

/// Empirical block measure of the first `blocks` aligned blocks.
pub fn empirical_block_measure(
    spec: &SequenceSpec,
    blocks: u64,
    block_len: usize,
) -> Result<BlockMeasure> {
    if blocks == 0 {
        return Err(Error::InvalidParam(
            "empirical block measure needs at least one block".into(),
        ));
    }
    let mut counter = BlockCounter::new(spec.alphabet.clone(), block_len)?;
    let need = blocks
        .checked_mul(block_len as u64)
        .ok_or_else(|| Error::InvalidParam("block count out of range".into()))?;
    let mut stream = spec.stream()?;
    let mut buf = [0u8; 8192];
    let mut remaining = need;
    while remaining > 0 {
        let want = remaining.min(buf.len() as u64) as usize;
        let got = stream.read(&mut buf[..want])?;
        if got == 0 {
            return Err(Error::InvalidParam(format!(
                "sequence ends after {} symbols, need {need}",
                need - remaining
            )));
        }
        counter.feed(&buf[..got])?;
        remaining -= got as u64;
    }
    BlockMeasure::new(counter.empirical_measure()?.measure)
}

/// The gambler that bets the sequence's own aligned block statistics,
/// taken over the first `blocks` blocks.
pub fn empirical_exploit(spec: &SequenceSpec, blocks: u64, block_len: usize) -> Result<Fsg> {
    exploit_gambler(&empirical_block_measure(spec, blocks, block_len)?)
}

/// Pick the block measure to exploit: run a divergence trace and take the
/// empirical measure at the tail-window checkpoint with the largest
/// divergence from the target (ties go to the larger prefix; an infinite
/// value is a legitimate maximum).
pub fn select_pi0(
    spec: &SequenceSpec,
    alpha: &Prob,
    block_len: usize,
    checkpoints: &Checkpoints,
    tail_fraction: f64,
) -> Result<BlockMeasure> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "tail fraction must be in (0, 1], got {tail_fraction}"
        )));
    }
    let trace = divergence_trace(spec, alpha, block_len, checkpoints)?;
    if trace.rows.is_empty() {
        return Err(Error::InvalidParam(format!(
            "no checkpoint yields a complete length-{block_len} block"
        )));
    }
    let len = trace.rows.len();
    let window = (((len as f64) * tail_fraction).ceil() as usize).clamp(1, len);
    let mut best = len - window;
    for i in (len - window)..len {
        if trace.rows[i].divergence >= trace.rows[best].divergence {
            best = i;
        }
    }
    empirical_block_measure(spec, trace.rows[best].blocks, block_len)
}

/// One block-aligned checkpoint of a growth-bound verification.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthBoundRow {
    pub blocks: u64,
    pub step: u64,
    pub log2_capital: f64,
    /// D(π_n ‖ α^(ℓ)) in bits.
    pub divergence_from_target: ExtReal,
    /// D(π_n ‖ π₀) in bits.
    pub divergence_from_pi0: ExtReal,
    /// log₂d(w) − n·(D(π_n‖α^(ℓ)) − D(π_n‖π₀)); absent when either
    /// divergence is infinite.
    pub residual: Option<f64>,
    /// The residual was settled by exact rational comparison, so 0 means
    /// the identity holds exactly.
    pub exact: bool,
    /// Some bet at or before this step came from a zero-mass prefix
    /// state, voiding the identity from that point on.
    pub fallback_hit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthBoundReport {
    pub block_len: usize,
    pub rows: Vec<GrowthBoundRow>,
    /// Checkpoints that were not multiples of the block length; the
    /// identity only binds whole blocks, so these carry no row.
    pub skipped_steps: Vec<u64>,
    /// First step whose bet came from a zero-mass prefix state, if any.
    pub first_fallback_step: Option<u64>,
}

/// Check log₂ capital against n·(D(π_n‖α^(ℓ)) − D(π_n‖π₀)) at every
/// block-aligned checkpoint of a recorded run. While the exact-capital
/// window lasts, agreement is decided in rational arithmetic, so a zero
/// residual is exact, not a rounding artifact.
pub fn verify_growth_bound(
    trace: &CapitalTrace,
    pi0: &BlockMeasure,
    alpha: &Prob,
    spec: &SequenceSpec,
) -> Result<GrowthBoundReport> {
    let g = exploit_gambler(pi0)?;
    check_provenance(trace, &g)?;
    check_payoff_provenance(trace, alpha)?;
    if trace.alphabet != spec.alphabet {
        return Err(Error::InvalidParam(
            "trace and sequence alphabets differ".into(),
        ));
    }
    verify_symbols(trace, spec)?;

    let l = pi0.block_len();
    let lu = l as u64;
    let space = pi0.measure().space().clone();
    let k = space.alphabet().size();

    let mut aligned = Vec::new();
    let mut skipped = Vec::new();
    for &step in &trace.checkpoints {
        if step > 0 && step % lu == 0 {
            aligned.push(step);
        } else {
            skipped.push(step);
        }
    }

    // Zero-mass prefix states by gambler state index; betting from one is
    // what voids the telescoping identity.
    let offsets = level_offsets(k, l);
    let mut fallback = vec![false; offsets[l]];
    for j in 0..l {
        for idx in 0..(offsets[j + 1] - offsets[j]) {
            fallback[offsets[j] + idx] = pi0.levels[j][idx].is_zero();
        }
    }
    let first_fallback_step = (0..trace.steps as usize)
        .find(|&t| fallback[trace.states[t] as usize])
        .map(|t| t as u64 + 1);

    let mut counter = BlockCounter::new(space.alphabet().clone(), l)?;
    let mut cap: Option<BigRational> = match alpha.mode() {
        Mode::Exact => Some(BigRational::one()),
        Mode::Float => None,
    };
    let mut rows = Vec::with_capacity(aligned.len());
    let mut cursor: u64 = 0;
    for &step in &aligned {
        debug_assert!(step <= trace.steps);
        for t in cursor..step {
            if cap.is_some() {
                if t + 1 > EXACT_CAPITAL_STEP_LIMIT {
                    cap = None;
                } else {
                    let a = trace.symbols[t as usize] as usize;
                    let bet = g
                        .bet(trace.states[t as usize])
                        .rational(a)
                        .expect("synthesized bets are exact")
                        .clone();
                    // The recorded run already rejected zero-payoff symbols.
                    let payoff = alpha.rational(a).expect("exact mode checked").clone();
                    *cap.as_mut().expect("checked above") *= bet / payoff;
                }
            }
        }
        counter.feed(&trace.symbols[cursor as usize..step as usize])?;
        cursor = step;

        let n = step / lu;
        debug_assert_eq!(counter.blocks(), n);
        let counts = counter.counts();
        let (d1, _) = evaluate_row(&space, counts, n, &Target::Product(alpha));
        let (d2, _) = evaluate_row(&space, counts, n, &Target::Measure(pi0.measure()));
        let log2_capital = trace.log2_capital[step as usize];
        let fallback_hit = first_fallback_step.is_some_and(|f| f <= step);

        let (residual, exact) = match (d1, d2) {
            (ExtReal::Finite(f1), ExtReal::Finite(f2)) => {
                let defined = log2_capital - n as f64 * (f1 - f2);
                match &cap {
                    Some(c) => {
                        if *c == expected_capital(pi0, alpha, &space, counts) {
                            (Some(0.0), true)
                        } else {
                            (Some(defined), true)
                        }
                    }
                    None => (Some(defined), false),
                }
            }
            _ => (None, false),
        };
        rows.push(GrowthBoundRow {
            blocks: n,
            step,
            log2_capital,
            divergence_from_target: d1,
            divergence_from_pi0: d2,
            residual,
            exact,
            fallback_hit,
        });
    }
    Ok(GrowthBoundReport {
        block_len: l,
        rows,
        skipped_steps: skipped,
        first_fallback_step,
    })
}

/// Exact capital the telescoping identity predicts from block counts:
/// Π_u (π₀(u)/α^(ℓ)(u))^{count(u)}. Only called when D(π‖α^(ℓ)) is
/// finite, so every counted block has positive target mass.
fn expected_capital(
    pi0: &BlockMeasure,
    alpha: &Prob,
    space: &Space,
    counts: &[u64],
) -> BigRational {
    let weights = pi0.measure().rationals().expect("block measures are exact");
    let mut acc = BigRational::one();
    for (idx, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let target = alpha
            .product_weight(&space.word_digits(idx))
            .expect("exact payoff");
        acc *= pow_rational(&(&weights[idx] / target), c);
    }
    acc
}

/// The trace must have been recorded on exactly this sequence prefix.
fn verify_symbols(trace: &CapitalTrace, spec: &SequenceSpec) -> Result<()> {
    let mut stream = spec.stream()?;
    let mut buf = [0u8; 8192];
    let mut at: usize = 0;
    let total = trace.symbols.len();
    while at < total {
        let want = (total - at).min(buf.len());
        let got = stream.read(&mut buf[..want])?;
        if got == 0 || buf[..got] != trace.symbols[at..at + got] {
            return Err(Error::InvalidParam(
                "trace was not produced from this sequence prefix".into(),
            ));
        }
        at += got;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gambler::{run, state_risk, RunOptions};
    use crate::measures::l1_distance;
    use crate::sequences::SequenceKind;
    use proptest::prelude::*;

    fn binary() -> Alphabet {
        Alphabet::new("01").unwrap()
    }

    fn uniform_alpha() -> Prob {
        Prob::uniform(Space::symbols(binary()))
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn point_mass_01() -> BlockMeasure {
        let space = Space::new(binary(), 2).unwrap();
        BlockMeasure::new(Prob::degenerate(space, 1).unwrap()).unwrap()
    }

    fn alternating(len: u64) -> SequenceSpec {
        SequenceSpec::new(binary(), SequenceKind::Periodic(vec![0, 1]), Some(len)).unwrap()
    }

    #[test]
    fn uniform_measure_has_uniform_conditionals() {
        let m = BlockMeasure::new(Prob::uniform(Space::new(binary(), 2).unwrap())).unwrap();
        for w in [&[][..], &[0][..], &[1][..]] {
            for a in 0..2u8 {
                assert_eq!(m.conditional(w, a).unwrap(), rat(1, 2));
            }
        }
    }

    #[test]
    fn point_mass_conditionals_and_fallback() {
        let m = point_mass_01();
        assert_eq!(m.conditional(&[], 0).unwrap(), rat(1, 1));
        assert_eq!(m.conditional(&[], 1).unwrap(), rat(0, 1));
        assert_eq!(m.conditional(&[0], 1).unwrap(), rat(1, 1));
        // zero-mass prefix "1": uniform fallback
        assert_eq!(m.conditional(&[1], 0).unwrap(), rat(1, 2));
        assert_eq!(m.conditional(&[1], 1).unwrap(), rat(1, 2));
        assert!(m.conditional(&[0, 1], 0).is_err());
    }

    #[test]
    fn prefix_masses_follow_the_recursion() {
        let space = Space::new(binary(), 2).unwrap();
        let m = BlockMeasure::new(
            Prob::from_rationals(space, vec![rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)]).unwrap(),
        )
        .unwrap();
        assert_eq!(*m.prefix_mass(&[]).unwrap(), rat(1, 1));
        assert_eq!(*m.prefix_mass(&[0]).unwrap(), rat(3, 4));
        assert_eq!(*m.prefix_mass(&[1]).unwrap(), rat(1, 4));
        assert_eq!(*m.prefix_mass(&[0, 1]).unwrap(), rat(1, 4));
        assert!(m.prefix_mass(&[0, 1, 0]).is_err());
        assert!(m.is_full_support());
    }

    #[test]
    fn exploit_shape_for_binary_blocks_of_two() {
        let g = exploit_gambler(&point_mass_01()).unwrap();
        assert_eq!(g.states(), 3);
        assert_eq!(g.start(), 0);
        assert_eq!(g.transition(0, 0), 1);
        assert_eq!(g.transition(0, 1), 2);
        for q in 1..3u32 {
            for a in 0..2u8 {
                assert_eq!(g.transition(q, a), 0);
            }
        }
    }

    #[test]
    fn product_extension_measure_never_bets() {
        let alpha = Prob::from_rationals(
            Space::symbols(binary()),
            vec![rat(1, 3), rat(2, 3)],
        )
        .unwrap();
        let pi0 = BlockMeasure::new(alpha.product_extension(2).unwrap()).unwrap();
        let g = exploit_gambler(&pi0).unwrap();
        for q in 0..g.states() as u32 {
            assert_eq!(g.bet(q), &alpha);
            assert_eq!(state_risk(&g, q, &alpha).unwrap(), ExtReal::ZERO);
        }
    }

    #[test]
    fn bet_rows_sum_to_one_even_on_fallback_states() {
        let g = exploit_gambler(&point_mass_01()).unwrap();
        for q in 0..g.states() as u32 {
            let sum = (0..2).fold(BigRational::zero(), |s, a| {
                s + g.bet(q).rational(a).unwrap()
            });
            assert!(sum.is_one());
        }
    }

    #[test]
    fn point_mass_doubles_capital_on_its_sequence() {
        let g = exploit_gambler(&point_mass_01()).unwrap();
        let trace = run(&g, &uniform_alpha(), &alternating(100), &RunOptions::default()).unwrap();
        for (t, &v) in trace.log2_capital.iter().enumerate() {
            assert_eq!(v, t as f64);
        }
        assert_eq!(
            trace.exact_capital.as_ref().unwrap(),
            &pow_rational(&rat(2, 1), 100)
        );
    }

    #[test]
    fn select_pi0_on_alternating_is_the_point_mass() {
        let pi0 = select_pi0(
            &alternating(1000),
            &uniform_alpha(),
            2,
            &Checkpoints::default_geometric(),
            0.5,
        )
        .unwrap();
        assert_eq!(pi0, point_mass_01());
    }

    #[test]
    fn select_pi0_single_checkpoint_is_that_empirical_measure() {
        let spec = SequenceSpec::from_str_symbols(binary(), "0010011101").unwrap();
        let pi0 = select_pi0(
            &spec,
            &uniform_alpha(),
            1,
            &Checkpoints::List(vec![5]),
            0.5,
        )
        .unwrap();
        // first five symbols are 00100
        assert_eq!(*m_weight(&pi0, 0), rat(4, 5));
        assert_eq!(*m_weight(&pi0, 1), rat(1, 5));
    }

    fn m_weight(m: &BlockMeasure, idx: usize) -> &BigRational {
        &m.measure().rationals().unwrap()[idx]
    }

    #[test]
    fn select_pi0_on_iid_lands_near_the_marginal() {
        let alpha = uniform_alpha();
        let spec = SequenceSpec::new(
            binary(),
            SequenceKind::Iid { alpha: alpha.clone(), seed: 3 },
            Some(20_000),
        )
        .unwrap();
        let pi0 = select_pi0(&spec, &alpha, 1, &Checkpoints::default_geometric(), 0.5).unwrap();
        assert!(l1_distance(pi0.measure(), &alpha).unwrap() <= 0.05);
    }

    #[test]
    fn growth_bound_uniform_measure_stays_flat() {
        let pi0 = BlockMeasure::new(Prob::uniform(Space::new(binary(), 2).unwrap())).unwrap();
        let g = exploit_gambler(&pi0).unwrap();
        let alpha = uniform_alpha();
        let spec = alternating(256);
        let trace = run(&g, &alpha, &spec, &RunOptions::default()).unwrap();
        let report = verify_growth_bound(&trace, &pi0, &alpha, &spec).unwrap();
        assert!(!report.rows.is_empty());
        assert!(!report.skipped_steps.is_empty());
        assert_eq!(report.first_fallback_step, None);
        for row in &report.rows {
            assert_eq!(row.log2_capital, 0.0);
            assert_eq!(row.divergence_from_target, row.divergence_from_pi0);
            assert_eq!(row.residual, Some(0.0));
            assert!(row.exact);
            assert!(!row.fallback_hit);
        }
    }

    #[test]
    fn growth_bound_on_own_empirical_measure() {
        let spec = SequenceSpec::new(binary(), SequenceKind::Champernowne, Some(4096)).unwrap();
        let alpha = uniform_alpha();
        let pi0 = empirical_block_measure(&spec, 2048, 2).unwrap();
        let g = exploit_gambler(&pi0).unwrap();
        let trace = run(&g, &alpha, &spec, &RunOptions::default()).unwrap();
        let report = verify_growth_bound(&trace, &pi0, &alpha, &spec).unwrap();
        for row in &report.rows {
            assert_eq!(row.residual, Some(0.0), "step {}", row.step);
            assert!(row.exact);
            assert!(!row.fallback_hit);
        }
        // the final checkpoint is the fitting point, where D(π‖π₀) vanishes
        let last = report.rows.last().unwrap();
        assert_eq!(last.blocks, 2048);
        assert_eq!(last.divergence_from_pi0, ExtReal::ZERO);
        // same quantity by two float routes, so only ulp-level agreement
        let by_rate = 2048.0 * last.divergence_from_target.as_f64();
        assert!((last.log2_capital - by_rate).abs() <= 1e-9 * by_rate.abs());
    }

    #[test]
    fn growth_bound_point_mass_rows() {
        let pi0 = point_mass_01();
        let g = exploit_gambler(&pi0).unwrap();
        let alpha = uniform_alpha();
        let spec = alternating(512);
        let trace = run(&g, &alpha, &spec, &RunOptions::default()).unwrap();
        let report = verify_growth_bound(&trace, &pi0, &alpha, &spec).unwrap();
        assert!(!report.rows.is_empty());
        for row in &report.rows {
            assert_eq!(row.divergence_from_target, ExtReal::Finite(2.0));
            assert_eq!(row.divergence_from_pi0, ExtReal::ZERO);
            assert_eq!(row.residual, Some(0.0));
            assert_eq!(row.log2_capital, row.step as f64);
        }
    }

    #[test]
    fn growth_bound_flags_fallback_and_infinite_terms() {
        let pi0 = point_mass_01();
        let g = exploit_gambler(&pi0).unwrap();
        let alpha = uniform_alpha();
        let spec = SequenceSpec::from_str_symbols(binary(), "0110").unwrap();
        let options = RunOptions {
            checkpoints: Some(Checkpoints::List(vec![2, 4])),
            ..RunOptions::default()
        };
        let trace = run(&g, &alpha, &spec, &options).unwrap();
        assert_eq!(trace.bankrupt_at, Some(3));
        let report = verify_growth_bound(&trace, &pi0, &alpha, &spec).unwrap();
        assert_eq!(report.first_fallback_step, Some(4));
        let first = &report.rows[0];
        assert_eq!(first.step, 2);
        assert_eq!(first.residual, Some(0.0));
        assert!(!first.fallback_hit);
        let second = &report.rows[1];
        assert_eq!(second.step, 4);
        assert_eq!(second.divergence_from_pi0, ExtReal::Infinite);
        assert_eq!(second.residual, None);
        assert!(second.fallback_hit);
        assert_eq!(second.log2_capital, f64::NEG_INFINITY);
    }

    #[test]
    fn growth_bound_rejects_foreign_traces() {
        let alpha = uniform_alpha();
        let spec = alternating(64);
        let other = BlockMeasure::new(Prob::uniform(Space::new(binary(), 2).unwrap())).unwrap();
        let g = exploit_gambler(&other).unwrap();
        let trace = run(&g, &alpha, &spec, &RunOptions::default()).unwrap();
        assert!(verify_growth_bound(&trace, &point_mass_01(), &alpha, &spec).is_err());
    }

    #[test]
    fn growth_bound_rejects_a_different_sequence() {
        let alpha = uniform_alpha();
        let pi0 = point_mass_01();
        let g = exploit_gambler(&pi0).unwrap();
        let trace = run(&g, &alpha, &alternating(64), &RunOptions::default()).unwrap();
        let other = SequenceSpec::new(binary(), SequenceKind::Periodic(vec![0]), Some(64)).unwrap();
        assert!(verify_growth_bound(&trace, &pi0, &alpha, &other).is_err());
    }

    #[test]
    fn capital_beats_the_discounted_divergence_rate() {
        // (01)^ω has divergence rate 1 bit/symbol at block length 2; the
        // synthesized gambler must clear the 0.9-discounted rate at every
        // even prefix, and in fact achieves the full rate exactly.
        let alpha = uniform_alpha();
        let spec = alternating(10_000);
        let pi0 = select_pi0(&spec, &alpha, 2, &Checkpoints::default_geometric(), 0.5).unwrap();
        let g = exploit_gambler(&pi0).unwrap();
        let trace = run(&g, &alpha, &spec, &RunOptions::default()).unwrap();
        for t in (2..=10_000u64).step_by(2) {
            let v = trace.log2_capital[t as usize];
            assert!(v >= 0.9 * t as f64);
            assert_eq!(v, t as f64);
        }
    }

    #[test]
    fn empirical_exploit_bets_symbol_frequencies_at_block_length_one() {
        let spec = SequenceSpec::from_str_symbols(binary(), "0010").unwrap();
        let g = empirical_exploit(&spec, 4, 1).unwrap();
        assert_eq!(g.states(), 1);
        assert_eq!(g.bet(0).rational(0).unwrap(), &rat(3, 4));
        assert_eq!(g.bet(0).rational(1).unwrap(), &rat(1, 4));
    }

    #[test]
    fn empirical_exploit_matches_the_point_mass_gambler() {
        let g1 = empirical_exploit(&alternating(100), 50, 2).unwrap();
        let g2 = exploit_gambler(&point_mass_01()).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn empirical_block_measure_needs_enough_symbols() {
        assert!(empirical_block_measure(&alternating(10), 6, 2).is_err());
        assert!(empirical_block_measure(&alternating(10), 0, 2).is_err());
    }

    #[test]
    fn text_round_trip() {
        let space = Space::new(binary(), 2).unwrap();
        let skewed = BlockMeasure::new(
            Prob::from_rationals(space, vec![rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)]).unwrap(),
        )
        .unwrap();
        for m in [point_mass_01(), skewed] {
            let text = m.serialize();
            let back = BlockMeasure::parse(binary(), &text, "<test>").unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn serialized_point_mass_is_one_line() {
        assert_eq!(point_mass_01().serialize(), "block-measure 2\nmass 01 1/1\n");
    }

    #[test]
    fn parse_rejects_malformed_input() {
        let a = binary();
        // masses must sum to 1
        assert!(BlockMeasure::parse(a.clone(), "block-measure 1\nmass 0 1/2\n", "<t>").is_err());
        // duplicate word
        assert!(BlockMeasure::parse(
            a.clone(),
            "block-measure 1\nmass 0 1/2\nmass 0 1/2\n",
            "<t>"
        )
        .is_err());
        // word of the wrong length
        assert!(BlockMeasure::parse(a.clone(), "block-measure 2\nmass 0 1/1\n", "<t>").is_err());
        // foreign symbol
        assert!(BlockMeasure::parse(a.clone(), "block-measure 1\nmass x 1/1\n", "<t>").is_err());
        // missing header
        assert!(BlockMeasure::parse(a.clone(), "mass 0 1/1\n", "<t>").is_err());
        // unknown keyword
        assert!(BlockMeasure::parse(a.clone(), "block-measure 1\nweight 0 1/1\n", "<t>").is_err());
        // negative mass
        assert!(BlockMeasure::parse(
            a,
            "block-measure 1\nmass 0 3/2\nmass 1 -1/2\n",
            "<t>"
        )
        .is_err());
    }

    fn full_support_measure() -> impl Strategy<Value = BlockMeasure> {
        (2usize..=3, 1usize..=3).prop_flat_map(|(k, l)| {
            let count = k.pow(l as u32);
            (Just(k), Just(l), proptest::collection::vec(1u32..=8, count))
        })
        .prop_map(|(k, l, raw)| {
            let alphabet = Alphabet::new(&"012"[..k]).unwrap();
            let total: u32 = raw.iter().sum();
            let weights = raw
                .into_iter()
                .map(|w| BigRational::new(BigInt::from(w), BigInt::from(total)))
                .collect();
            let space = Space::new(alphabet, l).unwrap();
            BlockMeasure::new(Prob::from_rationals(space, weights).unwrap()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bet_products_telescope_to_block_masses(
            pi0 in full_support_measure(),
            raw_block in proptest::collection::vec(0u8..3, 3),
        ) {
            let k = pi0.alphabet().size() as u8;
            let l = pi0.block_len();
            let block: Vec<u8> = raw_block.iter().take(l).map(|&d| d % k).collect();
            let g = exploit_gambler(&pi0).unwrap();
            let mut q = g.start();
            let mut acc = BigRational::one();
            for &a in &block {
                acc *= g.bet(q).rational(a as usize).unwrap();
                q = g.transition(q, a);
            }
            prop_assert_eq!(q, g.start());
            let idx = pi0.index_of(&block).unwrap();
            prop_assert_eq!(&acc, &pi0.measure().rationals().unwrap()[idx]);
        }

        #[test]
        fn synthesized_rows_are_stochastic(pi0 in full_support_measure()) {
            let g = exploit_gambler(&pi0).unwrap();
            let k = pi0.alphabet().size();
            for q in 0..g.states() as u32 {
                let sum = (0..k).fold(BigRational::zero(), |s, a| s + g.bet(q).rational(a).unwrap());
                prop_assert!(sum.is_one());
            }
        }
    }
}
