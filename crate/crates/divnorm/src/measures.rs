//! Probability measures on finite outcome spaces and information quantities.
//!
//! Divergence is the central quantity: for measures alpha, beta on the same
//! space,
//!
//! ```text
//! D(alpha || beta) = sum_w alpha(w) * log2(alpha(w) / beta(w))
//! ```
//!
//! with the conventions 0 * log(0/q) = 0 and D = +infinity exactly when some
//! outcome has alpha(w) > 0 = beta(w). All logarithms in this crate are base
//! 2; divergences and entropies are in bits.
//!
//! Measures carry one of two numeric modes. Exact mode stores arbitrary
//! precision rationals and is closed under every construction here; float
//! mode stores binary64 weights for long-run work. Mixing the two modes in
//! one operation is refused rather than silently coerced.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::alphabet::Space;
use crate::error::{Error, Result};

/// log2 of a positive big integer, accurate to about 1 ulp: the top 53 bits
/// carry the mantissa, the rest contribute through the exponent.
pub(crate) fn log2_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.sign() == Sign::Plus);
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().expect("small BigInt fits f64").log2();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().expect("53-bit value fits f64");
    top.log2() + shift as f64
}

fn pow2_exponent(n: &BigInt) -> Option<u64> {
    let (sign, mag) = (n.sign(), n.magnitude());
    if sign != Sign::Plus {
        return None;
    }
    let bits = mag.bits();
    if mag.trailing_zeros() == Some(bits - 1) {
        Some(bits - 1)
    } else {
        None
    }
}

/// log2 of a positive rational. Exact (no libm involved) whenever both
/// numerator and denominator are powers of two, so quantities like
/// log2(4) = 2 come out as exact integers.
pub(crate) fn log2_rational(r: &BigRational) -> f64 {
    debug_assert!(r.is_positive());
    if let (Some(en), Some(ed)) = (pow2_exponent(r.numer()), pow2_exponent(r.denom())) {
        return en as f64 - ed as f64;
    }
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

/// Nonnegative extended real: a finite number of bits or +infinity.
/// +infinity is absorbing under addition and greater than every finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn from_f64(v: f64) -> ExtReal {
        if v.is_infinite() && v > 0.0 {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    /// Collapse to f64, mapping +infinity to f64::INFINITY.
    pub fn as_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(v) => *v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }

    /// Divide by a positive finite scalar; infinity stays infinity.
    pub fn div_scalar(self, d: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v / d),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Float => write!(f, "float"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Weights {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Probability measure on a finite outcome space.
#[derive(Clone, Debug, PartialEq)]
pub struct Prob {
    space: Space,
    weights: Weights,
}

/// Float-mode normalization slack: weights must sum to 1 within this.
const FLOAT_SUM_TOL: f64 = 1e-12;

impl Prob {
    pub fn from_rationals(space: Space, weights: Vec<BigRational>) -> Result<Self> {
        if weights.len() != space.outcome_count() {
            return Err(Error::InvalidProbability(format!(
                "expected {} weights, got {}",
                space.outcome_count(),
                weights.len()
            )));
        }
        let mut sum = BigRational::zero();
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(Error::InvalidProbability(format!(
                    "weight {i} is negative"
                )));
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(Error::InvalidProbability(format!(
                "weights sum to {sum}, expected exactly 1"
            )));
        }
        Ok(Prob {
            space,
            weights: Weights::Exact(weights),
        })
    }

    /// Skips the sum-to-one check. Exists so negative-control tests can
    /// inject a non-stochastic vector and watch downstream checks fail.
    #[doc(hidden)]
    pub fn from_rationals_unchecked(space: Space, weights: Vec<BigRational>) -> Self {
        assert_eq!(weights.len(), space.outcome_count());
        Prob {
            space,
            weights: Weights::Exact(weights),
        }
    }

    pub fn from_floats(space: Space, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.outcome_count() {
            return Err(Error::InvalidProbability(format!(
                "expected {} weights, got {}",
                space.outcome_count(),
                weights.len()
            )));
        }
        let mut sum = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "weight {i} is {w}, expected a finite nonnegative value"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > FLOAT_SUM_TOL {
            return Err(Error::InvalidProbability(format!(
                "weights sum to {sum}, expected 1 within {FLOAT_SUM_TOL:e}"
            )));
        }
        Ok(Prob {
            space,
            weights: Weights::Float(weights),
        })
    }

    /// Point mass at one outcome (exact mode).
    pub fn degenerate(space: Space, outcome: usize) -> Result<Self> {
        if outcome >= space.outcome_count() {
            return Err(Error::InvalidParam(format!(
                "outcome {outcome} out of range for {}",
                space.describe()
            )));
        }
        let mut weights = vec![BigRational::zero(); space.outcome_count()];
        weights[outcome] = BigRational::one();
        Ok(Prob {
            space,
            weights: Weights::Exact(weights),
        })
    }

    /// Uniform measure (exact mode).
    pub fn uniform(space: Space) -> Self {
        let n = space.outcome_count();
        let w = BigRational::new(BigInt::one(), BigInt::from(n));
        Prob {
            space,
            weights: Weights::Exact(vec![w; n]),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn mode(&self) -> Mode {
        match self.weights {
            Weights::Exact(_) => Mode::Exact,
            Weights::Float(_) => Mode::Float,
        }
    }

    pub fn len(&self) -> usize {
        self.space.outcome_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weight_f64(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Exact(v) => rational_to_f64(&v[i]),
            Weights::Float(v) => v[i],
        }
    }

    /// Exact weight; None in float mode.
    pub fn rational(&self, i: usize) -> Option<&BigRational> {
        match &self.weights {
            Weights::Exact(v) => Some(&v[i]),
            Weights::Float(_) => None,
        }
    }

    pub fn rationals(&self) -> Option<&[BigRational]> {
        match &self.weights {
            Weights::Exact(v) => Some(v),
            Weights::Float(_) => None,
        }
    }

    pub fn is_zero_at(&self, i: usize) -> bool {
        match &self.weights {
            Weights::Exact(v) => v[i].is_zero(),
            Weights::Float(v) => v[i] == 0.0,
        }
    }

    pub fn is_strictly_positive(&self) -> bool {
        (0..self.len()).all(|i| !self.is_zero_at(i))
    }

    pub fn min_weight_f64(&self) -> f64 {
        (0..self.len())
            .map(|i| self.weight_f64(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Forget exactness; weights become their nearest binary64 values.
    pub fn to_float(&self) -> Prob {
        match &self.weights {
            Weights::Float(_) => self.clone(),
            Weights::Exact(v) => Prob {
                space: self.space.clone(),
                weights: Weights::Float(v.iter().map(rational_to_f64).collect()),
            },
        }
    }

    /// The product measure alpha^l on words of length l: independent
    /// coordinates each distributed by this symbol measure.
    pub fn product_extension(&self, l: usize) -> Result<Prob> {
        if self.space.word_len() != 1 {
            return Err(Error::InvalidParam(
                "product extension starts from a measure on single symbols".into(),
            ));
        }
        let space = Space::new(self.space.alphabet().clone(), l)?;
        let k = self.space.alphabet().size();
        let weights = match &self.weights {
            Weights::Exact(base) => {
                let mut acc = vec![BigRational::one()];
                for _ in 0..l {
                    let mut next = Vec::with_capacity(acc.len() * k);
                    for w in &acc {
                        for b in base {
                            next.push(w * b);
                        }
                    }
                    acc = next;
                }
                Weights::Exact(acc)
            }
            Weights::Float(base) => {
                let mut acc = vec![1.0f64];
                for _ in 0..l {
                    let mut next = Vec::with_capacity(acc.len() * k);
                    for w in &acc {
                        for b in base {
                            next.push(w * b);
                        }
                    }
                    acc = next;
                }
                Weights::Float(acc)
            }
        };
        Ok(Prob { space, weights })
    }

    /// Weight of a single word under the product extension, computed without
    /// materializing the extended space.
    pub fn product_weight(&self, digits: &[u8]) -> Result<BigRational> {
        match &self.weights {
            Weights::Exact(base) => {
                let mut w = BigRational::one();
                for &d in digits {
                    w *= &base[d as usize];
                }
                Ok(w)
            }
            Weights::Float(_) => Err(Error::ModeMismatch),
        }
    }

    pub fn product_weight_f64(&self, digits: &[u8]) -> f64 {
        let mut w = 1.0;
        for &d in digits {
            w *= self.weight_f64(d as usize);
        }
        w
    }

    /// Parse comma-separated exact rationals in alphabet order, e.g. "1/2,1/2".
    pub fn parse(space: Space, text: &str) -> Result<Prob> {
        let mut weights = Vec::new();
        for tok in text.split(',') {
            weights.push(parse_rational(tok.trim()).map_err(Error::InvalidProbability)?);
        }
        Prob::from_rationals(space, weights)
    }

    /// Canonical text form. Exact weights round-trip bit-exactly through
    /// `parse`; float weights serialize as shortest-roundtrip decimals.
    pub fn serialize(&self) -> String {
        match &self.weights {
            Weights::Exact(v) => v
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(","),
            Weights::Float(v) => v
                .iter()
                .map(|w| format!("{w}"))
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

pub(crate) fn parse_rational(tok: &str) -> std::result::Result<BigRational, String> {
    let tok = tok.trim();
    if tok.is_empty() {
        return Err("empty rational".into());
    }
    let (num, den) = match tok.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (tok, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("bad integer '{num}' in rational '{tok}'"))?;
    let d: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| format!("bad integer '{d}' in rational '{tok}'"))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(format!("zero denominator in rational '{tok}'"));
    }
    Ok(BigRational::new(n, d))
}

pub(crate) fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn check_same_space(a: &Prob, b: &Prob) -> Result<()> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch {
            left: a.space.describe(),
            right: b.space.describe(),
        });
    }
    Ok(())
}

fn check_same_mode(a: &Prob, b: &Prob) -> Result<()> {
    if a.mode() != b.mode() {
        return Err(Error::ModeMismatch);
    }
    Ok(())
}

/// Divergence D(alpha || beta) in bits. +infinity exactly when alpha puts
/// mass on an outcome beta excludes. In exact mode ratios are formed as
/// rationals before any rounding, so D(alpha || alpha) is exactly zero.
pub fn kl_divergence(alpha: &Prob, beta: &Prob) -> Result<ExtReal> {
    check_same_space(alpha, beta)?;
    check_same_mode(alpha, beta)?;
    let mut sum = 0.0f64;
    match (&alpha.weights, &beta.weights) {
        (Weights::Exact(pa), Weights::Exact(pb)) => {
            for (p, q) in pa.iter().zip(pb) {
                if p.is_zero() {
                    continue;
                }
                if q.is_zero() {
                    return Ok(ExtReal::Infinite);
                }
                sum += rational_to_f64(p) * log2_rational(&(p / q));
            }
        }
        (Weights::Float(pa), Weights::Float(pb)) => {
            for (p, q) in pa.iter().zip(pb) {
                if *p == 0.0 {
                    continue;
                }
                if *q == 0.0 {
                    return Ok(ExtReal::Infinite);
                }
                sum += p * (p / q).log2();
            }
        }
        _ => unreachable!("modes checked above"),
    }
    // The true value is nonnegative (Gibbs); the sum can round fractionally
    // below zero only when alpha and beta nearly coincide.
    Ok(ExtReal::Finite(sum.max(0.0)))
}

/// Total variation style L1 distance: sum_w |alpha(w) - beta(w)|.
/// Exact inputs are summed as rationals and converted once at the end.
pub fn l1_distance(alpha: &Prob, beta: &Prob) -> Result<f64> {
    check_same_space(alpha, beta)?;
    check_same_mode(alpha, beta)?;
    match (&alpha.weights, &beta.weights) {
        (Weights::Exact(pa), Weights::Exact(pb)) => {
            let mut sum = BigRational::zero();
            for (p, q) in pa.iter().zip(pb) {
                sum += (p - q).abs();
            }
            Ok(rational_to_f64(&sum))
        }
        (Weights::Float(pa), Weights::Float(pb)) => {
            Ok(pa.iter().zip(pb).map(|(p, q)| (p - q).abs()).sum())
        }
        _ => unreachable!("modes checked above"),
    }
}

/// Shannon entropy in bits, computed as -sum alpha log2 alpha. Equivalently
/// the alpha-average of the divergences of alpha from the point masses,
/// sum_w alpha(w) D(point_w || alpha); see the inline tests.
pub fn entropy(alpha: &Prob) -> ExtReal {
    let mut sum = 0.0f64;
    match &alpha.weights {
        Weights::Exact(pa) => {
            for p in pa {
                if p.is_zero() {
                    continue;
                }
                sum -= rational_to_f64(p) * log2_rational(p);
            }
        }
        Weights::Float(pa) => {
            for p in pa {
                if *p == 0.0 {
                    continue;
                }
                sum -= p * p.log2();
            }
        }
    }
    ExtReal::Finite(sum.max(0.0))
}

/// Joint measure on ordered pairs over a common symbol space, stored
/// row-major: weight(i, j) sits at index i * k + j in a length-2 word space.
#[derive(Clone, Debug)]
pub struct JointProb {
    pair: Prob,
}

impl JointProb {
    /// Build from rows of exact rationals: `rows[i][j]` is the mass of the
    /// pair (symbol_i, symbol_j).
    pub fn from_rational_rows(space: Space, rows: Vec<Vec<BigRational>>) -> Result<Self> {
        if space.word_len() != 1 {
            return Err(Error::InvalidParam(
                "joint measures pair up single symbols".into(),
            ));
        }
        let k = space.outcome_count();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidProbability(format!(
                "joint weights must form a {k} x {k} matrix"
            )));
        }
        let flat: Vec<BigRational> = rows.into_iter().flatten().collect();
        let pair_space = Space::new(space.alphabet().clone(), 2)?;
        Ok(JointProb {
            pair: Prob::from_rationals(pair_space, flat)?,
        })
    }

    pub fn from_float_rows(space: Space, rows: Vec<Vec<f64>>) -> Result<Self> {
        if space.word_len() != 1 {
            return Err(Error::InvalidParam(
                "joint measures pair up single symbols".into(),
            ));
        }
        let k = space.outcome_count();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidProbability(format!(
                "joint weights must form a {k} x {k} matrix"
            )));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let pair_space = Space::new(space.alphabet().clone(), 2)?;
        Ok(JointProb {
            pair: Prob::from_floats(pair_space, flat)?,
        })
    }

    pub fn as_pair_measure(&self) -> &Prob {
        &self.pair
    }

    pub fn mode(&self) -> Mode {
        self.pair.mode()
    }

    fn symbol_space(&self) -> Space {
        Space::symbols(self.pair.space.alphabet().clone())
    }

    /// Row and column marginals, in the joint's numeric mode.
    pub fn marginals(&self) -> (Prob, Prob) {
        let k = self.pair.space.alphabet().size();
        let sp = self.symbol_space();
        match &self.pair.weights {
            Weights::Exact(w) => {
                let mut rows = vec![BigRational::zero(); k];
                let mut cols = vec![BigRational::zero(); k];
                for i in 0..k {
                    for j in 0..k {
                        rows[i] += &w[i * k + j];
                        cols[j] += &w[i * k + j];
                    }
                }
                (
                    Prob::from_rationals(sp.clone(), rows).expect("marginal sums to 1"),
                    Prob::from_rationals(sp, cols).expect("marginal sums to 1"),
                )
            }
            Weights::Float(w) => {
                let mut rows = vec![0.0; k];
                let mut cols = vec![0.0; k];
                for i in 0..k {
                    for j in 0..k {
                        rows[i] += w[i * k + j];
                        cols[j] += w[i * k + j];
                    }
                }
                (
                    Prob::from_floats(sp.clone(), rows).expect("marginal sums to 1"),
                    Prob::from_floats(sp, cols).expect("marginal sums to 1"),
                )
            }
        }
    }

    /// Independent coupling of the marginals, as a pair measure.
    pub fn product_of_marginals(&self) -> Prob {
        let (a, b) = self.marginals();
        let k = self.pair.space.alphabet().size();
        let space = self.pair.space.clone();
        match (&a.weights, &b.weights) {
            (Weights::Exact(wa), Weights::Exact(wb)) => {
                let mut flat = Vec::with_capacity(k * k);
                for i in 0..k {
                    for j in 0..k {
                        flat.push(&wa[i] * &wb[j]);
                    }
                }
                Prob::from_rationals(space, flat).expect("product of marginals sums to 1")
            }
            (Weights::Float(wa), Weights::Float(wb)) => {
                let mut flat = Vec::with_capacity(k * k);
                for i in 0..k {
                    for j in 0..k {
                        flat.push(wa[i] * wb[j]);
                    }
                }
                // Renormalization slack: products of near-1 sums stay within
                // the float tolerance for desk-sized alphabets.
                Prob::from_floats(space, flat).expect("product of marginals sums to ~1")
            }
            _ => unreachable!("marginals share the joint's mode"),
        }
    }
}

/// Which way the two measures enter the divergence that defines mutual
/// information. `ProductVsJoint` evaluates D(alpha x beta || gamma);
/// `JointVsProduct` evaluates the textbook D(gamma || alpha x beta). The two
/// agree exactly when the coordinates are independent (both are then zero)
/// and differ otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutualInfoVariant {
    ProductVsJoint,
    JointVsProduct,
}

pub fn mutual_information(gamma: &JointProb, variant: MutualInfoVariant) -> Result<ExtReal> {
    let product = gamma.product_of_marginals();
    match variant {
        MutualInfoVariant::ProductVsJoint => kl_divergence(&product, &gamma.pair),
        MutualInfoVariant::JointVsProduct => kl_divergence(&gamma.pair, &product),
    }
}
