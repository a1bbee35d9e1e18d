//! Finite-alphabet probability primitives.
//!
//! Distributions and empirical types live on a shared [`Alphabet`]; symbols
//! inside sequences are represented by their index into that alphabet.
//! All logarithms are natural, so every information quantity is in nats.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on the weight sum accepted when building a distribution.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-9;
/// Tolerance on the weight sum of a stored distribution.
pub const STORED_SUM_TOLERANCE: f64 = 1e-12;
/// Smallest weight for which a distribution still counts as interior.
pub const INTERIOR_MIN_WEIGHT: f64 = 1e-9;
/// Max-norm distance under which two distributions are treated as equal.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

/// Index of a symbol in its alphabet.
pub type Symbol = usize;

/// An ordered list of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(Error::AlphabetTooSmall(symbols.len()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet labelled `"1"`, `"2"`, ..., `"size"`.
    pub fn numbered(size: usize) -> Result<Self> {
        Self::new((1..=size).map(|i| i.to_string()))
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, symbol: Symbol) -> &str {
        &self.symbols[symbol]
    }

    pub fn index_of(&self, label: &str) -> Result<Symbol> {
        self.symbols
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSymbol(label.to_string()))
    }
}

fn same_alphabet(a: &Arc<Alphabet>, b: &Arc<Alphabet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone)]
pub struct Distribution {
    alphabet: Arc<Alphabet>,
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates `weights` against `alphabet`. Sums within
    /// [`INPUT_SUM_TOLERANCE`] of one are renormalized; anything further off
    /// is rejected.
    pub fn new(alphabet: Arc<Alphabet>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(Error::SizeMismatch {
                expected: alphabet.size(),
                got: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteWeight { index });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > INPUT_SUM_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { alphabet, weights })
    }

    /// Distribution over the numbered alphabet of matching size.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let alphabet = Alphabet::numbered(weights.len())?;
        Self::new(Arc::new(alphabet), weights.to_vec())
    }

    pub fn uniform(alphabet: Arc<Alphabet>) -> Self {
        let k = alphabet.size();
        Self {
            alphabet,
            weights: vec![1.0 / k as f64; k],
        }
    }

    /// Wraps weights that are already known to be a valid distribution.
    pub(crate) fn from_trusted(alphabet: Arc<Alphabet>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(alphabet.size(), weights.len());
        Self { alphabet, weights }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True iff every weight is at least [`INTERIOR_MIN_WEIGHT`].
    pub fn is_interior(&self) -> bool {
        self.min_weight() >= INTERIOR_MIN_WEIGHT
    }

    pub(crate) fn require_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(Error::NotInterior {
                min_weight: self.min_weight(),
            })
        }
    }

    pub fn check_same_alphabet(&self, other: &Distribution) -> Result<()> {
        if same_alphabet(&self.alphabet, &other.alphabet) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch)
        }
    }

    pub fn max_norm_distance(&self, other: &Distribution) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Equality up to [`EQUALITY_TOLERANCE`] in max-norm.
    pub fn approx_eq(&self, other: &Distribution) -> bool {
        same_alphabet(&self.alphabet, &other.alphabet)
            && self.max_norm_distance(other) <= EQUALITY_TOLERANCE
    }

    /// `theta * self + (1 - theta) * other`.
    pub fn mix(&self, other: &Distribution, theta: f64) -> Result<Distribution> {
        self.check_same_alphabet(other)?;
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        Ok(Self::from_trusted(self.alphabet.clone(), weights))
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "]")
    }
}

/// Symbol counts of a nonempty sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalType {
    alphabet: Arc<Alphabet>,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalType {
    pub fn from_counts(alphabet: Arc<Alphabet>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != alphabet.size() {
            return Err(Error::SizeMismatch {
                expected: alphabet.size(),
                got: counts.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(Self {
            alphabet,
            counts,
            total,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// The type viewed as a distribution, weight `counts[a] / total`.
    pub fn to_distribution(&self) -> Distribution {
        let n = self.total as f64;
        Distribution::from_trusted(
            self.alphabet.clone(),
            self.counts.iter().map(|&c| c as f64 / n).collect(),
        )
    }

    pub fn check_same_alphabet(&self, other: &EmpiricalType) -> Result<()> {
        if same_alphabet(&self.alphabet, &other.alphabet) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch)
        }
    }
}

/// Counts the symbols (given as indices) of a sequence.
pub fn empirical_type(sequence: &[Symbol], alphabet: &Arc<Alphabet>) -> Result<EmpiricalType> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0u64; alphabet.size()];
    for &s in sequence {
        match counts.get_mut(s) {
            Some(c) => *c += 1,
            None => return Err(Error::UnknownSymbol(s.to_string())),
        }
    }
    Ok(EmpiricalType {
        alphabet: alphabet.clone(),
        counts,
        total: sequence.len() as u64,
    })
}

/// Counts a sequence of symbol labels.
pub fn empirical_type_of_labels<S: AsRef<str>>(
    sequence: &[S],
    alphabet: &Arc<Alphabet>,
) -> Result<EmpiricalType> {
    let symbols = sequence
        .iter()
        .map(|s| alphabet.index_of(s.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    empirical_type(&symbols, alphabet)
}

pub(crate) fn entropy_of(weights: &[f64]) -> f64 {
    -weights
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub(crate) fn kl_of(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            total += a * (a / b).ln();
        }
    }
    total.max(0.0)
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(p: &Distribution) -> f64 {
    entropy_of(&p.weights).max(0.0)
}

/// Kullback-Leibler divergence `D(p || q)` in nats; `+inf` when the support
/// of `p` is not contained in that of `q`.
pub fn kl(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    Ok(kl_of(&p.weights, &q.weights))
}

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// ChaCha8 keyed by the master seed, positioned on stream `stream_index`.
    /// Distinct stream indices give independent sequences.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Inverse-CDF sampler over a distribution's cumulative weights.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(p: &Distribution) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = p
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        // The last positive-weight symbol must catch u arbitrarily close to 1.
        if let Some(last) = p.weights.iter().rposition(|&w| w > 0.0) {
            for c in &mut cumulative[last..] {
                *c = f64::INFINITY;
            }
        }
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// Draws `n` i.i.d. symbols from `p`, deterministically given `seed`.
pub fn sample_iid(p: &Distribution, n: usize, seed: SeedSpec) -> Vec<Symbol> {
    let sampler = Sampler::new(p);
    let mut rng = seed.rng();
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}
