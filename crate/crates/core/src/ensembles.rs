//! Random codebook ensembles and codebook sizing.
//!
//! Codewords are drawn mutually independently, which in particular makes
//! every pair of codewords independent. Each codebook has its own random
//! stream, derived from `(master_seed, trial_id)` as follows: a ChaCha8
//! generator is keyed by `seed_from_u64(master_seed)` and switched to stream
//! number `trial_id`. Streams never overlap, so trials can be sampled in any
//! order and on any number of threads with identical results.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::InputDistribution;

/// Largest admissible `n·rate`; keeps `M_n ≤ 2^40`.
pub const MAX_LOG2_SIZE: f64 = 40.0;

/// Snaps `x` to the nearest integer when it is within a few ulps of it.
pub(crate) fn near_integer(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= 4.0 * f64::EPSILON * r.abs().max(1.0)).then_some(r)
}

/// `M_n = ⌈2^{n·rate}⌉` and `M'_n = ⌈M_n·(1+ε)⌉`.
///
/// When `n·rate` is (within rounding) an integer, `M_n` is an exact power
/// of two. Products that land within rounding of an integer are snapped
/// before the ceiling, so `10·1.1` gives 11 rather than 12. For `ε > 0` the
/// mother code always has at least one extra codeword.
pub fn codebook_size(rate: f64, n: usize, eps: f64) -> Result<(u64, u64)> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(
            "rate",
            format!("{rate} is not a finite rate >= 0"),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("block length", "n must be at least 1"));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::invalid(
            "eps",
            format!("{eps} is not a finite value >= 0"),
        ));
    }
    let log2_m = n as f64 * rate;
    if log2_m > MAX_LOG2_SIZE {
        return Err(Error::SizeOverflow(log2_m));
    }
    let m_n = match near_integer(log2_m) {
        Some(k) => 1u64 << (k as u32),
        None => log2_m.exp2().ceil() as u64,
    };
    let scaled = m_n as f64 * (1.0 + eps);
    let mut m_prime = match near_integer(scaled) {
        Some(k) => k as u64,
        None => scaled.ceil() as u64,
    };
    if eps > 0.0 {
        m_prime = m_prime.max(m_n + 1);
    }
    Ok((m_n, m_prime))
}

/// Largest-remainder rounding of `n·Q` to a composition summing to `n`.
///
/// Ties in the fractional parts go to the lower symbol index.
pub fn nearest_composition(q: &InputDistribution, n: usize) -> Vec<usize> {
    let target: Vec<f64> = q.pmf().iter().map(|&p| p * n as f64).collect();
    let mut counts: Vec<usize> = target.iter().map(|t| t.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // stable sort keeps lower indices first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = target[a] - target[a].floor();
        let rb = target[b] - target[b].floor();
        rb.total_cmp(&ra)
    });
    if assigned <= n {
        for &a in order.iter().cycle().take(n - assigned) {
            counts[a] += 1;
        }
    } else {
        // floors can only overshoot through rounding of n·Q; take back from
        // the smallest remainders
        let mut excess = assigned - n;
        for &a in order.iter().rev() {
            if excess == 0 {
                break;
            }
            if counts[a] > 0 {
                counts[a] -= 1;
                excess -= 1;
            }
        }
    }
    counts
}

/// How codeword symbols are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Every symbol i.i.d. from `Q`.
    Iid(InputDistribution),
    /// Every codeword a uniformly random arrangement of a fixed
    /// composition; `counts[a]` occurrences of symbol `a`.
    ConstantComposition(Vec<usize>),
}

/// A codeword ensemble together with the mother-code size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    n: usize,
    rate: f64,
    eps: f64,
    m_n: u64,
    m_prime: u64,
}

impl EnsembleSpec {
    /// Ensemble with `M_n = ⌈2^{n·rate}⌉` and `M'_n = ⌈M_n(1+ε)⌉`.
    pub fn new(kind: EnsembleKind, n: usize, rate: f64, eps: f64) -> Result<Self> {
        let (m_n, m_prime) = codebook_size(rate, n, eps)?;
        Self::build(kind, n, rate, eps, m_n, m_prime)
    }

    /// Ensemble with an explicit mother-code size `m_prime ≥ M_n`, e.g.
    /// Gallager's `2M_n − 1`. `eps` is recorded as `m_prime/M_n − 1`.
    pub fn with_mother_size(kind: EnsembleKind, n: usize, rate: f64, m_prime: u64) -> Result<Self> {
        let (m_n, _) = codebook_size(rate, n, 0.0)?;
        if m_prime < m_n {
            return Err(Error::invalid(
                "mother code size",
                format!("{m_prime} is smaller than M_n = {m_n}"),
            ));
        }
        let eps = m_prime as f64 / m_n as f64 - 1.0;
        Self::build(kind, n, rate, eps, m_n, m_prime)
    }

    fn build(
        kind: EnsembleKind,
        n: usize,
        rate: f64,
        eps: f64,
        m_n: u64,
        m_prime: u64,
    ) -> Result<Self> {
        if n == 0 || m_n == 0 || m_prime < m_n {
            return Err(Error::invalid(
                "ensemble",
                format!(
                    "need n >= 1 and M'_n >= M_n >= 1, got n = {n}, M_n = {m_n}, M'_n = {m_prime}"
                ),
            ));
        }
        if let EnsembleKind::ConstantComposition(counts) = &kind {
            if counts.is_empty() {
                return Err(Error::invalid("composition", "empty alphabet"));
            }
            let total: usize = counts.iter().sum();
            if total != n {
                return Err(Error::invalid(
                    "composition",
                    format!("counts sum to {total}, block length is {n}"),
                ));
            }
        }
        Ok(EnsembleSpec {
            kind,
            n,
            rate,
            eps,
            m_n,
            m_prime,
        })
    }

    pub fn kind(&self) -> &EnsembleKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn m_n(&self) -> u64 {
        self.m_n
    }

    pub fn m_prime(&self) -> u64 {
        self.m_prime
    }

    pub fn alphabet_size(&self) -> usize {
        match &self.kind {
            EnsembleKind::Iid(q) => q.len(),
            EnsembleKind::ConstantComposition(c) => c.len(),
        }
    }

    /// Probability that a codeword of this ensemble equals `x`.
    pub fn sequence_probability(&self, x: &[usize]) -> f64 {
        if x.len() != self.n {
            return 0.0;
        }
        match &self.kind {
            EnsembleKind::Iid(q) => x
                .iter()
                .map(|&a| q.pmf().get(a).copied().unwrap_or(0.0))
                .product(),
            EnsembleKind::ConstantComposition(counts) => {
                let mut seen = vec![0usize; counts.len()];
                for &a in x {
                    match seen.get_mut(a) {
                        Some(c) => *c += 1,
                        None => return 0.0,
                    }
                }
                if seen != *counts {
                    return 0.0;
                }
                1.0 / type_class_size(counts)
            }
        }
    }
}

/// Multinomial coefficient `n! / Π counts[a]!`.
fn type_class_size(counts: &[usize]) -> f64 {
    let mut size = 1.0;
    let mut placed = 0usize;
    for &c in counts {
        for i in 1..=c {
            placed += 1;
            size = size * placed as f64 / i as f64;
        }
    }
    size
}

/// One sampled mother code: `m_prime` codewords of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CodebookJson", try_from = "CodebookJson")]
pub struct Codebook {
    spec: EnsembleSpec,
    // row-major, m_prime × n
    symbols: Vec<usize>,
    seed: u64,
    trial_id: u64,
}

#[derive(Serialize, Deserialize)]
struct CodebookJson {
    spec: EnsembleSpec,
    seed: u64,
    trial_id: u64,
    rows: Vec<Vec<usize>>,
}

impl From<Codebook> for CodebookJson {
    fn from(c: Codebook) -> Self {
        CodebookJson {
            rows: c.rows().map(<[usize]>::to_vec).collect(),
            spec: c.spec,
            seed: c.seed,
            trial_id: c.trial_id,
        }
    }
}

impl TryFrom<CodebookJson> for Codebook {
    type Error = Error;

    fn try_from(j: CodebookJson) -> Result<Self> {
        let mut c = Codebook::from_rows(j.spec, j.rows)?;
        c.seed = j.seed;
        c.trial_id = j.trial_id;
        Ok(c)
    }
}

impl Codebook {
    /// Wraps explicit codewords; checks count, lengths, symbols and (for
    /// constant-composition ensembles) every row's composition.
    pub fn from_rows(spec: EnsembleSpec, rows: Vec<Vec<usize>>) -> Result<Self> {
        let spec = EnsembleSpec::build(
            spec.kind,
            spec.n,
            spec.rate,
            spec.eps,
            spec.m_n,
            spec.m_prime,
        )?;
        if rows.len() as u64 != spec.m_prime {
            return Err(Error::invalid(
                "codebook",
                format!("{} rows, ensemble has M'_n = {}", rows.len(), spec.m_prime),
            ));
        }
        let k = spec.alphabet_size();
        let mut symbols = Vec::with_capacity(rows.len() * spec.n);
        for row in &rows {
            if row.len() != spec.n {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: spec.n,
                });
            }
            if let Some(&bad) = row.iter().find(|&&a| a >= k) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    size: k,
                });
            }
            if matches!(spec.kind, EnsembleKind::ConstantComposition(_))
                && spec.sequence_probability(row) == 0.0
            {
                return Err(Error::invalid("codebook", "row violates the composition"));
            }
            symbols.extend_from_slice(row);
        }
        Ok(Codebook {
            spec,
            symbols,
            seed: 0,
            trial_id: 0,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Number of codewords, `M'_n`.
    pub fn len(&self) -> usize {
        self.symbols.len() / self.spec.n
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trial_id(&self) -> u64 {
        self.trial_id
    }

    /// Codeword `m` (0-based).
    pub fn row(&self, m: usize) -> &[usize] {
        &self.symbols[m * self.spec.n..(m + 1) * self.spec.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[usize]> {
        self.symbols.chunks_exact(self.spec.n)
    }
}

/// Generator for codebook `trial_id` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_id);
    rng
}

/// Draws a mother code of `M'_n` independent codewords.
pub fn sample_codebook(spec: &EnsembleSpec, master_seed: u64, trial_id: u64) -> Codebook {
    let mut rng = trial_rng(master_seed, trial_id);
    let rows = spec.m_prime as usize;
    let n = spec.n;
    let mut symbols = Vec::with_capacity(rows * n);
    match &spec.kind {
        EnsembleKind::Iid(q) => {
            let dist = WeightedIndex::new(q.pmf()).expect("validated pmf has positive mass");
            symbols.extend((0..rows * n).map(|_| dist.sample(&mut rng)));
        }
        EnsembleKind::ConstantComposition(counts) => {
            let base: Vec<usize> = counts
                .iter()
                .enumerate()
                .flat_map(|(a, &c)| std::iter::repeat_n(a, c))
                .collect();
            let mut row = base.clone();
            for _ in 0..rows {
                row.copy_from_slice(&base);
                row.shuffle(&mut rng);
                symbols.extend_from_slice(&row);
            }
        }
    }
    Codebook {
        spec: spec.clone(),
        symbols,
        seed: master_seed,
        trial_id,
    }
}
