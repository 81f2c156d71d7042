//! Per-codeword error probabilities and exponents, the census of codewords
//! above the expurgation threshold, and expurgation itself.
//!
//! Codeword indices are 0-based throughout.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{BhattMatrix, Channel};
use crate::ensembles::{near_integer, Codebook};
use crate::error::{Error, Result};

/// Output-space size up to which [`exact_ml_error`] enumerates.
pub const EXACT_OUTPUT_BUDGET: f64 = (1u64 << 20) as f64;

/// Relative gap below which two likelihoods count as tied in ML decoding.
///
/// Products of the same factors taken in different orders can differ in the
/// last bits; such near-ties go to the lower index like exact ties.
pub const ML_TIE_RTOL: f64 = 1e-12;

/// Mother-code size above which union-bound sums use compensated addition.
const COMPENSATED_SUM_ABOVE: usize = 10_000;

/// How per-codeword error probabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EvalMethod {
    /// Union-Bhattacharyya bound `Σ_{k≠m} Z_n(x_m, x_k)`.
    #[default]
    #[serde(rename = "ub")]
    UnionBound,
    /// Exact ML error probability by enumerating the output space.
    #[serde(rename = "exact")]
    Exact,
}

impl fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMethod::UnionBound => "ub",
            EvalMethod::Exact => "exact",
        })
    }
}

impl FromStr for EvalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ub" => Ok(EvalMethod::UnionBound),
            "exact" => Ok(EvalMethod::Exact),
            other => Err(Error::Parse(format!(
                "method {other:?}: expected ub or exact"
            ))),
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_index(code: &Codebook, m: usize) -> Result<()> {
    if m < code.len() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: m,
            size: code.len(),
        })
    }
}

fn check_code_alphabet(code: &Codebook, inputs: usize) -> Result<()> {
    if code.spec().alphabet_size() == inputs {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch {
            expected: inputs,
            found: code.spec().alphabet_size(),
        })
    }
}

/// `Σ_{k≠m} Z_n(x_m, x_k)`, an upper bound on the ML error probability of
/// codeword `m`. May exceed 1.
pub fn union_bhattacharyya_bound(code: &Codebook, m: usize, bm: &BhattMatrix) -> Result<f64> {
    check_index(code, m)?;
    check_code_alphabet(code, bm.size())?;
    let xm = code.row(m);
    let terms = code
        .rows()
        .enumerate()
        .filter(|&(k, _)| k != m)
        .map(|(_, xk)| bm.sequence_unchecked(xm, xk));
    Ok(if code.len() > COMPENSATED_SUM_ABOVE {
        let mut acc = CompensatedSum::default();
        terms.for_each(|t| acc.add(t));
        acc.value()
    } else {
        terms.sum()
    })
}

/// Union-Bhattacharyya bounds of every codeword.
///
/// Each pair coefficient is computed once. Terms are added in increasing
/// competitor index, so entries equal [`union_bhattacharyya_bound`] bit for
/// bit.
pub fn union_bhattacharyya_bounds(code: &Codebook, bm: &BhattMatrix) -> Result<Vec<f64>> {
    check_code_alphabet(code, bm.size())?;
    let len = code.len();
    let mut acc = vec![CompensatedSum::default(); len];
    let compensated = len > COMPENSATED_SUM_ABOVE;
    for m in 0..len {
        let xm = code.row(m);
        for k in (m + 1)..len {
            let z = bm.sequence_unchecked(xm, code.row(k));
            if compensated {
                acc[m].add(z);
                acc[k].add(z);
            } else {
                acc[m].sum += z;
                acc[k].sum += z;
            }
        }
    }
    Ok(acc.iter().map(CompensatedSum::value).collect())
}

/// Exact ML block-error probabilities of every codeword.
///
/// Enumerates all `y ∈ Y^n`; the decoder picks the largest likelihood,
/// with ties (within [`ML_TIE_RTOL`]) going to the lowest index.
pub fn exact_ml_errors(code: &Codebook, ch: &Channel) -> Result<Vec<f64>> {
    check_code_alphabet(code, ch.inputs())?;
    let n = code.n();
    let outputs = ch.outputs();
    let needed = (outputs as f64).powi(n as i32);
    if needed > EXACT_OUTPUT_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            budget: EXACT_OUTPUT_BUDGET,
        });
    }
    let len = code.len();
    let mut errors = vec![0.0; len];
    let mut likelihood = vec![0.0; len];
    let mut y = vec![0usize; n];
    loop {
        for (m, x) in code.rows().enumerate() {
            likelihood[m] = x.iter().zip(&y).map(|(&a, &b)| ch.prob(a, b)).product();
        }
        let mut decoded = 0;
        for k in 1..len {
            if likelihood[k] > likelihood[decoded] * (1.0 + ML_TIE_RTOL) {
                decoded = k;
            }
        }
        for (m, err) in errors.iter_mut().enumerate() {
            if m != decoded {
                *err += likelihood[m];
            }
        }
        // next output sequence (odometer, last position fastest)
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(errors.into_iter().map(|e: f64| e.min(1.0)).collect());
            }
            pos -= 1;
            y[pos] += 1;
            if y[pos] < outputs {
                break;
            }
            y[pos] = 0;
        }
    }
}

/// Exact ML error probability of codeword `m`; see [`exact_ml_errors`].
pub fn exact_ml_error(code: &Codebook, m: usize, ch: &Channel) -> Result<f64> {
    check_index(code, m)?;
    Ok(exact_ml_errors(code, ch)?[m])
}

/// `−(1/n)·log2(pe)`; `+∞` when `pe = 0`. Negative when `pe > 1`.
pub fn codeword_exponent(pe: f64, n: usize) -> f64 {
    if pe == 0.0 {
        f64::INFINITY
    } else {
        -pe.log2() / n as f64
    }
}

/// Error probability and exponent of one codeword.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodewordEval {
    pub m: usize,
    pub pe_bound: f64,
    pub pe_exact: Option<f64>,
    /// `E_{m,n}` from `pe_exact` when present, else from `pe_bound`.
    /// Serialized as `null` when infinite.
    pub exponent: f64,
    pub infinite: bool,
}

impl CodewordEval {
    fn new(m: usize, n: usize, pe_bound: f64, pe_exact: Option<f64>) -> Self {
        let pe = pe_exact.unwrap_or(pe_bound);
        CodewordEval {
            m,
            pe_bound,
            pe_exact,
            exponent: codeword_exponent(pe, n),
            infinite: pe == 0.0,
        }
    }
}

/// Evaluates every codeword of `code`.
pub fn evaluate_codewords(
    code: &Codebook,
    ch: &Channel,
    bm: &BhattMatrix,
    method: EvalMethod,
) -> Result<Vec<CodewordEval>> {
    let bounds = union_bhattacharyya_bounds(code, bm)?;
    let exact = match method {
        EvalMethod::UnionBound => None,
        EvalMethod::Exact => Some(exact_ml_errors(code, ch)?),
    };
    let n = code.n();
    Ok(bounds
        .iter()
        .enumerate()
        .map(|(m, &b)| CodewordEval::new(m, n, b, exact.as_ref().map(|e| e[m])))
        .collect())
}

/// `⌈m_n·(1+eps1)⌉`, snapping products within rounding of an integer.
pub fn required_good(m_n: u64, eps1: f64) -> u64 {
    let x = m_n as f64 * (1.0 + eps1);
    match near_integer(x) {
        Some(k) => k as u64,
        None => x.ceil() as u64,
    }
}

/// Which codewords clear the threshold, and whether enough of them do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialCensus {
    /// `E_ex − δ_n`, bits/symbol.
    pub threshold: f64,
    /// `φ_m`: exponent strictly above the threshold.
    pub phi: Vec<bool>,
    /// `Φ`, the number of codewords above the threshold.
    pub big_phi: u64,
    /// `Ψ = M'_n − Φ`.
    pub big_psi: u64,
    pub m_n: u64,
    pub eps1: f64,
    /// `⌈M_n(1+ε₁)⌉`.
    pub required: u64,
    /// `Φ ≥ ⌈M_n(1+ε₁)⌉`.
    pub pass: bool,
}

impl TrialCensus {
    pub fn m_prime(&self) -> u64 {
        self.big_phi + self.big_psi
    }
}

/// Counts codewords whose exponent is strictly above `threshold` (`+∞`
/// always counts).
pub fn census(evals: &[CodewordEval], threshold: f64, m_n: u64, eps1: f64) -> TrialCensus {
    let phi: Vec<bool> = evals.iter().map(|e| e.exponent > threshold).collect();
    let big_phi = phi.iter().filter(|&&p| p).count() as u64;
    let required = required_good(m_n, eps1);
    TrialCensus {
        threshold,
        big_psi: phi.len() as u64 - big_phi,
        phi,
        big_phi,
        m_n,
        eps1,
        required,
        pass: big_phi >= required,
    }
}

/// At least `M_n` codewords clear the threshold.
pub fn is_good_mother_code(c: &TrialCensus) -> bool {
    c.big_phi >= c.m_n
}

/// The code left after expurgation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpurgatedCode {
    /// Surviving codeword indices, ascending.
    pub kept: Vec<usize>,
    pub min_exponent: f64,
    /// `(1/n)·log2 |kept|`.
    pub achieved_rate: f64,
}

fn by_exponent_desc(a: &CodewordEval, b: &CodewordEval) -> Ordering {
    b.exponent.total_cmp(&a.exponent).then(a.m.cmp(&b.m))
}

/// Keeps the `keep` codewords with the largest exponents (ties to the lower
/// index).
pub fn expurgate(code: &Codebook, evals: &[CodewordEval], keep: usize) -> Result<ExpurgatedCode> {
    if evals.len() != code.len() {
        return Err(Error::LengthMismatch {
            left: evals.len(),
            right: code.len(),
        });
    }
    if keep > evals.len() {
        return Err(Error::KeepTooLarge {
            keep,
            available: evals.len(),
        });
    }
    if keep == 0 {
        return Err(Error::invalid("keep", "must retain at least one codeword"));
    }
    let mut order: Vec<&CodewordEval> = evals.iter().collect();
    order.sort_by(|a, b| by_exponent_desc(a, b));
    let mut kept: Vec<usize> = order[..keep].iter().map(|e| e.m).collect();
    let min_exponent = order[..keep]
        .iter()
        .map(|e| e.exponent)
        .fold(f64::INFINITY, f64::min);
    kept.sort_unstable();
    Ok(ExpurgatedCode {
        kept,
        min_exponent,
        achieved_rate: (keep as f64).log2() / code.n() as f64,
    })
}
