use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Choice of the confidence sequence `γ_n`.
///
/// `SqrtExp` and `Poly` both grow without bound while `(log γ_n)/n → 0`.
/// `Constant` does not grow; it exists to reproduce the fixed-γ classical
/// argument (`γ = 2` gives the worst-half expurgation).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GammaKind {
    /// `γ_n = 2^{√n}`.
    #[default]
    SqrtExp,
    /// `γ_n = n^k`, `k > 0`.
    Poly(f64),
    /// `γ_n = g` for every n, `g > 1`.
    Constant(f64),
}

impl GammaKind {
    /// `log2 γ_n`.
    pub fn log2_gamma(&self, n: usize) -> f64 {
        match *self {
            GammaKind::SqrtExp => (n as f64).sqrt(),
            GammaKind::Poly(k) => k * (n as f64).log2(),
            GammaKind::Constant(g) => g.log2(),
        }
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.log2_gamma(n).exp2()
    }
}

impl fmt::Display for GammaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaKind::SqrtExp => f.write_str("sqrt-exp"),
            GammaKind::Poly(k) => write!(f, "poly:{k}"),
            GammaKind::Constant(g) => write!(f, "const:{g}"),
        }
    }
}

/// Accepts `sqrt-exp`, `poly:K` and `const:G`.
impl FromStr for GammaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("sqrt-exp") {
            return Ok(GammaKind::SqrtExp);
        }
        let (name, arg) = s.split_once(':').ok_or_else(|| {
            Error::Parse(format!(
                "gamma kind {s:?}: expected sqrt-exp, poly:K or const:G"
            ))
        })?;
        let value: f64 = arg
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("gamma parameter {arg:?}: {e}")))?;
        match name.trim() {
            "poly" if value > 0.0 && value.is_finite() => Ok(GammaKind::Poly(value)),
            "poly" => Err(Error::Parse(format!(
                "poly exponent must be positive, got {arg}"
            ))),
            "const" if value > 1.0 && value.is_finite() => Ok(GammaKind::Constant(value)),
            "const" => Err(Error::Parse(format!(
                "constant gamma must exceed 1, got {arg}"
            ))),
            other => Err(Error::Parse(format!("unknown gamma kind {other:?}"))),
        }
    }
}

impl TryFrom<String> for GammaKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GammaKind> for String {
    fn from(g: GammaKind) -> Self {
        g.to_string()
    }
}

/// `γ_n`, `δ_n` and the probability bounds they imply at one block length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: usize,
    pub rho_hat: f64,
    pub gamma_kind: GammaKind,
    pub gamma: f64,
    /// `δ_n = (ρ̂/n)·log2 γ_n`.
    pub delta: f64,
    /// `1 − 1/γ_n`: per-codeword probability of clearing the threshold.
    pub lemma_bound: f64,
    /// `1 − 1/√γ_n`: probability bound on the good-mother-code event.
    pub theorem_bound: f64,
}

pub fn schedule(n: usize, rho_hat: f64, gamma_kind: GammaKind) -> Schedule {
    assert!(n >= 1, "block length must be positive");
    let log2_gamma = gamma_kind.log2_gamma(n);
    Schedule {
        n,
        rho_hat,
        gamma_kind,
        gamma: log2_gamma.exp2(),
        delta: rho_hat / n as f64 * log2_gamma,
        lemma_bound: 1.0 - (-log2_gamma).exp2(),
        theorem_bound: 1.0 - (-0.5 * log2_gamma).exp2(),
    }
}

const N0_LIMIT: usize = 1 << 31;

/// Smallest block length n with `(ε − ε₁)·√γ_n > 1 + ε`.
///
/// Beyond this n the Markov bound on the number of bad codewords forces
/// the good-mother-code event to hold with probability at least
/// `1 − 1/√γ_n`. Doubling locates a passing n, bisection then finds the
/// smallest one; the condition is monotone for growing `γ_n`.
pub fn n0_threshold(eps: f64, eps1: f64, gamma_kind: GammaKind) -> Result<usize> {
    if !(eps1 > 0.0 && eps1 < eps && eps.is_finite()) {
        return Err(Error::invalid(
            "epsilons",
            format!("need 0 < eps1 < eps, got eps = {eps}, eps1 = {eps1}"),
        ));
    }
    let lhs_log = (eps - eps1).log2();
    let rhs_log = (1.0 + eps).log2();
    let holds = |n: usize| lhs_log + 0.5 * gamma_kind.log2_gamma(n) > rhs_log;

    if holds(1) {
        return Ok(1);
    }
    let mut lo = 1usize;
    let mut hi = 2usize;
    while !holds(hi) {
        if hi >= N0_LIMIT {
            return Err(Error::NoConvergence);
        }
        lo = hi;
        hi *= 2;
    }
    // invariant: !holds(lo), holds(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
