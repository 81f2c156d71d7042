use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::stats::{quantile_sorted, Interval};

/// One line of the per-n CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NRow {
    pub n: usize,
    pub m_n: u64,
    pub m_prime: u64,
    pub rho_hat: f64,
    pub e_ex: f64,
    pub delta: f64,
    pub gamma: f64,
    pub threshold: f64,
    /// Fraction of trials with `Φ ≥ ⌈M_n(1+ε₁)⌉`.
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_phi: f64,
    pub mean_psi: f64,
    /// Pooled fraction of codewords above the threshold.
    pub lemma_rate: f64,
    pub lemma_bound: f64,
    pub theorem_bound: f64,
    /// Fraction of trials with `Ψ > M'_n/√γ_n`.
    pub psi_tail_rate: f64,
    pub psi_tail_bound: f64,
    /// `None` when no n₀ exists for the γ choice.
    pub n0: Option<usize>,
}

impl NRow {
    pub fn wilson_ci(&self) -> Interval {
        Interval {
            lo: self.ci_lo,
            hi: self.ci_hi,
        }
    }
}

/// Aggregated statistics at one block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NReport {
    #[serde(flatten)]
    pub row: NRow,
    pub trials: u64,
    /// Rate fed to the ρ optimization.
    pub threshold_rate: f64,
    pub rho_capped: bool,
    pub passes: u64,
    /// `M'_n(1 − 1/γ_n)`.
    pub mean_phi_bound: f64,
    pub mean_phi_se: f64,
    /// Binomial standard error at `lemma_bound` over all pooled codewords.
    pub lemma_se: f64,
    /// Binomial standard error at `psi_tail_bound` over trials.
    pub psi_tail_se: f64,
    /// Binomial standard error at `theorem_bound` over trials.
    pub theorem_se: f64,
    pub concentration: Concentration,
}

/// Location and spread of the pooled per-codeword exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    /// `E_ex` at the threshold rate.
    pub e_ex: f64,
    pub delta: f64,
    /// `None` when the quantile is `+∞`.
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub iqr: Option<f64>,
    pub infinite_fraction: f64,
}

impl Concentration {
    pub(crate) fn from_exponents(mut exps: Vec<f64>, e_ex: f64, delta: f64) -> Self {
        exps.sort_by(f64::total_cmp);
        let finite = |x: f64| x.is_finite().then_some(x);
        let q1 = quantile_sorted(&exps, 0.25);
        let q3 = quantile_sorted(&exps, 0.75);
        Concentration {
            e_ex,
            delta,
            median: finite(quantile_sorted(&exps, 0.5)),
            q1: finite(q1),
            q3: finite(q3),
            iqr: finite(q3 - q1),
            infinite_fraction: exps.iter().filter(|x| x.is_infinite()).count() as f64
                / exps.len() as f64,
        }
    }
}

/// A statistical contract check against a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractCheck {
    pub name: String,
    pub n: Option<usize>,
    pub observed: f64,
    pub bound: f64,
    /// Allowed deviation in the unfavourable direction.
    pub slack: f64,
    pub pass: bool,
}

/// Output of [`super::Experiment::run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub per_n: Vec<NReport>,
    pub checks: Vec<ContractCheck>,
    pub all_pass: bool,
}

impl ExperimentResult {
    pub fn rows(&self) -> impl Iterator<Item = &NRow> {
        self.per_n.iter().map(|r| &r.row)
    }

    pub fn at(&self, n: usize) -> Option<&NReport> {
        self.per_n.iter().find(|r| r.row.n == n)
    }
}

/// Histogram of pooled per-codeword exponents.
///
/// The finite range is centred on the threshold, so with an even number of
/// bins the threshold is a bin edge. Bins are left-open, `(lo, hi]`, with
/// the first bin also holding its lower edge; an exponent equal to the
/// threshold therefore lands below it, matching the strict census rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Infinite exponents (`P_e = 0`).
    pub overflow: u64,
    pub total: u64,
    pub threshold: f64,
    pub concentration: Concentration,
}

impl Histogram {
    pub(crate) fn build(
        exps: Vec<f64>,
        bins: usize,
        threshold: f64,
        e_ex: f64,
        delta: f64,
    ) -> Self {
        assert!(bins >= 2, "histogram needs at least two bins");
        let half = exps
            .iter()
            .filter(|x| x.is_finite())
            .map(|x| (x - threshold).abs())
            .fold(0.0, f64::max);
        let half = if half > 0.0 {
            half * (1.0 + 1e-12)
        } else {
            1.0
        };
        let lo = threshold - half;
        let width = 2.0 * half / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        if bins.is_multiple_of(2) {
            edges[bins / 2] = threshold;
        }
        let mut counts = vec![0u64; bins];
        let mut overflow = 0;
        for &x in &exps {
            if x.is_infinite() {
                overflow += 1;
                continue;
            }
            // first edge index at or above x; bin i is (edges[i], edges[i+1]]
            let i = edges[1..].partition_point(|&e| e < x).min(bins - 1);
            counts[i] += 1;
        }
        Histogram {
            edges,
            counts,
            overflow,
            total: exps.len() as u64,
            threshold,
            concentration: Concentration::from_exponents(exps, e_ex, delta),
        }
    }
}
