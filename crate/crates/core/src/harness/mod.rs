//! Monte-Carlo experiments on random mother codes.
//!
//! For every block length in the grid the harness fixes the threshold
//! `E_ex − δ_n`, samples `trials` independent mother codes, evaluates every
//! codeword and aggregates:
//!
//! - `p_hat`, the frequency of `Φ ≥ ⌈M_n(1+ε₁)⌉`, with a Wilson interval;
//! - the pooled fraction of codewords above the threshold (`lemma_rate`);
//! - the mean of `Φ` and the tail frequency of `Ψ > M'_n/√γ_n`.
//!
//! Trials are keyed by `(n, trial_id)` and run on a rayon pool; results are
//! collected in trial order, so the output does not depend on the number of
//! workers.

use std::path::Path;

use rayon::prelude::*;

use crate::channel::{BhattMatrix, Channel};
use crate::ensembles::{
    codebook_size, nearest_composition, sample_codebook, Codebook, EnsembleKind, EnsembleSpec,
};
use crate::error::{Error, Result};
use crate::exponents::{n0_threshold, optimize_rho, schedule, ExponentSolution, Schedule};
use crate::expurgation::{census, evaluate_codewords, CodewordEval, TrialCensus};
use crate::stats::{binomial_se, mean_and_se, wilson_interval, SE_SLACK, Z_95};

mod config;
mod output;
mod report;

pub use config::{CodeKind, ExperimentConfig, MotherSize, RateConvention};
pub use output::{csv_string, write_run};
pub use report::{Concentration, ContractCheck, ExperimentResult, Histogram, NReport, NRow};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EXPU_THREADS";

/// Worker count from [`THREADS_ENV`]; `None` means rayon's default.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| parse_threads(&v))
}

fn parse_threads(v: &str) -> Option<usize> {
    v.trim().parse::<usize>().ok().filter(|&t| t > 0)
}

/// Everything fixed at one block length before any trial runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPlan {
    pub n: usize,
    pub spec: EnsembleSpec,
    /// Rate fed to the ρ optimization.
    pub threshold_rate: f64,
    pub solution: ExponentSolution,
    pub schedule: Schedule,
    /// `E_ex − δ_n`.
    pub threshold: f64,
}

/// One sampled and evaluated mother code.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub code: Codebook,
    pub evals: Vec<CodewordEval>,
    pub census: TrialCensus,
}

/// A validated configuration bound to its channel.
#[derive(Debug, Clone)]
pub struct Experiment {
    cfg: ExperimentConfig,
    channel: Channel,
    bm: BhattMatrix,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig, channel: Channel) -> Result<Self> {
        cfg.validate()?;
        cfg.q.check_alphabet(channel.inputs())?;
        let bm = channel.bhattacharyya_matrix();
        Ok(Experiment { cfg, channel, bm })
    }

    /// Reads the channel from `cfg.channel_path`.
    pub fn load(cfg: ExperimentConfig) -> Result<Self> {
        let text = std::fs::read_to_string(&cfg.channel_path)
            .map_err(|e| Error::Io(format!("{}: {e}", cfg.channel_path.display())))?;
        let channel = Channel::from_json_str(&text)?;
        Experiment::new(cfg, channel)
    }

    /// Reads a JSON configuration file and its channel. A relative
    /// `channel_path` is resolved against the configuration's directory.
    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::from_json_str(&text)?;
        if cfg.channel_path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.channel_path = dir.join(&cfg.channel_path);
            }
        }
        Experiment::load(cfg)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    /// Ensemble, threshold rate, optimized exponent and schedule at `n`.
    pub fn plan(&self, n: usize) -> Result<BlockPlan> {
        let cfg = &self.cfg;
        let kind = match cfg.kind {
            CodeKind::Iid => EnsembleKind::Iid(cfg.q.clone()),
            CodeKind::Cc => EnsembleKind::ConstantComposition(nearest_composition(&cfg.q, n)),
        };
        let spec = match cfg.mother_size {
            MotherSize::Eps => EnsembleSpec::new(kind, n, cfg.rate, cfg.eps)?,
            MotherSize::Double => {
                let (m_n, _) = codebook_size(cfg.rate, n, 0.0)?;
                EnsembleSpec::with_mother_size(kind, n, cfg.rate, 2 * m_n - 1)?
            }
        };
        let threshold_rate = match cfg.rate_convention {
            RateConvention::Nominal => cfg.rate,
            RateConvention::Mother => ((spec.m_prime() - 1) as f64).log2() / n as f64,
        };
        // Constant-composition codes are thresholded with the i.i.d. exponent
        // of their empirical composition.
        let q = match spec.kind() {
            EnsembleKind::Iid(q) => q.clone(),
            EnsembleKind::ConstantComposition(counts) => crate::exponents::InputDistribution::new(
                counts.iter().map(|&c| c as f64 / n as f64).collect(),
            )
            .unwrap_or_else(|_| cfg.q.clone()),
        };
        let solution = optimize_rho(threshold_rate, &q, &self.bm, cfg.rho_max)?;
        let schedule = schedule(n, solution.rho_hat, cfg.gamma_kind);
        Ok(BlockPlan {
            n,
            spec,
            threshold_rate,
            threshold: solution.e_ex - schedule.delta,
            solution,
            schedule,
        })
    }

    /// Samples, evaluates and censuses mother code `trial_id` under `plan`.
    pub fn trial(&self, plan: &BlockPlan, trial_id: u64) -> Result<TrialOutcome> {
        let code = sample_codebook(&plan.spec, self.cfg.master_seed, trial_id);
        let evals = evaluate_codewords(&code, &self.channel, &self.bm, self.cfg.method)?;
        let census = census(&evals, plan.threshold, plan.spec.m_n(), self.cfg.eps1);
        Ok(TrialOutcome {
            code,
            evals,
            census,
        })
    }

    /// Census of trial `trial_id` at block length `n`.
    pub fn run_trial(&self, n: usize, trial_id: u64) -> Result<TrialCensus> {
        let plan = self.plan(n)?;
        Ok(self.trial(&plan, trial_id)?.census)
    }

    fn trials_at(&self, plan: &BlockPlan, threads: Option<usize>) -> Result<Vec<TrialOutcome>> {
        let run = || {
            (0..self.cfg.trials)
                .into_par_iter()
                .map(|t| self.trial(plan, t))
                .collect::<Result<Vec<_>>>()
        };
        match threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Io(format!("thread pool: {e}")))?
                .install(run),
            None => run(),
        }
    }

    /// Runs the whole grid with the worker count from [`THREADS_ENV`].
    pub fn run(&self) -> Result<ExperimentResult> {
        self.run_with_threads(threads_from_env())
    }

    /// Runs the whole grid on `threads` workers (rayon's default when
    /// `None`). The result does not depend on `threads`.
    pub fn run_with_threads(&self, threads: Option<usize>) -> Result<ExperimentResult> {
        let n0 = n0_threshold(self.cfg.eps, self.cfg.eps1, self.cfg.gamma_kind).ok();
        let mut per_n = Vec::with_capacity(self.cfg.n_grid.len());
        for &n in &self.cfg.n_grid {
            let plan = self.plan(n)?;
            let outcomes = self.trials_at(&plan, threads)?;
            per_n.push(aggregate(&plan, &outcomes, n0));
        }
        let checks = contract_checks(&per_n);
        Ok(ExperimentResult {
            all_pass: checks.iter().all(|c| c.pass),
            config: self.cfg.clone(),
            per_n,
            checks,
        })
    }

    /// Pooled fraction of codewords above the threshold at `n`, with the
    /// per-codeword guarantee `1 − 1/γ_n`.
    pub fn lemma1_report(&self, n: usize) -> Result<(f64, f64)> {
        let plan = self.plan(n)?;
        let r = aggregate(&plan, &self.trials_at(&plan, threads_from_env())?, None);
        Ok((r.row.lemma_rate, r.row.lemma_bound))
    }

    /// Mean of `Φ` over trials at `n`, with the bound `M'_n(1 − 1/γ_n)`.
    pub fn mean_phi_report(&self, n: usize) -> Result<(f64, f64)> {
        let plan = self.plan(n)?;
        let r = aggregate(&plan, &self.trials_at(&plan, threads_from_env())?, None);
        Ok((r.row.mean_phi, r.mean_phi_bound))
    }

    /// Histogram of all per-codeword exponents at `n`, pooled over trials.
    pub fn concentration_histogram(&self, n: usize, bins: usize) -> Result<Histogram> {
        if bins < 2 {
            return Err(Error::invalid("bins", "need at least 2 bins"));
        }
        let plan = self.plan(n)?;
        let outcomes = self.trials_at(&plan, threads_from_env())?;
        let exps = outcomes
            .iter()
            .flat_map(|o| o.evals.iter().map(|e| e.exponent))
            .collect();
        Ok(Histogram::build(
            exps,
            bins,
            plan.threshold,
            plan.solution.e_ex,
            plan.schedule.delta,
        ))
    }
}

fn aggregate(plan: &BlockPlan, outcomes: &[TrialOutcome], n0: Option<usize>) -> NReport {
    let trials = outcomes.len() as u64;
    let m_prime = plan.spec.m_prime();
    let sched = &plan.schedule;

    let passes = outcomes.iter().filter(|o| o.census.pass).count() as u64;
    let p_hat = passes as f64 / trials as f64;
    let ci = wilson_interval(passes, trials, Z_95);

    let phis: Vec<f64> = outcomes.iter().map(|o| o.census.big_phi as f64).collect();
    let (mean_phi, mean_phi_se) = mean_and_se(&phis);
    let good: u64 = outcomes.iter().map(|o| o.census.big_phi).sum();
    let pooled = trials * m_prime;

    let psi_tail_bound = 1.0 / sched.gamma.sqrt();
    let psi_cut = m_prime as f64 * psi_tail_bound;
    let tail = outcomes
        .iter()
        .filter(|o| o.census.big_psi as f64 > psi_cut)
        .count() as u64;

    let exps = outcomes
        .iter()
        .flat_map(|o| o.evals.iter().map(|e| e.exponent))
        .collect();

    NReport {
        row: NRow {
            n: plan.n,
            m_n: plan.spec.m_n(),
            m_prime,
            rho_hat: plan.solution.rho_hat,
            e_ex: plan.solution.e_ex,
            delta: sched.delta,
            gamma: sched.gamma,
            threshold: plan.threshold,
            p_hat,
            ci_lo: ci.lo,
            ci_hi: ci.hi,
            mean_phi,
            mean_psi: m_prime as f64 - mean_phi,
            lemma_rate: good as f64 / pooled as f64,
            lemma_bound: sched.lemma_bound,
            theorem_bound: sched.theorem_bound,
            psi_tail_rate: tail as f64 / trials as f64,
            psi_tail_bound,
            n0,
        },
        trials,
        threshold_rate: plan.threshold_rate,
        rho_capped: plan.solution.capped,
        passes,
        mean_phi_bound: m_prime as f64 * sched.lemma_bound,
        mean_phi_se,
        lemma_se: binomial_se(sched.lemma_bound, pooled),
        psi_tail_se: binomial_se(psi_tail_bound, trials),
        theorem_se: binomial_se(sched.theorem_bound, trials),
        concentration: Concentration::from_exponents(exps, plan.solution.e_ex, sched.delta),
    }
}

fn at_least(name: &str, n: usize, observed: f64, bound: f64, se: f64) -> ContractCheck {
    let slack = SE_SLACK * se;
    ContractCheck {
        name: name.to_string(),
        n: Some(n),
        observed,
        bound,
        slack,
        pass: observed >= bound - slack,
    }
}

/// The statistical checks behind the experiment's exit status.
///
/// Per n: pooled codeword rate against `1 − 1/γ_n`, mean of `Φ` against
/// `M'_n(1 − 1/γ_n)`, tail of `Ψ` against `1/√γ_n`, and for `n ≥ n₀` the
/// good-mother-code frequency against `1 − 1/√γ_n`, each with a slack of
/// four standard errors. Across n: consecutive `p_hat` values either do not
/// decrease or have overlapping Wilson intervals.
pub fn contract_checks(per_n: &[NReport]) -> Vec<ContractCheck> {
    let mut checks = Vec::new();
    for r in per_n {
        let row = &r.row;
        checks.push(at_least(
            "lemma_rate",
            row.n,
            row.lemma_rate,
            row.lemma_bound,
            r.lemma_se,
        ));
        checks.push(at_least(
            "mean_phi",
            row.n,
            row.mean_phi,
            r.mean_phi_bound,
            r.mean_phi_se,
        ));
        let slack = SE_SLACK * r.psi_tail_se;
        checks.push(ContractCheck {
            name: "psi_tail_rate".into(),
            n: Some(row.n),
            observed: row.psi_tail_rate,
            bound: row.psi_tail_bound,
            slack,
            pass: row.psi_tail_rate <= row.psi_tail_bound + slack,
        });
        if row.n0.is_some_and(|n0| row.n >= n0) {
            checks.push(at_least(
                "p_hat",
                row.n,
                row.p_hat,
                row.theorem_bound,
                r.theorem_se,
            ));
        }
    }
    for w in per_n.windows(2) {
        let (a, b) = (&w[0].row, &w[1].row);
        checks.push(ContractCheck {
            name: "p_hat_monotone".into(),
            n: Some(b.n),
            observed: b.p_hat,
            bound: a.p_hat,
            slack: a.p_hat - a.ci_lo + (b.ci_hi - b.p_hat),
            pass: b.p_hat >= a.p_hat || b.wilson_ci().overlaps(&a.wilson_ci()),
        });
    }
    checks
}
