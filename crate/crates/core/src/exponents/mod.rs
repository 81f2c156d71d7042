//! Error exponents: the expurgated exponent and its ρ optimization, the
//! random-coding baseline, and the `γ_n`/`δ_n` schedules used to state
//! finite-length versions of the expurgation result.
//!
//! All logarithms are base 2; rates and exponents are in bits per symbol.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::STOCHASTIC_TOL;
use crate::error::{Error, Result};

mod expurgated;
pub mod golden;
mod random_coding;
mod schedule;

pub use expurgated::{
    ex_multi_letter_exact, ex_single_letter, optimize_rho, ExponentSolution, DEFAULT_RHO_MAX,
    ENUMERATION_BUDGET, RHO_TOL,
};
pub use random_coding::{gallager_e0, random_coding_exponent, RandomCodingSolution};
pub use schedule::{n0_threshold, schedule, GammaKind, Schedule};

/// Single-letter input distribution `Q` over the channel input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDistribution {
    pmf: Vec<f64>,
}

impl InputDistribution {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::invalid("input distribution", "empty pmf"));
        }
        for (col, &value) in pmf.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry { row: 0, col });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { row: 0, col, value });
            }
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::RowSumViolation { row: 0, sum });
        }
        Ok(InputDistribution { pmf })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution over an empty alphabet");
        InputDistribution {
            pmf: vec![1.0 / size as f64; size],
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub(crate) fn check_alphabet(&self, inputs: usize) -> Result<()> {
        if self.pmf.len() == inputs {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                expected: inputs,
                found: self.pmf.len(),
            })
        }
    }
}

impl TryFrom<Vec<f64>> for InputDistribution {
    type Error = Error;

    fn try_from(pmf: Vec<f64>) -> Result<Self> {
        InputDistribution::new(pmf)
    }
}

impl From<InputDistribution> for Vec<f64> {
    fn from(q: InputDistribution) -> Self {
        q.pmf
    }
}

/// Comma-separated probabilities, e.g. `"0.5,0.5"`.
impl FromStr for InputDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pmf = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("probability {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        InputDistribution::new(pmf)
    }
}

impl fmt::Display for InputDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pmf.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Inclusive arithmetic grid of rates, written `start:stop:step` or as a
/// single rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Upper bound on the number of points a [`RateGrid`] may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

impl RateGrid {
    /// The grid points `start + i·step` not exceeding `stop` (with a
    /// relative slack of `1e-9·step` so that `stop` itself is included).
    pub fn points(&self) -> Vec<f64> {
        if self.step == 0.0 {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

impl FromStr for RateGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(':')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("rate {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = match parts[..] {
            [r] => RateGrid {
                start: r,
                stop: r,
                step: 0.0,
            },
            [start, stop, step] => RateGrid { start, stop, step },
            _ => {
                return Err(Error::Parse(format!(
                    "rate grid {s:?}: expected RATE or START:STOP:STEP"
                )))
            }
        };
        if ![grid.start, grid.stop, grid.step]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::Parse(format!(
                "rate grid {s:?}: values must be finite"
            )));
        }
        if grid.start < 0.0 || grid.stop < grid.start {
            return Err(Error::Parse(format!(
                "rate grid {s:?}: need 0 <= start <= stop"
            )));
        }
        if parts.len() == 3 {
            if grid.step <= 0.0 {
                return Err(Error::Parse(format!(
                    "rate grid {s:?}: step must be positive"
                )));
            }
            if grid.step < grid.stop * 1e-12 {
                return Err(Error::Parse(format!(
                    "rate grid {s:?}: step too small for stop"
                )));
            }
            if (grid.stop - grid.start) / grid.step >= MAX_GRID_POINTS as f64 {
                return Err(Error::Parse(format!("rate grid {s:?}: too many points")));
            }
        }
        Ok(grid)
    }
}
