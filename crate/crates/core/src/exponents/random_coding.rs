use serde::{Deserialize, Serialize};

use super::{golden, InputDistribution, RHO_TOL};
use crate::channel::Channel;
use crate::error::{Error, Result};

/// Gallager's `E_0(ρ, Q) = −log2 Σ_y (Σ_a Q(a)·W(y|a)^{1/(1+ρ)})^{1+ρ}`.
pub fn gallager_e0(rho: f64, q: &InputDistribution, ch: &Channel) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange {
            rho,
            lo: 0.0,
            hi: 1.0,
        });
    }
    q.check_alphabet(ch.inputs())?;
    let inv = 1.0 / (1.0 + rho);
    let mut total = 0.0;
    for y in 0..ch.outputs() {
        let inner: f64 = q
            .pmf()
            .iter()
            .enumerate()
            .filter(|&(a, &qa)| qa > 0.0 && ch.prob(a, y) > 0.0)
            .map(|(a, &qa)| qa * ch.prob(a, y).powf(inv))
            .sum();
        if inner > 0.0 {
            total += inner.powf(1.0 + rho);
        }
    }
    Ok(-total.log2())
}

/// Random-coding exponent at one rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomCodingSolution {
    pub rate: f64,
    pub rho_star: f64,
    pub e_r: f64,
}

/// `E_r(R) = max_{ρ∈[0,1]} E_0(ρ, Q) − ρR` by golden-section search.
///
/// When the objective is nonpositive on the whole interval the maximizer is
/// `ρ = 0` with `E_r = 0`.
pub fn random_coding_exponent(
    rate: f64,
    q: &InputDistribution,
    ch: &Channel,
) -> Result<RandomCodingSolution> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(
            "rate",
            format!("{rate} is not a finite rate >= 0"),
        ));
    }
    q.check_alphabet(ch.inputs())?;
    let objective = |rho: f64| gallager_e0(rho, q, ch).expect("rho within [0, 1]") - rho * rate;
    let best = golden::maximize(objective, 0.0, 1.0, RHO_TOL);
    Ok(RandomCodingSolution {
        rate,
        rho_star: best.x,
        e_r: best.value,
    })
}
