use serde::{Deserialize, Serialize};

use super::{golden, InputDistribution};
use crate::channel::BhattMatrix;
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};

/// Default ceiling of the ρ search.
pub const DEFAULT_RHO_MAX: f64 = 64.0;

/// Absolute ρ tolerance of [`optimize_rho`].
pub const RHO_TOL: f64 = 1e-6;

/// Largest number of sequence pairs [`ex_multi_letter_exact`] will visit.
pub const ENUMERATION_BUDGET: f64 = (1u64 << 24) as f64;

fn check_rho_at_least_one(rho: f64) -> Result<()> {
    if rho >= 1.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::RhoOutOfRange {
            rho,
            lo: 1.0,
            hi: f64::INFINITY,
        })
    }
}

/// `E_x(ρ, Q) = −ρ·log2 Σ_{a,b} Q(a)Q(b)·Z(a,b)^{1/ρ}` for an i.i.d. ensemble.
///
/// For i.i.d. `Q^n` the n-letter expression collapses to this single-letter
/// value. Zero coefficients contribute `0` (not NaN); an empty inner sum
/// yields `+∞`.
pub fn ex_single_letter(rho: f64, q: &InputDistribution, bm: &BhattMatrix) -> Result<f64> {
    check_rho_at_least_one(rho)?;
    q.check_alphabet(bm.size())?;
    let inv = 1.0 / rho;
    let p = q.pmf();
    let mut sum = 0.0;
    for (a, &qa) in p.iter().enumerate() {
        if qa == 0.0 {
            continue;
        }
        for (b, &qb) in p.iter().enumerate() {
            let z = bm.get(a, b);
            if qb == 0.0 || z == 0.0 {
                continue;
            }
            sum += qa * qb * z.powf(inv);
        }
    }
    Ok(if sum > 0.0 {
        -rho * sum.log2()
    } else {
        f64::INFINITY
    })
}

/// `E_x^n(ρ, Q^n)` by brute-force enumeration of all pairs of length-n
/// sequences, for i.i.d. and constant-composition ensembles.
///
/// Computes `−(ρ/n)·log2 Σ_{x,x'} Q^n(x)Q^n(x')·Z_n(x,x')^{1/ρ}`. Refuses to
/// run when `|X|^{2n}` exceeds [`ENUMERATION_BUDGET`].
pub fn ex_multi_letter_exact(rho: f64, spec: &EnsembleSpec, bm: &BhattMatrix) -> Result<f64> {
    check_rho_at_least_one(rho)?;
    let k = bm.size();
    let n = spec.n();
    if spec.alphabet_size() != k {
        return Err(Error::AlphabetMismatch {
            expected: k,
            found: spec.alphabet_size(),
        });
    }
    let pairs = (k as f64).powi(2 * n as i32);
    if pairs > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            needed: pairs,
            budget: ENUMERATION_BUDGET,
        });
    }

    let total = k.pow(n as u32);
    let mut support: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut x = vec![0usize; n];
    for idx in 0..total {
        let mut r = idx;
        for s in x.iter_mut().rev() {
            *s = r % k;
            r /= k;
        }
        let w = spec.sequence_probability(&x);
        if w > 0.0 {
            support.push((x.clone(), w));
        }
    }

    let inv = 1.0 / rho;
    let mut sum = 0.0;
    for (x, wx) in &support {
        for (x2, wx2) in &support {
            let z = bm.sequence_unchecked(x, x2);
            if z > 0.0 {
                sum += wx * wx2 * z.powf(inv);
            }
        }
    }
    Ok(if sum > 0.0 {
        -(rho / n as f64) * sum.log2()
    } else {
        f64::INFINITY
    })
}

/// Optimized expurgated exponent at one rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSolution {
    /// Rate in bits/symbol.
    pub rate: f64,
    /// Maximizing ρ ≥ 1.
    pub rho_hat: f64,
    /// `E_x(rho_hat)`.
    pub ex_value: f64,
    /// `ex_value − rho_hat·rate`.
    pub e_ex: f64,
    /// The maximizer sits at the search ceiling.
    pub capped: bool,
    /// Gallager's `s = 1/rho_hat`.
    pub s: f64,
}

/// Maximizes `E_x(ρ, Q) − ρ·rate` over `ρ ∈ [1, rho_max]`.
///
/// The objective is concave in ρ, so golden-section search to [`RHO_TOL`]
/// finds the maximum; both endpoints are also evaluated so that boundary
/// maximizers come out exact. `capped` is set when the maximizer lies within
/// `10·RHO_TOL` of `rho_max`, which happens below the rate where the
/// optimal ρ diverges.
pub fn optimize_rho(
    rate: f64,
    q: &InputDistribution,
    bm: &BhattMatrix,
    rho_max: f64,
) -> Result<ExponentSolution> {
    if !rho_max.is_finite() || rho_max < 1.0 {
        return Err(Error::RhoMaxTooSmall(rho_max));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(
            "rate",
            format!("{rate} is not a finite rate >= 0"),
        ));
    }
    q.check_alphabet(bm.size())?;
    let ex = |rho: f64| ex_single_letter(rho, q, bm).expect("rho within [1, rho_max]");
    let best = golden::maximize(|rho| ex(rho) - rho * rate, 1.0, rho_max, RHO_TOL);
    let rho_hat = best.x;
    let ex_value = ex(rho_hat);
    Ok(ExponentSolution {
        rate,
        rho_hat,
        ex_value,
        e_ex: ex_value - rho_hat * rate,
        capped: rho_max - rho_hat <= 10.0 * RHO_TOL,
        s: 1.0 / rho_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::ensembles::EnsembleKind;

    fn bsc_bm() -> BhattMatrix {
        Channel::bsc(0.1).unwrap().bhattacharyya_matrix()
    }

    fn noiseless_bm() -> BhattMatrix {
        Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap()
            .bhattacharyya_matrix()
    }

    #[test]
    fn single_letter_examples() {
        let q = InputDistribution::uniform(2);
        let e1 = ex_single_letter(1.0, &q, &bsc_bm()).unwrap();
        assert!((e1 - -(0.8f64).log2()).abs() < 1e-12);
        assert!((e1 - 0.321928).abs() < 1e-6);
        assert!((ex_single_letter(3.0, &q, &noiseless_bm()).unwrap() - 3.0).abs() < 1e-12);
        let e2 = ex_single_letter(2.0, &q, &bsc_bm()).unwrap();
        let closed = -2.0 * (0.5 + 0.5 * 0.6f64.sqrt()).log2();
        assert!((e2 - closed).abs() < 1e-12);
        assert!((e2 - 0.34502).abs() < 1e-5);
    }

    #[test]
    fn single_letter_errors() {
        let q = InputDistribution::uniform(2);
        assert!(matches!(
            ex_single_letter(0.5, &q, &bsc_bm()),
            Err(Error::RhoOutOfRange { .. })
        ));
        assert!(ex_single_letter(f64::NAN, &q, &bsc_bm()).is_err());
        assert!(matches!(
            ex_single_letter(1.0, &InputDistribution::uniform(3), &bsc_bm()),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn multi_letter_matches_single_letter_for_iid() {
        let q = InputDistribution::uniform(2);
        let spec = EnsembleSpec::new(EnsembleKind::Iid(q.clone()), 2, 0.0, 0.1).unwrap();
        let multi = ex_multi_letter_exact(1.0, &spec, &bsc_bm()).unwrap();
        assert!((multi - 0.321928).abs() < 1e-6);
        assert!((multi - ex_single_letter(1.0, &q, &bsc_bm()).unwrap()).abs() < 1e-12);

        let spec1 = EnsembleSpec::new(EnsembleKind::Iid(q), 1, 0.0, 0.1).unwrap();
        assert!((ex_multi_letter_exact(1.0, &spec1, &noiseless_bm()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multi_letter_constant_composition_type_class() {
        // Type class of (1,1) at n=2 is {01, 10}, each with probability 1/2.
        // Ordered pairs: two identical (Z_n = 1), two crossed (Z_n = 0.6²).
        let spec =
            EnsembleSpec::new(EnsembleKind::ConstantComposition(vec![1, 1]), 2, 0.0, 0.1).unwrap();
        let pairs = [1.0, 0.36, 0.36, 1.0f64];
        let inner: f64 = pairs.iter().map(|z| 0.25 * z).sum();
        let oracle = -0.5 * inner.log2();
        let got = ex_multi_letter_exact(1.0, &spec, &bsc_bm()).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        // rho = 2 takes square roots of the pair coefficients
        let inner2: f64 = pairs.iter().map(|z| 0.25 * z.sqrt()).sum();
        let got2 = ex_multi_letter_exact(2.0, &spec, &bsc_bm()).unwrap();
        assert!((got2 - -(2.0 / 2.0) * inner2.log2()).abs() < 1e-12);
    }

    #[test]
    fn multi_letter_budget() {
        let spec = EnsembleSpec::new(
            EnsembleKind::Iid(InputDistribution::uniform(2)),
            13,
            0.0,
            0.1,
        )
        .unwrap();
        assert!(matches!(
            ex_multi_letter_exact(1.0, &spec, &bsc_bm()),
            Err(Error::BudgetExceeded { .. })
        ));
        let spec8 = EnsembleSpec::new(
            EnsembleKind::Iid(InputDistribution::uniform(2)),
            8,
            0.0,
            0.1,
        )
        .unwrap();
        assert!(ex_multi_letter_exact(1.0, &spec8, &bsc_bm()).is_ok());
    }

    #[test]
    fn optimize_boundary_at_one() {
        let q = InputDistribution::uniform(2);
        let sol = optimize_rho(0.05, &q, &bsc_bm(), 64.0).unwrap();
        assert_eq!(sol.rho_hat, 1.0);
        assert!((sol.e_ex - 0.271928).abs() < 1e-6);
        assert!(!sol.capped);
        assert_eq!(sol.s * sol.rho_hat, 1.0);
        assert_eq!(sol.e_ex, sol.ex_value - sol.rho_hat * sol.rate);
    }

    #[test]
    fn optimize_hits_ceiling_on_noiseless_channel() {
        let q = InputDistribution::uniform(2);
        let sol = optimize_rho(0.5, &q, &noiseless_bm(), 64.0).unwrap();
        assert_eq!(sol.rho_hat, 64.0);
        assert!(sol.capped);
        assert!((sol.e_ex - 32.0).abs() < 1e-9);
    }

    #[test]
    fn optimize_errors() {
        let q = InputDistribution::uniform(2);
        assert!(matches!(
            optimize_rho(0.1, &q, &bsc_bm(), 0.5),
            Err(Error::RhoMaxTooSmall(_))
        ));
        assert!(optimize_rho(-0.1, &q, &bsc_bm(), 64.0).is_err());
    }
}
