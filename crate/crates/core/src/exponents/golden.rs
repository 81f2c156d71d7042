//! Golden-section search for the maximum of a concave function on a closed
//! interval.
//!
//! Each iteration shrinks the bracket by `1/φ` and reuses one of the two
//! interior evaluations, so only one new function value is needed per step:
//!
//! ```text
//!     lo        x1   x2        hi
//!     +---------+----+---------+
//! ```
//!
//! If `f(x1) < f(x2)` the maximum lies in `[x1, hi]`, otherwise in
//! `[lo, x2]`. The interior candidate is compared against both endpoints at
//! the end, so maximizers on the boundary are returned exactly.

/// `1/φ = (√5 − 1)/2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum found by [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes `f` over `[lo, hi]` to absolute tolerance `tol` in `x`.
///
/// Ties between candidates favour `lo`, then `hi`, then the interior point.
pub fn maximize<F>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo <= hi && tol > 0.0);
    let f_lo = f(lo);
    let f_hi = f(hi);
    let mut best = Maximum { x: lo, value: f_lo };
    if f_hi > best.value {
        best = Maximum { x: hi, value: f_hi };
    }
    if hi - lo <= tol {
        return best;
    }

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    let f_mid = f(mid);
    if f_mid > best.value {
        best = Maximum {
            x: mid,
            value: f_mid,
        };
    }
    best
}
