//! Bracketing and bisection for the smallest root of an increasing-ish gap
//! function that is negative near zero.

use crate::error::{Error, Result};

/// Largest element count the bracket scan will consider.
pub const M_MAX: f64 = (1u64 << 24) as f64;

/// Linear sub-scan resolution inside the bracketing octave.
pub const SUBSCAN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Required `|f(root)|`.
    pub gap: f64,
    /// Required bracket width relative to its upper end.
    pub rel_width: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            gap: 1e-10,
            rel_width: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    /// Upper end of the final bracket; `f(value) >= 0`.
    pub value: f64,
    pub gap: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

/// Bisection on `[lo, hi]` where `f(lo) < 0 <= f(hi)`.
///
/// Stops once both tolerances hold or the bracket can no longer be split in
/// floating point. Always returns the nonnegative side.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    f_hi: f64,
    tol: Tolerance,
) -> Root {
    let mut f_hi = f_hi;
    let mut evaluations = 0;
    loop {
        if f_hi.abs() <= tol.gap && hi - lo <= tol.rel_width * hi.abs() {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        evaluations += 1;
        if fm >= 0.0 {
            hi = mid;
            f_hi = fm;
        } else {
            lo = mid;
        }
    }
    Root {
        value: hi,
        gap: f_hi,
        bracket: (lo, hi),
        evaluations,
    }
}

/// Smallest crossing of `f` from negative to nonnegative on `(0, cap]`.
///
/// `f` must be negative as its argument tends to zero. The scan visits
/// 1, 2, 4, … up to `cap`, refines the first bracketing octave on a
/// [`SUBSCAN_POINTS`]-point linear grid, then bisects.
pub fn min_root<F: Fn(f64) -> f64>(f: F, cap: f64, tol: Tolerance) -> Result<Root> {
    let mut evaluations = 0;
    let mut eval = |x: f64| {
        evaluations += 1;
        f(x)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut found = false;
    while hi <= cap {
        let v = eval(hi);
        if v >= 0.0 {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Err(Error::InfeasibleWithinCap { cap });
    }

    // The octave endpoint `hi` is already known to be nonnegative, so the
    // sub-scan always terminates at or before it.
    let step = (hi - lo) / SUBSCAN_POINTS as f64;
    let mut sub_lo = lo;
    let mut sub_hi = hi;
    let mut f_sub_hi = f64::NAN;
    for k in 1..=SUBSCAN_POINTS {
        let x = if k == SUBSCAN_POINTS {
            hi
        } else {
            lo + step * k as f64
        };
        let v = eval(x);
        if v >= 0.0 {
            sub_hi = x;
            f_sub_hi = v;
            break;
        }
        sub_lo = x;
    }

    let mut root = bisect(&f, sub_lo, sub_hi, f_sub_hi, tol);
    root.evaluations += evaluations;
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let root = min_root(|x| x - 37.25, M_MAX, Tolerance::default()).unwrap();
        assert!((root.value - 37.25).abs() < 1e-12);
        assert!(root.gap >= 0.0);
    }

    #[test]
    fn root_below_one() {
        let root = min_root(|x| x - 0.3, M_MAX, Tolerance::default()).unwrap();
        assert!((root.value - 0.3).abs() < 1e-14);
    }

    #[test]
    fn finds_smallest_of_several_roots_in_octave() {
        // Roots at 65.5, 70 and 90 share the [64, 128] octave.
        let f = |x: f64| (x - 65.5) * (x - 70.0) * (x - 90.0);
        let root = min_root(f, M_MAX, Tolerance::default()).unwrap();
        assert!((root.value - 65.5).abs() < 1e-9, "{root:?}");
    }

    #[test]
    fn cap_exceeded() {
        let err = min_root(|x| x - 1e9, M_MAX, Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleWithinCap { cap } if cap == M_MAX));
    }

    #[test]
    fn bisection_stops_on_flat_function() {
        let root = bisect(
            |x| if x < 2.0 { -1.0 } else { 1.0 },
            0.0,
            10.0,
            1.0,
            Tolerance::default(),
        );
        assert!((root.value - 2.0).abs() < 1e-12);
    }
}
