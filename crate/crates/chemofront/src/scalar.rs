//! Scalar abstraction for the numerical core.
//!
//! Every quantity in the toolkit is generic over a floating-point scalar so
//! the same formulas can be instantiated at `f32` or `f64`.  The default
//! tolerances shipped with the crate assume `f64`; `f32` instantiations are
//! supported for smoke testing and memory-constrained sweeps but cannot meet
//! the tight acceptance tolerances.

use core::fmt::{Debug, Display};
use core::iter::Sum;
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the solvers.
///
/// Blanket-implemented for any type with the listed bounds; in practice
/// `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lifts an `f64` literal into the scalar type.
    ///
    /// Panics if the literal is not representable (never the case for the
    /// finite constants used internally).
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal must be representable")
    }

    /// Lossy view as `f64`, used for reporting only.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half(self) -> Self {
        self / Self::of(2.0)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Bisection for a continuous scalar function with a sign change on `[lo, hi]`.
///
/// Runs until the bracket width drops below `tol` and the midpoint can no
/// longer be distinguished from the endpoints in the working precision, so a
/// `tol` of zero yields a ulp-tight root.  Returns the bracket midpoint.
///
/// The caller must guarantee `f(lo)` and `f(hi)` have opposite signs (zero
/// counts as either); this is debug-asserted.
pub(crate) fn bisect<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T, tol: T) -> T {
    let flo = f(lo);
    let fhi = f(hi);
    debug_assert!(
        flo * fhi <= T::zero(),
        "bisect requires a sign change on the bracket"
    );
    if flo == T::zero() {
        return lo;
    }
    if fhi == T::zero() {
        return hi;
    }
    let lo_negative = flo < T::zero();
    for _ in 0..200 {
        let mid = (lo + hi).half();
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    (lo + hi).half()
}

/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
///
/// Used to polish extrema located by dense sampling; the value accuracy is
/// quadratic in the final bracket width.
pub(crate) fn golden_min<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T, iters: usize) -> T {
    let inv_phi = T::of(0.618_033_988_749_894_9);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if x2 - x1 <= T::epsilon() * (T::one() + x1.abs()) {
            break;
        }
    }
    (lo + hi).half()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2_to_full_precision() {
        let root: f64 = bisect(0.0, 2.0, |x| x * x - 2.0, 0.0);
        assert!((root - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn bisect_handles_decreasing_functions() {
        let root: f64 = bisect(0.0, 4.0, |x| 1.0 - x, 0.0);
        assert!((root - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_min_polishes_parabola() {
        let m: f64 = golden_min(0.0, 2.0, |x| (x - 0.7) * (x - 0.7), 80);
        assert!((m - 0.7).abs() < 1e-8);
    }

    #[test]
    fn real_trait_lifts_literals_for_f32() {
        let x: f32 = Real::of(0.25);
        assert_eq!(x, 0.25f32);
    }
}
