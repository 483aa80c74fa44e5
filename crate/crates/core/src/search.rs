//! One-dimensional bracketing helpers.

use crate::scalar::Real;

/// Bisection for a sign change of `f` on `[a, b]`, run to machine precision.
///
/// Returns `None` when the endpoints do not bracket a root.
pub fn bisect<T: Real>(mut f: impl FnMut(T) -> T, mut a: T, mut b: T) -> Option<T> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Some(a);
    }
    if fb == T::zero() {
        return Some(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return None;
    }
    let half = T::lit(0.5);
    for _ in 0..200 {
        let m = (a + b) * half;
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == T::zero() {
            return Some(m);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some((a + b) * half)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_min<T: Real>(mut f: impl FnMut(T) -> T, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let g = T::lit(0.618_033_988_749_894_8);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Chebyshev points of the second kind mapped to `[a, b]`, in increasing order.
pub fn chebyshev_points<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let half = T::lit(0.5);
    (0..n)
        .map(|j| {
            let t = -(T::pi() * T::from_count(j) / T::from_count(n - 1)).cos();
            (a + b) * half + (b - a) * half * t
        })
        .collect()
}
