//! Scalar abstraction for the analytic parts of the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used by estimators, variance formulas and the
/// likelihood kernel: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize is representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln(exp(a) + exp(b))` without overflow; `-inf` is the additive identity.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log-sum-exp over a slice; returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + sum.ln()
}

/// Table of `ln k!` for `k = 0..=n`, built by cumulative summation.
#[derive(Debug, Clone)]
pub struct LnFactorials<T> {
    table: Vec<T>,
}

impl<T: Real> LnFactorials<T> {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        table.push(T::zero());
        for k in 1..=n {
            acc += (k as f64).ln();
            table.push(T::of(acc));
        }
        Self { table }
    }

    #[inline]
    pub fn ln_choose(&self, n: usize, k: usize) -> T {
        if k > n {
            return T::neg_infinity();
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// `k·ln(x)` with the convention `0·ln 0 = 0`.
#[inline]
pub(crate) fn xlogy<T: Real>(k: usize, ln_x: T) -> T {
    if k == 0 {
        T::zero()
    } else {
        T::of_usize(k) * ln_x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [-1.0f64, -2.5, 0.3, -40.0];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        let folded = xs.iter().copied().fold(f64::NEG_INFINITY, log_add_exp);
        assert!((folded - direct).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_neg_infinity() {
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
    }

    #[test]
    fn ln_choose_small_values() {
        let t = LnFactorials::<f64>::new(20);
        assert!((t.ln_choose(10, 3).exp() - 120.0).abs() < 1e-9);
        assert!((t.ln_choose(20, 10).exp() - 184756.0).abs() < 1e-6);
        assert_eq!(t.ln_choose(4, 0), 0.0);
        assert_eq!(t.ln_choose(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn works_in_single_precision() {
        let t = LnFactorials::<f32>::new(10);
        assert!((t.ln_choose(10, 5).exp() - 252.0).abs() < 1e-2);
    }
}
