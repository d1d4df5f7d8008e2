//! Closed-form accuracy predictions and the sampling-length tuner.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::sampling::check_safety;

/// Probability that one sketch bit of a symmetric difference of `m`
/// elements is odd: `(1 - (1 - 2/n)^m) / 2`.
pub fn odd_bin_probability<T: Real>(m: T, n: usize) -> T {
    let two = T::of(2.0);
    let q = (m * (-two / T::of_usize(n)).ln_1p()).exp();
    (T::one() - q) / two
}

/// Variance of `z` in its exact form for a hashed Odd sketch,
/// `(n^2/4)((1-4/n)^m - (1-2/n)^{2m}) + (n/4)(1 - e^{-4m/n})`.
pub fn var_z_exact<T: Real>(m: T, n: usize) -> T {
    let n_t = T::of_usize(n);
    let four = T::of(4.0);
    let two = T::of(2.0);
    let a = (m * (-four / n_t).ln_1p()).exp();
    let b = (two * m * (-two / n_t).ln_1p()).exp();
    n_t * n_t / four * (a - b) + n_t / four * (T::one() - (-four * m / n_t).exp())
}

/// Large-`n` approximation `(n/4)(1 - e^{-4m/n} - (4m/n) e^{-4m/n})`.
pub fn var_z_approx<T: Real>(m: T, n: usize) -> T {
    let n_t = T::of_usize(n);
    let four = T::of(4.0);
    let x = four * m / n_t;
    let e = (-x).exp();
    n_t / four * (T::one() - e - x * e)
}

/// Variance of `z` when every bin is an independent Bernoulli(p) with `p`
/// from [`odd_bin_probability`]: `n p (1 - p)`.
pub fn var_z_binomial<T: Real>(m: T, n: usize) -> T {
    let p = odd_bin_probability(m, n);
    T::of_usize(n) * p * (T::one() - p)
}

/// Predicted `Var[m_hat]` without sampling: `(n/4)(e^{4m/n} - 4m/n - 1)`.
pub fn var_mhat_immune<T: Real>(m: T, n: usize) -> T {
    let n_t = T::of_usize(n);
    let four = T::of(4.0);
    let x = four * m / n_t;
    // exp_m1 keeps precision for small x.
    n_t / four * (x.exp_m1() - x)
}

/// Predicted accuracy of the scaled estimator `m_hat = mu_hat / beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPrediction<T> {
    pub var_mhat: T,
    /// `var_mhat / m^2`; the estimator's bias is neglected.
    pub rmse_theta: T,
    pub n: usize,
    pub m: T,
    pub beta: T,
}

/// `(n / (4 beta^2)) (e^{4 beta m/n} - 4 beta m/n - 1) + m (1 - beta) / beta`.
pub fn var_mhat_sampled<T: Real>(m: T, n: usize, beta: T) -> Result<AccuracyPrediction<T>> {
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "sampling rate must lie in (0, 1], got {beta}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let sketch_term = var_mhat_immune(beta * m, n) / (beta * beta);
    let sampling_term = m * (T::one() - beta) / beta;
    let var_mhat = sketch_term + sampling_term;
    let rmse_theta = if m > T::zero() {
        var_mhat / (m * m)
    } else {
        T::zero()
    };
    Ok(AccuracyPrediction {
        var_mhat,
        rmse_theta,
        n,
        m,
        beta,
    })
}

/// Picks the sampling length minimizing the predicted `Var[m_hat]` at the
/// midpoint BER and the longest packet, among lengths that satisfy the
/// safety condition at `theta_max`. Searches every integer `r` in `1..=l_max`.
pub fn tune_sampling_length(
    l_max: usize,
    theta_min: f64,
    theta_max: f64,
    n: usize,
) -> Result<usize> {
    if l_max == 0 || n == 0 {
        return Err(Error::InvalidParameter("l_max and n must be positive".into()));
    }
    // theta_max up to 1 is accepted so that an unsatisfiable safety
    // condition surfaces as `Infeasible` rather than a range error.
    if !(0.0 < theta_min && theta_min < theta_max && theta_max < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < theta_min < theta_max < 1, got [{theta_min}, {theta_max}]"
        )));
    }
    let m_mid = l_max as f64 * (theta_min + theta_max) / 2.0;
    let mut best: Option<(usize, f64)> = None;
    for r in 1..=l_max {
        if !check_safety(r, theta_max, n) {
            continue;
        }
        let beta = r as f64 / l_max as f64;
        let v = var_mhat_sampled(m_mid, n, beta)?.var_mhat;
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((r, v));
        }
    }
    best.map(|(r, _)| r).ok_or_else(|| {
        Error::Infeasible(format!(
            "r = 1 already exceeds 2n/3 expected errors at theta_max = {theta_max}, n = {n}"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn odd_probability_at_m120_n96() {
        let p: f64 = odd_bin_probability(120.0, 96);
        assert!((p - 0.46).abs() < 5e-3, "{p}");
    }

    #[test]
    fn odd_probability_is_increasing_toward_half() {
        let ps: Vec<f64> = (0..=500).map(|m| odd_bin_probability(m as f64, 96)).collect();
        assert_eq!(ps[0], 0.0);
        assert!(ps.windows(2).all(|w| w[1] > w[0]));
        assert!(ps[500] < 0.5 && ps[500] > 0.499);
    }

    #[test]
    fn var_z_at_zero() {
        assert_eq!(var_z_exact(0.0f64, 96), 0.0);
        assert_eq!(var_z_approx(0.0f64, 96), 0.0);
        assert_eq!(var_z_binomial(0.0f64, 96), 0.0);
    }

    #[test]
    fn var_z_at_m120_n96() {
        let bin: f64 = var_z_binomial(120.0, 96);
        assert!((bin - 23.85).abs() < 0.01, "{bin}");
        // The hashed-sketch form sits close to the independent-bin variance here.
        let exact: f64 = var_z_exact(120.0, 96);
        assert!(rel(exact, bin) < 0.05, "{exact} vs {bin}");
    }

    #[test]
    fn immune_variance_value() {
        let v: f64 = var_mhat_immune(66.0, 96);
        assert!((v - 24.0 * (2.75f64.exp() - 3.75)).abs() < 1e-9);
        assert!((v - 285.5).abs() < 0.1, "{v}");
        assert_eq!(var_mhat_immune(0.0f64, 96), 0.0);
    }

    #[test]
    fn immune_variance_is_scaled_approximate_var_z() {
        let mut rng = crate::rng::seeded(5);
        for _ in 0..100 {
            let n = 1 + crate::rng::below(&mut rng, 200) as usize;
            let m = crate::rng::below(&mut rng, 300) as f64;
            let lhs = (4.0 * m / n as f64).exp() * var_z_approx(m, n);
            let rhs = var_mhat_immune(m, n);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300) || lhs == rhs,
                "m={m} n={n}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn sampled_variance_values() {
        let full: AccuracyPrediction<f64> = var_mhat_sampled(66.0, 96, 1.0).unwrap();
        assert_eq!(full.var_mhat, var_mhat_immune(66.0, 96));
        let half = var_mhat_sampled(66.0f64, 96, 0.5).unwrap();
        let direct = 96.0 * (1.375f64.exp() - 2.375) + 66.0;
        assert!((half.var_mhat - direct).abs() < 1e-9);
        assert!((half.var_mhat - 217.7).abs() < 0.1, "{}", half.var_mhat);
        assert!((half.rmse_theta - half.var_mhat / 66.0 / 66.0).abs() < 1e-15);
        assert_eq!(var_mhat_sampled(0.0f64, 96, 0.3).unwrap().var_mhat, 0.0);
        assert!(var_mhat_sampled(1.0f64, 96, 0.0).is_err());
        assert!(var_mhat_sampled(1.0f64, 96, 1.01).is_err());
    }

    #[test]
    fn sampled_variance_is_positive_and_continuous_in_beta() {
        for m in 1..50 {
            for k in 0..=200 {
                let beta = 1e-3 * 1000f64.powf(k as f64 / 200.0);
                let v = var_mhat_sampled(m as f64, 96, beta).unwrap().var_mhat;
                assert!(v > 0.0 && v.is_finite());
                let near = var_mhat_sampled(m as f64, 96, beta * (1.0 - 1e-9)).unwrap().var_mhat;
                assert!(rel(v, near) < 1e-6, "jump at m={m}, beta={beta}");
            }
        }
    }

    #[test]
    fn single_precision_agrees() {
        let a = var_mhat_sampled(66.0f32, 96, 0.5).unwrap().var_mhat as f64;
        let b = var_mhat_sampled(66.0f64, 96, 0.5).unwrap().var_mhat;
        assert!(rel(a, b) < 1e-5);
    }

    #[test]
    fn tuner_examples() {
        let r = tune_sampling_length(12_000, 0.001, 0.01, 96).unwrap();
        assert!((r as i64 - 6000).abs() <= 500, "{r}");
        assert!(check_safety(r, 0.01, 96));
        // Unconstrained the optimum sits near beta = 0.6, so safety binds at 6400.
        assert_eq!(r, 6400);
    }

    #[test]
    fn tuner_result_is_always_safe() {
        for (l, lo, hi, n) in [(4000, 0.001, 0.05, 96), (12_000, 0.002, 0.03, 48), (500, 0.01, 0.2, 40)] {
            let r = tune_sampling_length(l, lo, hi, n).unwrap();
            assert!(r >= 1 && r <= l);
            assert!(check_safety(r, hi, n));
        }
    }

    #[test]
    fn tuner_errors() {
        assert!(matches!(
            tune_sampling_length(100, 0.1, 0.9, 1),
            Err(Error::Infeasible(_))
        ));
        assert!(tune_sampling_length(100, 0.1, 0.49, 1).is_ok());
        assert!(tune_sampling_length(100, 0.02, 0.01, 96).is_err());
        assert!(tune_sampling_length(0, 0.001, 0.01, 96).is_err());
    }
}
