//! Seeded accuracy experiments and their CSV output.
//!
//! Every trial draws its randomness from a seed derived from
//! `(base_seed, theta index, trial index)`, so results do not depend on how
//! trials are scheduled across threads. Per-theta metrics are reduced in
//! trial order.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::bits::BitString;
use crate::codec::{Codec, CodecConfig};
use crate::error::{Error, Result};
use crate::likelihood::MleTable;
use crate::packet::{apply_bsc, flip_bits, generate_packet, ChannelParams};
use crate::rng::{self, tag};
use crate::sampling::SamplingPlan;
use crate::sketch::{mom_estimate_scaled, sketch_sparse};
use crate::variance::var_mhat_sampled;

/// `count` geometrically spaced values from `theta_min` to `theta_max`,
/// endpoints included.
pub fn theta_grid(theta_min: f64, theta_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(theta_min > 0.0 && theta_max > theta_min && theta_max.is_finite()) || count < 2 {
        return Err(Error::InvalidParameter(format!(
            "theta grid needs 0 < min < max and count >= 2, got [{theta_min}, {theta_max}] x {count}"
        )));
    }
    let ratio = (theta_max / theta_min).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| theta_min * (ratio * i as f64).exp()).collect();
    out[0] = theta_min;
    out[count - 1] = theta_max;
    Ok(out)
}

/// The evaluation grid: fourteen values on `[0.001, 0.05]`.
pub fn standard_theta_grid() -> Vec<f64> {
    theta_grid(0.001, 0.05, 14).expect("valid grid")
}

/// `(rMSE, logMSE, mean)` of `estimates` against the true `theta`:
/// `E[((est - theta)/theta)^2]` and `E[(ln theta - ln est)^2]`.
pub fn accuracy_metrics(theta: f64, estimates: &[f64]) -> (f64, f64, f64) {
    let k = estimates.len() as f64;
    let ln_theta = theta.ln();
    let mut rmse = 0.0;
    let mut logmse = 0.0;
    let mut mean = 0.0;
    for &e in estimates {
        rmse += ((e - theta) / theta).powi(2);
        logmse += (ln_theta - e.ln()).powi(2);
        mean += e;
    }
    (rmse / k, logmse / k, mean / k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub l: usize,
    pub theta_grid: Vec<f64>,
    pub trials: usize,
    pub config: CodecConfig,
    pub base_seed: u64,
    /// When set the codeword crosses the channel untouched.
    pub immune: bool,
}

impl ExperimentSpec {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.l == 0 {
            return Err(Error::InvalidLength("packet length must be at least 1".into()));
        }
        if let Some(t) = self.theta_grid.iter().find(|t| !(**t > 0.0 && **t < 0.5)) {
            return Err(Error::InvalidParameter(format!("theta {t} outside (0, 0.5)")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub theta: f64,
    pub rmse: f64,
    pub logmse: f64,
    pub mean_estimate: f64,
    /// Fraction of trials where some resolution saw `phi_i >= n_i / 2`.
    pub saturation_rate: f64,
    pub trials: usize,
}

/// Seed for trial `trial` at grid point `theta_index`.
pub fn trial_seed(base_seed: u64, theta_index: usize, trial: usize) -> u64 {
    rng::derive_seed(
        rng::derive_seed(base_seed, tag::TRIAL, theta_index as u64),
        tag::TRIAL,
        trial as u64,
    )
}

struct TrialOutcome {
    estimate: f64,
    saturated: bool,
}

fn run_trial(codec: &Codec, table: &MleTable, theta: f64, immune: bool, seed: u64) -> Result<TrialOutcome> {
    let packet = generate_packet(codec.packet_len(), rng::derive_seed(seed, tag::PACKET, 0))?;
    let mut codeword = codec.encode(&packet)?;
    let channel = ChannelParams::new(theta, rng::derive_seed(seed, tag::CHANNEL, 0))?;
    let (received, _) = apply_bsc(&packet, &channel);
    if !immune {
        let mut cw_rng = rng::seeded(rng::derive_seed(seed, tag::CODEWORD, 0));
        flip_bits(codeword.bits_mut(), theta, &mut cw_rng);
    }
    let obs = codec.observe(&received, &codeword)?;
    let saturated = obs
        .as_slice()
        .iter()
        .zip(codec.config().resolutions())
        .any(|(&phi, res)| 2 * phi >= res.n);
    Ok(TrialOutcome {
        estimate: table.lookup(obs.as_slice())? as f64,
        saturated,
    })
}

/// Runs the experiment with a prepared codec and table.
pub fn run_experiment_with(spec: &ExperimentSpec, codec: &Codec, table: &MleTable) -> Result<Vec<MetricRow>> {
    spec.validate()?;
    codec.check_table(table)?;
    if codec.packet_len() != spec.l {
        return Err(Error::LengthMismatch {
            expected: spec.l,
            actual: codec.packet_len(),
        });
    }
    spec.theta_grid
        .iter()
        .enumerate()
        .map(|(ti, &theta)| {
            let outcomes: Vec<TrialOutcome> = (0..spec.trials)
                .into_par_iter()
                .map(|j| run_trial(codec, table, theta, spec.immune, trial_seed(spec.base_seed, ti, j)))
                .collect::<Result<_>>()?;
            let estimates: Vec<f64> = outcomes.iter().map(|o| o.estimate).collect();
            let (rmse, logmse, mean_estimate) = accuracy_metrics(theta, &estimates);
            let saturated = outcomes.iter().filter(|o| o.saturated).count();
            Ok(MetricRow {
                theta,
                rmse,
                logmse,
                mean_estimate,
                saturation_rate: saturated as f64 / spec.trials as f64,
                trials: spec.trials,
            })
        })
        .collect()
}

/// Builds the codec and its standard MLE table, then runs every grid point.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<MetricRow>> {
    spec.validate()?;
    let config = spec.config.clone().with_immune(spec.immune);
    let codec = Codec::new(&config, spec.l)?;
    let table = codec.build_standard_table()?;
    run_experiment_with(spec, &codec, &table)
}

pub const CSV_HEADER: &str = "theta,rmse,logmse,mean_estimate,saturation_rate,trials";

/// Nine significant digits.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_csv<W: Write>(rows: &[MetricRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            sig9(r.theta),
            sig9(r.rmse),
            sig9(r.logmse),
            sig9(r.mean_estimate),
            sig9(r.saturation_rate),
            r.trials
        )?;
    }
    Ok(())
}

pub fn emit_csv(rows: &[MetricRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn emit_table_file(table: &MleTable, path: impl AsRef<Path>) -> Result<()> {
    table.write_to(path)
}

/// Predicted and observed accuracy of the method-of-moments estimator at one BER.
#[derive(Debug, Clone, PartialEq)]
pub struct MomRow {
    pub theta: f64,
    /// Predicted `Var[m_hat] / m^2` with `m = theta * l`.
    pub predicted_rmse: f64,
    /// Empirical `E[((theta_hat - theta)/theta)^2]`.
    pub empirical_rmse: f64,
    /// Trials with `z >= n/2`; they are scored at the largest defined
    /// estimate, `z = ceil(n/2) - 1`.
    pub saturated: usize,
    pub trials: usize,
}

/// `l` bits with exactly `m` ones at uniformly random positions.
pub fn exact_error_pattern(l: usize, m: usize, seed: u64) -> Result<BitString> {
    let mut bits = BitString::zeros(l);
    if m == 0 {
        return Ok(bits);
    }
    if m > l {
        return Err(Error::InvalidParameter(format!("{m} errors in {l} bits")));
    }
    for &pos in SamplingPlan::new(m, l, seed)?.positions() {
        bits.set(pos, true);
    }
    Ok(bits)
}

/// Method-of-moments accuracy with sampling, codeword immune, at a fixed
/// Hamming distance `m = round(theta * l)`.
///
/// Each trial draws a fresh sketch spec and sampling plan along with the
/// `m` error positions and sketches the sampled error pattern (by the XOR
/// identity this equals `S_P xor S_P'`), and scales the estimate by the realized
/// sampling rate.
pub fn mom_experiment(
    l: usize,
    n: usize,
    r: usize,
    thetas: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<MomRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let beta_plan = SamplingPlan::new(r, l, 0)?.beta::<f64>();
    thetas
        .iter()
        .enumerate()
        .map(|(ti, &theta)| {
            let m_fixed = (theta * l as f64).round() as usize;
            let results: Vec<(f64, bool)> = (0..trials)
                .into_par_iter()
                .map(|j| {
                    let seed = trial_seed(base_seed, ti, j);
                    let plan = SamplingPlan::new(r, l, rng::derive_seed(seed, tag::PLAN, 0))?;
                    let errors = exact_error_pattern(l, m_fixed, rng::derive_seed(seed, tag::CHANNEL, 0))?;
                    let sampled = plan.extract_bits(&errors)?.ones_positions();
                    let z = sketch_sparse(n, rng::derive_seed(seed, tag::SKETCH, 0), &sampled)?.count_ones();
                    let saturated = 2 * z >= n;
                    let z_eff = if saturated { n.div_ceil(2) - 1 } else { z };
                    let m_hat: f64 = mom_estimate_scaled(z_eff, n, plan.beta())?;
                    Ok((m_hat / l as f64, saturated))
                })
                .collect::<Result<_>>()?;
            let estimates: Vec<f64> = results.iter().map(|r| r.0).collect();
            let true_theta = m_fixed as f64 / l as f64;
            let (empirical_rmse, _, _) = accuracy_metrics(true_theta, &estimates);
            let m = m_fixed as f64;
            Ok(MomRow {
                theta: true_theta,
                predicted_rmse: var_mhat_sampled(m, n, beta_plan)?.rmse_theta,
                empirical_rmse,
                saturated: results.iter().filter(|r| r.1).count(),
                trials,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::preset;

    #[test]
    fn standard_grid_has_fourteen_points() {
        let g = standard_theta_grid();
        assert_eq!(g.len(), 14);
        assert_eq!(g[0], 0.001);
        assert_eq!(g[13], 0.05);
    }

    #[test]
    fn grid_ratios_are_constant() {
        let g = theta_grid(0.001, 0.05, 14).unwrap();
        let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-12);
        }
        assert_eq!(theta_grid(0.01, 0.04, 2).unwrap(), vec![0.01, 0.04]);
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(theta_grid(0.0, 0.05, 14).is_err());
        assert!(theta_grid(0.05, 0.01, 14).is_err());
        assert!(theta_grid(0.001, 0.05, 1).is_err());
    }

    #[test]
    fn perfect_and_doubled_estimators() {
        let (rmse, logmse, mean) = accuracy_metrics(0.01, &[0.01; 10]);
        assert_eq!((rmse, logmse), (0.0, 0.0));
        assert!((mean - 0.01).abs() < 1e-15);
        let (rmse, logmse, _) = accuracy_metrics(0.01, &[0.02; 10]);
        assert!((rmse - 1.0).abs() < 1e-12);
        assert!((logmse - 2f64.ln().powi(2)).abs() < 1e-12);
        assert!((logmse - 0.4805).abs() < 1e-4);
    }

    #[test]
    fn logmse_is_scale_invariant() {
        let est = [0.001, 0.0031, 0.0007, 0.002, 0.06];
        let (_, a, _) = accuracy_metrics(0.0015, &est);
        let scaled: Vec<f64> = est.iter().map(|e| e * 7.5).collect();
        let (_, b, _) = accuracy_metrics(0.0015 * 7.5, &scaled);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_rows_use_nine_significant_digits() {
        let row = MetricRow {
            theta: 0.001,
            rmse: 0.123456789123,
            logmse: 2.0,
            mean_estimate: 0.00101,
            saturation_rate: 0.0,
            trials: 10,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert_eq!(
            line,
            "1.00000000e-3,1.23456789e-1,2.00000000e0,1.01000000e-3,0.00000000e0,10"
        );
    }

    #[test]
    fn experiment_validation() {
        let spec = ExperimentSpec {
            l: 1000,
            theta_grid: vec![0.01],
            trials: 0,
            config: preset("oddeec-s", 0).unwrap(),
            base_seed: 0,
            immune: false,
        };
        assert!(run_experiment(&spec).is_err());
        let spec = ExperimentSpec { trials: 1, theta_grid: vec![0.5], ..spec };
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for ti in 0..14 {
            for j in 0..100 {
                assert!(seen.insert(trial_seed(1, ti, j)));
            }
        }
    }
}
