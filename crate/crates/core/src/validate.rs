//! End-to-end checks of the model against its oracles, the Monte-Carlo
//! simulator and the named configurations. Each check reports a verdict and
//! the numbers behind it instead of panicking, so a runner can print every
//! result.

use std::hint::black_box;
use std::time::Instant;

use rayon::prelude::*;

use crate::bench::{self, ExperimentSpec};
use crate::bits::BitString;
use crate::codec::{preset, Codec};
use crate::error::Result;
use crate::likelihood::{likelihood_zc, pr_zc_given_z, LikelihoodModel, MleTable};
use crate::packet::{apply_bsc, flip_bits, generate_packet, ChannelParams};
use crate::rng::{self, tag};
use crate::sampling::check_safety;
use crate::sketch::build_spec;
use crate::variance::{odd_bin_probability, tune_sampling_length};

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Sample sizes for the randomized checks.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub saturation_seeds: usize,
    pub xor_cases: usize,
    pub transition_pairs: usize,
    pub mom_trials: usize,
    pub bench_trials: usize,
    pub lookups: usize,
    pub decodes: usize,
}

impl Scale {
    /// Sizes at which the thresholds below are meant to hold.
    pub fn full() -> Self {
        Self {
            saturation_seeds: 100_000,
            xor_cases: 1000,
            transition_pairs: 20,
            mom_trials: 1000,
            bench_trials: 1000,
            lookups: 1_000_000,
            decodes: 2001,
        }
    }

    /// A fast smoke run; Monte-Carlo verdicts get noisier.
    pub fn quick() -> Self {
        Self {
            saturation_seeds: 10_000,
            xor_cases: 200,
            transition_pairs: 5,
            mom_trials: 200,
            bench_trials: 200,
            lookups: 100_000,
            decodes: 201,
        }
    }
}

fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    let lnf = crate::real::LnFactorials::<f64>::new(n);
    (lnf.ln_choose(n, k) + crate::real::xlogy(k, p.ln()) + crate::real::xlogy(n - k, (-p).ln_1p())).exp()
}

/// Odd-bin probability at `m = 120, n = 96` against its odd-count sum and the
/// quoted 0.4600, plus the simulated chance of a saturated sketch.
pub fn saturation_probability(seeds: usize) -> Result<Check> {
    let (m, n) = (120usize, 96usize);
    let p: f64 = odd_bin_probability(m as f64, n);
    let by_sum: f64 = (1..=m).step_by(2).map(|j| binomial_pmf(m, 1.0 / n as f64, j)).sum();
    let closed_ok = (p - by_sum).abs() < 1e-6 && format!("{p:.4}") == "0.4600";

    let ones = BitString::ones(m);
    let saturated = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let spec = build_spec(n, m, rng::derive_seed(0x5a7, tag::SKETCH, i as u64))?;
            Ok(2 * spec.sketch(&ones)?.count_ones() >= n)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&s| s)
        .count();
    let freq = saturated as f64 / seeds as f64;
    let mc_ok = (freq - 0.25).abs() <= 0.03;
    Ok(Check::new(
        "saturation probability",
        closed_ok && mc_ok,
        format!(
            "p = {p:.6} (sum {by_sum:.6}, 4 d.p. {p:.4}), Pr[z >= 48] = {freq:.4} over {seeds} seeds"
        ),
    ))
}

/// `sketch(x) xor sketch(y) == sketch(x xor y)` on random inputs and specs.
pub fn xor_identity(cases: usize) -> Result<Check> {
    let mut rng = rng::seeded(0x0dd);
    let mut failures = 0;
    for _ in 0..cases {
        let l = 1 + rng::below(&mut rng, 256) as usize;
        let n = 1 + rng::below(&mut rng, 32) as usize;
        let spec = build_spec(n, l, rng::below(&mut rng, u64::MAX))?;
        let draw = |rng: &mut rng::Rng| {
            BitString::from_bools(&(0..l).map(|_| rng::below(rng, 2) == 1).collect::<Vec<_>>())
        };
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let lhs = spec.sketch(&x)?.xor(&spec.sketch(&y)?)?;
        if lhs != spec.sketch(&x.xor(&y)?)? {
            failures += 1;
        }
    }
    Ok(Check::new(
        "xor identity",
        failures == 0,
        format!("{failures} failures in {cases} cases"),
    ))
}

/// Both likelihood layers sum to one over the observation.
pub fn likelihood_normalization() -> Result<Check> {
    let mut worst_total = 0.0f64;
    let mut worst_transition = 0.0f64;
    for n in [8, 48, 96] {
        for theta in [0.001, 0.01, 0.05, 0.3] {
            for r in [n, 1000, 6000] {
                for immune in [false, true] {
                    let model = LikelihoodModel::new(n, r, immune)?;
                    let total: f64 = (0..=n)
                        .map(|phi| likelihood_zc(phi, theta, &model))
                        .sum::<Result<f64>>()?;
                    worst_total = worst_total.max((total - 1.0).abs());
                }
            }
            for k in 0..=n {
                let total: f64 = (0..=n)
                    .map(|phi| pr_zc_given_z(phi, k, theta, n))
                    .sum::<Result<f64>>()?;
                worst_transition = worst_transition.max((total - 1.0).abs());
            }
        }
    }
    Ok(Check::new(
        "likelihood normalization",
        worst_total < 1e-10 && worst_transition < 1e-10,
        format!("max |sum - 1|: total {worst_total:.2e}, transition {worst_transition:.2e}"),
    ))
}

/// The transition probability against enumeration of every flip pattern.
pub fn transition_oracle(pairs: usize) -> Result<Check> {
    let mut rng = rng::seeded(0x7a);
    let mut worst = 0.0f64;
    for n in 1..=10usize {
        for _ in 0..pairs {
            let k = rng::below(&mut rng, n as u64 + 1) as usize;
            let theta = 0.5 * rng::unit(&mut rng);
            let start: u32 = (1 << k) - 1;
            let mut by_phi = vec![0.0f64; n + 1];
            for flips in 0u32..1 << n {
                let f = flips.count_ones() as i32;
                by_phi[(start ^ flips).count_ones() as usize] += theta.powi(f) * (1.0 - theta).powi(n as i32 - f);
            }
            for (phi, expect) in by_phi.iter().enumerate() {
                worst = worst.max((pr_zc_given_z(phi, k, theta, n)? - expect).abs());
            }
        }
    }
    Ok(Check::new(
        "transition vs enumeration",
        worst < 1e-9,
        format!("max error {worst:.2e} over n = 1..=10, {pairs} (k, theta) pairs each"),
    ))
}

fn standard_grid_up_to(limit: f64) -> Vec<f64> {
    bench::standard_theta_grid()
        .into_iter()
        .filter(|&t| t <= limit * (1.0 + 1e-12))
        .collect()
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) })
        .0
}

/// Predicted against simulated accuracy of the method-of-moments estimator
/// at `n = 96`, `beta = 0.5`, `l = 12000` over the low-BER grid points.
pub fn mom_prediction(trials: usize) -> Result<Check> {
    let thetas = standard_grid_up_to(0.01);
    let rows = bench::mom_experiment(12_000, 96, 6000, &thetas, trials, 0x2f)?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.predicted_rmse / r.empirical_rmse).collect();
    let ratio_ok = ratios.iter().all(|&q| (0.4..=1.0).contains(&q));
    let pred_min = argmin(rows.iter().map(|r| r.predicted_rmse));
    let emp_min = argmin(rows.iter().map(|r| r.empirical_rmse));
    let argmin_ok = pred_min.abs_diff(emp_min) <= 1;
    let listed: Vec<String> = rows
        .iter()
        .zip(&ratios)
        .map(|(r, q)| format!("{:.5}:{q:.3}", r.theta))
        .collect();
    Ok(Check::new(
        "variance prediction vs simulation",
        ratio_ok && argmin_ok,
        format!(
            "predicted/empirical rMSE [{}]; argmin theta predicted {:.5}, empirical {:.5}",
            listed.join(" "),
            rows[pred_min].theta,
            rows[emp_min].theta
        ),
    ))
}

/// The tuner at `l = 12000`, BER in `[0.001, 0.01]`, `n = 96`.
pub fn tuner() -> Result<Check> {
    let r = tune_sampling_length(12_000, 0.001, 0.01, 96)?;
    let safe = check_safety(r, 0.01, 96);
    Ok(Check::new(
        "sampling-length tuner",
        r.abs_diff(6000) <= 500 && safe,
        format!("r = {r}, safe = {safe}"),
    ))
}

fn run_preset(name: &str, trials: usize) -> Result<Vec<bench::MetricRow>> {
    let spec = ExperimentSpec {
        l: 12_000,
        theta_grid: bench::standard_theta_grid(),
        trials,
        config: preset(name, 1)?,
        base_seed: 7,
        immune: false,
    };
    bench::run_experiment(&spec)
}

/// Ordering of the single- and dual-resolution configurations across the
/// evaluation grid, with a corrupted codeword.
pub fn resolution_ordering(trials: usize) -> Result<Check> {
    let s = run_preset("oddeec-s", trials)?;
    let l = run_preset("oddeec-l", trials)?;
    let c = run_preset("oddeec-c", trials)?;
    let first = 0;
    let last = s.len() - 1;
    let low_ok = l[first].rmse < s[first].rmse;
    let high_ok = s[last].rmse < l[last].rmse;
    let mut combined_bad = Vec::new();
    for i in 0..s.len() {
        let bound = 1.5 * s[i].rmse.min(l[i].rmse);
        if c[i].rmse > bound {
            combined_bad.push(format!("{:.5} (C {:.3} > {bound:.3})", s[i].theta, c[i].rmse));
        }
    }
    Ok(Check::new(
        "resolution ordering",
        low_ok && high_ok && combined_bad.is_empty(),
        format!(
            "theta {:.3}: L {:.3} vs S {:.3} [{}]; theta {:.3}: S {:.3} vs L {:.3} [{}]; C <= 1.5 min(S, L) violated at {} of {} points{}",
            s[first].theta,
            l[first].rmse,
            s[first].rmse,
            if low_ok { "ok" } else { "FAIL" },
            s[last].theta,
            s[last].rmse,
            l[last].rmse,
            if high_ok { "ok" } else { "FAIL" },
            combined_bad.len(),
            s.len(),
            if combined_bad.is_empty() {
                String::new()
            } else {
                format!(": {}", combined_bad.join(", "))
            }
        ),
    ))
}

fn preset_table(name: &str, l: usize) -> Result<(Codec, MleTable)> {
    let codec = Codec::new(&preset(name, 1)?, l)?;
    let table = codec.build_standard_table()?;
    Ok((codec, table))
}

/// Sizes of the dual-resolution tables.
pub fn table_geometry() -> Result<Check> {
    let (_, c) = preset_table("oddeec-c", 12_000)?;
    let (_, c80) = preset_table("oddeec-c80", 12_000)?;
    let c_view = c.compat_view().len();
    let c80_bytes = c80.compat_payload_bytes();
    let file = c.to_bytes().len();
    Ok(Check::new(
        "table geometry",
        c_view == 576 && c80_bytes == 1600 && file < 20 * 1024,
        format!("oddeec-c compat entries {c_view}, oddeec-c80 compat payload {c80_bytes} B, oddeec-c file {file} B"),
    ))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Median table lookup and full decode times.
pub fn decode_latency(lookups: usize, decodes: usize) -> Result<Check> {
    let (codec, table) = preset_table("oddeec-c", 12_000)?;
    let mut rng = rng::seeded(0x1a7);
    let tuples: Vec<[usize; 2]> = (0..lookups)
        .map(|_| [rng::below(&mut rng, 49) as usize, rng::below(&mut rng, 49) as usize])
        .collect();
    const BATCH: usize = 1000;
    let per_lookup: Vec<f64> = tuples
        .chunks(BATCH)
        .map(|chunk| {
            let t = Instant::now();
            for phis in chunk {
                black_box(table.lookup(black_box(phis)).unwrap());
            }
            t.elapsed().as_secs_f64() / chunk.len() as f64
        })
        .collect();
    let lookup_ns = median(per_lookup) * 1e9;

    let packet = generate_packet(12_000, 3)?;
    let mut codeword = codec.encode(&packet)?;
    let (received, _) = apply_bsc(&packet, &ChannelParams::new(0.005, 4)?);
    flip_bits(codeword.bits_mut(), 0.005, &mut rng::seeded(5));
    let per_decode: Vec<f64> = (0..decodes)
        .map(|_| {
            let t = Instant::now();
            black_box(codec.decode(black_box(&received), black_box(&codeword), &table).unwrap());
            t.elapsed().as_secs_f64()
        })
        .collect();
    let decode_us = median(per_decode) * 1e6;
    Ok(Check::new(
        "decode latency",
        lookup_ns < 1000.0 && decode_us < 50.0,
        format!("median lookup {lookup_ns:.1} ns over {lookups}, median full decode {decode_us:.2} us (l = 12000)"),
    ))
}

/// Two identical experiment runs and table builds produce identical bytes.
pub fn replay(trials: usize) -> Result<Check> {
    let spec = ExperimentSpec {
        l: 12_000,
        theta_grid: bench::theta_grid(0.001, 0.05, 4)?,
        trials,
        config: preset("oddeec-c", 3)?,
        base_seed: 11,
        immune: false,
    };
    let csv = || -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        bench::write_csv(&bench::run_experiment(&spec)?, &mut buf).expect("in-memory write");
        Ok(buf)
    };
    let table = || -> Result<Vec<u8>> { Ok(preset_table("oddeec-c", 12_000)?.1.to_bytes()) };
    let csv_same = csv()? == csv()?;
    let table_same = table()? == table()?;
    Ok(Check::new(
        "deterministic replay",
        csv_same && table_same,
        format!("csv identical {csv_same}, table identical {table_same}"),
    ))
}

/// Every check, in order.
pub fn run_all(scale: Scale) -> Result<Vec<Check>> {
    Ok(vec![
        saturation_probability(scale.saturation_seeds)?,
        xor_identity(scale.xor_cases)?,
        likelihood_normalization()?,
        transition_oracle(scale.transition_pairs)?,
        mom_prediction(scale.mom_trials)?,
        tuner()?,
        resolution_ordering(scale.bench_trials)?,
        table_geometry()?,
        decode_latency(scale.lookups, scale.decodes)?,
        replay(scale.bench_trials.min(200))?,
    ])
}
