//! Corruption-aware likelihood of the observed discrepancy count and the
//! maximum-likelihood BER decoder built on it.
//!
//! With `p = (1 - (1 - 2 theta/n)^r) / 2`, the uncorrupted discrepancy count
//! `z` is Binomial(n, p). The receiver observes `z^c`, the count after the
//! codeword itself crossed the channel, whose likelihood is
//!
//! ```text
//! Pr[z^c = phi | theta] = sum_k Pr[z = k | theta] * Pr[z^c = phi | z = k, theta]
//! ```
//!
//! Everything is evaluated in the log domain.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::{log_sum_exp, xlogy, LnFactorials, Real};

/// One resolution's observation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LikelihoodModel {
    n: usize,
    r: usize,
    immune: bool,
}

impl LikelihoodModel {
    /// `n` sketch bits fed by `r` sampled packet bits. With `immune` the
    /// codeword is assumed to arrive intact.
    pub fn new(n: usize, r: usize, immune: bool) -> Result<Self> {
        if n == 0 || r == 0 {
            return Err(Error::InvalidParameter(format!(
                "likelihood model needs n >= 1 and r >= 1, got n={n}, r={r}"
            )));
        }
        Ok(Self { n, r, immune })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn immune(&self) -> bool {
        self.immune
    }
}

/// Geometrically spaced BER candidates, ascending, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGrid<T> {
    values: Vec<T>,
}

impl<T: Real> ThetaGrid<T> {
    pub const DEFAULT_MIN: f64 = 1e-4;
    pub const DEFAULT_MAX: f64 = 0.06;
    pub const DEFAULT_SIZE: usize = 2048;

    pub fn geometric(min: T, max: T, size: usize) -> Result<Self> {
        if !(min > T::zero() && max > min && max < T::of(0.5)) || size < 2 {
            return Err(Error::InvalidParameter(format!(
                "theta grid needs 0 < min < max < 0.5 and size >= 2, got [{min}, {max}] x {size}"
            )));
        }
        let ln_ratio = (max / min).ln();
        let last = T::of_usize(size - 1);
        let mut values: Vec<T> = (0..size)
            .map(|i| min * (ln_ratio * T::of_usize(i) / last).exp())
            .collect();
        values[0] = min;
        values[size - 1] = max;
        Ok(Self { values })
    }

    /// 2048 points on `[1e-4, 0.06]`.
    pub fn standard() -> Self {
        Self::geometric(
            T::of(Self::DEFAULT_MIN),
            T::of(Self::DEFAULT_MAX),
            Self::DEFAULT_SIZE,
        )
        .expect("default grid is valid")
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        *self.values.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-bin odd-parity probability over `r` sampled bits,
/// `(1 - (1 - 2 theta/n)^r) / 2`.
pub fn p_bin<T: Real>(theta: T, n: usize, r: usize) -> T {
    let two = T::of(2.0);
    -(T::of_usize(r) * (-two * theta / T::of_usize(n)).ln_1p()).exp_m1() / two
}

/// Quantities shared by every likelihood evaluation at one `theta`.
struct ThetaTerms<T> {
    theta: T,
    ln_theta: T,
    ln_keep: T,
    /// `((1 - theta) / theta)^2`, the ratio between adjacent transition terms
    /// before the combinatorial factors.
    rho: T,
    /// `ln Pr[z = k | theta]` for `k = 0..=n`.
    ln_pz: Vec<T>,
}

impl<T: Real> ThetaTerms<T> {
    fn new(theta: T, model: &LikelihoodModel, lnf: &LnFactorials<T>) -> Self {
        let n = model.n;
        let p = p_bin(theta, n, model.r);
        let ln_p = p.ln();
        let ln_q = (-p).ln_1p();
        let ln_pz = (0..=n)
            .map(|k| lnf.ln_choose(n, k) + xlogy(k, ln_p) + xlogy(n - k, ln_q))
            .collect();
        let odds = (T::one() - theta) / theta;
        Self {
            theta,
            ln_theta: theta.ln(),
            ln_keep: (-theta).ln_1p(),
            rho: odds * odds,
            ln_pz,
        }
    }
}

/// `ln Pr[z^c = phi | z = k, theta]`: a weight-`k` string of `n` bits ends at
/// weight `phi` after a BSC.
///
/// The sum runs over `x`, the number of 1-bits that survive. Its terms are
/// log-concave in `x`, so the largest one is located by bisection on the
/// term ratio and the rest are accumulated relative to it in linear space.
fn ln_transition<T: Real>(phi: usize, k: usize, n: usize, t: &ThetaTerms<T>, lnf: &LnFactorials<T>) -> T {
    let lo = phi.saturating_sub(n - k);
    let hi = k.min(phi);
    if lo > hi {
        return T::neg_infinity();
    }
    if t.theta == T::zero() {
        return if phi == k { T::zero() } else { T::neg_infinity() };
    }
    // term(x + 1) / term(x), decreasing in x.
    let ratio = |x: usize| -> T {
        T::of_usize((k - x) * (phi - x)) * t.rho / T::of_usize((x + 1) * (n + x + 1 - k - phi))
    };
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if ratio(mid) >= T::one() {
            a = mid + 1;
        } else {
            b = mid;
        }
    }
    let mode = a;
    let flips = k + phi - 2 * mode;
    let ln_peak = lnf.ln_choose(k, mode)
        + lnf.ln_choose(n - k, phi - mode)
        + xlogy(n - flips, t.ln_keep)
        + xlogy(flips, t.ln_theta);

    let tiny = T::of(1e-20);
    let mut sum = T::one();
    let mut rel = T::one();
    for x in mode..hi {
        rel = rel * ratio(x);
        sum = sum + rel;
        if rel < tiny {
            break;
        }
    }
    rel = T::one();
    for x in (lo..mode).rev() {
        rel = rel / ratio(x);
        sum = sum + rel;
        if rel < tiny {
            break;
        }
    }
    ln_peak + sum.ln()
}

fn ln_likelihood_with<T: Real>(phi: usize, model: &LikelihoodModel, terms: &ThetaTerms<T>, lnf: &LnFactorials<T>) -> T {
    if model.immune {
        return terms.ln_pz[phi];
    }
    let n = model.n;
    // The k = phi term bounds the total from below; since every transition
    // probability is at most 1, any k whose binomial weight alone falls more
    // than 40 nats under that bound changes the sum by less than e^-40.
    let floor = terms.ln_pz[phi] + ln_transition(phi, phi, n, terms, lnf) - T::of(40.0);
    let parts: Vec<T> = (0..=n)
        .filter(|&k| terms.ln_pz[k] >= floor)
        .map(|k| terms.ln_pz[k] + ln_transition(phi, k, n, terms, lnf))
        .collect();
    log_sum_exp(&parts)
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if !(theta >= T::zero() && theta < T::of(0.5)) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, 0.5), got {theta}"
        )));
    }
    Ok(())
}

fn check_index(what: &str, value: usize, n: usize) -> Result<()> {
    if value > n {
        return Err(Error::OutOfRange(format!("{what} = {value} exceeds n = {n}")));
    }
    Ok(())
}

/// `ln Pr[z = k | theta]`, Binomial(n, p_bin).
pub fn ln_pr_z<T: Real>(k: usize, theta: T, n: usize, r: usize) -> Result<T> {
    check_index("k", k, n)?;
    check_theta(theta)?;
    let model = LikelihoodModel::new(n, r, true)?;
    let lnf = LnFactorials::new(n);
    Ok(ThetaTerms::new(theta, &model, &lnf).ln_pz[k])
}

pub fn pr_z<T: Real>(k: usize, theta: T, n: usize, r: usize) -> Result<T> {
    Ok(ln_pr_z(k, theta, n, r)?.exp())
}

/// `ln Pr[z^c = phi | z = k, theta]`.
pub fn ln_pr_zc_given_z<T: Real>(phi: usize, k: usize, theta: T, n: usize) -> Result<T> {
    check_index("phi", phi, n)?;
    check_index("k", k, n)?;
    check_theta(theta)?;
    let lnf = LnFactorials::new(n);
    // r only enters through ln_pz, which the transition does not use.
    let model = LikelihoodModel::new(n, 1, false)?;
    Ok(ln_transition(phi, k, n, &ThetaTerms::new(theta, &model, &lnf), &lnf))
}

/// `sum_x C(k,x) C(n-k, phi-x) (1-theta)^(n-k-phi+2x) theta^(k+phi-2x)`.
pub fn pr_zc_given_z<T: Real>(phi: usize, k: usize, theta: T, n: usize) -> Result<T> {
    Ok(ln_pr_zc_given_z(phi, k, theta, n)?.exp())
}

/// `ln Pr[z^c = phi | theta]`; for an immune model this is `ln Pr[z = phi]`.
pub fn ln_likelihood_zc<T: Real>(phi: usize, theta: T, model: &LikelihoodModel) -> Result<T> {
    check_index("phi", phi, model.n)?;
    check_theta(theta)?;
    let lnf = LnFactorials::new(model.n);
    let terms = ThetaTerms::new(theta, model, &lnf);
    Ok(ln_likelihood_with(phi, model, &terms, &lnf))
}

pub fn likelihood_zc<T: Real>(phi: usize, theta: T, model: &LikelihoodModel) -> Result<T> {
    Ok(ln_likelihood_zc(phi, theta, model)?.exp())
}

/// `ln Pr[z^c = phi | theta]` for every `phi` in `0..=n`.
pub fn ln_likelihood_row<T: Real>(theta: T, model: &LikelihoodModel) -> Result<Vec<T>> {
    check_theta(theta)?;
    let lnf = LnFactorials::new(model.n);
    Ok(row_with(theta, model, &lnf))
}

fn row_with<T: Real>(theta: T, model: &LikelihoodModel, lnf: &LnFactorials<T>) -> Vec<T> {
    let terms = ThetaTerms::new(theta, model, lnf);
    (0..=model.n)
        .map(|phi| ln_likelihood_with(phi, model, &terms, lnf))
        .collect()
}

fn check_observation(phis: &[usize], models: &[LikelihoodModel]) -> Result<()> {
    if phis.is_empty() || models.is_empty() {
        return Err(Error::InvalidParameter("no observations".into()));
    }
    if phis.len() != models.len() {
        return Err(Error::InvalidParameter(format!(
            "{} observations for {} models",
            phis.len(),
            models.len()
        )));
    }
    for (i, (&phi, m)) in phis.iter().zip(models).enumerate() {
        if phi > m.n {
            return Err(Error::OutOfRange(format!(
                "phi[{i}] = {phi} exceeds n = {}",
                m.n
            )));
        }
    }
    Ok(())
}

fn check_cap<T: Real>(grid: &ThetaGrid<T>, theta_cap: T) -> Result<()> {
    // Written to reject NaN as well.
    if theta_cap.partial_cmp(&grid.min()).is_none_or(|o| o.is_lt()) {
        return Err(Error::InvalidParameter(format!(
            "theta cap {theta_cap} lies below the grid minimum {}",
            grid.min()
        )));
    }
    Ok(())
}

/// Index of the largest value; ties go to the lowest index.
fn argmax<T: Real>(values: impl Iterator<Item = T>) -> usize {
    let mut best = 0;
    let mut best_v = T::neg_infinity();
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Grid maximizer of the joint log-likelihood `sum_i ln Pr[z_i^c = phi_i | theta]`,
/// clamped to `theta_cap`. Ties resolve to the smaller `theta`.
pub fn mle<T: Real>(
    phis: &[usize],
    models: &[LikelihoodModel],
    grid: &ThetaGrid<T>,
    theta_cap: T,
) -> Result<T> {
    check_observation(phis, models)?;
    check_cap(grid, theta_cap)?;
    let lnfs: Vec<LnFactorials<T>> = models.iter().map(|m| LnFactorials::new(m.n)).collect();
    let scores = grid.values().iter().map(|&theta| {
        models
            .iter()
            .zip(&lnfs)
            .zip(phis)
            .fold(T::zero(), |acc, ((m, lnf), &phi)| {
                let terms = ThetaTerms::new(theta, m, lnf);
                acc + ln_likelihood_with(phi, m, &terms, lnf)
            })
    });
    let best = grid.values()[argmax(scores)];
    Ok(best.min(theta_cap))
}

/// Identifies one resolution in a table file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TableResolution {
    pub n: u16,
    pub r: u32,
    pub sketch_seed: u64,
    pub plan_seed: u64,
}

/// Precomputed MLE for every observation tuple `(phi_1, ..., phi_k)` with
/// `phi_i` in `0..=n_i`, stored row-major (last index fastest) as `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct MleTable {
    resolutions: Vec<TableResolution>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    entries: Vec<f32>,
    theta_cap: f32,
    grid_min: f32,
    grid_max: f32,
    grid_size: u32,
}

const TABLE_MAGIC: &[u8; 4] = b"OET1";
const TABLE_VERSION: u16 = 1;

fn strides_for(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

/// Precomputes [`mle`] over the full observation space. Per-resolution
/// log-likelihood rows are evaluated in parallel over the grid; the result
/// does not depend on the thread count.
pub fn build_table<T: Real>(
    models: &[LikelihoodModel],
    grid: &ThetaGrid<T>,
    theta_cap: T,
) -> Result<MleTable> {
    if models.is_empty() {
        return Err(Error::InvalidParameter("a table needs at least one model".into()));
    }
    check_cap(grid, theta_cap)?;
    let resolutions = models
        .iter()
        .map(|m| {
            Ok(TableResolution {
                n: u16::try_from(m.n).map_err(|_| Error::InvalidParameter(format!("n = {} too large", m.n)))?,
                r: u32::try_from(m.r).map_err(|_| Error::InvalidParameter(format!("r = {} too large", m.r)))?,
                sketch_seed: 0,
                plan_seed: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // rows[i][g][phi] = ln Pr[z_i^c = phi | grid[g]]
    let rows: Vec<Vec<Vec<T>>> = models
        .iter()
        .map(|m| {
            let lnf = LnFactorials::new(m.n);
            grid.values()
                .par_iter()
                .map(|&theta| row_with(theta, m, &lnf))
                .collect()
        })
        .collect();

    let dims: Vec<usize> = models.iter().map(|m| m.n + 1).collect();
    let strides = strides_for(&dims);
    let total: usize = dims.iter().product();
    let entries: Vec<f32> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let phis: Vec<usize> = dims
                .iter()
                .zip(&strides)
                .map(|(&d, &s)| (flat / s) % d)
                .collect();
            let scores = (0..grid.len()).map(|g| {
                rows.iter()
                    .zip(&phis)
                    .fold(T::zero(), |acc, (row, &phi)| acc + row[g][phi])
            });
            let best = grid.values()[argmax(scores)].min(theta_cap);
            best.to_f32().expect("finite")
        })
        .collect();

    Ok(MleTable {
        resolutions,
        dims,
        strides,
        entries,
        theta_cap: theta_cap.to_f32().expect("finite"),
        grid_min: grid.min().to_f32().expect("finite"),
        grid_max: grid.max().to_f32().expect("finite"),
        grid_size: grid.len() as u32,
    })
}

impl MleTable {
    /// Attaches the sketch and plan seeds recorded in the file header.
    pub fn with_seeds(mut self, seeds: &[(u64, u64)]) -> Result<Self> {
        if seeds.len() != self.resolutions.len() {
            return Err(Error::InvalidParameter(format!(
                "{} seed pairs for {} resolutions",
                seeds.len(),
                self.resolutions.len()
            )));
        }
        for (res, &(s, p)) in self.resolutions.iter_mut().zip(seeds) {
            res.sketch_seed = s;
            res.plan_seed = p;
        }
        Ok(self)
    }

    pub fn resolutions(&self) -> &[TableResolution] {
        &self.resolutions
    }

    /// Per-resolution index ranges, `n_i + 1` each.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[f32] {
        &self.entries
    }

    pub fn theta_cap(&self) -> f32 {
        self.theta_cap
    }

    pub fn grid_min(&self) -> f32 {
        self.grid_min
    }

    pub fn grid_max(&self) -> f32 {
        self.grid_max
    }

    pub fn grid_size(&self) -> u32 {
        self.grid_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn lookup(&self, phis: &[usize]) -> Result<f32> {
        if phis.len() != self.dims.len() {
            return Err(Error::OutOfRange(format!(
                "{} observations for a {}-resolution table",
                phis.len(),
                self.dims.len()
            )));
        }
        let mut flat = 0;
        for ((&phi, &d), &s) in phis.iter().zip(&self.dims).zip(&self.strides) {
            if phi >= d {
                return Err(Error::OutOfRange(format!("phi = {phi} exceeds n = {}", d - 1)));
            }
            flat += phi * s;
        }
        Ok(self.entries[flat])
    }

    /// Lookup that reports the cap whenever any resolution is saturated
    /// (`phi_i >= n_i / 2`), as a table restricted to unsaturated tuples would.
    pub fn lookup_compat(&self, phis: &[usize]) -> Result<f32> {
        let value = self.lookup(phis)?;
        if phis.iter().zip(&self.dims).any(|(&phi, &d)| 2 * phi >= d - 1) {
            return Ok(self.theta_cap);
        }
        Ok(value)
    }

    /// Index ranges of the unsaturated sub-table: `phi_i < n_i / 2`.
    pub fn compat_dims(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| (d - 1).div_ceil(2)).collect()
    }

    /// Entries of the unsaturated sub-table, row-major.
    pub fn compat_view(&self) -> Vec<f32> {
        let cdims = self.compat_dims();
        let cstrides = strides_for(&cdims);
        let total: usize = cdims.iter().product();
        (0..total)
            .map(|flat| {
                let idx: usize = cdims
                    .iter()
                    .zip(&cstrides)
                    .zip(&self.strides)
                    .map(|((&d, &cs), &s)| ((flat / cs) % d) * s)
                    .sum();
                self.entries[idx]
            })
            .collect()
    }

    /// Size of the unsaturated sub-table payload at 4 bytes per entry.
    pub fn compat_payload_bytes(&self) -> usize {
        self.compat_dims().iter().product::<usize>() * 4
    }

    /// Little-endian table file:
    ///
    /// ```text
    /// "OET1" | version u16 | resolutions u8 | theta_cap f32
    /// per resolution: n u16 | r u32 | sketch_seed u64 | plan_seed u64
    /// grid_min f32 | grid_max f32 | grid_size u32
    /// entries f32 (row-major over the full ranges)
    /// crc32 u32 over everything above
    /// ```
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(27 + 22 * self.resolutions.len() + 4 * self.entries.len());
        out.extend_from_slice(TABLE_MAGIC);
        out.extend_from_slice(&TABLE_VERSION.to_le_bytes());
        out.push(self.resolutions.len() as u8);
        out.extend_from_slice(&self.theta_cap.to_le_bytes());
        for r in &self.resolutions {
            out.extend_from_slice(&r.n.to_le_bytes());
            out.extend_from_slice(&r.r.to_le_bytes());
            out.extend_from_slice(&r.sketch_seed.to_le_bytes());
            out.extend_from_slice(&r.plan_seed.to_le_bytes());
        }
        out.extend_from_slice(&self.grid_min.to_le_bytes());
        out.extend_from_slice(&self.grid_max.to_le_bytes());
        out.extend_from_slice(&self.grid_size.to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&e.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |reason: &str| Error::format("MLE table", reason);
        if bytes.len() < 4 {
            return Err(bad("truncated"));
        }
        let (body, crc) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().unwrap()) {
            return Err(bad("checksum mismatch"));
        }
        let mut cur = Cursor { buf: body, at: 0 };
        if cur.take(4).ok_or_else(|| bad("truncated"))? != TABLE_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = cur.u16().ok_or_else(|| bad("truncated"))?;
        if version != TABLE_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let count = cur.u8().ok_or_else(|| bad("truncated"))? as usize;
        if count == 0 {
            return Err(bad("no resolutions"));
        }
        let theta_cap = cur.f32().ok_or_else(|| bad("truncated"))?;
        let mut resolutions = Vec::with_capacity(count);
        for _ in 0..count {
            let res = (|| {
                Some(TableResolution {
                    n: cur.u16()?,
                    r: cur.u32()?,
                    sketch_seed: cur.u64()?,
                    plan_seed: cur.u64()?,
                })
            })()
            .ok_or_else(|| bad("truncated"))?;
            if res.n == 0 {
                return Err(bad("zero-length subcode"));
            }
            resolutions.push(res);
        }
        let grid_min = cur.f32().ok_or_else(|| bad("truncated"))?;
        let grid_max = cur.f32().ok_or_else(|| bad("truncated"))?;
        let grid_size = cur.u32().ok_or_else(|| bad("truncated"))?;
        let dims: Vec<usize> = resolutions.iter().map(|r| r.n as usize + 1).collect();
        let total: usize = dims.iter().product();
        let payload = cur.rest();
        if payload.len() != 4 * total {
            return Err(bad("payload length does not match header"));
        }
        let entries = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            strides: strides_for(&dims),
            resolutions,
            dims,
            entries,
            theta_cap,
            grid_min,
            grid_max,
            grid_size,
        })
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn lookup(table: &MleTable, phis: &[usize]) -> Result<f32> {
    table.lookup(phis)
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.at..self.at + n)?;
        self.at += n;
        Some(s)
    }
    fn u8(&mut self) -> Option<u8> {
        Some(self.take(1)?[0])
    }
    fn u16(&mut self) -> Option<u16> {
        Some(u16::from_le_bytes(self.take(2)?.try_into().ok()?))
    }
    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }
    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
    fn f32(&mut self) -> Option<f32> {
        Some(f32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }
    fn rest(&self) -> &'a [u8] {
        &self.buf[self.at..]
    }
}
