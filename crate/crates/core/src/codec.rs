//! End-to-end encoder and decoder.
//!
//! A [`CodecConfig`] lists one or two resolutions, each an `(n, r)` pair with
//! its own sketch and sampling seeds. The codeword is the concatenation of
//! the per-resolution sketches in list order, coarse (larger `r`) first.

use std::fmt::Write as _;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::likelihood::{self, LikelihoodModel, MleTable, ThetaGrid};
use crate::packet::Packet;
use crate::rng::{self, tag};
use crate::sampling::SamplingPlan;
use crate::sketch::SketchSpec;

/// Most resolutions a codec config may carry.
pub const MAX_RESOLUTIONS: usize = 2;

/// Output cap shared by the named presets.
pub const DEFAULT_THETA_CAP: f64 = 0.06;

/// One subcode: `n` sketch bits over `r` sampled packet bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Resolution {
    pub n: usize,
    pub r: usize,
    pub sketch_seed: u64,
    pub plan_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    name: String,
    resolutions: Vec<Resolution>,
    theta_cap: f64,
    immune: bool,
}

impl CodecConfig {
    /// Validates and orders resolutions by decreasing `r` (stable).
    pub fn new(
        name: impl Into<String>,
        mut resolutions: Vec<Resolution>,
        theta_cap: f64,
        immune: bool,
    ) -> Result<Self> {
        if resolutions.is_empty() || resolutions.len() > MAX_RESOLUTIONS {
            return Err(Error::InvalidParameter(format!(
                "a codec needs 1 to {MAX_RESOLUTIONS} resolutions, got {}",
                resolutions.len()
            )));
        }
        for res in &resolutions {
            if res.n == 0 || res.r == 0 || res.n > u16::MAX as usize || res.r > u32::MAX as usize {
                return Err(Error::InvalidParameter(format!(
                    "resolution needs 1 <= n <= 65535 and 1 <= r, got n={}, r={}",
                    res.n, res.r
                )));
            }
        }
        if !(theta_cap > 0.0 && theta_cap < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "theta cap must lie in (0, 0.5), got {theta_cap}"
            )));
        }
        resolutions.sort_by_key(|r| std::cmp::Reverse(r.r));
        Ok(Self {
            name: name.into(),
            resolutions,
            theta_cap,
            immune,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn resolutions(&self) -> &[Resolution] {
        &self.resolutions
    }

    pub fn theta_cap(&self) -> f64 {
        self.theta_cap
    }

    pub fn immune(&self) -> bool {
        self.immune
    }

    /// Codeword length: the sum of subcode lengths.
    pub fn total_n(&self) -> usize {
        self.resolutions.iter().map(|r| r.n).sum()
    }

    pub fn with_immune(mut self, immune: bool) -> Self {
        self.immune = immune;
        self
    }

    /// Fingerprint of everything that shapes a codeword.
    pub fn id(&self) -> u64 {
        self.resolutions.iter().fold(0x4f44_4445_4543, |acc, r| {
            let acc = rng::derive_seed(acc, r.n as u64, r.r as u64);
            rng::derive_seed(acc, r.sketch_seed, r.plan_seed)
        })
    }

    /// Key-value text form:
    ///
    /// ```text
    /// name = oddeec-c
    /// theta_cap = 0.06
    /// immune = false
    /// resolution = n:48 r:2250 sketch_seed:... plan_seed:...
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "name = {}", self.name).unwrap();
        writeln!(out, "theta_cap = {}", self.theta_cap).unwrap();
        writeln!(out, "immune = {}", self.immune).unwrap();
        for r in &self.resolutions {
            writeln!(
                out,
                "resolution = n:{} r:{} sketch_seed:{} plan_seed:{}",
                r.n, r.r, r.sketch_seed, r.plan_seed
            )
            .unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |reason: String| Error::format("codec config", reason);
        let mut name = None;
        let mut theta_cap = DEFAULT_THETA_CAP;
        let mut immune = false;
        let mut resolutions = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", lineno + 1)))?;
            let value = value.trim();
            match key.trim() {
                "name" => name = Some(value.to_string()),
                "theta_cap" => {
                    theta_cap = value
                        .parse()
                        .map_err(|e| bad(format!("line {}: theta_cap: {e}", lineno + 1)))?
                }
                "immune" => {
                    immune = value
                        .parse()
                        .map_err(|e| bad(format!("line {}: immune: {e}", lineno + 1)))?
                }
                "resolution" => resolutions.push(parse_resolution(value).map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?),
                other => return Err(bad(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        let name = name.ok_or_else(|| bad("missing name".into()))?;
        Self::new(name, resolutions, theta_cap, immune)
    }
}

fn parse_resolution(value: &str) -> std::result::Result<Resolution, String> {
    let (mut n, mut r, mut s, mut p) = (None, None, None, None);
    for field in value.split_whitespace() {
        let (k, v) = field
            .split_once(':')
            .ok_or_else(|| format!("resolution field {field:?} is not key:value"))?;
        let num: u64 = v.parse().map_err(|e| format!("resolution {k}: {e}"))?;
        match k {
            "n" => n = Some(num as usize),
            "r" => r = Some(num as usize),
            "sketch_seed" => s = Some(num),
            "plan_seed" => p = Some(num),
            other => return Err(format!("unknown resolution field {other:?}")),
        }
    }
    Ok(Resolution {
        n: n.ok_or("resolution without n")?,
        r: r.ok_or("resolution without r")?,
        sketch_seed: s.ok_or("resolution without sketch_seed")?,
        plan_seed: p.ok_or("resolution without plan_seed")?,
    })
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["oddeec-s", "oddeec-l", "oddeec-c", "oddeec-c80"];

/// Seeds for resolution `i`: `derive_seed(base, SKETCH, i)` and
/// `derive_seed(base, PLAN, i)`.
pub fn resolution_seeds(base_seed: u64, i: usize) -> (u64, u64) {
    (
        rng::derive_seed(base_seed, tag::SKETCH, i as u64),
        rng::derive_seed(base_seed, tag::PLAN, i as u64),
    )
}

/// The named configurations:
///
/// | name         | resolutions (n, r)        | immune |
/// |--------------|---------------------------|--------|
/// | `oddeec-s`   | (96, 2000)                | no     |
/// | `oddeec-l`   | (96, 4500)                | no     |
/// | `oddeec-c`   | (48, 2250), (48, 1000)    | no     |
/// | `oddeec-c80` | (40, 1900), (40, 840)     | yes    |
pub fn preset(name: &str, base_seed: u64) -> Result<CodecConfig> {
    let (shape, immune): (&[(usize, usize)], bool) = match name {
        "oddeec-s" => (&[(96, 2000)], false),
        "oddeec-l" => (&[(96, 4500)], false),
        "oddeec-c" => (&[(48, 2250), (48, 1000)], false),
        "oddeec-c80" => (&[(40, 1900), (40, 840)], true),
        other => return Err(Error::UnknownConfig(other.to_string())),
    };
    let resolutions = shape
        .iter()
        .enumerate()
        .map(|(i, &(n, r))| {
            let (sketch_seed, plan_seed) = resolution_seeds(base_seed, i);
            Resolution {
                n,
                r,
                sketch_seed,
                plan_seed,
            }
        })
        .collect();
    CodecConfig::new(name, resolutions, DEFAULT_THETA_CAP, immune)
}

/// Concatenated subcode sketches.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    bits: BitString,
    config_id: u64,
}

impl Codeword {
    pub fn from_bits(bits: BitString, cfg: &CodecConfig) -> Result<Self> {
        if bits.len() != cfg.total_n() {
            return Err(Error::LengthMismatch {
                expected: cfg.total_n(),
                actual: bits.len(),
            });
        }
        Ok(Self {
            bits,
            config_id: cfg.id(),
        })
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut BitString {
        &mut self.bits
    }

    pub fn config_id(&self) -> u64 {
        self.config_id
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Discrepancy counts `phi_i`, one per resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    phis: [usize; MAX_RESOLUTIONS],
    len: usize,
}

impl Observation {
    pub fn as_slice(&self) -> &[usize] {
        &self.phis[..self.len]
    }
}

/// A config materialized for one packet length.
///
/// Sketch masks are composed with the sampling plan into masks over the
/// whole packet, so encoding is `n` AND + popcount passes per resolution and
/// never copies sampled bits.
#[derive(Debug, Clone)]
pub struct Codec {
    config: CodecConfig,
    l: usize,
    specs: Vec<SketchSpec>,
    plans: Vec<SamplingPlan>,
    packet_masks: Vec<Vec<BitString>>,
}

impl Codec {
    pub fn new(config: &CodecConfig, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidLength("packet length must be at least 1".into()));
        }
        let mut specs = Vec::new();
        let mut plans = Vec::new();
        let mut packet_masks = Vec::new();
        for res in &config.resolutions {
            let plan = SamplingPlan::new(res.r, l, res.plan_seed)?;
            let spec = SketchSpec::build(res.n, plan.sampled_len(), res.sketch_seed)?;
            let masks = spec
                .masks()
                .iter()
                .map(|mask| {
                    let mut full = BitString::zeros(l);
                    for k in mask.ones_positions() {
                        full.set(plan.positions()[k], true);
                    }
                    full
                })
                .collect();
            specs.push(spec);
            plans.push(plan);
            packet_masks.push(masks);
        }
        Ok(Self {
            config: config.clone(),
            l,
            specs,
            plans,
            packet_masks,
        })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn packet_len(&self) -> usize {
        self.l
    }

    pub fn specs(&self) -> &[SketchSpec] {
        &self.specs
    }

    pub fn plans(&self) -> &[SamplingPlan] {
        &self.plans
    }

    /// Likelihood models with `r` set to the number of bits actually sampled.
    pub fn models(&self) -> Vec<LikelihoodModel> {
        self.config
            .resolutions
            .iter()
            .zip(&self.plans)
            .map(|(res, plan)| {
                LikelihoodModel::new(res.n, plan.sampled_len(), self.config.immune)
                    .expect("validated config")
            })
            .collect()
    }

    /// MLE table over `grid`, capped at the config's `theta_cap`, with the
    /// config's seeds in its header.
    pub fn build_table(&self, grid: &ThetaGrid<f64>) -> Result<MleTable> {
        let seeds: Vec<(u64, u64)> = self
            .config
            .resolutions
            .iter()
            .map(|r| (r.sketch_seed, r.plan_seed))
            .collect();
        likelihood::build_table(&self.models(), grid, self.config.theta_cap)?.with_seeds(&seeds)
    }

    pub fn build_standard_table(&self) -> Result<MleTable> {
        self.build_table(&ThetaGrid::standard())
    }

    /// Checks that `table` was built for this codec's geometry.
    pub fn check_table(&self, table: &MleTable) -> Result<()> {
        let ok = table.resolutions().len() == self.config.resolutions.len()
            && table
                .resolutions()
                .iter()
                .zip(&self.config.resolutions)
                .zip(&self.plans)
                .all(|((t, c), plan)| {
                    t.n as usize == c.n
                        && t.r as usize == plan.sampled_len()
                        && t.sketch_seed == c.sketch_seed
                        && t.plan_seed == c.plan_seed
                });
        if !ok {
            return Err(Error::InvalidParameter(
                "MLE table does not match the codec configuration".into(),
            ));
        }
        Ok(())
    }

    fn check_packet(&self, p: &Packet) -> Result<()> {
        if p.len() != self.l {
            return Err(Error::LengthMismatch {
                expected: self.l,
                actual: p.len(),
            });
        }
        Ok(())
    }

    /// Sketch bits of `p` for every resolution, concatenated.
    pub fn encode(&self, p: &Packet) -> Result<Codeword> {
        self.check_packet(p)?;
        let mut bits = BitString::zeros(self.config.total_n());
        let mut at = 0;
        for masks in &self.packet_masks {
            for mask in masks {
                if p.bits().and_parity(mask) {
                    bits.set(at, true);
                }
                at += 1;
            }
        }
        Ok(Codeword {
            bits,
            config_id: self.config.id(),
        })
    }

    /// Number of bins where the received codeword disagrees with the sketch
    /// of the received packet, per resolution.
    pub fn observe(&self, received: &Packet, codeword: &Codeword) -> Result<Observation> {
        self.check_packet(received)?;
        if codeword.config_id != self.config.id() || codeword.len() != self.config.total_n() {
            return Err(Error::InvalidParameter(
                "codeword was not produced under this configuration".into(),
            ));
        }
        let mut phis = [0usize; MAX_RESOLUTIONS];
        let mut at = 0;
        for (i, masks) in self.packet_masks.iter().enumerate() {
            for mask in masks {
                if received.bits().and_parity(mask) != codeword.bits.get(at) {
                    phis[i] += 1;
                }
                at += 1;
            }
        }
        Ok(Observation {
            phis,
            len: self.packet_masks.len(),
        })
    }

    /// BER estimate for a received packet and codeword.
    pub fn decode(&self, received: &Packet, codeword: &Codeword, table: &MleTable) -> Result<f64> {
        let obs = self.observe(received, codeword)?;
        Ok(table.lookup(obs.as_slice())? as f64)
    }

    /// Splits a codeword into its subcodes.
    pub fn subcodes(&self, codeword: &Codeword) -> Vec<BitString> {
        let mut at = 0;
        self.config
            .resolutions
            .iter()
            .map(|r| {
                let s = codeword.bits.slice(at, r.n);
                at += r.n;
                s
            })
            .collect()
    }
}

/// One-shot encode; materializes the codec on every call.
pub fn encode(p: &Packet, cfg: &CodecConfig) -> Result<Codeword> {
    Codec::new(cfg, p.len())?.encode(p)
}

/// One-shot decode; materializes the codec on every call.
pub fn decode(received: &Packet, codeword: &Codeword, cfg: &CodecConfig, table: &MleTable) -> Result<f64> {
    let codec = Codec::new(cfg, received.len())?;
    codec.check_table(table)?;
    codec.decode(received, codeword, table)
}
