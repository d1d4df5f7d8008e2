//! OddEEC: an error-estimating code built on the modified Odd sketch.
//!
//! A sender samples `r` bits of an `l`-bit packet at positions shared with
//! the receiver, sketches them into `n` parity bins and ships the sketch as
//! the codeword. The receiver re-sketches what it got, XORs the two
//! sketches and counts the differing bins. A precomputed maximum-likelihood
//! table turns those counts into a bit error rate estimate, accounting for
//! errors in the codeword itself.
//!
//! The analytic code (estimators, variance formulas, the likelihood kernel)
//! is generic over [`Real`]; the aliases below fix it to `f64`.
//!
//! ```
//! use oddeec::{apply_bsc, generate_packet, preset, ChannelParams, Codec};
//!
//! let config = preset("oddeec-c", 1)?;
//! let codec = Codec::new(&config, 12_000)?;
//! let table = codec.build_standard_table()?;
//!
//! let packet = generate_packet(12_000, 42)?;
//! let codeword = codec.encode(&packet)?;
//! let (received, _) = apply_bsc(&packet, &ChannelParams::new(0.005, 7)?);
//! let ber = codec.decode(&received, &codeword, &table)?;
//! assert!(ber > 0.0 && ber <= 0.06);
//! # Ok::<(), oddeec::Error>(())
//! ```

pub mod bench;
pub mod bits;
pub mod codec;
pub mod error;
pub mod likelihood;
pub mod packet;
pub mod real;
pub mod rng;
pub mod sampling;
pub mod sketch;
pub mod validate;
pub mod variance;

pub use bits::BitString;
pub use codec::{preset, Codec, CodecConfig, Codeword, Resolution};

pub use error::{Error, Result};
pub use likelihood::{build_table, mle, LikelihoodModel, MleTable};
pub use packet::{apply_bsc, generate_packet, hamming_distance, ChannelParams, Packet};
pub use real::Real;
pub use sampling::{check_safety, make_plan, SamplingPlan};
pub use sketch::{build_spec, OddSketch, SketchSpec};
pub use variance::tune_sampling_length;

/// BER search grid in double precision.
pub type ThetaGrid = likelihood::ThetaGrid<f64>;
/// Closed-form accuracy prediction in double precision.
pub type AccuracyPrediction = variance::AccuracyPrediction<f64>;
/// Single-precision grid, matching the table's stored precision.
pub type ThetaGrid32 = likelihood::ThetaGrid<f32>;
