//! Link-performance modeling for phase-coherent uplink transmission from a
//! cluster of low-cost IoT devices to a common receiver.
//!
//! A cluster of `|δ|` devices transmits the same packet simultaneously over
//! i.i.d. Rician fading channels, each device pre-rotating its carrier phase
//! from whatever side-information it has. Two phasing strategies are covered:
//!
//! * **Location-based phasing** ([`channel::CkmSideInfo`]): each device knows
//!   the phase of its static (LoS) channel component up to a zero-mean
//!   Gaussian error. Only the static part combines coherently.
//! * **Quantized feedback phasing** ([`channel::FeedbackSideInfo`]): the
//!   receiver feeds back an `N`-bit quantization of the full channel phase
//!   per device; each feedback word is independently corrupted with
//!   probability `p_w` (a corrupted word behaves like a uniformly random
//!   codeword).
//!
//! For both strategies the crate provides
//!
//! * exact Monte Carlo samplers of the received SNR ([`channel`]), which act
//!   as ground truth,
//! * closed-form approximations of the SNR distribution
//!   ([`analytic_ckm`], [`analytic_feedback`]) built on a small
//!   special-function core ([`specfun`]),
//! * scenario-agnostic performance metrics — outage probability, delay
//!   outage rate and quantiles ([`metrics`]),
//! * a reproducible simulation harness with empirical CDFs, tail-aware
//!   quantile queries and minimal-device-count search ([`montecarlo`]).
//!
//! Noise power is normalized to 1 throughout, so channel power and SNR are
//! the same quantity; `mean_snr` is the average received SNR of a single
//! device at full transmit power.
//!
//! Monte Carlo generation is deterministic: a run is fully specified by
//! `(seed, configuration, sample count)` and produces bit-identical output
//! whether blocks are generated serially or in parallel (the `parallel`
//! feature, enabled by default, distributes blocks over a rayon pool).

pub mod analytic_ckm;
pub mod analytic_feedback;
pub mod channel;
mod error;
pub mod metrics;
pub mod montecarlo;
pub mod rng;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
