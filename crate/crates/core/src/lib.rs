//! Simulator for a dual-frequency-comb assisted analog-to-digital converter.
//!
//! A broadband electrical signal modulates every line of a "signal" comb;
//! beating line `n` against line `n` of a mutually coherent "LO" comb whose
//! spacing is larger by `Δf` moves the signal content near `n·Δf` down to
//! baseband, where a slow, high-resolution ADC digitizes it. The crate
//! models that chain end to end and evaluates it with sine-wave ADC testing
//! (SFDR, SINAD, ENOB) and SCM-PAM4 demodulation.
//!
//! Layout, from the bottom up:
//!
//! * [`waveform`], [`spectrum`], [`filter`], [`resample`]: signal primitives.
//! * [`tx`]: SCM-PAM4 and sine sources, DAC model.
//! * [`optics`]: comb pair, MZM, per-sub-band balanced beat.
//! * [`adc`]: sub-band digitizer.
//! * [`metrics`], [`demod`]: sine-test metrics and PAM4 demodulation.
//! * [`scenario`], [`harness`]: config files and sweep/SCM runners.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN. Index
// loops read better than iterator chains in the matrix code.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adc;
pub mod demod;
pub mod error;
pub mod fft;
pub mod filter;
pub mod harness;
pub mod metrics;
pub mod optics;
pub mod resample;
pub mod scenario;
pub mod seed;
pub mod spectrum;
pub mod tx;
pub mod waveform;

pub use error::{Error, Result};
pub use spectrum::{periodogram, SpectrumEstimate, Window};
pub use waveform::{analytic, awgn, wiener_phase, ComplexWaveform, SampledWaveform};
