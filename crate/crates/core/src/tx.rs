//! Signal sources and the DAC front end: SCM-PAM waveforms, sine tones,
//! and a clip/quantize/noise/lowpass DAC model.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::filter::{self, rrc_response};
use crate::seed;
use crate::waveform::{gaussian, SampledWaveform};

/// Upper bound on burst repetitions searched when putting every carrier on
/// the record's frequency grid.
const MAX_RECORD_BURSTS: usize = 64;

/// Subcarrier-multiplexed PAM source.
///
/// Each channel is a single-sideband subcarrier: channel `k` (1-based)
/// occupies `k·channel_spacing + baseband_offset` plus the one-sided pulse
/// bandwidth `baud·(1 + rolloff)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmConfig {
    pub n_channels: usize,
    pub channel_spacing: f64,
    pub baud: f64,
    pub baseband_offset: f64,
    pub rolloff: f64,
    pub duration: f64,
    pub levels: usize,
}

impl Default for ScmConfig {
    fn default() -> Self {
        Self {
            n_channels: 10,
            channel_spacing: 1e9,
            baud: 800e6,
            baseband_offset: 40e6,
            rolloff: 0.1,
            duration: 2.048e-6,
            levels: 4,
        }
    }
}

impl ScmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_channels == 0 {
            return Err(invalid("n_channels", "must be >= 1"));
        }
        if !(self.channel_spacing > 0.0 && self.baud > 0.0 && self.duration > 0.0) {
            return Err(invalid("scm", "spacing, baud and duration must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(invalid("rolloff", format!("must lie in [0, 1], got {}", self.rolloff)));
        }
        if self.levels < 2 {
            return Err(invalid("levels", "PAM order must be >= 2"));
        }
        if self.baud * (1.0 + self.rolloff) > self.channel_spacing {
            return Err(invalid("baud", "baud·(1 + rolloff) exceeds the channel spacing"));
        }
        if !(self.baseband_offset >= 0.0 && self.baseband_offset < self.channel_spacing / 2.0) {
            return Err(invalid("baseband_offset", "must lie in [0, spacing/2)"));
        }
        if self.baseband_offset + self.half_bandwidth() > self.channel_spacing / 2.0 {
            return Err(invalid(
                "baseband_offset",
                "offset plus one-sided pulse bandwidth must fit in half a channel",
            ));
        }
        if self.symbols_per_channel() == 0 {
            return Err(invalid("duration", "shorter than one symbol"));
        }
        Ok(())
    }

    /// One-sided occupied bandwidth of a shaped channel.
    pub fn half_bandwidth(&self) -> f64 {
        self.baud * (1.0 + self.rolloff) / 2.0
    }

    /// Symbols in one burst: `floor(duration·baud)`.
    pub fn symbols_per_channel(&self) -> usize {
        (self.duration * self.baud * (1.0 + 1e-12)).floor() as usize
    }

    /// Burst length in seconds.
    pub fn burst_period(&self) -> f64 {
        self.symbols_per_channel() as f64 / self.baud
    }

    /// Number of burst repetitions in a simulation record, chosen so the
    /// channel spacing is an integer multiple of the record's frequency
    /// resolution.
    pub fn record_bursts(&self) -> usize {
        let t = self.burst_period();
        (1..=MAX_RECORD_BURSTS)
            .find(|&r| {
                let bins = r as f64 * t * self.channel_spacing;
                (bins - bins.round()).abs() < 1e-6
            })
            .unwrap_or(1)
    }

    /// Record length in seconds (whole bursts).
    pub fn record_period(&self) -> f64 {
        self.record_bursts() as f64 * self.burst_period()
    }

    /// Baseband offset rounded to the record frequency grid.
    pub fn effective_offset(&self) -> f64 {
        let t = self.record_period();
        (self.baseband_offset * t).round() / t
    }

    /// Carrier of 1-based channel `k`.
    pub fn carrier(&self, k: usize) -> f64 {
        let t = self.record_period();
        (k as f64 * self.channel_spacing * t).round() / t + self.effective_offset()
    }

    /// Integer samples per symbol at `rate`, if there is one.
    pub fn samples_per_symbol(&self, rate: f64) -> Option<usize> {
        let sps = rate / self.baud;
        let r = sps.round();
        ((sps - r).abs() < 1e-9 && r >= 1.0).then_some(r as usize)
    }
}

/// Uniform `levels`-ary PAM symbols scaled to unit mean power.
pub fn gen_pam_symbols(count: usize, levels: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(invalid("count", "must be >= 1"));
    }
    if levels < 2 {
        return Err(invalid("levels", "must be >= 2"));
    }
    let m = levels as f64;
    let scale = ((m * m - 1.0) / 3.0).sqrt();
    let mut rng = seed::rng(seed);
    Ok((0..count)
        .map(|_| (2.0 * rng.gen_range(0..levels) as f64 - m + 1.0) / scale)
        .collect())
}

/// PAM4 symbols from `{-3, -1, 1, 3}/√5`.
pub fn gen_pam4_symbols(count: usize, seed: u64) -> Result<Vec<f64>> {
    gen_pam_symbols(count, 4, seed)
}

/// Per-channel symbol bursts, seeded from `(master, channel)`.
pub fn channel_symbols(cfg: &ScmConfig, master_seed: u64) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    (1..=cfg.n_channels)
        .map(|k| {
            let s = seed::derive(master_seed, seed::Stream::Symbols, k as u64);
            gen_pam_symbols(cfg.symbols_per_channel(), cfg.levels, s)
        })
        .collect()
}

/// Sum of single-sideband RRC-shaped subcarriers.
///
/// `symbols[k-1]` is one burst for channel `k`; an all-zero burst mutes the
/// channel. The output spans [`ScmConfig::record_bursts`] repetitions of the
/// burst and is exactly periodic over that record. Each channel carries the
/// power of its symbols (unit for [`gen_pam_symbols`]).
pub fn scm_waveform(cfg: &ScmConfig, symbols: &[Vec<f64>], rate: f64) -> Result<SampledWaveform> {
    cfg.validate()?;
    let top = cfg.n_channels as f64 * cfg.channel_spacing;
    if rate < 2.2 * top {
        return Err(invalid(
            "rate",
            format!("{rate} Hz is below 2.2 x the {top} Hz multiplex span"),
        ));
    }
    let sps = cfg
        .samples_per_symbol(rate)
        .ok_or_else(|| invalid("rate", "must be an integer multiple of the baud"))?;
    if symbols.len() != cfg.n_channels {
        return Err(Error::LengthMismatch {
            what: format!("{} symbol bursts for {} channels", symbols.len(), cfg.n_channels),
        });
    }
    let per = cfg.symbols_per_channel();
    if let Some(bad) = symbols.iter().find(|s| s.len() != per) {
        return Err(Error::LengthMismatch {
            what: format!("burst of {} symbols, expected {per}", bad.len()),
        });
    }
    let reps = cfg.record_bursts();
    let n = per * reps * sps;
    let df = rate / n as f64;
    let max_bin = (cfg.half_bandwidth() / df).ceil() as usize;
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    for (idx, syms) in symbols.iter().enumerate() {
        if syms.iter().all(|&a| a == 0.0) {
            continue;
        }
        let mut train = vec![Complex64::new(0.0, 0.0); n];
        for r in 0..reps {
            for (m, &a) in syms.iter().enumerate() {
                train[(r * per + m) * sps].re = sps as f64 * a;
            }
        }
        fft::forward(&mut train);
        let carrier_bin = (cfg.carrier(idx + 1) / df).round() as usize;
        for j in 0..=max_bin {
            let w = if j == 0 { 1.0 } else { 2.0 };
            let g = rrc_response(j as f64 * df, cfg.baud, cfg.rolloff);
            if g > 0.0 {
                total[carrier_bin + j] += train[j] * (w * g);
            }
        }
    }
    fft::inverse(&mut total);
    SampledWaveform::new(total.into_iter().map(|c| c.re).collect(), rate)
}

/// `amplitude·cos(2π·freq·t)` sampled for `round(duration·rate)` points.
pub fn sine_waveform(freq: f64, amplitude: f64, duration: f64, rate: f64) -> Result<SampledWaveform> {
    if !(freq >= 0.0 && freq < rate / 2.0) {
        return Err(invalid("freq", format!("{freq} Hz outside [0, {}) Hz", rate / 2.0)));
    }
    let n = (duration * rate).round() as usize;
    if n == 0 {
        return Err(invalid("duration", "yields zero samples"));
    }
    // Reduce the phase to one cycle so long records stay accurate.
    let cycles = freq / rate;
    let s = (0..n)
        .map(|i| amplitude * (2.0 * PI * (cycles * i as f64).fract()).cos())
        .collect();
    SampledWaveform::new(s, rate)
}

/// DAC front end. Each impairment stage can be switched off.
#[derive(Debug, Clone, PartialEq)]
pub struct DacConfig {
    pub bits: u32,
    pub rate: f64,
    pub lpf_cutoff: f64,
    pub full_scale: f64,
    /// White residual noise, dB relative to a full-scale sine.
    pub residual_noise_db: f64,
    pub quantize: bool,
    pub noise: bool,
    pub lpf: bool,
}

impl Default for DacConfig {
    fn default() -> Self {
        Self {
            bits: 6,
            rate: 32e9,
            lpf_cutoff: 11e9,
            full_scale: 1.0,
            residual_noise_db: -30.0,
            quantize: true,
            noise: true,
            lpf: true,
        }
    }
}

impl DacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=32).contains(&self.bits) {
            return Err(invalid("bits", format!("must lie in [1, 32], got {}", self.bits)));
        }
        if !(self.rate > 0.0) {
            return Err(invalid("rate", "must be positive"));
        }
        if !(self.lpf_cutoff > 0.0 && self.lpf_cutoff < self.rate / 2.0) {
            return Err(invalid("lpf_cutoff", "must lie in (0, rate/2)"));
        }
        if !(self.full_scale > 0.0) {
            return Err(invalid("full_scale", "must be positive"));
        }
        Ok(())
    }

    /// Quantizer step `2·full_scale / 2^bits`.
    pub fn step(&self) -> f64 {
        2.0 * self.full_scale / 2f64.powi(self.bits as i32)
    }

    /// Residual noise variance in amplitude units squared.
    pub fn residual_noise_power(&self) -> f64 {
        self.full_scale * self.full_scale / 2.0 * 10f64.powf(self.residual_noise_db / 10.0)
    }

    /// Ideal converter: only clipping remains.
    pub fn ideal(self) -> Self {
        Self { quantize: false, noise: false, lpf: false, ..self }
    }
}

/// Mid-rise uniform quantizer with `2^bits` levels spanning `±full_scale`.
pub fn quantize_midrise(v: f64, bits: u32, full_scale: f64) -> f64 {
    let half = 2f64.powi(bits as i32 - 1);
    let step = full_scale / half;
    let c = (v / step).floor().clamp(-half, half - 1.0);
    (c + 0.5) * step
}

/// Clip, quantize, add residual noise, then lowpass. The lowpass is a
/// linear-phase FIR applied circularly over the record.
pub fn dac_model(x: &SampledWaveform, cfg: &DacConfig, seed: u64) -> Result<SampledWaveform> {
    cfg.validate()?;
    if (x.rate() - cfg.rate).abs() > 1e-6 * cfg.rate {
        return Err(Error::RateMismatch { expected: cfg.rate, got: x.rate() });
    }
    let fs = cfg.full_scale;
    let mut y: Vec<f64> = x.samples().iter().map(|&v| v.clamp(-fs, fs)).collect();
    if cfg.quantize {
        y.iter_mut().for_each(|v| *v = quantize_midrise(*v, cfg.bits, fs));
    }
    if cfg.noise {
        let noise = gaussian(y.len(), cfg.residual_noise_power(), seed);
        y.iter_mut().zip(noise).for_each(|(v, e)| *v += e);
    }
    let y = SampledWaveform::from_parts(y, cfg.rate);
    if cfg.lpf {
        let len = filter::kaiser_length(60.0, 0.2 * cfg.lpf_cutoff, cfg.rate);
        let taps = filter::fir_lowpass(cfg.lpf_cutoff, cfg.rate, len)?;
        return filter::apply_fir_periodic(&y, &taps);
    }
    Ok(y)
}

/// Gain in dB of a linear-in-dB tilt: 0 dB at or below 0.1 GHz, falling to
/// `-rolloff_db` at 10 GHz and held beyond.
pub fn tilt_gain_db(f: f64, rolloff_db: f64) -> f64 {
    const F0: f64 = 0.1e9;
    const F1: f64 = 10e9;
    -rolloff_db * ((f.abs() - F0) / (F1 - F0)).clamp(0.0, 1.0)
}

/// Zero-phase electrical tilt applied over the record.
pub fn apply_tilt(x: &SampledWaveform, rolloff_db: f64) -> SampledWaveform {
    if rolloff_db == 0.0 {
        return x.clone();
    }
    let y = fft::filter_periodic(x.samples(), x.rate(), |f| {
        Complex64::new(10f64.powf(tilt_gain_db(f, rolloff_db) / 20.0), 0.0)
    });
    SampledWaveform::from_parts(y, x.rate())
}

/// `index,value` CSV for symbols or waveform samples. Values use the
/// shortest round-trip representation.
pub fn index_value_csv(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24 + 12);
    s.push_str("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{i},{v}");
    }
    s
}
