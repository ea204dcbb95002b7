//! Sub-band digitizer: AC coupling, anti-alias lowpass, (jittered)
//! sampling, clipping and mid-rise quantization.
//!
//! The analog record is one period of a periodic signal, so sampling at
//! `k/rate` is exact: the spectrum is folded modulo the ADC rate and
//! inverse transformed. Jittered instants use a Taylor expansion whose
//! derivatives come from the same analog spectrum; the series is carried
//! until the remainder is far below one LSB.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::filter;
use crate::seed;
use crate::waveform::SampledWaveform;

/// Ceiling on Taylor terms for jittered sampling.
const MAX_TAYLOR_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct AdcConfig {
    pub bits: u32,
    pub rate: f64,
    pub full_scale: f64,
    pub jitter_rms: f64,
    pub aa_cutoff: f64,
    pub ac_couple_hz: f64,
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self {
            bits: 14,
            rate: 2.4e9,
            full_scale: 1.0,
            jitter_rms: 0.0,
            aa_cutoff: 1.2e9,
            ac_couple_hz: 10e6,
        }
    }
}

impl AdcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=24).contains(&self.bits) {
            return Err(invalid("bits", format!("must lie in [1, 24], got {}", self.bits)));
        }
        if !(self.rate > 0.0) {
            return Err(invalid("rate", "must be positive"));
        }
        if !(self.aa_cutoff > 0.0 && self.aa_cutoff <= self.rate / 2.0) {
            return Err(invalid("aa_cutoff", "must lie in (0, rate/2]"));
        }
        if !(self.jitter_rms >= 0.0) {
            return Err(invalid("jitter_rms", "must be >= 0"));
        }
        if !(self.full_scale > 0.0) {
            return Err(invalid("full_scale", "must be positive"));
        }
        if !(self.ac_couple_hz >= 0.0) {
            return Err(invalid("ac_couple_hz", "must be >= 0"));
        }
        Ok(())
    }

    /// Code step `2·full_scale / 2^bits`.
    pub fn lsb(&self) -> f64 {
        2.0 * self.full_scale / 2f64.powi(self.bits as i32)
    }

    pub fn code_range(&self) -> (i32, i32) {
        let half = 1i32 << (self.bits - 1);
        (-half, half - 1)
    }

    /// Mid-rise code of an analog value: `floor(v/lsb)`, clamped. Zero maps
    /// to code 0.
    pub fn code(&self, v: f64) -> i32 {
        let (lo, hi) = self.code_range();
        (v / self.lsb()).floor().clamp(lo as f64, hi as f64) as i32
    }

    /// Reconstruction level `(code + 1/2)·lsb`.
    pub fn level(&self, code: i32) -> f64 {
        (code as f64 + 0.5) * self.lsb()
    }
}

/// Quantized stream of one sub-band plus what is needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandCapture {
    pub codes: Vec<i32>,
    pub cfg: AdcConfig,
    pub subband_index: usize,
    /// Named seeds that produced the capture.
    pub seeds: BTreeMap<String, u64>,
    pub duration: f64,
}

impl SubbandCapture {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Codes mapped back to analog levels.
    pub fn waveform(&self) -> SampledWaveform {
        let v = self.codes.iter().map(|&c| self.cfg.level(c)).collect();
        SampledWaveform::from_parts(v, self.cfg.rate)
    }

    /// Metadata header (`# key = value`) followed by `index,code` rows.
    pub fn to_csv(&self) -> String {
        let c = &self.cfg;
        let mut s = String::with_capacity(self.codes.len() * 12 + 256);
        let _ = writeln!(s, "# bits = {}", c.bits);
        let _ = writeln!(s, "# rate = {}", c.rate);
        let _ = writeln!(s, "# full_scale = {}", c.full_scale);
        let _ = writeln!(s, "# jitter_rms = {}", c.jitter_rms);
        let _ = writeln!(s, "# aa_cutoff = {}", c.aa_cutoff);
        let _ = writeln!(s, "# ac_couple_hz = {}", c.ac_couple_hz);
        let _ = writeln!(s, "# subband_index = {}", self.subband_index);
        let _ = writeln!(s, "# duration = {}", self.duration);
        for (k, v) in &self.seeds {
            let _ = writeln!(s, "# seed.{k} = {v}");
        }
        s.push_str("index,code\n");
        for (i, code) in self.codes.iter().enumerate() {
            let _ = writeln!(s, "{i},{code}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut cfg = AdcConfig::default();
        let mut subband_index = 0;
        let mut duration = 0.0;
        let mut seeds = BTreeMap::new();
        let mut codes = Vec::new();
        let mut header_seen = false;
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let perr = |m: String| Error::Parse { line: line_no, message: m };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| perr(format!("metadata line without '=': {line}")))?;
                let (k, v) = (k.trim(), v.trim());
                let num = |v: &str| v.parse::<f64>().map_err(|e| perr(format!("{k}: {e}")));
                match k {
                    "bits" => cfg.bits = v.parse().map_err(|e| perr(format!("bits: {e}")))?,
                    "rate" => cfg.rate = num(v)?,
                    "full_scale" => cfg.full_scale = num(v)?,
                    "jitter_rms" => cfg.jitter_rms = num(v)?,
                    "aa_cutoff" => cfg.aa_cutoff = num(v)?,
                    "ac_couple_hz" => cfg.ac_couple_hz = num(v)?,
                    "subband_index" => {
                        subband_index = v.parse().map_err(|e| perr(format!("subband_index: {e}")))?
                    }
                    "duration" => duration = num(v)?,
                    _ => match k.strip_prefix("seed.") {
                        Some(name) => {
                            let s = v.parse().map_err(|e| perr(format!("{k}: {e}")))?;
                            seeds.insert(name.to_string(), s);
                        }
                        None => return Err(perr(format!("unknown metadata key '{k}'"))),
                    },
                }
                continue;
            }
            if !header_seen {
                if line != "index,code" {
                    return Err(perr(format!("expected 'index,code' header, got '{line}'")));
                }
                header_seen = true;
                continue;
            }
            let (i, c) = line.split_once(',').ok_or_else(|| perr("expected 'index,code'".into()))?;
            let i: usize = i.trim().parse().map_err(|e| perr(format!("index: {e}")))?;
            if i != codes.len() {
                return Err(perr(format!("index {i} out of sequence")));
            }
            codes.push(c.trim().parse().map_err(|e| perr(format!("code: {e}")))?);
        }
        cfg.validate()?;
        let (lo, hi) = cfg.code_range();
        if let Some(bad) = codes.iter().find(|&&c| c < lo || c > hi) {
            return Err(invalid("codes", format!("code {bad} outside [{lo}, {hi}]")));
        }
        Ok(Self { codes, cfg, subband_index, seeds, duration })
    }
}

/// First-order highpass `jf/fc / (1 + jf/fc)`.
pub fn ac_couple_response(f: f64, corner: f64) -> Complex64 {
    if corner <= 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let s = Complex64::new(0.0, f / corner);
    s / (1.0 + s)
}

/// Spectrum of a symmetric FIR placed zero-phase on an `n`-point circle.
fn fir_spectrum(taps: &[f64], n: usize) -> Vec<Complex64> {
    let c = taps.len() / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, &h) in taps.iter().enumerate() {
        let idx = (k as i64 - c as i64).rem_euclid(n as i64) as usize;
        buf[idx].re += h;
    }
    fft::forward(&mut buf);
    buf
}

fn taylor_terms(jitter_rms: f64, rate: f64) -> usize {
    if jitter_rms == 0.0 {
        return 1;
    }
    // Bound |ωτ| by 2π·rate·7σ and stop once z^K/K! < 1e-13.
    let z = 2.0 * PI * rate * 7.0 * jitter_rms;
    let mut term = 1.0;
    for k in 1..MAX_TAYLOR_TERMS {
        term *= z / k as f64;
        if term < 1e-13 && k as f64 > z {
            return k + 1;
        }
    }
    MAX_TAYLOR_TERMS
}

/// Digitize sub-band `n` from an analog record `x`.
///
/// `x` must be sampled at ≥ 4× the ADC rate and hold an integer number of
/// ADC samples. Jitter draws are keyed by `seed`.
pub fn adc_capture(x: &SampledWaveform, n: usize, cfg: &AdcConfig, seed: u64) -> Result<SubbandCapture> {
    cfg.validate()?;
    let rin = x.rate();
    if rin < 4.0 * cfg.rate {
        return Err(invalid("x", format!("input rate {rin} Hz below 4 x ADC rate")));
    }
    let len = x.len();
    let m_exact = len as f64 * cfg.rate / rin;
    let m = m_exact.round() as usize;
    if m == 0 {
        return Err(Error::InsufficientSamples { needed: (rin / cfg.rate).ceil() as usize, have: len });
    }
    if (m_exact - m as f64).abs() > 1e-6 {
        return Err(invalid(
            "x",
            format!("record of {len} samples at {rin} Hz is not a whole number of ADC samples"),
        ));
    }

    let taps = filter::fir_lowpass_auto(cfg.aa_cutoff, rin)?;
    let h = fir_spectrum(&taps, len);
    let mut spec = fft::real_spectrum(x.samples());
    let freqs: Vec<f64> = (0..len).map(|k| fft::bin_freq(k, len, rin)).collect();
    for ((v, hk), &f) in spec.iter_mut().zip(&h).zip(&freqs) {
        *v *= hk * ac_couple_response(f, cfg.ac_couple_hz);
    }

    let terms = taylor_terms(cfg.jitter_rms, cfg.rate);
    let scale = m as f64 / len as f64;
    let mut derivs: Vec<Vec<f64>> = Vec::with_capacity(terms);
    for p in 0..terms {
        let mut folded = vec![Complex64::new(0.0, 0.0); m];
        for (k, (v, &f)) in spec.iter().zip(&freqs).enumerate() {
            let d = if p == 0 { *v } else { v * Complex64::new(0.0, 2.0 * PI * f).powu(p as u32) };
            // Signed bin index: the analog frequency decides the fold.
            let ks = if k > len / 2 { k as i64 - len as i64 } else { k as i64 };
            folded[ks.rem_euclid(m as i64) as usize] += d;
        }
        fft::inverse(&mut folded);
        derivs.push(folded.into_iter().map(|c| c.re * scale).collect());
    }

    let mut values = derivs[0].clone();
    if cfg.jitter_rms > 0.0 {
        let mut rng = seed::rng(seed::derive(seed, seed::Stream::Jitter, n as u64));
        for (i, v) in values.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let tau = cfg.jitter_rms * z;
            let mut coef = 1.0;
            let mut acc = 0.0;
            for (p, d) in derivs.iter().enumerate().skip(1) {
                coef *= tau / p as f64;
                acc += coef * d[i];
            }
            *v += acc;
        }
    }

    let codes = values.iter().map(|&v| cfg.code(v)).collect();
    let mut seeds = BTreeMap::new();
    seeds.insert("adc".to_string(), seed);
    Ok(SubbandCapture {
        codes,
        cfg: cfg.clone(),
        subband_index: n,
        seeds,
        duration: m as f64 / cfg.rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tx::sine_waveform;

    #[test]
    fn zero_input_gives_zero_codes() {
        let x = SampledWaveform::new(vec![0.0; 9600], 9.6e9).unwrap();
        let c = adc_capture(&x, 1, &AdcConfig::default(), 0).unwrap();
        assert_eq!(c.len(), 2400);
        assert!(c.codes.iter().all(|&v| v == 0));
    }

    #[test]
    fn quantizer_is_monotone_and_clamped() {
        let cfg = AdcConfig { bits: 4, ..Default::default() };
        let mut last = i32::MIN;
        for i in -2000..=2000 {
            let c = cfg.code(i as f64 * 1e-3);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(cfg.code(5.0), 7);
        assert_eq!(cfg.code(-5.0), -8);
        assert_eq!(cfg.code(-1e-12), -1);
    }

    #[test]
    fn sampling_reproduces_in_band_tone() {
        let rin = 32e9;
        let n = 128_000;
        let f = 250.25e6;
        let x = sine_waveform(f, 0.5, n as f64 / rin, rin).unwrap();
        let cfg = AdcConfig { bits: 24, ac_couple_hz: 0.0, ..Default::default() };
        let c = adc_capture(&x, 1, &cfg, 0).unwrap();
        let taps = filter::fir_lowpass_auto(cfg.aa_cutoff, rin).unwrap();
        let g = filter::fir_response(&taps, f, rin).re;
        let y = c.waveform();
        for (i, v) in y.samples().iter().enumerate().step_by(53) {
            let t = i as f64 / cfg.rate;
            let want = 0.5 * g * (2.0 * PI * f * t).cos();
            assert!((v - want).abs() < 2.0 * cfg.lsb(), "{i}: {v} vs {want}");
        }
    }

    #[test]
    fn ac_coupling_corner() {
        let h = ac_couple_response(10e6, 10e6);
        assert!((h.norm() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(ac_couple_response(0.0, 10e6).norm(), 0.0);
        assert!((ac_couple_response(1e9, 10e6).norm() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn jitter_taylor_matches_direct_evaluation() {
        // A single tone can be evaluated at the jittered instants directly.
        let rin = 9.6e9;
        let n = 96_000;
        let f = 400e6;
        let x = sine_waveform(f, 0.5, n as f64 / rin, rin).unwrap();
        let cfg = AdcConfig { bits: 24, ac_couple_hz: 0.0, jitter_rms: 20e-12, ..Default::default() };
        let c = adc_capture(&x, 2, &cfg, 11).unwrap();
        let taps = filter::fir_lowpass_auto(cfg.aa_cutoff, rin).unwrap();
        let g = filter::fir_response(&taps, f, rin).re;
        let mut rng = seed::rng(seed::derive(11, seed::Stream::Jitter, 2));
        for (i, v) in c.waveform().samples().iter().enumerate().take(2000) {
            let z: f64 = StandardNormal.sample(&mut rng);
            let t = i as f64 / cfg.rate + cfg.jitter_rms * z;
            let want = 0.5 * g * (2.0 * PI * f * t).cos();
            assert!((v - want).abs() < 2.0 * cfg.lsb(), "{i}: {v} vs {want}");
        }
    }

    #[test]
    fn deterministic_and_rate_checked() {
        let rin = 9.6e9;
        let x = sine_waveform(300e6, 0.3, 4800.0 / rin, rin).unwrap();
        let cfg = AdcConfig { jitter_rms: 1e-12, ..Default::default() };
        assert_eq!(adc_capture(&x, 1, &cfg, 4).unwrap(), adc_capture(&x, 1, &cfg, 4).unwrap());
        let slow = SampledWaveform::new(vec![0.0; 100], 4.8e9).unwrap();
        assert!(adc_capture(&slow, 1, &cfg, 0).is_err());
        let odd = SampledWaveform::new(vec![0.0; 4801], 9.6e9).unwrap();
        assert!(adc_capture(&odd, 1, &cfg, 0).is_err());
        let tiny = SampledWaveform::new(vec![0.0; 1], 9.6e9).unwrap();
        assert!(adc_capture(&tiny, 1, &cfg, 0).is_err());
        assert!(AdcConfig { bits: 30, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rin = 9.6e9;
        let x = sine_waveform(123e6, 0.8, 4800.0 / rin, rin).unwrap();
        let cfg = AdcConfig { jitter_rms: 3.3e-13, full_scale: 0.7, ..Default::default() };
        let c = adc_capture(&x, 3, &cfg, 42).unwrap();
        let back = SubbandCapture::from_csv(&c.to_csv()).unwrap();
        assert_eq!(c, back);
        assert!(SubbandCapture::from_csv("# bogus = 1\nindex,code\n").is_err());
        let err = SubbandCapture::from_csv("index,code\n0,1\n2,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
