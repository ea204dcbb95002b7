//! Sampled signal containers and the noise generators shared by every stage.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::{fft, seed};

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    samples: Vec<f64>,
    rate: f64,
}

impl SampledWaveform {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid("rate", format!("must be positive, got {rate}")));
        }
        if samples.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, have: 0 });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid("samples", format!("non-finite value at index {i}")));
        }
        Ok(Self { samples, rate })
    }

    /// Constructor for stage outputs whose invariants hold by construction.
    pub(crate) fn from_parts(samples: Vec<f64>, rate: f64) -> Self {
        debug_assert!(rate > 0.0 && !samples.is_empty());
        Self { samples, rate }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.samples.iter().map(|&v| f(v)).collect(), self.rate)
    }

    pub fn scaled(&self, gain: f64) -> Self {
        self.map(|v| v * gain)
    }

    /// Sample-wise sum; both inputs must share rate and length.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rate != other.rate {
            return Err(Error::RateMismatch {
                expected: self.rate,
                got: other.rate,
            });
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                what: format!("{} vs {} samples", self.len(), other.len()),
            });
        }
        let s = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_parts(s, self.rate))
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.rate
    }
}

/// Uniformly sampled complex signal (analytic or equivalent baseband).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveform {
    samples: Vec<Complex64>,
    rate: f64,
}

impl ComplexWaveform {
    pub fn new(samples: Vec<Complex64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid("rate", format!("must be positive, got {rate}")));
        }
        if samples.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("samples", "non-finite value"));
        }
        Ok(Self { samples, rate })
    }

    pub(crate) fn from_parts(samples: Vec<Complex64>, rate: f64) -> Self {
        Self { samples, rate }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn re(&self) -> SampledWaveform {
        SampledWaveform::from_parts(self.samples.iter().map(|c| c.re).collect(), self.rate)
    }

    pub fn im(&self) -> SampledWaveform {
        SampledWaveform::from_parts(self.samples.iter().map(|c| c.im).collect(), self.rate)
    }

    /// Multiply by `exp(j 2π f t)`.
    pub fn shifted(&self, freq_hz: f64) -> Self {
        let w = 2.0 * std::f64::consts::PI * freq_hz / self.rate;
        let s = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, w * i as f64))
            .collect();
        Self::from_parts(s, self.rate)
    }
}

/// Analytic signal `x + j·H{x}`, computed over the record as one period.
///
/// The DC bin and (for even lengths) the Nyquist bin are kept at unit
/// weight so that the real part reproduces the input exactly.
pub fn analytic(x: &SampledWaveform) -> ComplexWaveform {
    let n = x.len();
    let mut spec = fft::real_spectrum(x.samples());
    for (k, v) in spec.iter_mut().enumerate() {
        let w = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *v *= w;
    }
    fft::inverse(&mut spec);
    ComplexWaveform::from_parts(spec, x.rate())
}

/// Add white Gaussian noise of variance `noise_power`.
pub fn awgn(x: &SampledWaveform, noise_power: f64, rng_seed: u64) -> Result<SampledWaveform> {
    if !(noise_power >= 0.0) {
        return Err(invalid("noise_power", format!("must be >= 0, got {noise_power}")));
    }
    if noise_power == 0.0 {
        return Ok(x.clone());
    }
    let sigma = noise_power.sqrt();
    let mut rng = seed::rng(rng_seed);
    let s = x
        .samples()
        .iter()
        .map(|&v| {
            let g: f64 = StandardNormal.sample(&mut rng);
            v + sigma * g
        })
        .collect();
    Ok(SampledWaveform::from_parts(s, x.rate()))
}

/// Gaussian noise sequence of the given variance.
pub fn gaussian(n: usize, variance: f64, rng_seed: u64) -> Vec<f64> {
    let sigma = variance.max(0.0).sqrt();
    let mut rng = seed::rng(rng_seed);
    (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            sigma * g
        })
        .collect()
}

/// Wiener (random-walk) phase track for a source of full linewidth
/// `linewidth` Hz. Increments have variance `2π·linewidth/rate`; the track
/// starts at zero.
pub fn wiener_phase(linewidth: f64, n: usize, rate: f64, rng_seed: u64) -> Result<Vec<f64>> {
    if !(linewidth >= 0.0) {
        return Err(invalid("linewidth", format!("must be >= 0, got {linewidth}")));
    }
    if !(rate > 0.0) {
        return Err(invalid("rate", "must be positive"));
    }
    if linewidth == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let step = (2.0 * std::f64::consts::PI * linewidth / rate).sqrt();
    let mut rng = seed::rng(rng_seed);
    let mut phase = 0.0;
    Ok((0..n)
        .map(|i| {
            if i > 0 {
                let g: f64 = StandardNormal.sample(&mut rng);
                phase += step * g;
            }
            phase
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(n: usize, rate: f64, f: f64) -> SampledWaveform {
        SampledWaveform::new((0..n).map(|i| (2.0 * PI * f * i as f64 / rate).cos()).collect(), rate)
            .unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(SampledWaveform::new(vec![], 1.0).is_err());
        assert!(SampledWaveform::new(vec![1.0], 0.0).is_err());
        assert!(SampledWaveform::new(vec![f64::NAN], 1.0).is_err());
    }

    #[test]
    fn analytic_of_cosine_is_complex_exponential() {
        let rate = 1024.0;
        let x = tone(1024, rate, 37.0);
        let z = analytic(&x);
        for (i, c) in z.samples().iter().enumerate() {
            let e = Complex64::from_polar(1.0, 2.0 * PI * 37.0 * i as f64 / rate);
            assert!((c - e).norm() < 1e-9);
        }
    }

    #[test]
    fn analytic_real_part_recovers_input() {
        let x = SampledWaveform::new(gaussian(1000, 1.0, 3), 10.0).unwrap();
        let z = analytic(&x);
        for (a, c) in x.samples().iter().zip(z.samples()) {
            assert!((a - c.re).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn analytic_two_tone_has_no_negative_frequencies() {
        let rate = 4096.0;
        let n = 4096;
        let x = SampledWaveform::new(
            (0..n)
                .map(|i| {
                    let t = i as f64 / rate;
                    (2.0 * PI * 100.0 * t).cos() + 0.5 * (2.0 * PI * 700.0 * t).sin()
                })
                .collect(),
            rate,
        )
        .unwrap();
        let z = analytic(&x);
        let mut buf = z.samples().to_vec();
        fft::forward(&mut buf);
        let peak = buf.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        for (k, c) in buf.iter().enumerate() {
            if k > n / 2 {
                assert!(10.0 * (c.norm_sqr() / peak + 1e-300).log10() < -100.0);
            }
        }
        let lines: Vec<usize> = (0..n).filter(|&k| buf[k].norm_sqr() > 1e-6 * peak).collect();
        assert_eq!(lines, vec![100, 700]);
    }

    #[test]
    fn awgn_zero_power_is_identity_and_seeded() {
        let x = tone(64, 64.0, 3.0);
        assert_eq!(awgn(&x, 0.0, 1).unwrap(), x);
        assert_eq!(awgn(&x, 0.1, 9).unwrap(), awgn(&x, 0.1, 9).unwrap());
        assert_ne!(awgn(&x, 0.1, 9).unwrap(), awgn(&x, 0.1, 10).unwrap());
        assert!(awgn(&x, -1.0, 1).is_err());
    }

    #[test]
    fn awgn_variance_matches_request() {
        let n = 1_000_000;
        let x = SampledWaveform::new(vec![0.25; n], 1.0).unwrap();
        let y = awgn(&x, 0.3, 42).unwrap();
        let diffs: Vec<f64> = y.samples().iter().map(|v| v - 0.25).collect();
        let mean = diffs.iter().sum::<f64>() / n as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var / 0.3 - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn wiener_zero_linewidth_is_constant() {
        let p = wiener_phase(0.0, 100, 1e9, 5).unwrap();
        assert!(p.iter().all(|&v| v == 0.0));
        assert!(wiener_phase(-1.0, 10, 1.0, 0).is_err());
        assert_eq!(
            wiener_phase(5e3, 100, 1e9, 5).unwrap(),
            wiener_phase(5e3, 100, 1e9, 5).unwrap()
        );
    }

    #[test]
    fn wiener_variance_grows_linearly() {
        // Ensemble oracle: Var[φ(t)] = 2π·Δν·t.
        let (lw, rate, n, tracks) = (1e6, 1e9, 2001, 400);
        let mut acc = vec![0.0; n];
        for s in 0..tracks {
            let p = wiener_phase(lw, n, rate, 1000 + s).unwrap();
            for (a, v) in acc.iter_mut().zip(&p) {
                *a += v * v;
            }
        }
        for &i in &[500usize, 1000, 2000] {
            let var = acc[i] / tracks as f64;
            let expected = 2.0 * PI * lw * i as f64 / rate;
            assert!((var / expected - 1.0).abs() < 0.1, "i={i} var={var} exp={expected}");
        }
    }
}
