//! Rational-ratio polyphase resampling.

use crate::error::{Error, Result};
use crate::filter::{kaiser_beta, kaiser_length, windowed_sinc};
use crate::waveform::SampledWaveform;

/// Largest interpolation or decimation factor accepted after reduction.
pub const MAX_FACTOR: u64 = 1000;

const ATTENUATION_DB: f64 = 70.0;

/// How samples beyond the record ends are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Zero,
    /// The record is one period of a periodic signal.
    Periodic,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Reduced `(up, down)` with `new/old = up/down`.
pub fn rational_ratio(old: f64, new: f64) -> Result<(u64, u64)> {
    let err = || Error::UnsupportedRatio {
        from_hz: old,
        to_hz: new,
    };
    if !(old > 0.0 && new > 0.0) {
        return Err(err());
    }
    let r = new / old;
    for down in 1..=MAX_FACTOR {
        let up = (r * down as f64).round();
        if up >= 1.0 && up <= MAX_FACTOR as f64 && ((up / down as f64) / r - 1.0).abs() < 1e-12 {
            let up = up as u64;
            let g = gcd(up, down);
            return Ok((up / g, down / g));
        }
    }
    Err(err())
}

/// Resample with zero-padded boundaries.
pub fn resample(x: &SampledWaveform, new_rate: f64) -> Result<SampledWaveform> {
    resample_with(x, new_rate, Boundary::Zero)
}

/// Resample; content below `0.45·min(rate, new_rate)` passes within 0.2 dB
/// and images are suppressed by at least 60 dB.
pub fn resample_with(x: &SampledWaveform, new_rate: f64, boundary: Boundary) -> Result<SampledWaveform> {
    let (up, down) = rational_ratio(x.rate(), new_rate)?;
    if up == 1 && down == 1 {
        return Ok(x.clone());
    }
    let (up, down) = (up as usize, down as usize);
    let n = x.len();
    let out_len = match boundary {
        Boundary::Periodic => {
            if !(n * up).is_multiple_of(down) {
                return Err(Error::LengthMismatch {
                    what: format!("periodic record of {n} samples does not map onto an integer output length at {up}/{down}"),
                });
            }
            n * up / down
        }
        Boundary::Zero => (n * up).div_ceil(down),
    };
    let fast = x.rate() * up as f64;
    let band = x.rate().min(new_rate);
    let len = kaiser_length(ATTENUATION_DB, 0.1 * band, fast);
    let mut h = windowed_sinc(0.5 * band, fast, len, kaiser_beta(ATTENUATION_DB));
    // Each polyphase branch gets DC gain exactly 1 so constants pass untouched.
    for r in 0..up {
        let s: f64 = h.iter().skip(r).step_by(up).sum();
        if s != 0.0 {
            h.iter_mut().skip(r).step_by(up).for_each(|v| *v /= s);
        }
    }
    let c = (h.len() / 2) as isize;
    let src = x.samples();
    let up_i = up as isize;
    let out: Vec<f64> = (0..out_len)
        .map(|j| {
            // y[j] = Σ_k h[k]·u[j·down + c − k], u nonzero at multiples of `up`.
            let q = (j * down) as isize + c;
            let first = q.rem_euclid(up_i);
            let mut acc = 0.0;
            let mut k = first;
            while k < h.len() as isize {
                let idx = (q - k) / up_i;
                let v = match boundary {
                    Boundary::Periodic => src[idx.rem_euclid(n as isize) as usize],
                    Boundary::Zero => {
                        if idx >= 0 && (idx as usize) < n {
                            src[idx as usize]
                        } else {
                            0.0
                        }
                    }
                };
                acc += h[k as usize] * v;
                k += up_i;
            }
            acc
        })
        .collect();
    Ok(SampledWaveform::from_parts(out, new_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{periodogram, Window};
    use std::f64::consts::PI;

    fn tone(f: f64, rate: f64, n: usize) -> SampledWaveform {
        SampledWaveform::new(
            (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect(),
            rate,
        )
        .unwrap()
    }

    #[test]
    fn ratios() {
        assert_eq!(rational_ratio(2.4e9, 1e9).unwrap(), (5, 12));
        assert_eq!(rational_ratio(2.4e9, 1.6e9).unwrap(), (2, 3));
        assert_eq!(rational_ratio(1.0, 1.0).unwrap(), (1, 1));
        assert!(rational_ratio(1.0, std::f64::consts::PI).is_err());
    }

    #[test]
    fn identity_and_dc() {
        let x = tone(0.1, 1.0, 100);
        assert_eq!(resample(&x, 1.0).unwrap(), x);
        let dc = SampledWaveform::new(vec![0.7; 24_000], 2.4e9).unwrap();
        let y = resample_with(&dc, 1e9, Boundary::Periodic).unwrap();
        assert_eq!(y.len(), 10_000);
        assert!(y.samples().iter().all(|v| (v - 0.7).abs() < 1e-6));
        let z = resample(&dc, 1e9).unwrap();
        assert!((z.samples()[5000] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn tone_amplitude_preserved() {
        // 100 MHz on the output FFT grid, periodic record.
        let f = 100e6;
        let x = tone(f, 2.4e9, 24_000 * 4);
        let y = resample_with(&x, 1e9, Boundary::Periodic).unwrap();
        let s = periodogram(&y, 8192, 4, Window::BlackmanHarris4).unwrap();
        let k = s.bin_of(f);
        let p: f64 = s.power[k - 4..=k + 4].iter().sum();
        let db = 10.0 * (p / 0.5).log10();
        assert!(db.abs() < 0.2, "{db}");
    }

    #[test]
    fn passband_flat_and_images_suppressed() {
        let rate = 2.4e9;
        let n = 2400 * 8;
        for &f in &[10e6, 200e6, 440e6] {
            let y = resample_with(&tone(f, rate, n), 1e9, Boundary::Periodic).unwrap();
            let ms = y.mean_square();
            assert!((10.0 * (ms / 0.5).log10()).abs() < 0.2, "f={f}");
        }
        // 700 MHz would alias to 300 MHz.
        let y = resample_with(&tone(700e6, rate, n), 1e9, Boundary::Periodic).unwrap();
        assert!(10.0 * (y.mean_square() / 0.5).log10() < -60.0);
    }
}
