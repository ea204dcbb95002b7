//! Linear-phase FIR design and application.
//!
//! Every filter here is symmetric with an odd tap count, so the group delay
//! is exactly `(len-1)/2` samples and `apply_fir` removes it: output sample
//! `i` lines up with input sample `i`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fft;
use crate::waveform::SampledWaveform;

/// Stopband attenuation targeted by [`fir_lowpass_auto`], dB.
pub const LOWPASS_ATTENUATION_DB: f64 = 60.0;

pub(crate) fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

pub fn kaiser_beta(attenuation_db: f64) -> f64 {
    if attenuation_db > 50.0 {
        0.1102 * (attenuation_db - 8.7)
    } else if attenuation_db >= 21.0 {
        0.5842 * (attenuation_db - 21.0).powf(0.4) + 0.07886 * (attenuation_db - 21.0)
    } else {
        0.0
    }
}

pub fn kaiser_window(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (len - 1) as f64;
    (0..len)
        .map(|i| {
            let r = 2.0 * i as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Kaiser tap count for a transition of `width_hz` at `rate`.
pub fn kaiser_length(attenuation_db: f64, width_hz: f64, rate: f64) -> usize {
    let dw = 2.0 * PI * width_hz / rate;
    let n = ((attenuation_db - 8.0) / (2.285 * dw)).ceil() as usize + 1;
    n | 1
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Kaiser-windowed sinc lowpass with its -6 dB point at `edge` Hz and unit
/// DC gain.
pub fn windowed_sinc(edge: f64, rate: f64, len: usize, beta: f64) -> Vec<f64> {
    let len = len | 1;
    let c = (len / 2) as f64;
    let fc = edge / rate;
    let w = kaiser_window(len, beta);
    let mut h: Vec<f64> = (0..len)
        .map(|i| 2.0 * fc * sinc(2.0 * fc * (i as f64 - c)) * w[i])
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Lowpass taps for a nominal `cutoff`: flat within 0.5 dB up to
/// `0.8·cutoff`, at least 40 dB down beyond `1.4·cutoff` when `len` is at
/// least the [`fir_lowpass_auto`] length.
pub fn fir_lowpass(cutoff: f64, rate: f64, len: usize) -> Result<Vec<f64>> {
    if !(cutoff > 0.0 && cutoff < rate / 2.0) {
        return Err(invalid(
            "cutoff",
            format!("must lie in (0, {}) Hz, got {cutoff}", rate / 2.0),
        ));
    }
    if len == 0 {
        return Err(invalid("len", "must be >= 1"));
    }
    let edge = (1.1 * cutoff).min(0.5 * rate * 0.999);
    Ok(windowed_sinc(edge, rate, len, kaiser_beta(LOWPASS_ATTENUATION_DB)))
}

/// [`fir_lowpass`] with the Kaiser length for a `0.6·cutoff` transition.
pub fn fir_lowpass_auto(cutoff: f64, rate: f64) -> Result<Vec<f64>> {
    let len = kaiser_length(LOWPASS_ATTENUATION_DB, 0.6 * cutoff, rate);
    fir_lowpass(cutoff, rate, len)
}

/// Root-raised-cosine taps, `span·sps + 1` long, scaled to unit energy so
/// the matched cascade peaks at 1.
///
/// Plain truncation of a low-rolloff RRC leaves cascade ISI near 1e-2 at
/// the window edges, so for `rolloff > 0` the taps get a minimum-norm
/// correction that drives the autocorrelation at every nonzero symbol lag
/// to zero. `rolloff = 0` returns truncated sinc samples unchanged.
pub fn rrc_taps(rolloff: f64, sps: usize, span: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(invalid("rolloff", format!("must lie in [0, 1], got {rolloff}")));
    }
    if sps < 2 {
        return Err(invalid("sps", format!("must be >= 2, got {sps}")));
    }
    if span < 8 || !span.is_multiple_of(2) {
        return Err(invalid("span", format!("must be even and >= 8, got {span}")));
    }
    let len = span * sps + 1;
    let c = (len / 2) as f64;
    let b = rolloff;
    let mut h: Vec<f64> = (0..len)
        .map(|i| {
            let t = (i as f64 - c) / sps as f64;
            rrc_sample(t, b)
        })
        .collect();
    if b > 0.0 {
        enforce_nyquist(&mut h, sps, span);
    }
    let e: f64 = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    h.iter_mut().for_each(|v| *v /= e);
    Ok(h)
}

fn autocorr(h: &[f64], lag: usize) -> f64 {
    h.iter().zip(&h[lag..]).map(|(a, b)| a * b).sum()
}

/// Gauss-Newton iterations on `r(m·sps) = 0, m = 1..span`, taking the
/// minimum-norm step each time.
fn enforce_nyquist(h: &mut [f64], sps: usize, span: usize) {
    let n = h.len();
    let lags: Vec<usize> = (1..=span).map(|m| m * sps).filter(|&l| l < n).collect();
    for _ in 0..20 {
        let peak = autocorr(h, 0);
        let c: Vec<f64> = lags.iter().map(|&l| autocorr(h, l)).collect();
        if c.iter().all(|v| v.abs() < 1e-14 * peak) {
            break;
        }
        // J[m][j] = h[j + l] + h[j - l]
        let jac: Vec<Vec<f64>> = lags
            .iter()
            .map(|&l| {
                (0..n)
                    .map(|j| {
                        let a = if j + l < n { h[j + l] } else { 0.0 };
                        let b = if j >= l { h[j - l] } else { 0.0 };
                        a + b
                    })
                    .collect()
            })
            .collect();
        let k = lags.len();
        let mut gram = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in 0..k {
                gram[a][b] = jac[a].iter().zip(&jac[b]).map(|(x, y)| x * y).sum();
            }
        }
        let Some(y) = solve(gram, c) else { break };
        for (j, v) in h.iter_mut().enumerate() {
            *v -= (0..k).map(|m| jac[m][j] * y[m]).sum::<f64>();
        }
    }
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Continuous RRC impulse response at `t` symbol periods (unnormalized).
pub fn rrc_sample(t: f64, b: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - b + 4.0 * b / PI;
    }
    if b > 0.0 && ((4.0 * b * t).abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * b);
        return b / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos();
    let den = PI * t * (1.0 - (4.0 * b * t).powi(2));
    num / den
}

/// Root-raised-cosine amplitude response at `f` for symbol rate `baud`,
/// normalized to 1 in the passband.
pub fn rrc_response(f: f64, baud: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let f1 = baud * (1.0 - rolloff) / 2.0;
    let f2 = baud * (1.0 + rolloff) / 2.0;
    if f <= f1 {
        1.0
    } else if f >= f2 {
        0.0
    } else {
        (0.5 * (1.0 + (PI / (rolloff * baud) * (f - f1)).cos())).sqrt()
    }
}

/// Frequency response of `taps` at `f`, referenced to the center tap.
pub fn fir_response(taps: &[f64], f: f64, rate: f64) -> Complex64 {
    let c = (taps.len() / 2) as f64;
    taps.iter()
        .enumerate()
        .map(|(i, &h)| h * Complex64::from_polar(1.0, -2.0 * PI * f / rate * (i as f64 - c)))
        .sum()
}

fn check_taps(taps: &[f64]) -> Result<()> {
    if taps.is_empty() || taps.len().is_multiple_of(2) {
        return Err(invalid("taps", format!("need an odd, non-zero count, got {}", taps.len())));
    }
    Ok(())
}

/// Linear convolution with group delay removed; samples outside the input
/// are treated as zero.
pub fn apply_fir(x: &SampledWaveform, taps: &[f64]) -> Result<SampledWaveform> {
    check_taps(taps)?;
    Ok(SampledWaveform::from_parts(convolve_same(x.samples(), taps), x.rate()))
}

/// Circular convolution with group delay removed, treating the record as
/// one period of a periodic signal.
pub fn apply_fir_periodic(x: &SampledWaveform, taps: &[f64]) -> Result<SampledWaveform> {
    check_taps(taps)?;
    Ok(SampledWaveform::from_parts(convolve_circular(x.samples(), taps), x.rate()))
}

pub(crate) fn convolve_same(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = taps.len();
    let c = m / 2;
    if n.saturating_mul(m) <= 4_000_000 {
        return (0..n)
            .map(|i| {
                let mut acc = 0.0;
                // y[i] = Σ_k h[k]·x[i + c - k]
                let k_lo = (i + c + 1).saturating_sub(n);
                let k_hi = (i + c).min(m - 1);
                for k in k_lo..=k_hi {
                    acc += taps[k] * x[i + c - k];
                }
                acc
            })
            .collect();
    }
    let size = (n + m - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    for (d, &v) in a.iter_mut().zip(x) {
        d.re = v;
    }
    for (d, &v) in b.iter_mut().zip(taps) {
        d.re = v;
    }
    fft::forward(&mut a);
    fft::forward(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    fft::inverse(&mut a);
    a[c..c + n].iter().map(|z| z.re).collect()
}

pub(crate) fn convolve_circular(x: &[f64], taps: &[f64]) -> Vec<f64> {
    if x.len().saturating_mul(taps.len()) <= 2_000_000 {
        circular_direct(x, taps)
    } else {
        circular_fft(x, taps)
    }
}

fn circular_direct(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = taps.len();
    let c = m / 2;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (k, &h) in taps.iter().enumerate() {
                let j = (i + c + n * (m / n + 1) - k) % n;
                acc += h * x[j];
            }
            acc
        })
        .collect()
}

fn circular_fft(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let n = x.len();
    let c = taps.len() / 2;
    // Fold the centered kernel onto the record length and filter in the
    // frequency domain.
    let mut kernel = vec![Complex64::new(0.0, 0.0); n];
    for (k, &h) in taps.iter().enumerate() {
        let lag = (k as isize - c as isize).rem_euclid(n as isize) as usize;
        kernel[lag].re += h;
    }
    fft::forward(&mut kernel);
    let mut buf = fft::real_spectrum(x);
    for (u, v) in buf.iter_mut().zip(&kernel) {
        *u *= v;
    }
    fft::inverse(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}
