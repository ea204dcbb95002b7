//! Averaged periodogram.
//!
//! Power normalization: each bin holds `|X_k|² / (N·Σw²)`, doubled for the
//! interior one-sided bins. The bins therefore sum to the mean square of
//! the windowed input divided by the mean window power, which equals the
//! input mean square for the rectangular window (Parseval) and for
//! stationary noise with any window. A coherent tone of amplitude `A`
//! contributes `A²/2` summed over its main lobe.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::waveform::SampledWaveform;

/// dB value written for bins with zero power.
pub const FLOOR_DB: f64 = -400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    BlackmanHarris4,
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::BlackmanHarris4 => {
                const A: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];
                (0..n)
                    .map(|i| {
                        let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                        A[0] - A[1] * x.cos() + A[2] * (2.0 * x).cos() - A[3] * (3.0 * x).cos()
                    })
                    .collect()
            }
        }
    }

    /// Half-width in bins of the main lobe, used when summing tone power.
    pub fn lobe_half_width(self) -> usize {
        match self {
            Window::Rectangular => 0,
            Window::BlackmanHarris4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::BlackmanHarris4 => "blackman-harris-4term",
        }
    }
}

impl FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" | "rect" => Ok(Window::Rectangular),
            "blackman-harris-4term" | "blackman-harris" | "bh4" => Ok(Window::BlackmanHarris4),
            other => Err(invalid("window", format!("unknown window `{other}`"))),
        }
    }
}

/// One-sided averaged power spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub bin_freqs: Vec<f64>,
    /// Linear bin power in squared input units.
    pub power: Vec<f64>,
    pub rbw: f64,
    pub n_fft: usize,
    pub n_avg: usize,
    pub window: Window,
}

pub fn to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(FLOOR_DB)
    } else {
        FLOOR_DB
    }
}

impl SpectrumEstimate {
    pub fn power_db(&self) -> Vec<f64> {
        self.power.iter().map(|&p| to_db(p)).collect()
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Index of the bin nearest `freq`.
    pub fn bin_of(&self, freq: f64) -> usize {
        ((freq / self.rbw).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// FFT process gain, `10·log10(n_fft/2)`.
    pub fn process_gain_db(&self) -> f64 {
        10.0 * (self.n_fft as f64 / 2.0).log10()
    }

    /// CSV with `#` metadata lines and a `freq_hz,power_db` table.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# rbw_hz = {}", self.rbw);
        let _ = writeln!(s, "# n_fft = {}", self.n_fft);
        let _ = writeln!(s, "# n_avg = {}", self.n_avg);
        let _ = writeln!(s, "# window = {}", self.window.name());
        let _ = writeln!(s, "# process_gain_db = {:.3}", self.process_gain_db());
        s.push_str("freq_hz,power_db\n");
        for (f, p) in self.bin_freqs.iter().zip(self.power_db()) {
            let _ = writeln!(s, "{f:.3},{p:.4}");
        }
        s
    }
}

/// Averaged periodogram over `n_avg` consecutive, non-overlapping
/// `n_fft`-point segments taken from the start of `x`.
pub fn periodogram(
    x: &SampledWaveform,
    n_fft: usize,
    n_avg: usize,
    window: Window,
) -> Result<SpectrumEstimate> {
    if n_fft < 2 || !n_fft.is_power_of_two() {
        return Err(invalid("n_fft", format!("must be a power of two >= 2, got {n_fft}")));
    }
    if n_avg == 0 {
        return Err(invalid("n_avg", "must be >= 1"));
    }
    let needed = n_fft * n_avg;
    if x.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            have: x.len(),
        });
    }
    let w = window.coefficients(n_fft);
    let wpow: f64 = w.iter().map(|v| v * v).sum();
    let half = n_fft / 2;
    let mut acc = vec![0.0; half + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for seg in x.samples()[..needed].chunks_exact(n_fft) {
        for ((b, &s), &wi) in buf.iter_mut().zip(seg).zip(&w) {
            *b = Complex64::new(s * wi, 0.0);
        }
        fft::forward(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            let scale = if k == 0 || k == half { 1.0 } else { 2.0 };
            *a += scale * buf[k].norm_sqr();
        }
    }
    let norm = 1.0 / (n_avg as f64 * n_fft as f64 * wpow);
    let rbw = x.rate() / n_fft as f64;
    Ok(SpectrumEstimate {
        bin_freqs: (0..=half).map(|k| k as f64 * rbw).collect(),
        power: acc.into_iter().map(|a| a * norm).collect(),
        rbw,
        n_fft,
        n_avg,
        window,
    })
}
