//! Sine-wave test metrics: SFDR, SINAD and ENOB from an averaged
//! periodogram of a capture.

use crate::adc::SubbandCapture;
use crate::error::{invalid, Error, Result};
use crate::resample::{resample_with, Boundary};
use crate::spectrum::{periodogram, to_db, SpectrumEstimate, Window};
use crate::waveform::SampledWaveform;

/// Header matching [`MetricsReport::csv_row`].
pub const SWEEP_CSV_HEADER: &str = "freq_ghz,sfdr_db,sinad_db,enob_bits";

/// Minimum margin of the fundamental over the median bin.
const DETECTION_MARGIN_DB: f64 = 10.0;

/// How a capture is analysed.
#[derive(Debug, Clone, PartialEq)]
pub struct SineTestOptions {
    /// Rate of the analysis stream; `None` analyses at the capture rate.
    pub analysis_rate: Option<f64>,
    pub n_fft: usize,
    pub n_avg: usize,
    pub window: Window,
    /// Lower edge of the SFDR/SINAD band. Content below it (the AC-coupled
    /// region) is ignored.
    pub band_low: f64,
    /// Upper edge; `None` means the analysis Nyquist frequency.
    pub band_high: Option<f64>,
    /// Bins either side of the expected fundamental searched for the peak.
    pub search_bins: usize,
}

impl Default for SineTestOptions {
    fn default() -> Self {
        Self {
            analysis_rate: Some(1e9),
            n_fft: 16384,
            n_avg: 4,
            window: Window::Rectangular,
            band_low: 10e6,
            band_high: None,
            search_bins: 2,
        }
    }
}

impl SineTestOptions {
    /// Integrate from DC instead of from 10 MHz.
    pub fn full_band(self) -> Self {
        Self { band_low: 0.0, ..self }
    }

    /// Analyse at the capture's own rate over its full Nyquist band.
    pub fn native(self) -> Self {
        Self { analysis_rate: None, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub sfdr_db: f64,
    pub sinad_db: f64,
    pub enob_bits: f64,
    pub fundamental_hz: f64,
    pub spectrum: SpectrumEstimate,
    pub analysis_band: (f64, f64),
}

impl MetricsReport {
    /// `freq_ghz,sfdr_db,sinad_db,enob_bits` row for input frequency `freq_hz`.
    pub fn csv_row(&self, freq_hz: f64) -> String {
        format!(
            "{:.6},{:.3},{:.3},{:.4}",
            freq_hz / 1e9,
            self.sfdr_db,
            self.sinad_db,
            self.enob_bits
        )
    }
}

pub fn enob(sinad_db: f64) -> f64 {
    (sinad_db - 1.76) / 6.02
}

/// Sine test of a capture with the default options: resample to 1 GSa/s,
/// average four 16384-point periodograms, integrate over 10-500 MHz.
pub fn sine_metrics(cap: &SubbandCapture, expected_baseband_hz: f64) -> Result<MetricsReport> {
    sine_metrics_with(cap, expected_baseband_hz, &SineTestOptions::default())
}

pub fn sine_metrics_with(
    cap: &SubbandCapture,
    expected_baseband_hz: f64,
    opts: &SineTestOptions,
) -> Result<MetricsReport> {
    waveform_metrics(&cap.waveform(), expected_baseband_hz, opts)
}

/// Sine test on any real waveform.
pub fn waveform_metrics(
    x: &SampledWaveform,
    expected_hz: f64,
    opts: &SineTestOptions,
) -> Result<MetricsReport> {
    let needed = opts.n_fft * opts.n_avg;
    let stream = match opts.analysis_rate {
        Some(r) if (r - x.rate()).abs() > 1e-9 * r => {
            let out_len = x.len() as f64 * r / x.rate();
            let boundary = if (out_len - out_len.round()).abs() < 1e-9 {
                Boundary::Periodic
            } else {
                Boundary::Zero
            };
            let have = out_len.floor() as usize;
            if have < needed {
                return Err(Error::InsufficientSamples { needed, have });
            }
            resample_with(x, r, boundary)?
        }
        _ => x.clone(),
    };
    if stream.len() < needed {
        return Err(Error::InsufficientSamples { needed, have: stream.len() });
    }
    let head = SampledWaveform::new(stream.samples()[..needed].to_vec(), stream.rate())?;
    let spec = periodogram(&head, opts.n_fft, opts.n_avg, opts.window)?;
    spectrum_metrics(spec, expected_hz, opts)
}

/// SFDR/SINAD/ENOB from a one-sided spectrum.
pub fn spectrum_metrics(
    spec: SpectrumEstimate,
    expected_hz: f64,
    opts: &SineTestOptions,
) -> Result<MetricsReport> {
    let nyq = *spec.bin_freqs.last().expect("non-empty spectrum");
    let hi = opts.band_high.unwrap_or(nyq).min(nyq);
    let lo = opts.band_low.max(0.0);
    if !(lo < hi) {
        return Err(invalid("band", format!("empty analysis band [{lo}, {hi}]")));
    }
    if !(0.0..=nyq).contains(&expected_hz) {
        return Err(Error::FundamentalNotFound { expected_hz });
    }
    let p = &spec.power;
    let last = p.len() - 1;
    let centre = spec.bin_of(expected_hz);
    let a = centre.saturating_sub(opts.search_bins);
    let b = (centre + opts.search_bins).min(last);
    let peak = (a..=b).max_by(|&i, &j| p[i].total_cmp(&p[j])).expect("non-empty search range");

    let mut sorted = p.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if !(p[peak] > 0.0) || to_db(p[peak]) < to_db(median) + DETECTION_MARGIN_DB {
        return Err(Error::FundamentalNotFound { expected_hz });
    }

    let lobe = spec.window.lobe_half_width();
    let f_lo = peak.saturating_sub(lobe);
    let f_hi = (peak + lobe).min(last);
    let fundamental: f64 = p[f_lo..=f_hi].iter().sum();

    let in_band = |k: usize| {
        let f = spec.bin_freqs[k];
        f >= lo - 1e-9 && f <= hi + 1e-9
    };
    let mut rest = 0.0;
    let mut worst = 0.0f64;
    for k in (0..=last).filter(|&k| in_band(k) && !(f_lo..=f_hi).contains(&k)) {
        rest += p[k];
        worst = worst.max(p[k]);
    }
    let sinad_db = to_db(fundamental) - to_db(rest);
    let sfdr_db = to_db(fundamental) - to_db(worst);
    Ok(MetricsReport {
        sfdr_db,
        sinad_db,
        enob_bits: enob(sinad_db),
        fundamental_hz: spec.bin_freqs[peak],
        spectrum: spec,
        analysis_band: (lo, hi),
    })
}

/// Baseband frequency of input `f` in sub-band `n`: `|f - n·Δf|`. Both
/// halves of a sub-band land on the same value.
pub fn fold_frequency(f: f64, n: usize, delta_f: f64) -> Result<f64> {
    let d = (f - n as f64 * delta_f).abs();
    if d > delta_f / 2.0 * (1.0 + 1e-12) {
        return Err(Error::OutsideSubband { freq_hz: f, index: n });
    }
    Ok(d)
}
