//! Data-aided demodulation of one SCM-PAM sub-band with a fractionally
//! spaced LMS equalizer.
//!
//! The detected sub-band holds `Re{G·b_a(t)·exp(j(2π·f_off·t + θ))}`, where
//! `b_a` is the analytic PAM signal. Band selection, downconversion, the
//! matched filter and the move to `sps` samples per symbol all happen in
//! one pass over the record spectrum (the record is periodic).

use num_complex::Complex64;

use crate::adc::SubbandCapture;
use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::filter::rrc_response;

/// Tap-vector norm above which adaptation is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e3;

/// Header matching [`DemodReport::csv_row`].
pub const SCM_CSV_HEADER: &str = "channel,snr_db";

#[derive(Debug, Clone, PartialEq)]
pub struct DemodConfig {
    pub channel_index: usize,
    /// Subcarrier offset inside the sub-band (use the record-grid value).
    pub baseband_offset: f64,
    pub baud: f64,
    pub rolloff: f64,
    pub ffe_taps: usize,
    pub sps: usize,
    pub ffe_step: f64,
    /// Passes over the training block.
    pub ffe_epochs: usize,
    pub training_fraction: f64,
    pub equalize: bool,
    /// Upper edge of the sub-band selection filter.
    pub band_edge: f64,
    pub levels: usize,
}

impl Default for DemodConfig {
    fn default() -> Self {
        Self {
            channel_index: 1,
            baseband_offset: 40e6,
            baud: 800e6,
            rolloff: 0.1,
            ffe_taps: 17,
            sps: 2,
            ffe_step: 4e-3,
            ffe_epochs: 30,
            training_fraction: 0.5,
            equalize: true,
            band_edge: 500e6,
            levels: 4,
        }
    }
}

impl DemodConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ffe_taps.is_multiple_of(2) {
            return Err(invalid("ffe_taps", "must be odd"));
        }
        if self.sps < 2 {
            return Err(invalid("sps", "must be >= 2"));
        }
        if !(self.training_fraction > 0.0 && self.training_fraction < 1.0) {
            return Err(invalid("training_fraction", "must lie in (0, 1)"));
        }
        if !(self.ffe_step > 0.0) || self.ffe_epochs == 0 {
            return Err(invalid("ffe_step", "step and epochs must be positive"));
        }
        if !(self.baud > 0.0 && self.band_edge > 0.0) {
            return Err(invalid("baud", "baud and band edge must be positive"));
        }
        if self.levels < 2 {
            return Err(invalid("levels", "must be >= 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemodReport {
    pub channel: usize,
    pub snr_db: f64,
    /// SNR of the matched-filter output before equalization.
    pub unequalized_snr_db: f64,
    pub equalized_symbols: Vec<f64>,
    pub level_histogram: Vec<usize>,
    pub converged: bool,
    pub taps: Vec<f64>,
    pub training_symbols: usize,
}

impl DemodReport {
    pub fn csv_row(&self) -> String {
        format!("{},{:.3}", self.channel, self.snr_db)
    }
}

/// Result of [`ffe_lms`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ffe {
    pub taps: Vec<f64>,
    /// One output per symbol.
    pub output: Vec<f64>,
}

/// Regressor of symbol `m` from a periodic 2-sps (or `sps`) sequence.
fn regressor(y: &[f64], m: usize, sps: usize, taps: usize, out: &mut [f64]) {
    let n = y.len() as i64;
    let c = (taps / 2) as i64;
    let base = (m * sps) as i64 + c;
    for (k, u) in out.iter_mut().enumerate() {
        *u = y[(base - k as i64).rem_euclid(n) as usize];
    }
}

/// Fractionally spaced LMS equalizer on a periodic `sps`-sample sequence.
///
/// Taps start as a unit center tap, adapt over `epochs` passes of the
/// training symbols with the step falling linearly from `step` to
/// `step/epochs`, then freeze and filter every symbol.
pub fn ffe_lms(y: &[f64], sps: usize, training: &[f64], taps: usize, step: f64, epochs: usize) -> Result<Ffe> {
    if taps.is_multiple_of(2) {
        return Err(invalid("taps", "must be odd"));
    }
    if sps == 0 || !y.len().is_multiple_of(sps) {
        return Err(invalid("sps", "sequence length must be a multiple of sps"));
    }
    let n_sym = y.len() / sps;
    if training.len() < 10 * taps {
        return Err(invalid("training", format!("need >= {} symbols, got {}", 10 * taps, training.len())));
    }
    if training.len() > n_sym {
        return Err(Error::LengthMismatch { what: "more training symbols than received symbols".into() });
    }
    let mut w = vec![0.0; taps];
    w[taps / 2] = 1.0;
    let mut u = vec![0.0; taps];
    for epoch in 0..epochs {
        // Linear step decay keeps the final misadjustment small.
        let mu = step * (epochs - epoch) as f64 / epochs as f64;
        for (m, &a) in training.iter().enumerate() {
            regressor(y, m, sps, taps, &mut u);
            let e = a - dot(&w, &u);
            for (wk, uk) in w.iter_mut().zip(&u) {
                *wk += mu * e * uk;
            }
        }
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm < DIVERGENCE_NORM) {
            return Err(Error::Diverged { tap_norm: norm });
        }
    }
    let output = (0..n_sym)
        .map(|m| {
            regressor(y, m, sps, taps, &mut u);
            dot(&w, &u)
        })
        .collect();
    Ok(Ffe { taps: w, output })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mse(y: &[f64], a: &[f64]) -> f64 {
    y.iter().zip(a).map(|(y, a)| (y - a).powi(2)).sum::<f64>() / a.len().max(1) as f64
}

/// `10·log10(E[a²]/E[(y-a)²])`.
pub fn snr_db(y: &[f64], a: &[f64]) -> f64 {
    let p = a.iter().map(|v| v * v).sum::<f64>() / a.len().max(1) as f64;
    10.0 * (p / mse(y, a)).log10()
}

/// Least-squares gain mapping `y` onto `a`.
fn ls_gain(y: &[f64], a: &[f64]) -> f64 {
    let num: f64 = y.iter().zip(a).map(|(y, a)| y * a).sum();
    let den: f64 = y.iter().map(|y| y * y).sum();
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

/// Band-select, downconvert and matched-filter a capture, returning the
/// complex baseband at `sps·baud`. `n_sym` must fit the record exactly.
pub fn matched_baseband(cap: &SubbandCapture, cfg: &DemodConfig, n_sym: usize) -> Result<Vec<Complex64>> {
    let x = cap.waveform();
    let rate = x.rate();
    let n = x.len();
    let df = rate / n as f64;
    let off = cfg.baseband_offset / df;
    if (off - off.round()).abs() > 1e-6 {
        return Err(invalid("baseband_offset", "not on the capture's frequency grid"));
    }
    let off = off.round() as usize;
    let m = n_sym * cfg.sps;
    let spec = fft::real_spectrum(x.samples());
    let mut z = vec![Complex64::new(0.0, 0.0); m];
    let top = ((cfg.band_edge / df).floor() as usize).min((n - 1) / 2);
    for (k, v) in spec.iter().enumerate().take(top + 1).skip(off.max(1)) {
        let g = (k - off) as f64 * df;
        let w = if k == off { 1.0 } else { 2.0 };
        let h = rrc_response(g, cfg.baud, cfg.rolloff);
        if h > 0.0 {
            z[(k - off) % m] += v * (w * h);
        }
    }
    fft::inverse(&mut z);
    let scale = m as f64 / n as f64;
    z.iter_mut().for_each(|c| *c *= scale);
    Ok(z)
}

/// Demodulate sub-band `cfg.channel_index` against the known symbols.
///
/// `tx_symbols` is one burst; it is repeated to cover the capture.
pub fn demod_pam4(cap: &SubbandCapture, cfg: &DemodConfig, tx_symbols: &[f64]) -> Result<DemodReport> {
    cfg.validate()?;
    if tx_symbols.is_empty() {
        return Err(Error::LengthMismatch { what: "no transmitted symbols".into() });
    }
    let rate = cap.cfg.rate;
    let n_sym_f = cap.len() as f64 / rate * cfg.baud;
    let n_sym = n_sym_f.round() as usize;
    if (n_sym_f - n_sym as f64).abs() > 1e-6 || !n_sym.is_multiple_of(tx_symbols.len()) {
        return Err(Error::LengthMismatch {
            what: format!(
                "capture holds {n_sym_f} symbols, not a whole number of {}-symbol bursts",
                tx_symbols.len()
            ),
        });
    }
    let a: Vec<f64> = tx_symbols.iter().cycle().take(n_sym).copied().collect();
    let n_train = ((n_sym as f64 * cfg.training_fraction).round() as usize).clamp(1, n_sym - 1);

    let z = matched_baseband(cap, cfg, n_sym)?;
    let sps = cfg.sps;
    let corr: Complex64 = (0..n_train).map(|i| z[i * sps] * a[i]).sum();
    let rot = Complex64::from_polar(1.0, -corr.arg());
    let mut r: Vec<f64> = z.iter().map(|c| (c * rot).re).collect();
    let sym: Vec<f64> = (0..n_sym).map(|i| r[i * sps]).collect();
    let g = ls_gain(&sym[..n_train], &a[..n_train]);
    r.iter_mut().for_each(|v| *v *= g);
    let plain: Vec<f64> = sym.iter().map(|v| v * g).collect();
    let unequalized_snr_db = snr_db(&plain[n_train..], &a[n_train..]);

    let (taps, out, converged) = if cfg.equalize {
        let ffe = ffe_lms(&r, sps, &a[..n_train], cfg.ffe_taps, cfg.ffe_step, cfg.ffe_epochs)?;
        let before = mse(&plain[..n_train], &a[..n_train]);
        let after = mse(&ffe.output[..n_train], &a[..n_train]);
        if after > before {
            return Err(Error::NotConverged { before, after });
        }
        (ffe.taps, ffe.output, true)
    } else {
        (vec![1.0], plain, true)
    };
    let g2 = ls_gain(&out[..n_train], &a[..n_train]);
    let out: Vec<f64> = out.iter().map(|v| v * g2).collect();
    let snr = snr_db(&out[n_train..], &a[n_train..]);

    let levels = cfg.levels;
    let m = levels as f64;
    let scale = ((m * m - 1.0) / 3.0).sqrt();
    let mut hist = vec![0usize; levels];
    for &y in &out[n_train..] {
        let idx = ((y * scale + m - 1.0) / 2.0).round().clamp(0.0, m - 1.0) as usize;
        hist[idx] += 1;
    }
    Ok(DemodReport {
        channel: cfg.channel_index,
        snr_db: snr,
        unequalized_snr_db,
        equalized_symbols: out,
        level_histogram: hist,
        converged,
        taps,
        training_symbols: n_train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tx::gen_pam4_symbols;
    use crate::waveform::gaussian;
    use nalgebra::{DMatrix, DVector};

    /// 2-sps sequence: symbols on even samples, midpoints on odd ones.
    fn two_sps(a: &[f64]) -> Vec<f64> {
        let n = a.len();
        (0..2 * n)
            .map(|i| if i % 2 == 0 { a[i / 2] } else { 0.5 * (a[i / 2] + a[(i / 2 + 1) % n]) })
            .collect()
    }

    #[test]
    fn identity_channel() {
        let a = gen_pam4_symbols(2000, 1).unwrap();
        let y = two_sps(&a);
        let f = ffe_lms(&y, 2, &a[..1000], 17, 0.01, 5).unwrap();
        assert!((f.taps[8] - 1.0).abs() < 1e-2);
        assert!(f.taps.iter().enumerate().all(|(i, &t)| i == 8 || t.abs() <= 1e-2));
        assert!(snr_db(&f.output, &a) >= 40.0);
    }

    #[test]
    fn lms_approaches_wiener() {
        let n = 6000;
        let a = gen_pam4_symbols(n, 2).unwrap();
        // Symbol-rate channel [1, 0.45, -0.2], then 2-sps interpolation.
        let h = [1.0, 0.45, -0.2];
        let c: Vec<f64> = (0..n)
            .map(|m| (0..3).map(|k| h[k] * a[(m + n - k) % n]).sum())
            .collect();
        let noise = gaussian(2 * n, 1e-3, 3);
        let y: Vec<f64> = two_sps(&c).iter().zip(&noise).map(|(v, e)| v + e).collect();
        let taps = 17;
        let train = &a[..4000];
        let f = ffe_lms(&y, 2, train, taps, 2e-3, 40).unwrap();
        let lms = mse(&f.output[..4000], train);

        let mut u = vec![0.0; taps];
        let mut r = DMatrix::<f64>::zeros(taps, taps);
        let mut p = DVector::<f64>::zeros(taps);
        for (m, &am) in train.iter().enumerate() {
            regressor(&y, m, 2, taps, &mut u);
            let uv = DVector::from_column_slice(&u);
            r += &uv * uv.transpose();
            p += &uv * am;
        }
        let w = r.clone().lu().solve(&p).unwrap();
        let wiener: f64 = train
            .iter()
            .enumerate()
            .map(|(m, &am)| {
                regressor(&y, m, 2, taps, &mut u);
                (am - w.dot(&DVector::from_column_slice(&u))).powi(2)
            })
            .sum::<f64>()
            / train.len() as f64;
        let gap = 10.0 * (lms / wiener).log10();
        assert!(gap < 1.0, "LMS {lms} vs Wiener {wiener}");
    }

    #[test]
    fn large_step_diverges() {
        let a = gen_pam4_symbols(2000, 4).unwrap();
        let y: Vec<f64> = two_sps(&a).iter().map(|v| 3.0 * v).collect();
        // Stable below roughly 2/(taps·E[y²]) ≈ 0.014 here.
        assert!(matches!(ffe_lms(&y, 2, &a[..1000], 17, 0.5, 5), Err(Error::Diverged { .. })));
        assert!(ffe_lms(&y, 2, &a[..1000], 17, 0.005, 5).is_ok());
    }

    #[test]
    fn ffe_argument_checks() {
        let a = gen_pam4_symbols(200, 4).unwrap();
        let y = two_sps(&a);
        assert!(ffe_lms(&y, 2, &a[..100], 16, 0.01, 1).is_err());
        assert!(ffe_lms(&y, 2, &a[..100], 17, 0.01, 1).is_err());
        assert!(ffe_lms(&y[..399], 2, &a[..100], 9, 0.01, 1).is_err());
        assert!(DemodConfig { ffe_taps: 4, ..Default::default() }.validate().is_err());
        assert!(DemodConfig { sps: 1, ..Default::default() }.validate().is_err());
    }
}
