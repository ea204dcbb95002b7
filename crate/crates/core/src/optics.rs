//! Comb pair, modulator and per-sub-band balanced beat.
//!
//! Every tone of the signal comb carries the same field modulation `μ(t)`,
//! so sub-band `n` is computed straight from `μ` in equivalent baseband:
//! tone `n` of the signal comb beats against tone `n` of the LO comb at
//! `n·Δf`. The seed-laser phase is common to both combs and drops out of
//! the beat analytically; only the differential RF drive phase (scaled by
//! `n`) and a static/drifting path phase remain.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::filter;
use crate::seed::{self, Stream};
use crate::waveform::{analytic, gaussian, wiener_phase, SampledWaveform};

/// Elementary charge in coulombs.
pub const Q_E: f64 = 1.602_176_634e-19;

/// Reference bandwidth for OSNR, 0.1 nm at 1550 nm.
pub const OSNR_REF_BW: f64 = 12.5e9;

/// Lines more than this far below the strongest are not usable.
const USABLE_DBC: f64 = -40.0;

/// Samples per RF period used to expand the cascade field.
const CASCADE_POINTS: usize = 4096;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Bessel function of the first kind, integer order, via the trapezoid
/// rule on Bessel's integral (spectrally accurate for a periodic
/// integrand).
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let m = 64 + 2 * (x.abs().ceil() as usize) + 2 * order.unsigned_abs() as usize;
    let h = PI / m as f64;
    let f = |t: f64| (order as f64 * t - x * t.sin()).cos();
    let inner: f64 = (1..m).map(|i| f(i as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// One optical frequency comb.
///
/// Tones are stored low to high. Array index `i` has comb order
/// `i - (n_tones - 1)/2` (integer division), so order 0 is the seed line.
#[derive(Debug, Clone, PartialEq)]
pub struct CombSpec {
    pub spacing: f64,
    pub n_tones: usize,
    /// Linear field amplitudes, strongest tone = 1.
    pub tone_amps: Vec<f64>,
    pub tone_phases: Vec<f64>,
    /// Per-tone power with the strongest tone at `peak_power_dbm`.
    pub tone_powers_dbm: Vec<f64>,
    /// Linewidth of the RF synthesizer driving the comb.
    pub drive_linewidth: f64,
}

impl CombSpec {
    fn from_fields(spacing: f64, fields: Vec<Complex64>, drive_linewidth: f64) -> Result<Self> {
        if fields.is_empty() {
            return Err(invalid("n_tones", "must be >= 1"));
        }
        if !(spacing > 0.0) {
            return Err(invalid("spacing", "must be positive"));
        }
        let peak = fields.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(invalid("tone_amps", "all tones are zero"));
        }
        let tone_amps: Vec<f64> = fields.iter().map(|c| c.norm() / peak).collect();
        Ok(Self {
            spacing,
            n_tones: fields.len(),
            tone_powers_dbm: tone_amps.iter().map(|a| 20.0 * a.log10()).collect(),
            tone_phases: fields.iter().map(|c| c.arg()).collect(),
            tone_amps,
            drive_linewidth,
        })
    }

    /// Lowest comb order held.
    pub fn min_order(&self) -> i64 {
        -(((self.n_tones - 1) / 2) as i64)
    }

    pub fn max_order(&self) -> i64 {
        self.min_order() + self.n_tones as i64 - 1
    }

    /// Relative field amplitude of comb order `order`.
    pub fn amplitude(&self, order: i64) -> Option<f64> {
        let i = order - self.min_order();
        (0..self.n_tones as i64).contains(&i).then(|| self.tone_amps[i as usize])
    }

    /// Max/min tone power ratio in dB.
    pub fn flatness_db(&self) -> f64 {
        let (lo, hi) = self
            .tone_amps
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &a| (lo.min(a), hi.max(a)));
        20.0 * (hi / lo).log10()
    }

    /// Frequency span from the first to the last tone.
    pub fn span(&self) -> f64 {
        (self.n_tones.saturating_sub(1)) as f64 * self.spacing
    }

    pub fn with_peak_power_dbm(mut self, peak_dbm: f64) -> Self {
        self.tone_powers_dbm = self.tone_amps.iter().map(|a| peak_dbm + 20.0 * a.log10()).collect();
        self
    }

    /// `tone_index,power_dbm,phase_rad` CSV; the index is the comb order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tone_index,power_dbm,phase_rad\n");
        for (i, (p, ph)) in self.tone_powers_dbm.iter().zip(&self.tone_phases).enumerate() {
            let _ = writeln!(s, "{},{p:.6},{ph:.6}", i as i64 + self.min_order());
        }
        s
    }
}

/// Ideal comb with equal tones.
pub fn flat_comb(n_tones: usize, spacing: f64) -> Result<CombSpec> {
    CombSpec::from_fields(spacing, vec![Complex64::new(1.0, 0.0); n_tones], 0.0)
}

/// Fourier coefficients of the field `exp(j·m·cos φ)·cos(d/2·(1 - cos φ))`
/// over one RF period, indexed by order from `-L/2` to `L/2 - 1`.
pub fn cascade_lines(pm_index: f64, im_depth: f64) -> Vec<(i64, Complex64)> {
    let l = CASCADE_POINTS;
    let mut e: Vec<Complex64> = (0..l)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / l as f64;
            Complex64::from_polar(1.0, pm_index * phi.cos())
                * (0.5 * im_depth * (1.0 - phi.cos())).cos()
        })
        .collect();
    fft::forward(&mut e);
    let scale = 1.0 / l as f64;
    let half = (l / 2) as i64;
    (-half..half)
        .map(|k| (k, e[k.rem_euclid(l as i64) as usize] * scale))
        .collect()
}

/// Comb from a phase modulator (index `pm_index` rad) cascaded with an
/// intensity modulator (depth `im_depth` rad), keeping the `n_tones`
/// central lines. Amplitudes are normalized to the strongest kept tone.
pub fn comb_from_cascade(pm_index: f64, im_depth: f64, n_tones: usize, spacing: f64) -> Result<CombSpec> {
    if !(pm_index > 0.0) {
        return Err(invalid("pm_index", "must be positive"));
    }
    if !(im_depth >= 0.0) {
        return Err(invalid("im_depth", "must be >= 0"));
    }
    if n_tones == 0 {
        return Err(invalid("n_tones", "must be >= 1"));
    }
    let lines = cascade_lines(pm_index, im_depth);
    let lo = -(((n_tones - 1) / 2) as i64);
    let kept: Vec<Complex64> = lines
        .iter()
        .filter(|(k, _)| (lo..lo + n_tones as i64).contains(k))
        .map(|&(_, c)| c)
        .collect();
    if kept.len() < n_tones {
        return Err(invalid("n_tones", "exceeds the expansion size"));
    }
    let peak = kept.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let usable = kept.iter().filter(|c| 20.0 * (c.norm() / peak).log10() >= USABLE_DBC).count();
    if usable < n_tones {
        return Err(invalid(
            "n_tones",
            format!("only {usable} of {n_tones} central lines within {USABLE_DBC} dBc"),
        ));
    }
    CombSpec::from_fields(spacing, kept, 0.0)
}

/// Smallest phase-modulation index (0.5 rad grid) for which some
/// intensity-modulation depth (0.05 rad grid up to π) gives `n_tones`
/// central lines within `max_variation_db`. Returns `(pm_index, im_depth)`.
pub fn search_flat_cascade(n_tones: usize, max_variation_db: f64) -> Result<(f64, f64)> {
    for mi in 1..=160 {
        let m = 0.5 * mi as f64;
        let mut best: Option<(f64, f64)> = None;
        for di in 0..=62 {
            let d = 0.05 * di as f64;
            if let Ok(c) = comb_from_cascade(m, d, n_tones, 1.0) {
                let v = c.flatness_db();
                if v < max_variation_db && best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, d));
                }
            }
        }
        if let Some((_, d)) = best {
            return Ok((m, d));
        }
    }
    Err(invalid("n_tones", format!("no cascade reaches {max_variation_db} dB flatness")))
}

/// The signal/LO comb pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCombs {
    pub signal: CombSpec,
    pub lo: CombSpec,
    pub seed_linewidth: f64,
    /// Differential path phase drift, rad/s.
    pub differential_phase_drift: f64,
    /// Static differential path phase, rad.
    pub static_phase: f64,
}

impl ScenarioCombs {
    pub fn new(signal: CombSpec, lo: CombSpec) -> Result<Self> {
        let s = Self {
            signal,
            lo,
            seed_linewidth: 5e3,
            differential_phase_drift: 0.0,
            static_phase: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn delta_f(&self) -> f64 {
        self.lo.spacing - self.signal.spacing
    }

    /// Both combs are cut from one seed laser.
    pub fn mutually_coherent(&self) -> bool {
        true
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_f() > 0.0) {
            return Err(invalid("delta_f", "LO spacing must exceed signal spacing"));
        }
        if self.seed_linewidth < 0.0 || self.signal.drive_linewidth < 0.0 || self.lo.drive_linewidth < 0.0 {
            return Err(invalid("linewidth", "must be >= 0"));
        }
        Ok(())
    }

    /// Linewidth of the differential RF drive phase.
    pub fn differential_linewidth(&self) -> f64 {
        self.signal.drive_linewidth + self.lo.drive_linewidth
    }
}

impl Default for ScenarioCombs {
    fn default() -> Self {
        let mut signal = flat_comb(24, 26e9).expect("valid flat comb");
        let mut lo = flat_comb(24, 27e9).expect("valid flat comb");
        signal.drive_linewidth = 1.0;
        lo.drive_linewidth = 1.0;
        Self::new(signal, lo).expect("valid default combs")
    }
}

/// Outcome of the bandwidth/comb scaling checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub delta_f_ok: bool,
    /// `Δf - B/N`, Hz.
    pub delta_f_margin: f64,
    pub f_sig_ok: bool,
    /// `f_sig/2 - B`, Hz.
    pub f_sig_margin: f64,
}

impl ScalingReport {
    pub fn pass(&self) -> bool {
        self.delta_f_ok && self.f_sig_ok
    }
}

/// Check `Δf ≥ B/N` and `f_sig/2 > B` for a bandwidth `B` split into
/// `n_subbands` sub-bands. `B = 0` passes trivially.
pub fn validate_scaling(bandwidth_b: f64, combs: &ScenarioCombs, n_subbands: usize) -> ScalingReport {
    let per = if n_subbands == 0 { f64::INFINITY } else { bandwidth_b / n_subbands as f64 };
    let per = if bandwidth_b == 0.0 { 0.0 } else { per };
    let df_margin = combs.delta_f() - per;
    let fs_margin = combs.signal.spacing / 2.0 - bandwidth_b;
    ScalingReport {
        delta_f_ok: df_margin >= -1e-9 * combs.delta_f().abs(),
        delta_f_margin: df_margin,
        f_sig_ok: bandwidth_b == 0.0 || fs_margin > 0.0,
        f_sig_margin: fs_margin,
    }
}

/// Null-biased MZM field factor `sin(π·v·drive_scale/2)` for a drive `v`
/// normalized to unit peak.
pub fn mzm_field(v: &SampledWaveform, vpi: f64, drive_scale: f64) -> Result<SampledWaveform> {
    if !(vpi > 0.0) {
        return Err(invalid("vpi", "must be positive"));
    }
    if !(0.0..=1.0).contains(&drive_scale) {
        return Err(invalid("drive_scale", "must lie in [0, 1]"));
    }
    let k = PI * drive_scale / 2.0;
    Ok(v.map(|x| (k * x).sin()))
}

/// Receiver chain parameters. Optical powers are at the link input; the
/// receiver path adds `rx_loss_db` before the photodiodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub vpi: f64,
    pub drive_scale: f64,
    /// Average optical power of one modulated signal tone.
    pub sig_power_per_ch_dbm: f64,
    pub lo_power_per_tone_dbm: f64,
    pub rx_loss_db: f64,
    pub osnr_db: f64,
    pub pd_bandwidth: f64,
    pub tia_sat_dbm: f64,
    pub cmrr_db: f64,
    pub responsivity: f64,
    /// Per-photodiode input current noise, A/√Hz.
    pub thermal_noise_density: f64,
    pub noise: bool,
    pub common_mode: bool,
    pub saturation: bool,
    pub phase_noise: bool,
    pub pd_filter: bool,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            vpi: 4.0,
            drive_scale: 0.3,
            sig_power_per_ch_dbm: -10.0,
            lo_power_per_tone_dbm: 8.0 - 12.0,
            rx_loss_db: 10.0,
            osnr_db: 55.0,
            pd_bandwidth: 1.2e9,
            tia_sat_dbm: -13.0,
            cmrr_db: 5.0,
            responsivity: 0.8,
            thermal_noise_density: 1e-12,
            noise: true,
            common_mode: true,
            saturation: true,
            phase_noise: true,
            pd_filter: true,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.vpi > 0.0) {
            return Err(invalid("vpi", "must be positive"));
        }
        if !(self.drive_scale > 0.0 && self.drive_scale <= 1.0) {
            return Err(invalid("drive_scale", "must lie in (0, 1]"));
        }
        if !(self.pd_bandwidth > 0.0) {
            return Err(invalid("pd_bandwidth", "must be positive"));
        }
        if !(self.responsivity > 0.0) {
            return Err(invalid("responsivity", "must be positive"));
        }
        if self.thermal_noise_density < 0.0 || self.rx_loss_db < 0.0 {
            return Err(invalid("link", "noise density and loss must be >= 0"));
        }
        Ok(())
    }

    fn loss(&self) -> f64 {
        10f64.powf(-self.rx_loss_db / 10.0)
    }

    /// Carrier power of the signal tone at the photodiodes, chosen so a
    /// full-scale sine drive yields the configured modulated power.
    pub fn carrier_power(&self) -> f64 {
        let mod_frac = (1.0 - bessel_j(0, PI * self.drive_scale)) / 2.0;
        dbm_to_watts(self.sig_power_per_ch_dbm) / mod_frac * self.loss()
    }

    /// LO tone power at the photodiodes.
    pub fn lo_power(&self) -> f64 {
        dbm_to_watts(self.lo_power_per_tone_dbm) * self.loss()
    }

    /// Soft-limit current of the TIA.
    pub fn saturation_current(&self) -> f64 {
        self.responsivity * dbm_to_watts(self.tia_sat_dbm)
    }

    /// One-sided noise PSD (A²/Hz) for a mean signal power `p_sig` at the
    /// photodiodes: shot + thermal + LO-ASE beat.
    pub fn noise_psd(&self, p_sig: f64) -> f64 {
        let r = self.responsivity;
        let p_lo = self.lo_power();
        let shot = 2.0 * Q_E * r * (p_lo + p_sig);
        let thermal = 2.0 * self.thermal_noise_density.powi(2);
        let rho = self.carrier_power() / (10f64.powf(self.osnr_db / 10.0) * OSNR_REF_BW);
        shot + thermal + 4.0 * r * r * p_lo * rho
    }

    /// Photodiode lowpass taps at simulation `rate`.
    pub fn pd_taps(&self, rate: f64) -> Result<Vec<f64>> {
        filter::fir_lowpass_auto(self.pd_bandwidth, rate)
    }
}

/// Differential beat phase `θ_n(t)` for sub-band `n`: `n` times the
/// differential drive phase, plus drift and static phase. The seed-laser
/// phase never enters: it is common to both combs.
pub fn seed_coherence_check(combs: &ScenarioCombs, n: usize, len: usize, rate: f64, seed: u64) -> Result<Vec<f64>> {
    let drive = wiener_phase(
        combs.differential_linewidth(),
        len,
        rate,
        seed::derive(seed, Stream::DrivePhase, 0),
    )?;
    let scale = n as f64;
    Ok(drive
        .iter()
        .enumerate()
        .map(|(i, &p)| scale * p + combs.differential_phase_drift * i as f64 / rate + combs.static_phase)
        .collect())
}

/// RMS deviation of a phase track from its mean.
pub fn rms_deviation(track: &[f64]) -> f64 {
    let n = track.len().max(1) as f64;
    let mean = track.iter().sum::<f64>() / n;
    (track.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Balanced photocurrent of sub-band `n`, in units of the TIA saturation
/// current, at the rate of `mu`.
///
/// `seed` keys the run: receiver noise draws from `(seed, n)`, the drive
/// phase from `seed` alone so all sub-bands share one RF synthesizer.
pub fn subband_beat(
    mu: &SampledWaveform,
    n: usize,
    combs: &ScenarioCombs,
    link: &LinkConfig,
    seed: u64,
) -> Result<SampledWaveform> {
    combs.validate()?;
    link.validate()?;
    let df = combs.delta_f();
    let order = n as i64;
    let (Some(ts), Some(tl)) = (combs.signal.amplitude(order), combs.lo.amplitude(order)) else {
        let max = combs.signal.max_order().min(combs.lo.max_order()).max(0) as usize;
        return Err(Error::SubbandOutOfRange { index: n, max });
    };
    if n == 0 {
        return Err(Error::SubbandOutOfRange { index: 0, max: combs.signal.max_order().max(0) as usize });
    }
    let rate = mu.rate();
    if rate < 2.0 * (n as f64 + 0.5) * df || rate < 2.0 * link.pd_bandwidth {
        return Err(invalid("mu", format!("rate {rate} Hz too low for sub-band {n}")));
    }
    let r = link.responsivity;
    let p_c = link.carrier_power() * ts * ts;
    let p_lo = link.lo_power() * tl * tl;
    let gain = r * (p_c * p_lo).sqrt();
    let len = mu.len();

    let theta = if link.phase_noise {
        seed_coherence_check(combs, n, len, rate, seed)?
    } else {
        vec![combs.static_phase; len]
    };
    let cycles = n as f64 * df / rate;
    let mu_a = analytic(mu);
    let mut i: Vec<f64> = mu_a
        .samples()
        .iter()
        .enumerate()
        .map(|(k, z)| {
            // Reduce the carrier phase per period for long records.
            let ph = theta[k] - 2.0 * PI * (cycles * k as f64).fract();
            gain * (z * Complex64::from_polar(1.0, ph)).re
        })
        .collect();

    if link.common_mode {
        let eps = 10f64.powf(-link.cmrr_db / 20.0);
        let k = eps * r * p_c;
        i.iter_mut().zip(mu.samples()).for_each(|(v, m)| *v += k * m * m);
    }
    if link.noise {
        let p_sig = p_c * mu.mean_square();
        let var = link.noise_psd(p_sig) * rate / 2.0;
        let e = gaussian(len, var, seed::derive(seed, Stream::LinkNoise, n as u64));
        i.iter_mut().zip(e).for_each(|(v, x)| *v += x);
    }
    let mut out = SampledWaveform::from_parts(i, rate);
    if link.pd_filter {
        out = filter::apply_fir_periodic(&out, &link.pd_taps(rate)?)?;
    }
    let s = link.saturation_current();
    Ok(if link.saturation {
        out.map(|x| (x / s).tanh())
    } else {
        out.scaled(1.0 / s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{periodogram, Window};
    use crate::tx::sine_waveform;

    /// Power series for `J_k(x)`, independent of the library's integral.
    fn bessel_series(k: i32, x: f64) -> f64 {
        let ka = k.unsigned_abs() as i32;
        let mut term = (x / 2.0).powi(ka) / (1..=ka).map(f64::from).product::<f64>();
        let mut sum = term;
        for m in 1..200 {
            term *= -(x * x / 4.0) / (m as f64 * (m + ka) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        if k < 0 && ka % 2 == 1 {
            -sum
        } else {
            sum
        }
    }

    #[test]
    fn bessel_matches_series() {
        for k in [-3, 0, 1, 2, 5] {
            for x in [0.0, 0.3, 1.0, 2.404_825_557_695_773, 7.5] {
                let a = bessel_j(k, x);
                let b = bessel_series(k, x);
                assert!((a - b).abs() < 1e-12, "J{k}({x}): {a} vs {b}");
            }
        }
        assert!(bessel_j(0, 2.404_825_557_695_773).abs() < 1e-12);
    }

    #[test]
    fn pure_pm_comb_conserves_power() {
        let lines = cascade_lines(3.7, 0.0);
        let total: f64 = lines.iter().map(|(_, c)| c.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-6);
        let bessel: f64 = (-60..=60).map(|k| bessel_series(k, 3.7).powi(2)).sum();
        assert!((bessel - 1.0).abs() < 1e-6);
        for (k, c) in lines.iter().filter(|(k, _)| k.abs() <= 8) {
            assert!((c.norm() - bessel_series(*k as i32, 3.7).abs()).abs() < 1e-9, "order {k}");
        }
    }

    #[test]
    fn tiny_modulation_gives_single_tone() {
        let c = comb_from_cascade(1e-9, 0.0, 1, 26e9).unwrap();
        assert_eq!(c.n_tones, 1);
        assert!(comb_from_cascade(1e-9, 0.0, 3, 26e9).is_err());
        assert!(comb_from_cascade(0.0, 0.0, 1, 26e9).is_err());
    }

    #[test]
    fn search_finds_flat_24_tones() {
        let (m, d) = search_flat_cascade(24, 3.0).unwrap();
        let c = comb_from_cascade(m, d, 24, 26e9).unwrap();
        assert!(c.flatness_db() < 3.0);
        assert_eq!(c.n_tones, 24);
        assert!(c.amplitude(10).is_some() && c.amplitude(13).is_none());
    }

    #[test]
    fn flat_comb_basics() {
        let one = flat_comb(1, 26e9).unwrap();
        assert_eq!(one.n_tones, 1);
        assert_eq!(one.amplitude(0), Some(1.0));
        let c = flat_comb(24, 26e9).unwrap();
        assert_eq!(c.flatness_db(), 0.0);
        assert!((c.span() - 598e9).abs() < 1.0);
        let csv = c.with_peak_power_dbm(-5.0).to_csv();
        assert!(csv.starts_with("tone_index,power_dbm,phase_rad\n-11,-5.000000,0.000000\n"));
        assert_eq!(csv.lines().count(), 25);
    }

    #[test]
    fn scaling_rules() {
        let combs = ScenarioCombs::default();
        let r = validate_scaling(10e9, &combs, 10);
        assert!(r.pass());
        assert!((r.f_sig_margin - 3e9).abs() < 1.0);
        assert!(validate_scaling(0.0, &combs, 10).pass());
        let r = validate_scaling(14e9, &combs, 14);
        assert!(r.delta_f_ok && !r.f_sig_ok);
        assert!(!validate_scaling(10e9, &combs, 5).delta_f_ok);
    }

    #[test]
    fn mzm_behaviour() {
        let zero = SampledWaveform::new(vec![0.0; 64], 32e9).unwrap();
        assert!(mzm_field(&zero, 4.0, 0.3).unwrap().samples().iter().all(|&v| v == 0.0));

        let n = 16384;
        let x = sine_waveform(32e9 / n as f64 * 101.0, 1.0, n as f64 / 32e9, 32e9).unwrap();
        let mu = mzm_field(&x, 4.0, 0.3).unwrap();
        let p = periodogram(&mu, n, 1, Window::Rectangular).unwrap();
        let hd3 = 10.0 * (p.power[303] / p.power[101]).log10();
        assert!(hd3 <= -40.0, "HD3 {hd3}");
        let dc = mu.samples().iter().sum::<f64>() / n as f64;
        let peak = mu.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(dc.abs() < 1e-3 * peak);

        let small = x.scaled(0.1);
        let mu = mzm_field(&small, 4.0, 0.3).unwrap();
        let k = PI * 0.3 / 2.0;
        for (m, v) in mu.samples().iter().zip(small.samples()).step_by(7) {
            if v.abs() > 1e-3 {
                assert!((m / (k * v) - 1.0).abs() < 0.01);
            }
        }
    }

    fn quiet() -> LinkConfig {
        LinkConfig {
            noise: false,
            common_mode: false,
            saturation: false,
            phase_noise: false,
            ..LinkConfig::default()
        }
    }

    fn tone_peak(x: &SampledWaveform) -> f64 {
        let p = periodogram(x, x.len(), 1, Window::Rectangular).unwrap();
        let k = (1..p.len()).max_by(|&a, &b| p.power[a].total_cmp(&p.power[b])).unwrap();
        p.bin_freqs[k]
    }

    #[test]
    fn beat_maps_tones_to_baseband() {
        let rate = 32e9;
        let n = 32768;
        let combs = ScenarioCombs::default();
        let link = quiet();
        for f in [5.25e9, 4.75e9] {
            let x = sine_waveform(f, 1.0, n as f64 / rate, rate).unwrap();
            let mu = mzm_field(&x, 4.0, 0.05).unwrap();
            let y = subband_beat(&mu, 5, &combs, &link, 1).unwrap();
            assert!((tone_peak(&y) - 250e6).abs() < 1.0, "{f}");
        }
    }

    #[test]
    fn beat_is_linear_without_distortion() {
        let rate = 32e9;
        let n = 8192;
        let combs = ScenarioCombs::default();
        let link = quiet();
        let a = sine_waveform(3.2e9, 0.01, n as f64 / rate, rate).unwrap();
        let b = sine_waveform(2.9e9, 0.02, n as f64 / rate, rate).unwrap();
        let ya = subband_beat(&a, 3, &combs, &link, 1).unwrap();
        let yb = subband_beat(&b, 3, &combs, &link, 1).unwrap();
        let yab = subband_beat(&a.add(&b).unwrap(), 3, &combs, &link, 1).unwrap();
        let scale = yab.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let d = yab.samples()[i] - ya.samples()[i] - yb.samples()[i];
            assert!(d.abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn zero_input_noise_matches_budget() {
        let rate = 32e9;
        let n = 1 << 20;
        let combs = ScenarioCombs::default();
        let link = LinkConfig { common_mode: false, saturation: false, ..LinkConfig::default() };
        let mu = SampledWaveform::new(vec![0.0; n], rate).unwrap();
        let y = subband_beat(&mu, 2, &combs, &link, 9).unwrap();
        // Noise bandwidth of the photodiode filter: Σ h² · rate / 2.
        let taps = link.pd_taps(rate).unwrap();
        let enbw = taps.iter().map(|h| h * h).sum::<f64>() * rate / 2.0;
        let s = link.saturation_current();
        let want = link.noise_psd(0.0) * enbw / (s * s);
        let got = y.mean_square();
        assert!((got / want - 1.0).abs() < 0.1, "{got} vs {want}");
    }

    #[test]
    fn seed_linewidth_has_no_effect() {
        let rate = 32e9;
        let x = sine_waveform(4.25e9, 0.9, 8192.0 / rate, rate).unwrap();
        let mu = mzm_field(&x, 4.0, 0.3).unwrap();
        let mut combs = ScenarioCombs { seed_linewidth: 0.0, ..Default::default() };
        let link = LinkConfig::default();
        let a = subband_beat(&mu, 4, &combs, &link, 3).unwrap();
        combs.seed_linewidth = 5e3;
        let b = subband_beat(&mu, 4, &combs, &link, 3).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn drive_phase_variance_scales_with_n_squared() {
        let mut combs = ScenarioCombs::default();
        combs.signal.drive_linewidth = 5e4;
        combs.lo.drive_linewidth = 5e4;
        let (rate, len, trials) = (1e9, 200, 400);
        let t_end = (len - 1) as f64 / rate;
        for n in [1usize, 3] {
            let var = (0..trials)
                .map(|s| seed_coherence_check(&combs, n, len, rate, s).unwrap()[len - 1].powi(2))
                .sum::<f64>()
                / trials as f64;
            let want = (n * n) as f64 * 2.0 * PI * 1e5 * t_end;
            assert!((var / want - 1.0).abs() < 0.2, "n={n}: {var} vs {want}");
        }
        combs.signal.drive_linewidth = 0.0;
        combs.lo.drive_linewidth = 0.0;
        let t = seed_coherence_check(&combs, 7, 100, 1e9, 1).unwrap();
        assert!(t.iter().all(|&p| p == t[0]));
        assert_eq!(rms_deviation(&t), 0.0);
    }

    #[test]
    fn subband_range_checked() {
        let combs = ScenarioCombs::default();
        let mu = SampledWaveform::new(vec![0.0; 64], 32e9).unwrap();
        assert!(matches!(
            subband_beat(&mu, 13, &combs, &LinkConfig::default(), 0),
            Err(Error::SubbandOutOfRange { .. })
        ));
        assert!(subband_beat(&mu, 0, &combs, &LinkConfig::default(), 0).is_err());
    }

    #[test]
    fn common_mode_spur_tracks_cmrr() {
        // A 0.3 GHz drive in sub-band 1: the beat sits at 0.7 GHz and the
        // direct-detection term puts a line at 2f = 0.6 GHz.
        let rate = 32e9;
        let n = 16384;
        let bin = 154;
        let f = rate / n as f64 * bin as f64;
        let x = sine_waveform(f, 0.9, n as f64 / rate, rate).unwrap();
        let mu = mzm_field(&x, 4.0, 0.3).unwrap();
        let combs = ScenarioCombs::default();
        let spur = |cmrr: f64, on: bool| {
            let link = LinkConfig { cmrr_db: cmrr, common_mode: on, ..quiet() };
            let y = subband_beat(&mu, 1, &combs, &link, 0).unwrap();
            let p = periodogram(&y, n, 1, Window::Rectangular).unwrap();
            10.0 * p.power[2 * bin].max(1e-300).log10()
        };
        let a = spur(30.0, true);
        let b = spur(31.0, true);
        assert!((a - b - 1.0).abs() < 1e-6, "{a} {b}");
        assert!(spur(30.0, false) < a - 200.0);
    }
}
