//! End-to-end runners: sine sweep, SCM-PAM4 link and capture spectra.
//!
//! Every task derives its random streams from the master seed and its own
//! index, so results do not depend on the thread count or on whether
//! sub-bands run one after another or as a parallel bank.

use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;

use crate::adc::{adc_capture, SubbandCapture};
use crate::demod::{demod_pam4, DemodConfig, DemodReport, SCM_CSV_HEADER};
use crate::error::{Error, Result};
use crate::fft::filter_periodic;
use crate::metrics::{fold_frequency, sine_metrics, MetricsReport, SineTestOptions, SWEEP_CSV_HEADER};
use crate::optics::{mzm_field, subband_beat, ScenarioCombs};
use crate::scenario::{ScenarioConfig, SweepSpec};
use crate::seed::{derive, Stream};
use crate::spectrum::{periodogram, SpectrumEstimate, Window};
use crate::tx::{apply_tilt, channel_symbols, dac_model, scm_waveform, sine_waveform};
use crate::waveform::SampledWaveform;

/// Sub-band that carries input frequency `f`.
pub fn route(f: f64, delta_f: f64) -> usize {
    ((f / delta_f).round() as usize).max(1)
}

/// Move `f` so its baseband image `|f - n·Δf|` sits inside the usable
/// window on an odd bin of the analysis grid (`grid` Hz). Returns the
/// sub-band and the new frequency.
pub fn snap_frequency(f: f64, spec: &SweepSpec, delta_f: f64, grid: f64) -> (usize, f64) {
    let n = route(f, delta_f);
    if !spec.snap {
        return (n, f);
    }
    let centre = n as f64 * delta_f;
    let b = f - centre;
    let sign = if b < 0.0 { -1.0 } else { 1.0 };
    let mag = b.abs().clamp(spec.baseband_min, spec.baseband_max);
    let mut bins = (mag / grid).round() as i64;
    if bins % 2 == 0 {
        bins += if (bins + 1) as f64 * grid <= spec.baseband_max { 1 } else { -1 };
    }
    (n, centre + sign * bins as f64 * grid)
}

/// Linear-in-dB detector roll-off: 0 dB at DC falling to `-db` at `Δf/2`.
pub fn apply_inband_rolloff(x: &SampledWaveform, db: f64, delta_f: f64) -> SampledWaveform {
    if db == 0.0 {
        return x.clone();
    }
    let edge = delta_f / 2.0;
    let y = filter_periodic(x.samples(), x.rate(), |f| {
        let g = 10f64.powf(-db * (f.abs().min(edge) / edge) / 20.0);
        g.into()
    });
    SampledWaveform::from_parts(y, x.rate())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if jobs > 0 {
        b = b.num_threads(jobs);
    }
    b.build().map_err(|e| Error::InvalidParameter { name: "jobs", reason: e.to_string() })
}

/// Drive chain shared by both sources: optional DAC, electrical tilt, MZM.
fn modulate(v: &SampledWaveform, cfg: &ScenarioConfig, seed: u64, through_dac: bool) -> Result<SampledWaveform> {
    let v = if through_dac {
        dac_model(v, &cfg.dac, derive(seed, Stream::DacNoise, 0))?
    } else {
        v.clone()
    };
    let v = apply_tilt(&v, cfg.electrical_rolloff_db);
    mzm_field(&v.scaled(1.0 / cfg.dac.full_scale), cfg.link.vpi, cfg.link.drive_scale)
}

/// Beat sub-band `n` and digitize it.
fn detect(
    mu: &SampledWaveform,
    n: usize,
    combs: &ScenarioCombs,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<SubbandCapture> {
    let i = subband_beat(mu, n, combs, &cfg.link, seed)?;
    let i = apply_inband_rolloff(&i, cfg.inband_rolloff_db, combs.delta_f());
    let mut cap = adc_capture(&i, n, &cfg.adc, derive(seed, Stream::Jitter, n as u64))?;
    cap.seeds.insert("run".into(), seed);
    cap.seeds.insert("link_noise".into(), derive(seed, Stream::LinkNoise, n as u64));
    Ok(cap)
}

#[derive(Debug)]
pub struct SweepPoint {
    pub requested_hz: f64,
    pub freq_hz: f64,
    pub subband: usize,
    pub baseband_hz: f64,
    pub seed: u64,
    pub result: Result<MetricsReport>,
}

#[derive(Debug)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub elapsed: Duration,
}

impl SweepResult {
    /// `freq_ghz,sfdr_db,sinad_db,enob_bits`; failed points carry `nan`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{SWEEP_CSV_HEADER}\n");
        for p in &self.points {
            match &p.result {
                Ok(r) => s.push_str(&r.csv_row(p.freq_hz)),
                Err(_) => {
                    let _ = write!(s, "{:.6},nan,nan,nan", p.freq_hz / 1e9);
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = (&SweepPoint, &Error)> {
        self.points.iter().filter_map(|p| p.result.as_ref().err().map(|e| (p, e)))
    }
}

/// One sine test at `f` (already snapped).
pub fn sine_point(cfg: &ScenarioConfig, combs: &ScenarioCombs, f: f64, seed: u64) -> Result<(SubbandCapture, MetricsReport)> {
    let df = combs.delta_f();
    let n = route(f, df);
    let fb = fold_frequency(f, n, df)?;
    let opts = SineTestOptions::default();
    let duration = cfg.sweep.record_blocks as f64 * opts.n_fft as f64 / opts.analysis_rate.unwrap_or(cfg.adc.rate);
    let v = sine_waveform(f, cfg.sweep.amplitude * cfg.dac.full_scale, duration, cfg.sim_rate)?;
    let mu = modulate(&v, cfg, seed, cfg.sweep.through_dac)?;
    let cap = detect(&mu, n, combs, cfg, seed)?;
    let rep = sine_metrics(&cap, fb)?;
    Ok((cap, rep))
}

/// Run the configured sweep on `jobs` threads (0 = all cores). Point
/// failures become error rows; only configuration problems abort.
pub fn run_sweep(cfg: &ScenarioConfig, jobs: usize) -> Result<SweepResult> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let combs = cfg.combs.build()?;
    let grid = 1e9 / SineTestOptions::default().n_fft as f64;
    let plan: Vec<(usize, f64)> = cfg.sweep.frequencies().into_iter().enumerate().collect();
    let points = pool(jobs)?.install(|| {
        plan.par_iter()
            .map(|&(i, req)| {
                let (subband, f) = snap_frequency(req, &cfg.sweep, combs.delta_f(), grid);
                let seed = derive(cfg.master_seed, Stream::Sweep, i as u64);
                SweepPoint {
                    requested_hz: req,
                    freq_hz: f,
                    subband,
                    baseband_hz: (f - subband as f64 * combs.delta_f()).abs(),
                    seed,
                    result: sine_point(cfg, &combs, f, seed).map(|(_, r)| r),
                }
            })
            .collect()
    });
    Ok(SweepResult { points, elapsed: start.elapsed() })
}

/// Which channels carry data and which get demodulated.
#[derive(Debug, Clone, Default)]
pub struct ScmOptions {
    /// Channels to demodulate (1-based); `None` means every active one.
    pub channels: Option<Vec<usize>>,
    /// Transmit only the demodulated channels, at unchanged per-channel power.
    pub mute_others: bool,
}

#[derive(Debug)]
pub struct ChannelOutcome {
    pub channel: usize,
    pub capture: Option<SubbandCapture>,
    pub report: Result<DemodReport>,
}

#[derive(Debug)]
pub struct ScmResult {
    pub channels: Vec<ChannelOutcome>,
    /// Channels that carried data.
    pub active: Vec<usize>,
    pub elapsed: Duration,
}

impl ScmResult {
    /// `channel,snr_db`; failed channels carry `nan`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{SCM_CSV_HEADER}\n");
        for c in &self.channels {
            match &c.report {
                Ok(r) => s.push_str(&r.csv_row()),
                Err(_) => {
                    let _ = write!(s, "{},nan", c.channel);
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn snr(&self, channel: usize) -> Option<f64> {
        self.channels
            .iter()
            .find(|c| c.channel == channel)
            .and_then(|c| c.report.as_ref().ok())
            .map(|r| r.snr_db)
    }
}

/// Transmit drive for the given active channel set, scaled so the full
/// multiplex would sit at `scm.rms_dbfs`.
pub fn scm_drive(cfg: &ScenarioConfig, active: &[usize]) -> Result<(Vec<Vec<f64>>, SampledWaveform)> {
    let symbols = channel_symbols(&cfg.scm, cfg.master_seed)?;
    let sent: Vec<Vec<f64>> = symbols
        .iter()
        .enumerate()
        .map(|(i, s)| if active.contains(&(i + 1)) { s.clone() } else { vec![0.0; s.len()] })
        .collect();
    let w = scm_waveform(&cfg.scm, &sent, cfg.sim_rate)?;
    let share = active.len() as f64 / cfg.scm.n_channels as f64;
    let rms = (w.mean_square() / share).sqrt();
    if !(rms > 0.0) {
        return Err(Error::InvalidParameter { name: "scm", reason: "no active channel".into() });
    }
    let target = cfg.dac.full_scale * 10f64.powf(cfg.scm_drive.rms_dbfs / 20.0);
    Ok((symbols, w.scaled(target / rms)))
}

/// Run the SCM link and demodulate the selected channels.
pub fn run_scm(cfg: &ScenarioConfig, opts: &ScmOptions, jobs: usize) -> Result<ScmResult> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let combs = cfg.combs.build()?;
    let mut active: Vec<usize> = if cfg.scm_drive.active.is_empty() {
        (1..=cfg.scm.n_channels).collect()
    } else {
        cfg.scm_drive.active.clone()
    };
    let wanted = opts.channels.clone().unwrap_or_else(|| active.clone());
    if let Some(&bad) = wanted.iter().find(|&&k| k == 0 || k > cfg.scm.n_channels) {
        return Err(Error::SubbandOutOfRange { index: bad, max: cfg.scm.n_channels });
    }
    if opts.mute_others {
        active = wanted.clone();
    }
    let (symbols, v) = scm_drive(cfg, &active)?;
    let mu = modulate(&v, cfg, cfg.master_seed, true)?;
    let one = |k: usize| -> ChannelOutcome {
        let cap = detect(&mu, k, &combs, cfg, cfg.master_seed);
        match cap {
            Ok(cap) => {
                let dc = DemodConfig {
                    channel_index: k,
                    baseband_offset: cfg.scm.effective_offset(),
                    baud: cfg.scm.baud,
                    rolloff: cfg.scm.rolloff,
                    levels: cfg.scm.levels,
                    ..cfg.demod.clone()
                };
                let report = demod_pam4(&cap, &dc, &symbols[k - 1]);
                ChannelOutcome { channel: k, capture: Some(cap), report }
            }
            Err(e) => ChannelOutcome { channel: k, capture: None, report: Err(e) },
        }
    };
    let channels = if cfg.parallel_bank {
        pool(jobs)?.install(|| wanted.par_iter().map(|&k| one(k)).collect())
    } else {
        wanted.iter().map(|&k| one(k)).collect()
    };
    Ok(ScmResult { channels, active, elapsed: start.elapsed() })
}

/// Blackman-Harris spectrum of a capture over its longest power-of-two
/// prefix.
pub fn capture_spectrum(cap: &SubbandCapture) -> Result<SpectrumEstimate> {
    if cap.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, have: cap.len() });
    }
    let n = 1usize << (usize::BITS - 1 - cap.len().leading_zeros());
    periodogram(&cap.waveform(), n, 1, Window::BlackmanHarris4)
}

/// Loadable run record: the full config followed by `#` lines with seeds,
/// outputs and timing.
pub fn manifest_text(cfg: &ScenarioConfig, command: &str, seeds: &[(String, u64)], outputs: &[String], elapsed: Duration) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# combadc {} run manifest", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# command = {command}");
    s.push_str(&cfg.to_config_text());
    for (k, v) in seeds {
        let _ = writeln!(s, "# seed.{k} = {v}");
    }
    for o in outputs {
        let _ = writeln!(s, "# output = {o}");
    }
    let _ = writeln!(s, "# elapsed_s = {:.3}", elapsed.as_secs_f64());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_config;

    #[test]
    fn routing_and_snapping() {
        let spec = SweepSpec::default();
        let grid = 1e9 / 16384.0;
        assert_eq!(route(0.3e9, 1e9), 1);
        assert_eq!(route(5.25e9, 1e9), 5);
        for f in spec.frequencies() {
            let (n, g) = snap_frequency(f, &spec, 1e9, grid);
            let b = (g - n as f64 * 1e9).abs();
            assert!(b >= spec.baseband_min - grid && b <= spec.baseband_max, "{f} -> {g}");
            let bins = b / grid;
            assert!((bins - bins.round()).abs() < 1e-6 && bins.round() as i64 % 2 == 1);
            assert!((g - f).abs() <= 0.1e9 + grid, "{f} -> {g}");
        }
        let (n, g) = snap_frequency(5.25e9, &spec, 1e9, grid);
        assert_eq!(n, 5);
        assert!((g - 5.25e9).abs() <= grid * 1.001);
        let off = SweepSpec { snap: false, ..spec };
        assert_eq!(snap_frequency(5.0e9, &off, 1e9, grid), (5, 5.0e9));
    }

    #[test]
    fn inband_rolloff_shape() {
        let rate = 4e9;
        let n = 4000;
        let f = 250e6;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / rate).cos()).collect();
        let w = SampledWaveform::new(x, rate).unwrap();
        let y = apply_inband_rolloff(&w, 2.0, 1e9);
        let g = 10.0 * (y.mean_square() / w.mean_square()).log10();
        assert!((g + 1.0).abs() < 1e-6, "{g}");
    }

    #[test]
    fn manifest_reloads() {
        let cfg = ScenarioConfig::default();
        let text = manifest_text(&cfg, "sweep-sine", &[("master".into(), 1)], &["sweep.csv".into()], Duration::from_millis(1500));
        assert_eq!(load_config(&text).unwrap(), cfg);
        assert!(text.contains("# output = sweep.csv"));
    }
}
