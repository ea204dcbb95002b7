//! Declarative experiment description and its line-oriented config format.
//!
//! ```text
//! # comment
//! combs.delta_f = 1ghz
//! scm.n_channels = 10
//! adc.jitter_rms = 0.5ps
//! ```
//!
//! Every key is `section.key = value`. Numbers take an optional unit
//! suffix matching the key's dimension (`hz khz mhz ghz`, `s ms us ns ps`,
//! `db`, `dbm`, `v`); a bare number is in base SI units. Unknown keys,
//! repeated keys and mismatched units are errors carrying the line number.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::adc::AdcConfig;
use crate::demod::DemodConfig;
use crate::error::{Error, Result};
use crate::optics::{comb_from_cascade, flat_comb, search_flat_cascade, validate_scaling, LinkConfig, ScenarioCombs};
use crate::tx::{DacConfig, ScmConfig};

/// Sine sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Peak amplitude as a fraction of the DAC full scale.
    pub amplitude: f64,
    /// Snap each frequency to the analysis-FFT grid (coherent testing).
    pub snap: bool,
    /// Route the tone through the DAC model; otherwise an ideal synthesizer.
    pub through_dac: bool,
    /// Allowed range of `|f - n·Δf|` after snapping.
    pub baseband_min: f64,
    pub baseband_max: f64,
    /// Record length in analysis-FFT blocks (16384 samples at 1 GSa/s).
    pub record_blocks: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            start: 0.5e9,
            stop: 10.5e9,
            step: 0.25e9,
            amplitude: 0.065,
            snap: true,
            through_dac: false,
            baseband_min: 100e6,
            baseband_max: 400e6,
            record_blocks: 5,
        }
    }
}

impl SweepSpec {
    /// Nominal grid `start, start + step, ..., stop`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// SCM drive level and channel selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmDrive {
    /// RMS of the full multiplex relative to the DAC full scale, dB.
    pub rms_dbfs: f64,
    /// 1-based active channels; empty means all.
    pub active: Vec<usize>,
}

impl Default for ScmDrive {
    fn default() -> Self {
        Self { rms_dbfs: -8.0, active: Vec::new() }
    }
}

/// How the comb pair is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CombShape {
    Flat,
    /// Phase/intensity modulator cascade; a zero index triggers a search
    /// for the flattest setting.
    Cascade { pm_index: f64, im_depth: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombParams {
    pub f_sig: f64,
    pub delta_f: f64,
    pub n_tones: usize,
    pub shape: CombShape,
    pub seed_linewidth: f64,
    pub drive_linewidth: f64,
    pub phase_drift: f64,
    pub static_phase: f64,
}

impl Default for CombParams {
    fn default() -> Self {
        Self {
            f_sig: 26e9,
            delta_f: 1e9,
            n_tones: 24,
            shape: CombShape::Flat,
            seed_linewidth: 5e3,
            drive_linewidth: 1e-3,
            phase_drift: 0.0,
            static_phase: 0.0,
        }
    }
}

impl CombParams {
    pub fn build(&self) -> Result<ScenarioCombs> {
        let f_ref = self.f_sig + self.delta_f;
        let (mut sig, mut lo) = match self.shape {
            CombShape::Flat => (flat_comb(self.n_tones, self.f_sig)?, flat_comb(self.n_tones, f_ref)?),
            CombShape::Cascade { pm_index, im_depth } => {
                let (m, d) = if pm_index > 0.0 {
                    (pm_index, im_depth)
                } else {
                    search_flat_cascade(self.n_tones, 3.0)?
                };
                (
                    comb_from_cascade(m, d, self.n_tones, self.f_sig)?,
                    comb_from_cascade(m, d, self.n_tones, f_ref)?,
                )
            }
        };
        sig.drive_linewidth = self.drive_linewidth;
        lo.drive_linewidth = self.drive_linewidth;
        let mut c = ScenarioCombs::new(sig, lo)?;
        c.seed_linewidth = self.seed_linewidth;
        c.differential_phase_drift = self.phase_drift;
        c.static_phase = self.static_phase;
        Ok(c)
    }
}

/// Complete experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sweep: SweepSpec,
    pub scm: ScmConfig,
    pub scm_drive: ScmDrive,
    pub dac: DacConfig,
    pub combs: CombParams,
    pub link: LinkConfig,
    pub adc: AdcConfig,
    pub demod: DemodConfig,
    pub master_seed: u64,
    pub sim_rate: f64,
    /// Linear-in-dB electrical tilt across 0.1-10 GHz.
    pub electrical_rolloff_db: f64,
    /// Linear-in-dB detector roll-off across each 0-500 MHz sub-band.
    pub inband_rolloff_db: f64,
    pub parallel_bank: bool,
    /// Bandwidth `B` for the scaling rule; 0 means `n_channels·spacing`.
    pub bandwidth: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            sweep: SweepSpec::default(),
            scm: ScmConfig::default(),
            scm_drive: ScmDrive::default(),
            dac: DacConfig::default(),
            combs: CombParams::default(),
            link: LinkConfig::default(),
            adc: AdcConfig::default(),
            demod: DemodConfig::default(),
            master_seed: 1,
            sim_rate: 32e9,
            electrical_rolloff_db: 3.0,
            inband_rolloff_db: 0.0,
            parallel_bank: false,
            bandwidth: 0.0,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Dim {
    Freq,
    Time,
    Db,
    Dbm,
    Volt,
    Plain,
}

fn unit_scale(dim: Dim, unit: &str) -> Option<f64> {
    match (dim, unit) {
        (_, "") => Some(1.0),
        (Dim::Freq, "hz") => Some(1.0),
        (Dim::Freq, "khz") => Some(1e3),
        (Dim::Freq, "mhz") => Some(1e6),
        (Dim::Freq, "ghz") => Some(1e9),
        (Dim::Freq, "thz") => Some(1e12),
        (Dim::Time, "s") => Some(1.0),
        (Dim::Time, "ms") => Some(1e-3),
        (Dim::Time, "us") => Some(1e-6),
        (Dim::Time, "ns") => Some(1e-9),
        (Dim::Time, "ps") => Some(1e-12),
        (Dim::Time, "fs") => Some(1e-15),
        (Dim::Db, "db") | (Dim::Dbm, "dbm") | (Dim::Volt, "v") => Some(1.0),
        _ => None,
    }
}

struct Line<'a> {
    no: usize,
    key: &'a str,
    value: &'a str,
}

impl Line<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.no, message: format!("{}: {}", self.key, msg.into()) }
    }

    fn num(&self, dim: Dim) -> Result<f64> {
        let v = self.value.trim();
        let split = (1..=v.len())
            .rev()
            .filter(|&i| v.is_char_boundary(i))
            .find(|&i| v[..i].trim().parse::<f64>().is_ok())
            .ok_or_else(|| self.err(format!("expected a number, got '{v}'")))?;
        let x: f64 = v[..split].trim().parse().expect("checked above");
        let unit = v[split..].trim().to_ascii_lowercase();
        let scale = unit_scale(dim, &unit).ok_or_else(|| self.err(format!("unit '{unit}' not valid here")))?;
        let y = x * scale;
        if !y.is_finite() {
            return Err(self.err("value must be finite"));
        }
        Ok(y)
    }

    fn count(&self) -> Result<usize> {
        self.value.trim().parse().map_err(|_| self.err(format!("expected a non-negative integer, got '{}'", self.value.trim())))
    }

    fn u64(&self) -> Result<u64> {
        self.value.trim().parse().map_err(|_| self.err(format!("expected an unsigned integer, got '{}'", self.value.trim())))
    }

    fn flag(&self) -> Result<bool> {
        match self.value.trim().to_ascii_lowercase().as_str() {
            "true" | "on" | "yes" | "1" => Ok(true),
            "false" | "off" | "no" | "0" => Ok(false),
            other => Err(self.err(format!("expected a boolean, got '{other}'"))),
        }
    }

    fn list(&self) -> Result<Vec<usize>> {
        let v = self.value.trim();
        if v.is_empty() || v.eq_ignore_ascii_case("all") {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| s.trim().parse().map_err(|_| self.err(format!("bad list entry '{}'", s.trim()))))
            .collect()
    }
}

/// Parse and validate a config. An empty text yields the defaults.
pub fn load_config(text: &str) -> Result<ScenarioConfig> {
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
            line: no,
            message: format!("expected 'section.key = value', got '{body}'"),
        })?;
        let l = Line { no, key: k.trim(), value: v.trim() };
        if !l.key.contains('.') {
            return Err(l.err("keys take the form section.key"));
        }
        if !seen.insert(l.key.to_string()) {
            return Err(l.err("key given twice"));
        }
        lines.push(l);
    }
    // The master switch sets the baseline; explicit keys override it.
    let mut c = ScenarioConfig::default();
    if let Some(l) = lines.iter().find(|l| l.key == "run.impairments") {
        if !l.flag()? {
            c = c.without_impairments();
        }
    }
    let mut shape = "flat".to_string();
    let (mut pm, mut im) = (0.0, 0.0);
    for l in &lines {
        match l.key {
            "sweep.start" => c.sweep.start = l.num(Dim::Freq)?,
            "sweep.stop" => c.sweep.stop = l.num(Dim::Freq)?,
            "sweep.step" => c.sweep.step = l.num(Dim::Freq)?,
            "sweep.amplitude" => c.sweep.amplitude = l.num(Dim::Plain)?,
            "sweep.snap" => c.sweep.snap = l.flag()?,
            "sweep.through_dac" => c.sweep.through_dac = l.flag()?,
            "sweep.baseband_min" => c.sweep.baseband_min = l.num(Dim::Freq)?,
            "sweep.baseband_max" => c.sweep.baseband_max = l.num(Dim::Freq)?,
            "sweep.record_blocks" => c.sweep.record_blocks = l.count()?,

            "scm.n_channels" => c.scm.n_channels = l.count()?,
            "scm.channel_spacing" => c.scm.channel_spacing = l.num(Dim::Freq)?,
            "scm.baud" => c.scm.baud = l.num(Dim::Freq)?,
            "scm.baseband_offset" => c.scm.baseband_offset = l.num(Dim::Freq)?,
            "scm.rolloff" => c.scm.rolloff = l.num(Dim::Plain)?,
            "scm.duration" => c.scm.duration = l.num(Dim::Time)?,
            "scm.levels" => c.scm.levels = l.count()?,
            "scm.rms_dbfs" => c.scm_drive.rms_dbfs = l.num(Dim::Db)?,
            "scm.active" => c.scm_drive.active = l.list()?,

            "dac.bits" => c.dac.bits = l.count()? as u32,
            "dac.rate" => c.dac.rate = l.num(Dim::Freq)?,
            "dac.lpf_cutoff" => c.dac.lpf_cutoff = l.num(Dim::Freq)?,
            "dac.full_scale" => c.dac.full_scale = l.num(Dim::Volt)?,
            "dac.residual_noise_db" => c.dac.residual_noise_db = l.num(Dim::Db)?,
            "dac.quantize" => c.dac.quantize = l.flag()?,
            "dac.noise" => c.dac.noise = l.flag()?,
            "dac.lpf" => c.dac.lpf = l.flag()?,

            "combs.f_sig" => c.combs.f_sig = l.num(Dim::Freq)?,
            "combs.delta_f" => c.combs.delta_f = l.num(Dim::Freq)?,
            "combs.n_tones" => c.combs.n_tones = l.count()?,
            "combs.shape" => shape = l.value.trim().to_ascii_lowercase(),
            "combs.pm_index" => pm = l.num(Dim::Plain)?,
            "combs.im_depth" => im = l.num(Dim::Plain)?,
            "combs.seed_linewidth" => c.combs.seed_linewidth = l.num(Dim::Freq)?,
            "combs.drive_linewidth" => c.combs.drive_linewidth = l.num(Dim::Freq)?,
            "combs.phase_drift" => c.combs.phase_drift = l.num(Dim::Plain)?,
            "combs.static_phase" => c.combs.static_phase = l.num(Dim::Plain)?,

            "link.vpi" => c.link.vpi = l.num(Dim::Volt)?,
            "link.drive_scale" => c.link.drive_scale = l.num(Dim::Plain)?,
            "link.sig_power_per_ch_dbm" => c.link.sig_power_per_ch_dbm = l.num(Dim::Dbm)?,
            "link.lo_power_per_tone_dbm" => c.link.lo_power_per_tone_dbm = l.num(Dim::Dbm)?,
            "link.rx_loss_db" => c.link.rx_loss_db = l.num(Dim::Db)?,
            "link.osnr_db" => c.link.osnr_db = l.num(Dim::Db)?,
            "link.pd_bandwidth" => c.link.pd_bandwidth = l.num(Dim::Freq)?,
            "link.tia_sat_dbm" => c.link.tia_sat_dbm = l.num(Dim::Dbm)?,
            "link.cmrr_db" => c.link.cmrr_db = l.num(Dim::Db)?,
            "link.responsivity" => c.link.responsivity = l.num(Dim::Plain)?,
            "link.thermal_noise_density" => c.link.thermal_noise_density = l.num(Dim::Plain)?,
            "link.noise" => c.link.noise = l.flag()?,
            "link.common_mode" => c.link.common_mode = l.flag()?,
            "link.saturation" => c.link.saturation = l.flag()?,
            "link.phase_noise" => c.link.phase_noise = l.flag()?,
            "link.pd_filter" => c.link.pd_filter = l.flag()?,

            "adc.bits" => c.adc.bits = l.count()? as u32,
            "adc.rate" => c.adc.rate = l.num(Dim::Freq)?,
            "adc.full_scale" => c.adc.full_scale = l.num(Dim::Plain)?,
            "adc.jitter_rms" => c.adc.jitter_rms = l.num(Dim::Time)?,
            "adc.aa_cutoff" => c.adc.aa_cutoff = l.num(Dim::Freq)?,
            "adc.ac_couple_hz" => c.adc.ac_couple_hz = l.num(Dim::Freq)?,

            "demod.ffe_taps" => c.demod.ffe_taps = l.count()?,
            "demod.sps" => c.demod.sps = l.count()?,
            "demod.ffe_step" => c.demod.ffe_step = l.num(Dim::Plain)?,
            "demod.ffe_epochs" => c.demod.ffe_epochs = l.count()?,
            "demod.training_fraction" => c.demod.training_fraction = l.num(Dim::Plain)?,
            "demod.equalize" => c.demod.equalize = l.flag()?,
            "demod.band_edge" => c.demod.band_edge = l.num(Dim::Freq)?,

            "run.seed" => c.master_seed = l.u64()?,
            "run.sim_rate" => c.sim_rate = l.num(Dim::Freq)?,
            "run.electrical_rolloff_db" => c.electrical_rolloff_db = l.num(Dim::Db)?,
            "run.inband_rolloff_db" => c.inband_rolloff_db = l.num(Dim::Db)?,
            "run.parallel_bank" => c.parallel_bank = l.flag()?,
            "run.bandwidth" => c.bandwidth = l.num(Dim::Freq)?,
            "run.impairments" => {}
            _ => return Err(l.err("unknown key")),
        }
    }
    c.combs.shape = match shape.as_str() {
        "flat" => CombShape::Flat,
        "cascade" => CombShape::Cascade { pm_index: pm, im_depth: im },
        other => {
            return Err(Error::Validation {
                rule: "comb-shape",
                message: format!("combs.shape must be flat or cascade, got '{other}'"),
            })
        }
    };
    c.validate()?;
    Ok(c)
}

fn rule(name: &'static str, e: impl std::fmt::Display) -> Error {
    Error::Validation { rule: name, message: e.to_string() }
}

impl ScenarioConfig {
    /// Every noise and distortion source off, converters ideal apart from
    /// the ADC quantizer.
    pub fn without_impairments(mut self) -> Self {
        self.dac.quantize = false;
        self.dac.noise = false;
        self.dac.lpf = false;
        self.link.noise = false;
        self.link.common_mode = false;
        self.link.saturation = false;
        self.link.phase_noise = false;
        self.electrical_rolloff_db = 0.0;
        self.inband_rolloff_db = 0.0;
        self.adc.jitter_rms = 0.0;
        self
    }

    /// Bandwidth used by the scaling rule.
    pub fn scaling_bandwidth(&self) -> f64 {
        if self.bandwidth > 0.0 {
            self.bandwidth
        } else {
            self.scm.n_channels as f64 * self.scm.channel_spacing
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=24).contains(&self.adc.bits) {
            return Err(rule("bits-range", format!("adc.bits must lie in [1, 24], got {}", self.adc.bits)));
        }
        if !(1..=32).contains(&self.dac.bits) {
            return Err(rule("bits-range", format!("dac.bits must lie in [1, 32], got {}", self.dac.bits)));
        }
        self.adc.validate().map_err(|e| rule("adc", e))?;
        self.dac.validate().map_err(|e| rule("dac", e))?;
        self.scm.validate().map_err(|e| rule("scm", e))?;
        self.link.validate().map_err(|e| rule("link", e))?;
        self.demod.validate().map_err(|e| rule("demod", e))?;
        if (self.dac.rate - self.sim_rate).abs() > 1e-6 * self.sim_rate {
            return Err(rule("rate-consistency", "dac.rate must equal run.sim_rate"));
        }
        if self.sim_rate < 4.0 * self.adc.rate {
            return Err(rule("rate-consistency", "run.sim_rate must be at least 4 x adc.rate"));
        }
        if self.scm.samples_per_symbol(self.sim_rate).is_none() {
            return Err(rule("rate-consistency", "run.sim_rate must be an integer multiple of scm.baud"));
        }
        if (self.scm.channel_spacing - self.combs.delta_f).abs() > 1e-9 * self.combs.delta_f {
            return Err(rule("channel-grid", "scm.channel_spacing must equal combs.delta_f"));
        }
        if self.link.pd_bandwidth <= self.combs.delta_f / 2.0 {
            return Err(rule("pd-bandwidth", "link.pd_bandwidth must exceed delta_f/2"));
        }
        let combs = self.combs.build().map_err(|e| rule("combs", e))?;
        let b = self.scaling_bandwidth();
        let rep = validate_scaling(b, &combs, self.scm.n_channels);
        if !rep.pass() {
            return Err(rule(
                "scaling",
                format!(
                    "B = {b} Hz: delta_f margin {} Hz, f_sig/2 margin {} Hz",
                    rep.delta_f_margin, rep.f_sig_margin
                ),
            ));
        }
        let top = self.scm.n_channels as f64 * self.scm.channel_spacing + self.scm.channel_spacing / 2.0;
        if top >= self.sim_rate / 2.0 {
            return Err(rule("rate-consistency", "multiplex exceeds the simulation Nyquist band"));
        }
        if let Some(&bad) = self.scm_drive.active.iter().find(|&&k| k == 0 || k > self.scm.n_channels) {
            return Err(rule("scm-active", format!("channel {bad} outside 1..={}", self.scm.n_channels)));
        }
        let s = &self.sweep;
        if !(s.step > 0.0 && s.start > 0.0 && s.start <= s.stop) {
            return Err(rule("sweep", "need 0 < start <= stop and step > 0"));
        }
        if s.stop + s.baseband_max >= self.sim_rate / 2.0 {
            return Err(rule("sweep", "sweep.stop beyond the simulation band"));
        }
        if !(s.amplitude > 0.0 && s.amplitude <= 1.0) {
            return Err(rule("sweep", "sweep.amplitude must lie in (0, 1]"));
        }
        if !(0.0 < s.baseband_min && s.baseband_min < s.baseband_max && s.baseband_max <= self.combs.delta_f / 2.0) {
            return Err(rule("sweep", "need 0 < baseband_min < baseband_max <= delta_f/2"));
        }
        if s.record_blocks < 4 {
            return Err(rule("sweep", "record_blocks must be >= 4"));
        }
        let max_order = (self.combs.n_tones as i64 - 1) - (self.combs.n_tones as i64 - 1) / 2;
        let top_n = ((s.stop / self.combs.delta_f).round() as i64).max(self.scm.n_channels as i64);
        if top_n > max_order {
            return Err(rule("combs", format!("sub-band {top_n} needs more than {} comb tones", self.combs.n_tones)));
        }
        Ok(())
    }

    /// Canonical `section.key = value` text; loading it gives back `self`.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let b = |x: bool| x.to_string();
        let sw = &self.sweep;
        kv("sweep.start", sw.start.to_string());
        kv("sweep.stop", sw.stop.to_string());
        kv("sweep.step", sw.step.to_string());
        kv("sweep.amplitude", sw.amplitude.to_string());
        kv("sweep.snap", b(sw.snap));
        kv("sweep.through_dac", b(sw.through_dac));
        kv("sweep.baseband_min", sw.baseband_min.to_string());
        kv("sweep.baseband_max", sw.baseband_max.to_string());
        kv("sweep.record_blocks", sw.record_blocks.to_string());
        let m = &self.scm;
        kv("scm.n_channels", m.n_channels.to_string());
        kv("scm.channel_spacing", m.channel_spacing.to_string());
        kv("scm.baud", m.baud.to_string());
        kv("scm.baseband_offset", m.baseband_offset.to_string());
        kv("scm.rolloff", m.rolloff.to_string());
        kv("scm.duration", m.duration.to_string());
        kv("scm.levels", m.levels.to_string());
        kv("scm.rms_dbfs", self.scm_drive.rms_dbfs.to_string());
        let active: Vec<String> = self.scm_drive.active.iter().map(|k| k.to_string()).collect();
        kv("scm.active", if active.is_empty() { "all".into() } else { active.join(",") });
        let d = &self.dac;
        kv("dac.bits", d.bits.to_string());
        kv("dac.rate", d.rate.to_string());
        kv("dac.lpf_cutoff", d.lpf_cutoff.to_string());
        kv("dac.full_scale", d.full_scale.to_string());
        kv("dac.residual_noise_db", d.residual_noise_db.to_string());
        kv("dac.quantize", b(d.quantize));
        kv("dac.noise", b(d.noise));
        kv("dac.lpf", b(d.lpf));
        let c = &self.combs;
        kv("combs.f_sig", c.f_sig.to_string());
        kv("combs.delta_f", c.delta_f.to_string());
        kv("combs.n_tones", c.n_tones.to_string());
        match c.shape {
            CombShape::Flat => kv("combs.shape", "flat".into()),
            CombShape::Cascade { pm_index, im_depth } => {
                kv("combs.shape", "cascade".into());
                kv("combs.pm_index", pm_index.to_string());
                kv("combs.im_depth", im_depth.to_string());
            }
        }
        kv("combs.seed_linewidth", c.seed_linewidth.to_string());
        kv("combs.drive_linewidth", c.drive_linewidth.to_string());
        kv("combs.phase_drift", c.phase_drift.to_string());
        kv("combs.static_phase", c.static_phase.to_string());
        let l = &self.link;
        kv("link.vpi", l.vpi.to_string());
        kv("link.drive_scale", l.drive_scale.to_string());
        kv("link.sig_power_per_ch_dbm", l.sig_power_per_ch_dbm.to_string());
        kv("link.lo_power_per_tone_dbm", l.lo_power_per_tone_dbm.to_string());
        kv("link.rx_loss_db", l.rx_loss_db.to_string());
        kv("link.osnr_db", l.osnr_db.to_string());
        kv("link.pd_bandwidth", l.pd_bandwidth.to_string());
        kv("link.tia_sat_dbm", l.tia_sat_dbm.to_string());
        kv("link.cmrr_db", l.cmrr_db.to_string());
        kv("link.responsivity", l.responsivity.to_string());
        kv("link.thermal_noise_density", l.thermal_noise_density.to_string());
        kv("link.noise", b(l.noise));
        kv("link.common_mode", b(l.common_mode));
        kv("link.saturation", b(l.saturation));
        kv("link.phase_noise", b(l.phase_noise));
        kv("link.pd_filter", b(l.pd_filter));
        let a = &self.adc;
        kv("adc.bits", a.bits.to_string());
        kv("adc.rate", a.rate.to_string());
        kv("adc.full_scale", a.full_scale.to_string());
        kv("adc.jitter_rms", a.jitter_rms.to_string());
        kv("adc.aa_cutoff", a.aa_cutoff.to_string());
        kv("adc.ac_couple_hz", a.ac_couple_hz.to_string());
        let e = &self.demod;
        kv("demod.ffe_taps", e.ffe_taps.to_string());
        kv("demod.sps", e.sps.to_string());
        kv("demod.ffe_step", e.ffe_step.to_string());
        kv("demod.ffe_epochs", e.ffe_epochs.to_string());
        kv("demod.training_fraction", e.training_fraction.to_string());
        kv("demod.equalize", b(e.equalize));
        kv("demod.band_edge", e.band_edge.to_string());
        kv("run.seed", self.master_seed.to_string());
        kv("run.sim_rate", self.sim_rate.to_string());
        kv("run.electrical_rolloff_db", self.electrical_rolloff_db.to_string());
        kv("run.inband_rolloff_db", self.inband_rolloff_db.to_string());
        kv("run.parallel_bank", b(self.parallel_bank));
        kv("run.bandwidth", self.bandwidth.to_string());
        s
    }
}
