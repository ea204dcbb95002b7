//! Command-line front end: `validate`, `sweep-sine`, `run-scm`, `spectrum`.
//!
//! Exit status: 0 on success, 1 for configuration errors, 2 for runtime
//! failures (including any failed sweep point or channel).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use combadc::harness::{capture_spectrum, manifest_text, run_scm, run_sweep, sine_point, snap_frequency, ScmOptions};
use combadc::metrics::SineTestOptions;
use combadc::scenario::{load_config, ScenarioConfig};
use combadc::seed::{derive, Stream};
use combadc::Error;

#[derive(Parser)]
#[command(name = "combadc", version, about = "Dual-comb assisted ADC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config file and print the fully resolved scenario.
    Validate(Common),
    /// Sine sweep across the sub-bands; writes sweep.csv.
    SweepSine(Common),
    /// SCM-PAM4 run; writes scm_snr.csv and spectrum_chN.csv.
    RunScm {
        #[command(flatten)]
        common: Common,
        /// Demodulate only this channel.
        #[arg(long)]
        channel: Option<usize>,
        /// Transmit only the demodulated channel(s).
        #[arg(long)]
        mute_others: bool,
    },
    /// Dump one sub-band capture and its spectrum.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Sub-band / SCM channel to capture.
        #[arg(long, default_value_t = 1)]
        channel: usize,
        /// Capture a sine at this frequency (Hz) instead of the SCM signal.
        #[arg(long)]
        freq: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario config; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

enum Failure {
    Config(Error),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(common: &Common) -> Result<ScenarioConfig, Failure> {
    let text = match &common.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Failure::Config(Error::Io(format!("{}: {e}", p.display()))))?,
        None => String::new(),
    };
    let mut cfg = load_config(&text).map_err(Failure::Config)?;
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, body: &str, written: &mut Vec<String>) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    written.push(name.to_string());
    Ok(())
}

fn finish(dir: &Path, cfg: &ScenarioConfig, command: &str, mut written: Vec<String>, started: Instant) -> Result<(), Failure> {
    let seeds = vec![("master".to_string(), cfg.master_seed)];
    written.push("manifest.txt".into());
    let text = manifest_text(cfg, command, &seeds, &written, started.elapsed());
    std::fs::write(dir.join("manifest.txt"), text).map_err(|e| Failure::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.command {
        Command::Validate(common) => {
            let cfg = load(&common)?;
            print!("{}", cfg.to_config_text());
            eprintln!("config ok");
            Ok(())
        }
        Command::SweepSine(common) => {
            let cfg = load(&common)?;
            let res = run_sweep(&cfg, common.jobs)?;
            let mut written = Vec::new();
            write(&common.out, "sweep.csv", &res.to_csv(), &mut written)?;
            finish(&common.out, &cfg, "sweep-sine", written, started)?;
            let failed: Vec<String> = res
                .failures()
                .map(|(p, e)| format!("{:.6} GHz: {e}", p.freq_hz / 1e9))
                .collect();
            eprintln!("{} points in {:.1} s", res.points.len(), res.elapsed.as_secs_f64());
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Runtime(failed.join("\n")))
            }
        }
        Command::RunScm { common, channel, mute_others } => {
            let cfg = load(&common)?;
            let opts = ScmOptions { channels: channel.map(|c| vec![c]), mute_others };
            let res = run_scm(&cfg, &opts, common.jobs)?;
            let mut written = Vec::new();
            write(&common.out, "scm_snr.csv", &res.to_csv(), &mut written)?;
            let mut failed = Vec::new();
            for c in &res.channels {
                if let Some(cap) = &c.capture {
                    let spec = capture_spectrum(cap)?;
                    write(&common.out, &format!("spectrum_ch{}.csv", c.channel), &spec.to_csv(), &mut written)?;
                }
                if let Err(e) = &c.report {
                    failed.push(format!("channel {}: {e}", c.channel));
                }
            }
            finish(&common.out, &cfg, "run-scm", written, started)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Runtime(failed.join("\n")))
            }
        }
        Command::Spectrum { common, channel, freq } => {
            let cfg = load(&common)?;
            let mut written = Vec::new();
            let (cap, spec) = match freq {
                Some(f) => {
                    let combs = cfg.combs.build()?;
                    let (_, f) = snap_frequency(f, &cfg.sweep, combs.delta_f(), 1e9 / SineTestOptions::default().n_fft as f64);
                    let (cap, rep) = sine_point(&cfg, &combs, f, derive(cfg.master_seed, Stream::Sweep, 0))?;
                    eprintln!("{:.6} GHz: SFDR {:.2} dB, SINAD {:.2} dB", f / 1e9, rep.sfdr_db, rep.sinad_db);
                    (cap, rep.spectrum)
                }
                None => {
                    let opts = ScmOptions { channels: Some(vec![channel]), mute_others: false };
                    let mut res = run_scm(&cfg, &opts, common.jobs)?;
                    let outcome = res.channels.remove(0);
                    let cap = outcome.capture.ok_or_else(|| {
                        Failure::Runtime(outcome.report.err().map(|e| e.to_string()).unwrap_or_default())
                    })?;
                    let spec = capture_spectrum(&cap)?;
                    (cap, spec)
                }
            };
            let n = cap.subband_index;
            write(&common.out, &format!("spectrum_ch{n}.csv"), &spec.to_csv(), &mut written)?;
            write(&common.out, &format!("capture_ch{n}.csv"), &cap.to_csv(), &mut written)?;
            finish(&common.out, &cfg, "spectrum", written, started)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
