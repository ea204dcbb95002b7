use std::path::Path;
use std::process::{Command, Output};

use combadc::scenario::load_config;

fn combadc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combadc")).args(args).output().expect("run combadc")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("scenario.cfg");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SHORT_SWEEP: &str = "sweep.start = 1.5ghz\nsweep.stop = 2.5ghz\nrun.seed = 3\n";

#[test]
fn validate_prints_loadable_config() {
    let out = combadc(&["validate"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(load_config(&text).unwrap(), load_config("").unwrap());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "adc.bits = 30\n");
    let out = combadc(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bits-range"));

    let cfg = write_config(dir.path(), "adc.bits 14\n");
    let out = combadc(&["sweep-sine", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let out = combadc(&["validate", "--config", "/nonexistent/scenario.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = combadc(&["run-scm", "--channel", "11", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_outputs_are_byte_identical_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT_SWEEP);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let r = combadc(&["sweep-sine", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let csv_a = std::fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("sweep.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().next(), Some("freq_ghz,sfdr_db,sinad_db,enob_bits"));
    assert_eq!(text.lines().count(), 6);

    // The manifest replays: its config section reloads to the same scenario.
    let manifest = std::fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("# output = sweep.csv"));
    assert_eq!(load_config(&manifest).unwrap(), load_config(SHORT_SWEEP).unwrap());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT_SWEEP);
    let out = dir.path().join("s");
    let r = combadc(&["sweep-sine", "--config", &cfg, "--seed", "99", "--out", out.to_str().unwrap()]);
    assert!(r.status.success());
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert_eq!(load_config(&manifest).unwrap().master_seed, 99);
}

#[test]
fn spectrum_of_a_sine() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec");
    let r = combadc(&["spectrum", "--freq", "5.25e9", "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let spec = std::fs::read_to_string(out.join("spectrum_ch5.csv")).unwrap();
    assert!(spec.contains("freq_hz,power_db"));
    let cap = std::fs::read_to_string(out.join("capture_ch5.csv")).unwrap();
    let cap = combadc::adc::SubbandCapture::from_csv(&cap).unwrap();
    assert_eq!(cap.subband_index, 5);
}

#[test]
fn scm_single_channel_writes_csv_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scm");
    let r = combadc(&["run-scm", "--channel", "2", "--mute-others", "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("scm_snr.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("channel,snr_db"));
    let row = lines.next().unwrap();
    let snr: f64 = row.strip_prefix("2,").unwrap().parse().unwrap();
    assert!(snr > 15.0, "{row}");
    assert!(out.join("spectrum_ch2.csv").exists());
}
