use combadc::adc::AdcConfig;
use combadc::fft::filter_periodic;
use combadc::harness::snap_frequency;
use combadc::metrics::fold_frequency;
use combadc::scenario::{load_config, ScenarioConfig, SweepSpec};
use combadc::seed::{derive, Stream};
use combadc::spectrum::{periodogram, Window};
use combadc::tx::quantize_midrise;
use combadc::waveform::{gaussian, SampledWaveform};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periodic_filter_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, s1 in 0u64..1000, s2 in 0u64..1000) {
        let n = 512;
        let x = gaussian(n, 1.0, s1);
        let y = gaussian(n, 1.0, s2 + 1000);
        let h = |f: f64| Complex64::new(1.0 / (1.0 + (f / 1e8).powi(2)), 0.0);
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = filter_periodic(&mixed, 1e9, h);
        let fx = filter_periodic(&x, 1e9, h);
        let fy = filter_periodic(&y, 1e9, h);
        for i in 0..n {
            prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn periodogram_obeys_parseval(seed in 0u64..10_000, log_n in 4u32..12, avg in 1usize..4) {
        let n = 1usize << log_n;
        let x = SampledWaveform::new(gaussian(n * avg, 2.0, seed), 1e9).unwrap();
        let s = periodogram(&x, n, avg, Window::Rectangular).unwrap();
        let ms = x.mean_square();
        prop_assert!((s.total_power() - ms).abs() < 1e-9 * ms);
    }

    #[test]
    fn quantizers_are_monotone(bits in 1u32..=16, u in -1.5f64..1.5, d in 0.0f64..0.5) {
        let adc = AdcConfig { bits, ..AdcConfig::default() };
        prop_assert!(adc.code(u) <= adc.code(u + d));
        prop_assert!(quantize_midrise(u, bits, 1.0) <= quantize_midrise(u + d, bits, 1.0));
        let (lo, hi) = adc.code_range();
        prop_assert!((lo..=hi).contains(&adc.code(u)));
        // In range, the error never exceeds half a step.
        if u.abs() < 1.0 {
            prop_assert!((adc.level(adc.code(u)) - u).abs() <= adc.lsb() / 2.0 + 1e-12);
        }
    }

    #[test]
    fn both_halves_of_a_subband_fold_together(n in 1usize..=24, d in 0.0f64..0.5e9) {
        let df = 1e9;
        let c = n as f64 * df;
        let up = fold_frequency(c + d, n, df).unwrap();
        let down = fold_frequency(c - d, n, df).unwrap();
        prop_assert!((up - down).abs() < 1e-3);
        prop_assert!((up - d).abs() < 1e-3);
    }

    #[test]
    fn snapped_sweep_points_land_in_window(f in 0.3e9f64..23.4e9) {
        let spec = SweepSpec::default();
        let grid = 1e9 / 16384.0;
        let (n, g) = snap_frequency(f, &spec, 1e9, grid);
        let b = (g - n as f64 * 1e9).abs();
        let bins = (b / grid).round();
        prop_assert!((b / grid - bins).abs() < 1e-6);
        prop_assert!(bins as i64 % 2 == 1);
        prop_assert!(b >= spec.baseband_min - grid && b <= spec.baseband_max);
    }

    #[test]
    fn config_text_round_trips(seed in any::<u64>(), amp in 0.01f64..0.5, bits in 4u32..=16, rms in -20.0f64..-3.0, par in any::<bool>()) {
        let mut cfg = ScenarioConfig { master_seed: seed, parallel_bank: par, ..ScenarioConfig::default() };
        cfg.sweep.amplitude = amp;
        cfg.adc.bits = bits;
        cfg.scm_drive.rms_dbfs = rms;
        let back = load_config(&cfg.to_config_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn derived_seeds_are_distinct(master in any::<u64>(), i in 0u64..1000) {
        let a = derive(master, Stream::Sweep, i);
        prop_assert_ne!(a, derive(master, Stream::Sweep, i + 1));
        prop_assert_ne!(a, derive(master, Stream::Jitter, i));
        prop_assert_eq!(a, derive(master, Stream::Sweep, i));
    }
}
