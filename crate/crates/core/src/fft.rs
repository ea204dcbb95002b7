//! Thin wrappers over `rustfft` with a per-thread planner cache.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward FFT (unnormalized).
pub fn forward(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place inverse FFT, normalized by `1/N`.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

pub fn real_spectrum(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut buf);
    buf
}

/// Signed frequency of bin `k` for an `n`-point transform at `rate`.
pub fn bin_freq(k: usize, n: usize, rate: f64) -> f64 {
    if k <= n / 2 {
        k as f64 * rate / n as f64
    } else {
        (k as f64 - n as f64) * rate / n as f64
    }
}

/// Multiply the spectrum of a periodic real record by `response(f)` and
/// return the real part of the result. `response` must be Hermitian
/// (`H(-f) = conj(H(f))`) for the output to be exactly real.
pub fn filter_periodic<F>(x: &[f64], rate: f64, response: F) -> Vec<f64>
where
    F: Fn(f64) -> Complex64,
{
    let n = x.len();
    let mut buf = real_spectrum(x);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= response(bin_freq(k, n, rate));
    }
    inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}
