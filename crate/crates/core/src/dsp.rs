//! FFT-backed signal helpers: linear convolution, brick-wall low-pass, and
//! the analytic signal.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn fft_len(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

fn forward(x: &[f64], len: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf
}

fn inverse(mut buf: Vec<Complex64>) -> Vec<Complex64> {
    let len = buf.len();
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let s = 1.0 / len as f64;
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

/// Full linear convolution, length `a.len() + b.len() − 1`.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let len = fft_len(out_len);
    let fa = forward(a, len);
    let fb = forward(b, len);
    let prod = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inverse(prod)[..out_len].iter().map(|c| c.re).collect()
}

/// Zero-phase ideal low-pass keeping frequencies up to `cutoff` × Nyquist.
/// The signal is zero-padded to twice its length to limit wrap-around.
pub fn lowpass(x: &[f64], cutoff: f64) -> Vec<f64> {
    if cutoff >= 1.0 || x.is_empty() {
        return x.to_vec();
    }
    let len = fft_len(2 * x.len());
    let mut spec = forward(x, len);
    let keep = (cutoff * (len / 2) as f64).floor() as usize;
    for (k, v) in spec.iter_mut().enumerate() {
        let bin = k.min(len - k);
        if bin > keep {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    inverse(spec)[..x.len()].iter().map(|c| c.re).collect()
}

/// Analytic signal `x + j·H{x}` via the one-sided spectrum.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    let len = fft_len(2 * x.len());
    let mut spec = forward(x, len);
    let half = len / 2;
    for (k, v) in spec.iter_mut().enumerate() {
        if k == 0 || k == half {
            continue;
        } else if k < half {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let mut z = inverse(spec);
    z.truncate(x.len());
    z
}
