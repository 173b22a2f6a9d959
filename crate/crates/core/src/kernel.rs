//! Kaiser-windowed sinc kernel shared by the trajectory upsampler and the
//! static RIR tap placement.

use std::f64::consts::PI;

/// Kaiser β for an 80 dB stopband (`0.1102·(A − 8.7)`).
pub const BETA_80DB: f64 = 0.1102 * (80.0 - 8.7);

/// Default kernel half-width, in input samples.
pub const HALF_WIDTH: usize = 32;

/// Modified Bessel function of the first kind, order zero (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Normalized sinc, `sin(πx)/(πx)`, exact 1 at 0 and exact 0 at other integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.fract() == 0.0 {
        0.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaiserSinc {
    pub half_width: usize,
    pub beta: f64,
    i0_beta: f64,
}

impl Default for KaiserSinc {
    fn default() -> Self {
        Self::new(HALF_WIDTH, BETA_80DB)
    }
}

impl KaiserSinc {
    pub fn new(half_width: usize, beta: f64) -> Self {
        Self {
            half_width,
            beta,
            i0_beta: bessel_i0(beta),
        }
    }

    /// Kernel value at offset `t` (in samples); zero for `|t| ≥ half_width`.
    pub fn weight(&self, t: f64) -> f64 {
        let w = self.half_width as f64;
        if t.abs() >= w {
            return 0.0;
        }
        let r = t / w;
        let window = bessel_i0(self.beta * (1.0 - r * r).max(0.0).sqrt()) / self.i0_beta;
        sinc(t) * window
    }

    /// Weights for taps `floor(t) − half_width + 1 ..= floor(t) + half_width`,
    /// i.e. `2·half_width` taps around fractional position `t`. Returns the
    /// index of the first tap.
    pub fn taps(&self, t: f64, out: &mut Vec<f64>) -> i64 {
        let base = t.floor() as i64;
        let first = base - self.half_width as i64 + 1;
        out.clear();
        for j in 0..2 * self.half_width {
            let k = first + j as i64;
            out.push(self.weight(t - k as f64));
        }
        first
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_bessel_i0_known_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        // I0(1) = 1.2660658777520082, I0(5) = 27.239871823604442
        assert!((bessel_i0(1.0) - 1.2660658777520082).abs() < 1e-14);
        assert!((bessel_i0(5.0) - 27.239871823604442).abs() < 1e-11);
    }

    #[test]
    fn test_kernel_interpolates_at_integers() {
        let k = KaiserSinc::default();
        assert_eq!(k.weight(0.0), 1.0);
        for i in 1..40 {
            assert_eq!(k.weight(i as f64), 0.0);
            assert_eq!(k.weight(-(i as f64)), 0.0);
        }
    }

    #[test]
    fn test_kernel_partition_of_unity_is_close() {
        let k = KaiserSinc::default();
        let mut w = Vec::new();
        for step in 0..16 {
            let t = 10.0 + step as f64 / 16.0;
            k.taps(t, &mut w);
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-3, "sum {s} at {t}");
        }
    }
}
