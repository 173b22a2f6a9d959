//! Signal comparison: band-limited SNR plus analytic-signal envelope and
//! instantaneous-frequency tracks that expose amplitude steps and phase
//! jumps.

use crate::dsp;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// SNR reported for identical signals.
pub const SNR_CAP_DB: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub rate: f64,
    /// Band limit as a fraction of Nyquist, applied before the SNR.
    pub passband: f64,
    /// Samples excluded at each end.
    pub margin: usize,
    /// Moving-average length for the frequency track, seconds.
    pub smoothing: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            rate: 16000.0,
            passband: 0.8,
            margin: 1024,
            smoothing: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub samples: usize,
    pub snr_db: f64,
    /// Largest per-sample envelope change of the test signal (interior).
    pub envelope_max_jump: f64,
    /// Largest change of the smoothed frequency track over one smoothing
    /// window (interior), Hz.
    pub inst_freq_max_jump: f64,
    pub inst_freq_mean: f64,
    /// Envelope of the test signal over the interior.
    pub envelope: Vec<f64>,
    /// Smoothed instantaneous frequency of the test signal, Hz.
    pub inst_freq_track: Vec<f64>,
    /// Evaluation tallies attached by the caller.
    pub counts: BTreeMap<String, u64>,
}

/// `20·log10(‖b‖/‖a − b‖)` capped at [`SNR_CAP_DB`]; `b` is the reference.
pub fn snr_db(a: &[f64], b: &[f64]) -> Result<f64> {
    let signal: f64 = b.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::ZeroReference);
    }
    let noise: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}

/// Magnitude of the analytic signal.
pub fn envelope(x: &[f64]) -> Vec<f64> {
    dsp::analytic_signal(x).iter().map(|z| z.norm()).collect()
}

/// Phase increment of the analytic signal in Hz, one value per sample
/// (the last repeats), then a centred moving average of `window` samples.
pub fn instantaneous_frequency(x: &[f64], rate: f64, window: usize) -> Vec<f64> {
    let z = dsp::analytic_signal(x);
    if z.len() < 2 {
        return vec![0.0; z.len()];
    }
    let mut f: Vec<f64> = z
        .windows(2)
        .map(|w| (w[1] * w[0].conj()).arg() * rate / (2.0 * PI))
        .collect();
    f.push(*f.last().expect("non-empty"));
    moving_average(&f, window)
}

fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 || x.is_empty() {
        return x.to_vec();
    }
    let half = window / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().expect("non-empty") + v);
    }
    (0..x.len())
        .map(|n| {
            let lo = n.saturating_sub(half);
            let hi = (n + window - half).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Compares test signal `a` with reference `b`, trimmed to their common
/// length. SNR is taken after band-limiting both to `passband`; the
/// envelope and frequency tracks describe `a` unfiltered.
pub fn compare(a: &[f64], b: &[f64], opts: &CompareOptions) -> Result<ComparisonReport> {
    if !(opts.passband > 0.0 && opts.passband <= 1.0) || !(opts.rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "passband must lie in (0, 1] and rate be positive: {opts:?}"
        )));
    }
    let len = a.len().min(b.len());
    if len <= 2 * opts.margin + 1 {
        return Err(Error::LengthMismatch(format!(
            "common length {len} leaves no interior with margin {}",
            opts.margin
        )));
    }
    let (a, b) = (&a[..len], &b[..len]);
    let interior = opts.margin..len - opts.margin;

    let fa = dsp::lowpass(a, opts.passband);
    let fb = dsp::lowpass(b, opts.passband);
    let snr = snr_db(&fa[interior.clone()], &fb[interior.clone()])?;

    let env = envelope(a)[interior.clone()].to_vec();
    let envelope_max_jump = env
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);

    let window = ((opts.smoothing * opts.rate).round() as usize).max(1);
    let track = instantaneous_frequency(a, opts.rate, window)[interior].to_vec();
    let inst_freq_max_jump = if track.len() > window {
        (0..track.len() - window)
            .map(|n| (track[n + window] - track[n]).abs())
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let inst_freq_mean = track.iter().sum::<f64>() / track.len() as f64;

    Ok(ComparisonReport {
        samples: len,
        snr_db: snr,
        envelope_max_jump,
        inst_freq_max_jump,
        inst_freq_mean,
        envelope: env,
        inst_freq_track: track,
        counts: BTreeMap::new(),
    })
}

impl ComparisonReport {
    /// Flat `key=value` record.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples={}", self.samples);
        let _ = writeln!(s, "snr_db={}", self.snr_db);
        let _ = writeln!(s, "envelope_max_jump={:e}", self.envelope_max_jump);
        let _ = writeln!(s, "inst_freq_max_jump={}", self.inst_freq_max_jump);
        let _ = writeln!(s, "inst_freq_mean={}", self.inst_freq_mean);
        for (k, v) in &self.counts {
            let _ = writeln!(s, "count.{k}={v}");
        }
        s
    }

    /// Per-sample `n,envelope,inst_freq` over the interior.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,envelope,inst_freq\n");
        for (n, (e, f)) in self.envelope.iter().zip(&self.inst_freq_track).enumerate() {
            let _ = writeln!(s, "{n},{e:e},{f}");
        }
        s
    }
}

/// Reads back the numeric fields of a `key=value` record.
pub fn parse_record(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("`{v}` is not a number"),
        })?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}
