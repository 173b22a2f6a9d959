//! Farrow-structure time-varying fractional delay.
//!
//! The impulse response for fractional delay `μ` is a polynomial in `μ`,
//! `h(n, μ) = Σₖ cₖ(n)·μᵏ`. Filtering the input once through every branch
//! `cₖ` gives streams `vₖ = x ⊛ cₖ`; a delay can then change every sample by
//! evaluating `Σₖ vₖ(n)·μ(n)ᵏ` with Horner's rule. The streams depend only on
//! the input, so one set serves every image source.
//!
//! Total delays are split as `D + D0 + μ` where `D0` is the filter's own
//! latency (`floor((L − 1)/2)`), `D` an integer shift and `μ ∈ [0, 1)`.
//! For even `L` the μ range spans the two central taps, so the design target
//! `D0 + μ` stays centred on the filter.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Engine default Farrow polynomial order.
pub const DEFAULT_POLY_ORDER: usize = 4;
/// Engine default taps per branch.
pub const DEFAULT_BRANCH_LEN: usize = 32;
/// Engine default design passband, as a fraction of Nyquist.
pub const DEFAULT_PASSBAND: f64 = 0.8;

/// Sampling of the (μ, ω) design grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignGrid {
    pub mu_points: usize,
    pub omega_points: usize,
}

impl Default for DesignGrid {
    fn default() -> Self {
        Self {
            mu_points: 64,
            omega_points: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarrowFilter {
    poly_order: usize,
    branch_len: usize,
    /// `poly_order + 1` rows of `branch_len` taps.
    branches: Vec<Vec<f64>>,
    nominal_delay: f64,
    passband: f64,
}

/// Integer shift plus fractional part of a total delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySplit {
    pub integer_part: i64,
    pub fractional_part: f64,
}

/// Worst-case deviations of a designed filter over its passband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignQuality {
    pub max_group_delay_error: f64,
    pub max_phase_delay_error: f64,
    pub max_ripple_db: f64,
    pub max_complex_error: f64,
}

fn nominal_for(branch_len: usize) -> f64 {
    ((branch_len - 1) / 2) as f64
}

/// Least-squares Farrow design.
///
/// Minimizes `Σ |H(ω; μ) − e^{−jω(D0+μ)}|²` over a uniform grid of
/// `ω ∈ [0, alpha·π]` and midpoint-sampled `μ ∈ [0, 1)`, with equal weights.
/// On a tensor-product grid the normal matrix factors as `G_μ ⊗ G_ω`, so the
/// coefficients come from two small Cholesky solves.
pub fn design(
    poly_order: usize,
    branch_len: usize,
    alpha: f64,
    grid: DesignGrid,
) -> Result<FarrowFilter> {
    if !(1..=4).contains(&poly_order) {
        return Err(Error::InvalidArgument(format!(
            "polynomial order must be between 1 and 4, got {poly_order}"
        )));
    }
    if branch_len < poly_order + 1 {
        return Err(Error::InvalidArgument(format!(
            "branch length {branch_len} is shorter than order + 1 = {}",
            poly_order + 1
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "passband fraction must lie in (0, 1), got {alpha}"
        )));
    }
    if grid.mu_points < poly_order + 1 || grid.omega_points < 2 {
        return Err(Error::SingularDesign(format!(
            "grid {}×{} cannot determine an order-{poly_order} filter",
            grid.mu_points, grid.omega_points
        )));
    }

    let d0 = nominal_for(branch_len);
    let p = poly_order + 1;
    let mus: Vec<f64> = (0..grid.mu_points)
        .map(|j| (j as f64 + 0.5) / grid.mu_points as f64)
        .collect();
    let omegas: Vec<f64> = (0..grid.omega_points)
        .map(|i| alpha * PI * i as f64 / (grid.omega_points - 1) as f64)
        .collect();

    let g_mu = DMatrix::from_fn(p, p, |a, b| mus.iter().map(|m| m.powi((a + b) as i32)).sum());
    let g_omega = DMatrix::from_fn(branch_len, branch_len, |a, b| {
        let lag = a as f64 - b as f64;
        omegas.iter().map(|w| (w * lag).cos()).sum()
    });
    let rhs = DMatrix::from_fn(p, branch_len, |k, n| {
        let mut acc = 0.0;
        for m in &mus {
            let weight = m.powi(k as i32);
            let lag = n as f64 - d0 - m;
            acc += weight * omegas.iter().map(|w| (w * lag).cos()).sum::<f64>();
        }
        acc
    });

    let chol_mu = g_mu
        .cholesky()
        .ok_or_else(|| Error::SingularDesign("μ Gram matrix is not positive definite".into()))?;
    let chol_omega = g_omega
        .cholesky()
        .ok_or_else(|| Error::SingularDesign("ω Gram matrix is not positive definite".into()))?;
    // C = G_μ⁻¹ · B · G_ω⁻¹
    let left = chol_mu.solve(&rhs);
    let coeffs = chol_omega.solve(&left.transpose()).transpose();

    let branches = (0..p)
        .map(|k| (0..branch_len).map(|n| coeffs[(k, n)]).collect())
        .collect();
    let filter = FarrowFilter {
        poly_order,
        branch_len,
        branches,
        nominal_delay: d0,
        passband: alpha,
    };
    if filter.branches.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::SingularDesign("non-finite coefficients".into()));
    }
    Ok(filter)
}

impl Default for FarrowFilter {
    fn default() -> Self {
        design(
            DEFAULT_POLY_ORDER,
            DEFAULT_BRANCH_LEN,
            DEFAULT_PASSBAND,
            DesignGrid::default(),
        )
        .expect("default Farrow design is well posed")
    }
}

impl FarrowFilter {
    /// Wraps an explicit coefficient table (rows are branches `c₀ … c_M`).
    pub fn from_branches(branches: Vec<Vec<f64>>, passband: f64) -> Result<Self> {
        let p = branches.len();
        if p < 2 {
            return Err(Error::InvalidArgument("need at least two branches".into()));
        }
        let branch_len = branches[0].len();
        if branch_len == 0 || branches.iter().any(|b| b.len() != branch_len) {
            return Err(Error::InvalidArgument("branches must share a non-zero length".into()));
        }
        if branches.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("filter coefficient".into()));
        }
        Ok(Self {
            poly_order: p - 1,
            branch_len,
            branches,
            nominal_delay: nominal_for(branch_len),
            passband,
        })
    }

    pub fn poly_order(&self) -> usize {
        self.poly_order
    }

    pub fn branch_len(&self) -> usize {
        self.branch_len
    }

    pub fn branches(&self) -> &[Vec<f64>] {
        &self.branches
    }

    /// Filter latency `D0` in samples (integer valued).
    pub fn nominal_delay(&self) -> f64 {
        self.nominal_delay
    }

    pub fn passband(&self) -> f64 {
        self.passband
    }

    /// `h(·, μ)` by Horner evaluation of the branch polynomials.
    pub fn impulse_response(&self, mu: f64) -> Vec<f64> {
        (0..self.branch_len)
            .map(|n| {
                self.branches
                    .iter()
                    .rev()
                    .fold(0.0, |acc, b| acc * mu + b[n])
            })
            .collect()
    }

    pub fn frequency_response(&self, mu: f64, omega: f64) -> Complex64 {
        self.impulse_response(mu)
            .iter()
            .enumerate()
            .map(|(n, h)| Complex64::from_polar(*h, -omega * n as f64))
            .sum()
    }

    /// Group delay `−dφ/dω` of `h(·, μ)` at `omega`, in samples.
    pub fn group_delay(&self, mu: f64, omega: f64) -> f64 {
        let h = self.impulse_response(mu);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for (n, v) in h.iter().enumerate() {
            let e = Complex64::from_polar(1.0, -omega * n as f64);
            num += e * (v * n as f64);
            den += e * v;
        }
        (num / den).re
    }

    /// Worst deviations over `μ ∈ {0, 1/mu_points, …}` and
    /// `ω ∈ (0, alpha·π]`. Phase delay is unwrapped from ω → 0.
    pub fn quality(&self, alpha: f64, mu_points: usize, omega_points: usize) -> DesignQuality {
        let mut q = DesignQuality {
            max_group_delay_error: 0.0,
            max_phase_delay_error: 0.0,
            max_ripple_db: 0.0,
            max_complex_error: 0.0,
        };
        for j in 0..mu_points {
            let mu = j as f64 / mu_points as f64;
            let target = self.nominal_delay + mu;
            let h = self.impulse_response(mu);
            let mut prev_phase = 0.0;
            let mut unwrapped = 0.0;
            for i in 1..=omega_points {
                let w = alpha * PI * i as f64 / omega_points as f64;
                let mut num = Complex64::new(0.0, 0.0);
                let mut resp = Complex64::new(0.0, 0.0);
                for (n, v) in h.iter().enumerate() {
                    let e = Complex64::from_polar(1.0, -w * n as f64);
                    num += e * (v * n as f64);
                    resp += e * v;
                }
                let gd = (num / resp).re;
                let phase = resp.arg();
                let mut step = phase - prev_phase;
                while step > PI {
                    step -= 2.0 * PI;
                }
                while step < -PI {
                    step += 2.0 * PI;
                }
                unwrapped += step;
                prev_phase = phase;
                let pd = -unwrapped / w;
                let ideal = Complex64::from_polar(1.0, -w * target);
                q.max_group_delay_error = q.max_group_delay_error.max((gd - target).abs());
                q.max_phase_delay_error = q.max_phase_delay_error.max((pd - target).abs());
                q.max_ripple_db = q.max_ripple_db.max((20.0 * resp.norm().log10()).abs());
                q.max_complex_error = q.max_complex_error.max((resp - ideal).norm());
            }
        }
        q
    }

    /// Text matrix: `M L alpha`, then one row of `L` coefficients per branch.
    pub fn to_matrix(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.poly_order, self.branch_len, self.passband);
        for b in &self.branches {
            let row: Vec<String> = b.iter().map(|c| format!("{c:.17e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_matrix(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line, message: String| Error::Parse { line, message };
        let (line, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `M L alpha` header".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(parse_err(line, format!("expected `M L alpha`, got `{header}`")));
        }
        let m: usize = head[0].parse().map_err(|e| parse_err(line, format!("M: {e}")))?;
        let l: usize = head[1].parse().map_err(|e| parse_err(line, format!("L: {e}")))?;
        let alpha: f64 = head[2]
            .parse()
            .map_err(|e| parse_err(line, format!("alpha: {e}")))?;
        let mut branches = Vec::with_capacity(m + 1);
        for (line, row) in lines {
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(line, format!("{e}")))?;
            if vals.len() != l {
                return Err(parse_err(line, format!("expected {l} coefficients, got {}", vals.len())));
            }
            branches.push(vals);
        }
        if branches.len() != m + 1 {
            return Err(parse_err(
                text.lines().count(),
                format!("expected {} branch rows, got {}", m + 1, branches.len()),
            ));
        }
        Self::from_branches(branches, alpha)
    }
}

/// Branch outputs `vₖ = x ⊛ cₖ`, stored interleaved by time index.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchStreams {
    width: usize,
    len: usize,
    data: Vec<f64>,
}

impl BranchStreams {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn branch_count(&self) -> usize {
        self.width
    }

    /// Values of all branches at time index `m`.
    #[inline]
    pub fn at(&self, m: usize) -> &[f64] {
        &self.data[m * self.width..(m + 1) * self.width]
    }

    /// Stream `k` as a contiguous vector.
    pub fn stream(&self, k: usize) -> Vec<f64> {
        (0..self.len).map(|m| self.data[m * self.width + k]).collect()
    }
}

/// Full convolution of `x` with every branch; index `m` of each stream is
/// input time `m`, length `x.len() + L − 1`.
pub fn branch_filter(x: &[f64], f: &FarrowFilter) -> BranchStreams {
    let width = f.poly_order + 1;
    let taps = f.branch_len;
    let len = if x.is_empty() { 0 } else { x.len() + taps - 1 };
    let mut data = vec![0.0; len * width];
    for (k, branch) in f.branches.iter().enumerate() {
        for m in 0..len {
            let j_lo = m.saturating_sub(x.len() - 1);
            let j_hi = (taps - 1).min(m);
            let mut acc = 0.0;
            for j in j_lo..=j_hi {
                acc += branch[j] * x[m - j];
            }
            data[m * width + k] = acc;
        }
    }
    BranchStreams { width, len, data }
}

/// `total = D + D0 + μ` with `μ ∈ [0, 1)`.
pub fn split_delay(total_delay: f64, f: &FarrowFilter) -> Result<DelaySplit> {
    let rest = total_delay - f.nominal_delay;
    if !(rest >= 0.0) || !rest.is_finite() {
        return Err(Error::DelayUnderflow {
            total: total_delay,
            nominal: f.nominal_delay,
        });
    }
    let mut integer = rest.floor();
    let mut frac = rest - integer;
    if frac >= 1.0 {
        integer += 1.0;
        frac = 0.0;
    }
    Ok(DelaySplit {
        integer_part: integer as i64,
        fractional_part: frac,
    })
}

/// Horner evaluation of the branch values at `n − D` in `μ`; zero outside
/// the streams.
#[inline]
pub fn eval(streams: &BranchStreams, n: i64, split: DelaySplit) -> f64 {
    let idx = n - split.integer_part;
    if idx < 0 || idx as usize >= streams.len {
        return 0.0;
    }
    let v = streams.at(idx as usize);
    let mu = split.fractional_part;
    v.iter().rev().fold(0.0, |acc, c| acc * mu + c)
}

/// `y(n) = x(n − τ(n))` for a per-sample delay sequence (in samples), with
/// one branch-filter pass. Output length is `tau.len()`.
pub fn delay_stream(x: &[f64], f: &FarrowFilter, tau: &[f64]) -> Result<Vec<f64>> {
    let streams = branch_filter(x, f);
    tau.iter()
        .enumerate()
        .map(|(n, &t)| Ok(eval(&streams, n as i64, split_delay(t, f)?)))
        .collect()
}
