//! Worker-count-invariant summation over image contributions.

use crate::error::{Error, Result};

/// How per-image contributions are added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    /// Fixed balanced binary tree over the image index range.
    #[default]
    PairwiseTree,
    /// Left fold in image order.
    Sequential,
}

impl std::str::FromStr for Summation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairwise" | "pairwise-tree" => Ok(Self::PairwiseTree),
            "sequential" => Ok(Self::Sequential),
            _ => Err(Error::InvalidArgument(format!("unknown summation policy `{s}`"))),
        }
    }
}

/// Sums `count` buffers of length `len`, produced on demand by `leaf(i, out)`
/// which must overwrite `out`. The association order depends only on
/// `count` and the policy, never on scheduling.
pub fn reduce_images<F>(count: usize, len: usize, policy: Summation, leaf: &F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let mut out = vec![0.0; len];
    if count == 0 {
        return out;
    }
    match policy {
        Summation::PairwiseTree => tree(0, count, &mut out, leaf),
        Summation::Sequential => {
            leaf(0, &mut out);
            let mut scratch = vec![0.0; len];
            for i in 1..count {
                leaf(i, &mut scratch);
                out.iter_mut().zip(&scratch).for_each(|(a, b)| *a += b);
            }
        }
    }
    out
}

fn tree<F>(lo: usize, hi: usize, out: &mut [f64], leaf: &F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    if hi - lo == 1 {
        leaf(lo, out);
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let mut right = vec![0.0; out.len()];
    rayon::join(|| tree(lo, mid, out, leaf), || tree(mid, hi, &mut right, leaf));
    out.iter_mut().zip(&right).for_each(|(a, b)| *a += b);
}

/// Runs `job` on a pool with `workers` threads (0 = rayon's default pool).
pub fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(i: usize, out: &mut [f64]) {
        for (n, v) in out.iter_mut().enumerate() {
            *v = 1.0 / (1.0 + i as f64 + n as f64 * 0.37);
        }
    }

    #[test]
    fn test_tree_is_worker_invariant() {
        let reference = with_workers(1, || reduce_images(37, 64, Summation::PairwiseTree, &leaf)).unwrap();
        for w in [2, 3, 8] {
            let other = with_workers(w, || reduce_images(37, 64, Summation::PairwiseTree, &leaf)).unwrap();
            assert_eq!(reference, other);
        }
    }

    #[test]
    fn test_policies_agree_closely() {
        let a = reduce_images(50, 16, Summation::PairwiseTree, &leaf);
        let b = reduce_images(50, 16, Summation::Sequential, &leaf);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14 * x.abs());
        }
        assert_eq!(reduce_images(0, 4, Summation::PairwiseTree, &leaf), vec![0.0; 4]);
    }
}
