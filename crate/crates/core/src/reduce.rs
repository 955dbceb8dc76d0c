//! Deterministic compensated reductions.
//!
//! Every sum over grid nodes goes through [`sum_by`]. Nodes are split into
//! fixed-size blocks; each block is accumulated in ascending index order with
//! Neumaier (Kahan–Babuška) compensation and the block partials are merged in
//! ascending block order. The blocking does not depend on the thread count, so
//! serial and parallel execution produce bit-identical results.

use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};

/// Nodes per reduction block.
pub const BLOCK: usize = 4096;

/// Name of the environment variable that caps inner parallel reductions.
pub const THREADS_ENV: &str = "IPROJ_THREADS";

static POOL: RwLock<Option<Arc<ThreadPool>>> = RwLock::new(None);

/// Set the number of worker threads used by reductions; `0` means serial.
pub fn set_threads(threads: usize) -> Result<()> {
    let pool = if threads == 0 {
        None
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidOption(format!("thread pool: {e}")))?;
        Some(Arc::new(pool))
    };
    *POOL.write().unwrap_or_else(|e| e.into_inner()) = pool;
    Ok(())
}

/// Apply `IPROJ_THREADS` if it is set. Returns the thread count in effect.
pub fn configure_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => {
            let threads: usize = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidOption(format!("{THREADS_ENV}={raw:?}")))?;
            set_threads(threads)?;
            Ok(threads)
        }
        Err(_) => Ok(0),
    }
}

fn pool() -> Option<Arc<ThreadPool>> {
    POOL.read().unwrap_or_else(|e| e.into_inner()).clone()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn merge(&mut self, other: Compensated) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn blocked<const N: usize, F>(len: usize, f: F) -> [f64; N]
where
    F: Fn(usize) -> [f64; N] + Sync,
{
    let nblocks = len.div_ceil(BLOCK);
    let block = |b: usize| {
        let mut acc = [Compensated::default(); N];
        for k in b * BLOCK..((b + 1) * BLOCK).min(len) {
            let v = f(k);
            for (a, x) in acc.iter_mut().zip(v) {
                a.add(x);
            }
        }
        acc
    };
    let partials: Vec<[Compensated; N]> = match pool() {
        Some(pool) if nblocks > 1 => pool.install(|| (0..nblocks).into_par_iter().map(block).collect()),
        _ => (0..nblocks).map(block).collect(),
    };
    let mut total = [Compensated::default(); N];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total.map(|t| t.value())
}

/// Compensated sum of `f(k)` for `k in 0..len` in the canonical order.
pub fn sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    blocked::<1, _>(len, |k| [f(k)])[0]
}

/// Several compensated sums computed in one pass.
pub fn sums_by<const N: usize, F>(len: usize, f: F) -> [f64; N]
where
    F: Fn(usize) -> [f64; N] + Sync,
{
    blocked(len, f)
}

/// Compensated sum of a slice.
pub fn sum(values: &[f64]) -> f64 {
    sum_by(values.len(), |k| values[k])
}
