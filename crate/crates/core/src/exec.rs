//! Execution strategy for the data-parallel inner loops.
//!
//! Every helper here produces bit-identical output under both strategies:
//! work is split into fixed-size pieces whose results are combined in index
//! order, so no floating-point reduction depends on the thread schedule.
//! Without the `parallel` feature, [`Execution::Parallel`] runs sequentially.

/// Fixed chunk length used by reductions. Changing it changes rounding.
const REDUCE_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `(0..n).map(f).collect()`, order preserved.
    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Applies `f(chunk_index, chunk)` to consecutive `chunk`-sized pieces.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }

    /// Deterministic `sum_i f(i)` for `i < n`.
    pub fn sum_range<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let pieces = n.div_ceil(REDUCE_CHUNK);
        let partial = self.map_range(pieces, |p| {
            let lo = p * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        });
        partial.iter().sum()
    }
}

/// Neumaier-compensated sum; used where aggregates must not drift with length.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
