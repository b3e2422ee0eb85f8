//! Execution strategy for the data-parallel inner loops (box sums, support
//! sums, per-shift recurrence measures).
//!
//! With the `parallel` feature the [`Exec::Parallel`] mode runs on rayon;
//! without it every mode runs sequentially. All reductions are exact, so the
//! two modes produce identical values regardless of scheduling.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if is_parallel_available() {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

#[inline]
pub fn is_parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Splits `range` into at most `chunks` contiguous pieces.
pub fn split(range: Range<usize>, chunks: usize) -> Vec<Range<usize>> {
    let len = range.end.saturating_sub(range.start);
    if len == 0 {
        return Vec::new();
    }
    let chunks = chunks.clamp(1, len);
    let step = len.div_ceil(chunks);
    (0..chunks)
        .map(|c| {
            let lo = range.start + c * step;
            lo..(lo + step).min(range.end)
        })
        .filter(|r| !r.is_empty())
        .collect()
}

#[cfg(feature = "parallel")]
fn chunk_count(len: usize) -> usize {
    (rayon::current_num_threads() * 4).min(len.max(1))
}

impl Exec {
    /// Maps every index of `range` and collects in index order.
    pub fn map_indexed<U, F>(self, range: Range<usize>, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    /// Folds contiguous chunks of `range` with `fold` and merges the partial
    /// results with `merge`. `fold` receives a whole chunk so callers can keep
    /// one scratch buffer per chunk.
    pub fn fold_chunks<A, F, M>(self, range: Range<usize>, fold: F, merge: M) -> Option<A>
    where
        A: Send,
        F: Fn(Range<usize>) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        #[cfg(not(feature = "parallel"))]
        let _ = merge;
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                let len = range.end.saturating_sub(range.start);
                split(range, chunk_count(len))
                    .into_par_iter()
                    .map(fold)
                    .reduce_with(merge)
            }
            _ => {
                if range.is_empty() {
                    None
                } else {
                    Some(fold(range))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_covers_range_without_overlap() {
        let parts = split(3..20, 4);
        assert_eq!(parts.first().unwrap().start, 3);
        assert_eq!(parts.last().unwrap().end, 20);
        for w in parts.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        assert!(split(5..5, 3).is_empty());
        assert_eq!(split(0..2, 10).len(), 2);
    }

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i * i) as u64;
        let seq = Exec::Sequential.map_indexed(0..100, f);
        let par = Exec::Parallel.map_indexed(0..100, f);
        assert_eq!(seq, par);
        let sum = |m: Exec| m.fold_chunks(0..1000, |r| r.map(|i| i as u64).sum::<u64>(), |a, b| a + b);
        assert_eq!(sum(Exec::Sequential), sum(Exec::Parallel));
        assert_eq!(sum(Exec::Sequential), Some(499500));
    }
}
