//! Data-parallel iteration helpers.
//!
//! Every hot loop in the pipeline is a map over independent items
//! (utterances, samples, batch rows). [`map_collect`] runs that map on the
//! rayon pool when the `parallel` feature is enabled and sequentially
//! otherwise. Per-item work never shares mutable state and output order is
//! preserved, so both paths produce identical results.
//!
//! [`map_collect_seq`] is always sequential; the bench suite uses it to
//! compare the two execution strategies on the same workload.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential twin of [`map_collect`], available regardless of features.
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Run `f` over index ranges splitting `0..n` into roughly equal chunks,
/// one per rayon thread, writing into disjoint slices of `out`.
///
/// `f(chunk_start, out_chunk)` must fill `out_chunk` completely. The chunk
/// decomposition does not affect the values written, only which thread
/// writes them.
#[cfg(feature = "parallel")]
pub fn for_each_chunk<T, F>(out: &mut [T], min_chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let n = out.len();
    if n == 0 {
        return;
    }
    let threads = rayon::current_num_threads().max(1);
    let chunk = (n / threads).max(min_chunk).max(1);
    out.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, slice)| f(i * chunk, slice));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_chunk<T, F>(out: &mut [T], _min_chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    f(0, out);
}
