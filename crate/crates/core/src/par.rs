//! Internal helper for the feature-gated data-parallel execution strategy.
//!
//! Every parallel stage in this crate maps an independent function over a
//! range of point (or frame) indices and writes each result into its
//! preassigned output slot. With that shape, thread scheduling can only
//! change *when* a slot is computed, never *what* it contains or where it
//! lands, so builds with and without the `parallel` feature — and runs with
//! any thread count — produce bit-identical results.

#[cfg(feature = "parallel")]
pub(crate) fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}
