//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon when the caller
//! asks for it; without the feature every call runs on the current thread.
//! Results are always returned in index order so that reductions over them
//! are independent of scheduling.

/// Whether parallel execution is compiled in.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Runs two closures, potentially in parallel.
pub fn join<A, B, RA, RB>(parallel: bool, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return rayon::join(a, b);
    }
    let _ = parallel;
    (a(), b())
}

/// Fills `out[k] = f(k)` for every index.
pub fn fill_indexed<T, F>(out: &mut [T], parallel: bool, f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(k, slot)| *slot = f(k));
        return;
    }
    let _ = parallel;
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = f(k);
    }
}
