//! Order-preserving map that runs on the rayon pool when the `parallel`
//! feature is enabled and the caller asks for it.

#[cfg(feature = "parallel")]
pub(crate) fn map<T, U, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        items.into_par_iter().map(f).collect()
    } else {
        items.into_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map<T, U, F>(items: Vec<T>, _parallel: bool, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Whether this build can run anything concurrently.
pub const fn enabled() -> bool {
    cfg!(feature = "parallel")
}
