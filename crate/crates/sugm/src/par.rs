//! Indexed map helpers that run on rayon when the `parallel` feature is
//! enabled and fall back to plain sequential loops otherwise. Results are
//! collected in index order, so output never depends on thread scheduling.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..len).map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn for_each_indexed_mut<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    use rayon::prelude::*;
    out.par_iter_mut().enumerate().for_each(|(i, v)| f(i, v));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_indexed_mut<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    for (i, v) in out.iter_mut().enumerate() {
        f(i, v);
    }
}
