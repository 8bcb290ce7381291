//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers run on the rayon global pool;
//! without it, or when `Exec::Sequential` is requested, they run in order on
//! the calling thread. Output order never depends on the execution mode.

/// Execution strategy for the data-parallel kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// True when work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Environment variable read by [`configure_workers`].
pub const WORKERS_ENV: &str = "MUKAI_WORKERS";

/// Sizes the global pool from `MUKAI_WORKERS` when it is set to a positive
/// integer. Returns the worker count in effect.
pub fn configure_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Order-preserving map.
pub fn map_collect<T, R, F>(exec: Exec, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = exec;
    items.into_iter().map(f).collect()
}

/// First `Some` in item order.
pub fn find_map_first<T, R, F>(exec: Exec, items: Vec<T>, f: F) -> Option<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().find_map_first(f);
    }
    let _ = exec;
    items.into_iter().find_map(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_on_order() {
        let items: Vec<u64> = (0..1000).collect();
        let a = map_collect(Exec::Parallel, items.clone(), |x| x * x);
        let b = map_collect(Exec::Sequential, items.clone(), |x| x * x);
        assert_eq!(a, b);
        let fa = find_map_first(Exec::Parallel, items.clone(), |x| (x % 97 == 50).then_some(x));
        let fb = find_map_first(Exec::Sequential, items, |x| (x % 97 == 50).then_some(x));
        assert_eq!(fa, Some(50));
        assert_eq!(fa, fb);
    }
}
