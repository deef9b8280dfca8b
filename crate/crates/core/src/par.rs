//! Order-preserving map over a slice, parallel when the `parallel` feature
//! is enabled and the caller asks for it.

/// Execution mode for data-parallel loops.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Maps `f` over `items`, returning results in input order regardless of mode.
pub fn map_ordered<T, R, F>(items: &[T], mode: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Whether parallel execution is compiled in.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
