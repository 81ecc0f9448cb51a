//! Per-node map helpers. With the `parallel` feature the maps run on the rayon
//! pool; without it (or with [`Execution::Sequential`]) they run in order.
//!
//! Only maps are parallel. Every reduction over the resulting vectors is a
//! plain sequential fold, so results are bit-identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when maps actually use rayon.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// True when maps would run on more than one thread.
    #[cfg(feature = "parallel")]
    fn fans_out(self) -> bool {
        self.is_parallel() && rayon::current_num_threads() > 1
    }
}

/// Below this many nodes the rayon overhead outweighs the work.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_LEN: usize = 512;

pub fn map_indices<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.fans_out() && len >= MIN_PARALLEL_LEN {
        return (0..len).into_par_iter().with_min_len(MIN_PARALLEL_LEN / 2).map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Applies `f` to every element of `data` in place.
pub fn for_each_mut<T, F>(exec: Execution, data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.fans_out() && data.len() >= MIN_PARALLEL_LEN {
        data.par_iter_mut()
            .with_min_len(MIN_PARALLEL_LEN / 2)
            .enumerate()
            .for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = exec;
    data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}
