//! Data-parallel helpers. With the `parallel` feature disabled every helper
//! degrades to a plain sequential loop with identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many elements pointwise maps stay on the calling thread.
pub const MIN_PARALLEL_LEN: usize = 1 << 14;

/// Applies `op` to every element together with its flat index.
pub fn for_each_indexed<T, F>(data: &mut [T], op: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if data.len() >= MIN_PARALLEL_LEN {
        data.par_iter_mut()
            .with_min_len(MIN_PARALLEL_LEN / 4)
            .enumerate()
            .for_each(|(i, v)| op(i, v));
        return;
    }
    data.iter_mut().enumerate().for_each(|(i, v)| op(i, v));
}

/// Sums `op(x)` over a slice. The parallel reduction splits the slice into
/// fixed blocks and adds the partial sums in block order, so the result does
/// not depend on the thread count.
pub fn sum_by<T, F>(data: &[T], op: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if data.len() >= MIN_PARALLEL_LEN {
        let partial: Vec<f64> = data
            .par_chunks(MIN_PARALLEL_LEN / 4)
            .map(|chunk| chunk.iter().map(&op).sum::<f64>())
            .collect();
        return partial.iter().sum();
    }
    let mut total = 0.0;
    for chunk in data.chunks(MIN_PARALLEL_LEN / 4) {
        total += chunk.iter().map(&op).sum::<f64>();
    }
    total
}

/// Processes consecutive `chunk`-sized rows of `data` with a per-worker
/// scratch value created by `init`.
pub fn for_each_row<T, S, I, F>(data: &mut [T], chunk: usize, init: I, op: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if data.len() >= MIN_PARALLEL_LEN && data.len() / chunk > 1 {
        data.par_chunks_mut(chunk)
            .for_each_init(&init, |scratch, row| op(scratch, row));
        return;
    }
    let mut scratch = init();
    for row in data.chunks_mut(chunk) {
        op(&mut scratch, row);
    }
}

/// Maps independent jobs on up to `workers` threads and returns results in
/// input order. `workers <= 1` runs the jobs sequentially.
pub fn map_jobs<J, R, F>(jobs: &[J], workers: usize, op: F) -> Vec<R>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 && jobs.len() > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(|| jobs.par_iter().map(&op).collect());
        }
    }
    let _ = workers;
    jobs.iter().map(op).collect()
}

/// Number of workers to use when the caller does not say.
pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
