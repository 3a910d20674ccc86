//! Multi-threaded family traversal.
//!
//! Chunks are visited in parallel and merged in chunk order, so the result is
//! bit-identical to the sequential traversal for any thread count.

use bhlab_core::poly::{traverse_chunk, FamilySpec, FamilyVisitor};
use bhlab_core::Result;
use rayon::prelude::*;
use rayon::ThreadPool;

pub fn thread_pool(threads: usize) -> std::result::Result<ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build()
}

pub fn traverse_parallel<V>(spec: &FamilySpec, visitor: &V, pool: &ThreadPool) -> Result<V::Acc>
where
    V: FamilyVisitor + Sync,
    V::Acc: Send,
{
    spec.validate()?;
    let parts: Vec<V::Acc> = pool.install(|| {
        (0..spec.chunk_count())
            .into_par_iter()
            .map(|c| traverse_chunk(spec, visitor, c))
            .collect()
    });
    Ok(parts
        .into_iter()
        .fold(visitor.empty(), |acc, part| visitor.merge(acc, part)))
}
