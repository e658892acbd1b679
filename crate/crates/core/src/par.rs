//! Order-preserving indexed map, parallel when the `parallel` feature is on.

use serde::{Deserialize, Serialize};

/// How grid points (or repeats) are evaluated. Results are identical either
/// way; only wall time differs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    /// Rayon's global pool; falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

pub(crate) fn map_indexed<T, F>(len: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}
