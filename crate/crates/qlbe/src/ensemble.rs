//! Parallel trajectory ensembles. Trajectory `i` always uses stream `i` of
//! the master seed and results are collected in index order, so the output
//! does not depend on the number of threads.

use qlbe_core::trajectory::{stream, Engine, SuperpositionState, TrajectoryRecord};
use rayon::prelude::*;

use crate::error::{Result, RunError};

/// Run trajectories with stream indices `first..first + n`.
pub fn run_ensemble(
    engine: &Engine,
    initial: &SuperpositionState,
    first: u64,
    n: u64,
    sample_times: &[f64],
    seed: u64,
) -> Result<Vec<TrajectoryRecord>> {
    (first..first + n)
        .into_par_iter()
        .map(|i| engine.run_trajectory(initial, sample_times, &mut stream(seed, i)))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(RunError::from)
}

/// Run `f` on a pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| RunError::Threads(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_records() {
        let eng = Engine::new(1.0).unwrap();
        let init = SuperpositionState::eigenstate([2.0, 0.0, 0.0]);
        let times = [0.5, 1.0, 3.0];
        let one = with_threads(Some(1), || run_ensemble(&eng, &init, 0, 64, &times, 9)).unwrap().unwrap();
        let four = with_threads(Some(4), || run_ensemble(&eng, &init, 0, 64, &times, 9)).unwrap().unwrap();
        assert_eq!(one, four);
        let serial = eng.run_ensemble(&init, 64, &times, 9).unwrap();
        assert_eq!(one, serial);
    }
}
