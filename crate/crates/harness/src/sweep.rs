//! Fixed-α sweeps.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::config::{AlphaSetting, RunConfig};
use crate::error::HarnessError;
use crate::run::{run, RunResult};

/// α ∈ {0.0, 0.1, ..., 1.0} followed by the adaptive coefficient, each
/// writing to `<output>/alpha-<value>`.
pub fn expand_alpha_sweep(base: &RunConfig) -> Vec<RunConfig> {
    let mut alphas: Vec<AlphaSetting> = wevo::alpha_sweep_values::<f64>().into_iter().map(AlphaSetting::Fixed).collect();
    alphas.push(AlphaSetting::Adaptive);
    alphas
        .into_iter()
        .map(|alpha| {
            let mut c = base.clone();
            c.we.enabled = true;
            c.we.alpha = alpha;
            c.output_dir = base.output_dir.join(format!("alpha-{alpha}"));
            c
        })
        .collect()
}

type Slot = Option<Result<Vec<RunResult>, HarnessError>>;

/// Runs `configs` on up to `jobs` threads. Results keep the input order.
pub fn run_many(configs: &[RunConfig], jobs: usize) -> Result<Vec<Vec<RunResult>>, HarnessError> {
    for c in configs {
        c.validate()?;
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Slot>> = Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, configs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(c) = configs.get(i) else { break };
                let r = run(c);
                slots.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("threads joined")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}
