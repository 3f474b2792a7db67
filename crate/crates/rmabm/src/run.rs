//! Parallel drivers around the core harness. Results are reduced in seed
//! (or episode) order, so they do not depend on the thread count.

use rayon::prelude::*;
use rmabm_core::analysis::{aggregate_irf, irf_seed, paired_deviation, IrfResult, IrfSettings, StrategyThresholds};
use rmabm_core::economy::MetricsFrame;
use rmabm_core::harness::{self, Evaluation, ExperimentConfig, TrainingOutcome};
use rmabm_core::rl::PolicySet;

use crate::error::Error;

/// A worker pool of `jobs` threads (all cores when `None`).
pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Error> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Pool(e.to_string()))
}

/// `f` over `items` in parallel, results in input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

/// Greedy test episodes in parallel. `sink` sees each episode's full frame
/// stream before it is summarised.
pub fn evaluate<F>(
    cfg: &ExperimentConfig,
    policies: &PolicySet,
    thresholds: &StrategyThresholds,
    sink: F,
) -> Result<Evaluation, Error>
where
    F: Fn(usize, &[MetricsFrame]) -> Result<(), Error> + Sync + Send,
{
    cfg.validate()?;
    cfg.check_policies(policies)?;
    let episodes = (0..cfg.test_episodes)
        .into_par_iter()
        .map(|k| {
            let mut written = Ok(());
            let summary = harness::test_episode(cfg, policies, k, thresholds, |frames| written = sink(k, frames))?;
            written.map(|_| summary)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Evaluation::from_episodes(cfg.num_rl_agents, episodes)?)
}

/// Train sequentially, then evaluate in parallel.
pub fn train_and_evaluate(
    cfg: &ExperimentConfig,
    thresholds: &StrategyThresholds,
) -> Result<(TrainingOutcome, Evaluation), Error> {
    let outcome = harness::train(cfg)?;
    let eval = evaluate(cfg, &outcome.trained.policies, thresholds, |_, _| Ok(()))?;
    Ok((outcome, eval))
}

/// Impulse response with the seed pairs run in parallel.
pub fn impulse_response(cfg: &ExperimentConfig, policies: &PolicySet, settings: IrfSettings) -> Result<IrfResult, Error> {
    cfg.validate()?;
    cfg.check_policies(policies)?;
    settings.validate(cfg)?;
    let pairs = (0..settings.num_seeds)
        .into_par_iter()
        .map(|k| paired_deviation(cfg, policies, &settings, irf_seed(cfg, k)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate_irf(settings, &pairs)?)
}
