//! Post-processing of frame streams: firm summaries, strategy labels, GDP
//! statistics and impulse responses.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::economy::MetricsFrame;
use crate::harness::{self, DemandShock, EpisodeOptions, ExperimentConfig, IRF_SEED_OFFSET};
use crate::math::sqrt;
use crate::rl::PolicySet;
use crate::{ConfigError, Error};

/// Median of `values` (reorders the slice). Mean of the middle pair for even lengths.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmSummary {
    pub firm: usize,
    pub median_log_price_delta: f64,
    pub median_sales: f64,
    /// Mean reward for RL firms, mean real profit otherwise.
    pub mean_reward: f64,
}

/// Medians and means of one firm over `frames`, which the caller restricts
/// to the post-burn-in window.
pub fn summarize_firm(frames: &[MetricsFrame], firm: usize) -> Result<FirmSummary, Error> {
    if frames.is_empty() {
        return Err(Error::Empty("no frames to summarise"));
    }
    let mut deltas: Vec<f64> = frames.iter().map(|f| f.log_price_delta(firm)).collect();
    let mut sales: Vec<f64> = frames.iter().map(|f| f.firms[firm].sales).collect();
    let mean_reward = frames
        .iter()
        .map(|f| f.firms[firm].reward.unwrap_or(f.firms[firm].profit))
        .sum::<f64>()
        / frames.len() as f64;
    Ok(FirmSummary {
        firm,
        median_log_price_delta: median(&mut deltas),
        median_sales: median(&mut sales),
        mean_reward,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyLabel {
    /// Far above the market price, small volumes.
    MarketPower,
    /// Below the market price, large volumes.
    Dumping,
    PerfectCompetition,
}

impl StrategyLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyLabel::MarketPower => "market_power",
            StrategyLabel::Dumping => "dumping",
            StrategyLabel::PerfectCompetition => "perfect_competition",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyThresholds {
    /// Minimum median log price delta for market power.
    pub market_power_price: f64,
    /// Maximum sales, relative to the market median, for market power.
    pub market_power_sales: f64,
    /// Maximum median log price delta for dumping.
    pub dumping_price: f64,
    /// Minimum sales, relative to the market median, for dumping.
    pub dumping_sales: f64,
}

impl Default for StrategyThresholds {
    fn default() -> Self {
        Self {
            market_power_price: 0.25,
            market_power_sales: 0.5,
            dumping_price: -0.05,
            dumping_sales: 1.5,
        }
    }
}

pub fn classify_strategy(
    summary: &FirmSummary,
    market_median_sales: f64,
    thresholds: &StrategyThresholds,
) -> StrategyLabel {
    let delta = summary.median_log_price_delta;
    let sales = summary.median_sales;
    if delta > thresholds.market_power_price && sales < thresholds.market_power_sales * market_median_sales {
        StrategyLabel::MarketPower
    } else if delta < thresholds.dumping_price && sales > thresholds.dumping_sales * market_median_sales {
        StrategyLabel::Dumping
    } else {
        StrategyLabel::PerfectCompetition
    }
}

/// Mean and population standard deviation of the last `window` values.
pub fn window_moments(series: &[f64], window: usize) -> Result<(f64, f64), Error> {
    if window == 0 || window > series.len() {
        return Err(Error::WindowTooLong {
            window,
            len: series.len(),
        });
    }
    let tail = &series[series.len() - window..];
    let mean = tail.iter().sum::<f64>() / window as f64;
    let var = tail.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / window as f64;
    Ok((mean, sqrt(var)))
}

/// Per-episode GDP moments averaged across episodes, with standard errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GdpStats {
    pub mean: f64,
    pub mean_se: f64,
    pub std: f64,
    pub std_se: f64,
    pub episodes: usize,
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var / n))
}

/// Combines per-episode `(mean, std)` pairs.
pub fn combine_gdp_moments(moments: &[(f64, f64)]) -> Result<GdpStats, Error> {
    if moments.is_empty() {
        return Err(Error::Empty("no episodes"));
    }
    let means: Vec<f64> = moments.iter().map(|m| m.0).collect();
    let stds: Vec<f64> = moments.iter().map(|m| m.1).collect();
    let (mean, mean_se) = mean_and_se(&means);
    let (std, std_se) = mean_and_se(&stds);
    Ok(GdpStats {
        mean,
        mean_se,
        std,
        std_se,
        episodes: moments.len(),
    })
}

/// Mean and standard deviation of real GDP over the final `window` steps of
/// each episode's series, averaged across episodes.
pub fn gdp_stats<S: AsRef<[f64]>>(episodes: &[S], window: usize) -> Result<GdpStats, Error> {
    let moments = episodes
        .iter()
        .map(|s| window_moments(s.as_ref(), window))
        .collect::<Result<Vec<_>, _>>()?;
    combine_gdp_moments(&moments)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrfSettings {
    pub shock_size: f64,
    /// Shocked steps; 1 is an instantaneous shock.
    pub shock_duration: u64,
    /// First shocked step; must lie after the burn-in.
    pub t_shock: u64,
    pub num_seeds: usize,
}

impl IrfSettings {
    pub fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ConfigError> {
        if self.t_shock <= cfg.burn_in_steps as u64 {
            return Err(ConfigError::Invalid(alloc::format!(
                "shock step {} must come after the {} burn-in steps",
                self.t_shock,
                cfg.burn_in_steps
            )));
        }
        if self.t_shock > cfg.episode_len() as u64 {
            return Err(ConfigError::Invalid(alloc::format!(
                "shock step {} is beyond the {}-step episode",
                self.t_shock,
                cfg.episode_len()
            )));
        }
        if self.num_seeds == 0 {
            return Err(ConfigError::NotPositive { field: "num_seeds" });
        }
        if self.shock_duration == 0 {
            return Err(ConfigError::NotPositive { field: "shock_duration" });
        }
        if !self.shock_size.is_finite() || self.shock_size <= -1.0 {
            return Err(ConfigError::Invalid("shock size must be finite and above -1".into()));
        }
        Ok(())
    }
}

/// Percentage deviations of one shocked run from its unshocked twin, per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDeviation {
    pub seed: u64,
    pub consumption: Vec<f64>,
    pub real_gdp: Vec<f64>,
    pub deflator: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfSeries {
    pub mean: Vec<f64>,
    /// Standard error across seeds.
    pub se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfResult {
    pub settings: IrfSettings,
    /// Step number of each entry (1-based).
    pub steps: Vec<u64>,
    pub consumption: IrfSeries,
    pub real_gdp: IrfSeries,
    pub deflator: IrfSeries,
}

impl IrfResult {
    /// First step after the shock ends at which the mean consumption
    /// deviation is back within `tolerance_pct` percent.
    pub fn consumption_recovery(&self, tolerance_pct: f64) -> Option<u64> {
        recovery_step(&self.steps, &self.consumption.mean, self.settings.t_shock + self.settings.shock_duration, tolerance_pct)
    }
}

/// First step `>= from` whose deviation magnitude is within `tolerance_pct`.
pub fn recovery_step(steps: &[u64], deviation: &[f64], from: u64, tolerance_pct: f64) -> Option<u64> {
    steps
        .iter()
        .zip(deviation)
        .find(|(&t, d)| t >= from && d.abs() <= tolerance_pct)
        .map(|(&t, _)| t)
}

fn pct_deviation(shocked: f64, base: f64) -> f64 {
    if shocked == base {
        0.0
    } else {
        100.0 * (shocked - base) / base.abs().max(f64::MIN_POSITIVE)
    }
}

fn deflator(frame: &MetricsFrame) -> f64 {
    if frame.real_gdp > 0.0 {
        frame.nominal_gdp / frame.real_gdp
    } else {
        frame.price_index
    }
}

/// Runs the shocked and unshocked episodes for one seed on common random
/// numbers and returns the per-step deviations.
pub fn paired_deviation(
    cfg: &ExperimentConfig,
    policies: &PolicySet,
    settings: &IrfSettings,
    seed: u64,
) -> Result<PairedDeviation, Error> {
    settings.validate(cfg)?;
    let collect = |shock: Option<DemandShock>| -> Result<Vec<(f64, f64, f64)>, Error> {
        let mut tables = policies.clone();
        let opts = EpisodeOptions {
            shock,
            ..EpisodeOptions::testing(seed)
        };
        let mut out = Vec::with_capacity(cfg.episode_len());
        harness::run_episode_with(cfg, &mut tables, &opts, |f| {
            out.push((f.consumption, f.real_gdp, deflator(f)))
        })?;
        Ok(out)
    };
    let base = collect(None)?;
    let shocked = collect(Some(DemandShock {
        at_step: settings.t_shock,
        duration: settings.shock_duration,
        size: settings.shock_size,
    }))?;
    let dev = |pick: fn(&(f64, f64, f64)) -> f64| -> Vec<f64> {
        shocked
            .iter()
            .zip(&base)
            .map(|(s, b)| pct_deviation(pick(s), pick(b)))
            .collect()
    };
    Ok(PairedDeviation {
        seed,
        consumption: dev(|x| x.0),
        real_gdp: dev(|x| x.1),
        deflator: dev(|x| x.2),
    })
}

fn series(pairs: &[PairedDeviation], pick: fn(&PairedDeviation) -> &[f64]) -> IrfSeries {
    let len = pairs.first().map_or(0, |p| pick(p).len());
    let mut mean = Vec::with_capacity(len);
    let mut se = Vec::with_capacity(len);
    let mut column = Vec::with_capacity(pairs.len());
    for t in 0..len {
        column.clear();
        column.extend(pairs.iter().map(|p| pick(p)[t]));
        let (m, s) = mean_and_se(&column);
        mean.push(m);
        se.push(s);
    }
    IrfSeries { mean, se }
}

/// Averages paired deviations across seeds.
pub fn aggregate_irf(settings: IrfSettings, pairs: &[PairedDeviation]) -> Result<IrfResult, Error> {
    if pairs.is_empty() {
        return Err(Error::Empty("no impulse-response seeds"));
    }
    let len = pairs[0].consumption.len();
    Ok(IrfResult {
        settings,
        steps: (1..=len as u64).collect(),
        consumption: series(pairs, |p| &p.consumption),
        real_gdp: series(pairs, |p| &p.real_gdp),
        deflator: series(pairs, |p| &p.deflator),
    })
}

/// Seed of the `k`-th impulse-response pair.
pub fn irf_seed(cfg: &ExperimentConfig, k: usize) -> u64 {
    cfg.base_seed.wrapping_add(IRF_SEED_OFFSET + k as u64)
}

/// Impulse response of consumption, real GDP and the GDP deflator to a
/// demand shock, from `num_seeds` paired greedy runs.
pub fn impulse_response(
    cfg: &ExperimentConfig,
    policies: &PolicySet,
    settings: IrfSettings,
) -> Result<IrfResult, Error> {
    settings.validate(cfg)?;
    let pairs = (0..settings.num_seeds)
        .map(|k| paired_deviation(cfg, policies, &settings, irf_seed(cfg, k)))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate_irf(settings, &pairs)
}

#[cfg(test)]
mod tests;
