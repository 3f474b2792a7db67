//! The `train`, `evaluate`, `sweep` and `irf` commands.
//!
//! Each command writes into `<out>/<experiment>/<cell>/` and finishes with a
//! manifest under `manifest/`. A command that fails removes what it wrote.

use std::path::{Path, PathBuf};

use rmabm_core::harness::{self, Evaluation, ExperimentConfig, TrainingOutcome};
use rmabm_core::rl::PolicySet;

use crate::config::{FirmFrames, RunConfig, SweepGrid};
use crate::error::Error;
use crate::output::{self, record, unix_now, Artifacts, FileRecord, RunManifest};
use crate::{policy_io, run};

pub const POLICY_FILE: &str = "policy/policy.bin";

#[derive(Debug, Clone)]
pub struct Context {
    pub out_root: PathBuf,
    /// Worker threads, for the manifest.
    pub jobs: usize,
    pub argv: Vec<String>,
}

impl Context {
    pub fn experiment_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out_root.join(&cfg.name)
    }

    pub fn cell_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.experiment_dir(cfg).join(cell_name(cfg))
    }

    fn manifest(&self, command: &str, cell: &str, run: &RunConfig, seeds: Vec<u64>, inputs: Vec<FileRecord>) -> RunManifest {
        RunManifest {
            tool: concat!("rmabm ", env!("CARGO_PKG_VERSION")).into(),
            command: command.into(),
            argv: self.argv.clone(),
            cell: cell.into(),
            output_dir: PathBuf::new(),
            seeds,
            config: run.to_toml(),
            inputs,
            files: Vec::new(),
            jobs: self.jobs,
            started_unix: unix_now(),
            finished_unix: 0.0,
            wall_seconds: 0.0,
        }
    }
}

/// Directory name of a configuration inside its experiment.
pub fn cell_name(cfg: &ExperimentConfig) -> String {
    format!(
        "zc{}-n{}-{}-seed{}",
        cfg.model.search_depth, cfg.num_rl_agents, cfg.rl.policy_mode, cfg.base_seed
    )
}

fn training_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    if cfg.num_rl_agents == 0 {
        return Vec::new();
    }
    (1..=cfg.train_episodes).map(|t| cfg.train_seed(t)).collect()
}

fn test_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.test_episodes).map(|k| cfg.test_seed(k)).collect()
}

fn write_training(art: &mut Artifacts, outcome: &TrainingOutcome) -> Result<(), Error> {
    let path = art.reserve(POLICY_FILE)?;
    policy_io::write(&path, &outcome.trained)?;
    if policy_io::read(&path)? != outcome.trained {
        return Err(Error::Policy { path, reason: "read-back differs from the trained tables".into() });
    }
    let path = art.reserve("summary/training_curve.csv")?;
    output::write_table(
        &path,
        &["episode", "seed", "epsilon", "mean_rl_reward", "mean_heuristic_profit", "rl_bankruptcies"],
        outcome.curve.iter().map(|p| {
            vec![
                p.episode.to_string(),
                p.seed.to_string(),
                p.epsilon.to_string(),
                p.mean_rl_reward.to_string(),
                p.mean_heuristic_profit.to_string(),
                p.rl_bankruptcies.to_string(),
            ]
        }),
    )?;
    art.write_json(
        "summary/training.json",
        &serde_json::json!({
            "policy_mode": outcome.trained.mode(),
            "episodes_trained": outcome.trained.episodes_trained,
            "final_epsilon": outcome.trained.final_epsilon,
            "fingerprint": format!("{:016x}", outcome.trained.policies.fingerprint()),
        }),
    )?;
    Ok(())
}

pub const EPISODE_HEADER: [&str; 10] = [
    "episode", "seed", "rl_mean_reward", "rl_total_reward", "rl_total_return", "rl_bankruptcies",
    "heuristic_mean_profit", "heuristic_median_sales", "gdp_mean", "gdp_std",
];

fn episode_rows(eval: &Evaluation) -> impl Iterator<Item = Vec<String>> + '_ {
    eval.episodes.iter().map(|e| {
        vec![
            e.episode.to_string(),
            e.seed.to_string(),
            e.rl_mean_reward.map(|r| r.to_string()).unwrap_or_default(),
            e.rl_total_reward.to_string(),
            e.rl_total_return.to_string(),
            e.rl_bankruptcies.to_string(),
            e.heuristic_mean_profit.to_string(),
            e.heuristic_median_sales.to_string(),
            e.gdp_mean.to_string(),
            e.gdp_std.to_string(),
        ]
    })
}

fn frame_paths(art: &mut Artifacts, run: &RunConfig) -> Result<Vec<(PathBuf, Option<PathBuf>)>, Error> {
    (0..run.experiment.test_episodes)
        .map(|k| {
            let agg = art.reserve(&format!("frames/episode_{k:03}.csv"))?;
            let firms = match run.output.firm_frames {
                FirmFrames::All => true,
                FirmFrames::First => k == 0,
                FirmFrames::None => false,
            };
            let firms = if firms { Some(art.reserve(&format!("frames/episode_{k:03}_firms.csv"))?) } else { None };
            Ok((agg, firms))
        })
        .collect()
}

fn evaluate_into(art: &mut Artifacts, run: &RunConfig, policies: &PolicySet) -> Result<Evaluation, Error> {
    let cfg = &run.experiment;
    let paths = frame_paths(art, run)?;
    let eval = run::evaluate(cfg, policies, &run.thresholds, |k, frames| {
        let (agg, firms) = &paths[k];
        output::write_aggregate_frames(agg, frames)?;
        if let Some(p) = firms {
            output::write_firm_frames(p, frames, cfg.num_rl_agents, cfg.burn_in_steps)?;
        }
        Ok(())
    })?;
    art.write_json("summary/evaluation.json", &eval)?;
    let path = art.reserve("summary/episodes.csv")?;
    output::write_table(&path, &EPISODE_HEADER, episode_rows(&eval))?;
    let path = art.reserve("summary/firms.csv")?;
    output::write_table(
        &path,
        &["episode", "firm", "rl", "median_log_price_delta", "median_sales", "relative_sales", "mean_reward", "label"],
        eval.episodes.iter().flat_map(|e| {
            e.firms.iter().map(move |f| {
                let rl = f.firm < cfg.num_rl_agents;
                let relative = if e.heuristic_median_sales > 0.0 { f.median_sales / e.heuristic_median_sales } else { f64::NAN };
                vec![
                    e.episode.to_string(),
                    f.firm.to_string(),
                    u8::from(rl).to_string(),
                    f.median_log_price_delta.to_string(),
                    f.median_sales.to_string(),
                    relative.to_string(),
                    f.mean_reward.to_string(),
                    if rl { e.labels[f.firm].as_str().to_string() } else { String::new() },
                ]
            })
        }),
    )?;
    Ok(eval)
}

/// `train`: tables, training curve, manifest.
pub fn train(ctx: &Context, run: &RunConfig) -> Result<RunManifest, Error> {
    let cfg = &run.experiment;
    let cell = cell_name(cfg);
    let manifest = ctx.manifest("train", &cell, run, training_seeds(cfg), Vec::new());
    let mut art = Artifacts::new(ctx.cell_dir(cfg))?;
    let outcome = harness::train(cfg)?;
    write_training(&mut art, &outcome)?;
    art.commit(manifest)
}

/// Loads `path`, or the cell's own policy file; a run without agents needs none.
fn load_policies(ctx: &Context, cfg: &ExperimentConfig, path: Option<&Path>) -> Result<(PolicySet, Vec<FileRecord>), Error> {
    let default = ctx.cell_dir(cfg).join(POLICY_FILE);
    let path = match path {
        Some(p) => p.to_path_buf(),
        None if default.exists() || cfg.num_rl_agents > 0 => default,
        None => return Ok((cfg.fresh_policies(), Vec::new())),
    };
    let set = policy_io::read(&path)?;
    if cfg.num_rl_agents > 0 {
        cfg.check_policies(&set.policies).map_err(|e| Error::Policy { path: path.clone(), reason: e.to_string() })?;
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut rec = record(dir, &name)?;
    rec.path = path.display().to_string();
    let policies = if cfg.num_rl_agents == 0 { cfg.fresh_policies() } else { set.policies };
    Ok((policies, vec![rec]))
}

/// `evaluate`: frames, summaries, figure tables, manifest.
pub fn evaluate(ctx: &Context, run: &RunConfig, policy: Option<&Path>) -> Result<RunManifest, Error> {
    let cfg = &run.experiment;
    let (policies, inputs) = load_policies(ctx, cfg, policy)?;
    let cell = cell_name(cfg);
    let manifest = ctx.manifest("evaluate", &cell, run, test_seeds(cfg), inputs);
    let mut art = Artifacts::new(ctx.cell_dir(cfg))?;
    evaluate_into(&mut art, run, &policies)?;
    art.commit(manifest)
}

/// `irf`: impulse-response curves, manifest.
pub fn irf(ctx: &Context, run: &RunConfig, policy: Option<&Path>) -> Result<RunManifest, Error> {
    let cfg = &run.experiment;
    let settings = run.irf.settings(cfg);
    settings.validate(cfg)?;
    let (policies, inputs) = load_policies(ctx, cfg, policy)?;
    let seeds = (0..settings.num_seeds).map(|k| rmabm_core::analysis::irf_seed(cfg, k)).collect();
    let manifest = ctx.manifest("irf", &cell_name(cfg), run, seeds, inputs);
    let mut art = Artifacts::new(ctx.cell_dir(cfg))?;
    let result = run::impulse_response(cfg, &policies, settings)?;
    let path = art.reserve("summary/irf.csv")?;
    output::write_table(
        &path,
        &["step", "consumption", "consumption_se", "real_gdp", "real_gdp_se", "deflator", "deflator_se"],
        (0..result.steps.len()).map(|i| {
            vec![
                result.steps[i].to_string(),
                result.consumption.mean[i].to_string(),
                result.consumption.se[i].to_string(),
                result.real_gdp.mean[i].to_string(),
                result.real_gdp.se[i].to_string(),
                result.deflator.mean[i].to_string(),
                result.deflator.se[i].to_string(),
            ]
        }),
    )?;
    art.write_json(
        "summary/irf.json",
        &serde_json::json!({
            "settings": result.settings,
            "consumption_recovery_step_1pct": result.consumption_recovery(1.0),
        }),
    )?;
    art.commit(manifest)
}

/// The configurations of a sweep, in grid order (z_c, N, mode, seed).
pub fn sweep_cells(run: &RunConfig) -> Vec<RunConfig> {
    let base = &run.experiment;
    fn or<T: Clone>(v: &[T], d: T) -> Vec<T> {
        if v.is_empty() {
            vec![d]
        } else {
            v.to_vec()
        }
    }
    let SweepGrid { search_depth, num_rl_agents, policy_mode, base_seed } = &run.sweep;
    let mut cells = Vec::new();
    for &z in &or(search_depth, base.model.search_depth) {
        for &n in &or(num_rl_agents, base.num_rl_agents) {
            for &mode in &or(policy_mode, base.rl.policy_mode) {
                for &seed in &or(base_seed, base.base_seed) {
                    let mut cell = run.clone();
                    cell.sweep = SweepGrid::default();
                    cell.experiment.model.search_depth = z;
                    cell.experiment.num_rl_agents = n;
                    cell.experiment.rl.policy_mode = mode;
                    cell.experiment.base_seed = seed;
                    cells.push(cell);
                }
            }
        }
    }
    cells
}

pub const SWEEP_HEADER: [&str; 5] = ["cell", "search_depth", "num_rl_agents", "policy_mode", "base_seed"];

/// `sweep`: train and evaluate every grid cell in parallel, then a combined
/// table with one row per cell and test episode. Nothing is kept unless
/// every cell succeeds.
pub fn sweep(ctx: &Context, run: &RunConfig) -> Result<Vec<RunManifest>, Error> {
    let cells = sweep_cells(run);
    for c in &cells {
        c.experiment.validate()?;
    }
    let results = run::par_map(&cells, |cell| -> Result<(Artifacts, RunManifest, Evaluation), Error> {
        let cfg = &cell.experiment;
        let mut seeds = training_seeds(cfg);
        seeds.extend(test_seeds(cfg));
        let manifest = ctx.manifest("sweep", &cell_name(cfg), cell, seeds, Vec::new());
        let mut art = Artifacts::new(ctx.cell_dir(cfg))?;
        let outcome = harness::train(cfg)?;
        write_training(&mut art, &outcome)?;
        let eval = evaluate_into(&mut art, cell, &outcome.trained.policies)?;
        Ok((art, manifest, eval))
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut top = Artifacts::new(ctx.experiment_dir(&run.experiment))?;
    let path = top.reserve("summary/sweep.csv")?;
    let header: Vec<&str> = SWEEP_HEADER.iter().chain(EPISODE_HEADER.iter()).copied().collect();
    output::write_table(
        &path,
        &header,
        cells.iter().zip(&results).flat_map(|(cell, (_, _, eval))| {
            let cfg = &cell.experiment;
            let lead = vec![
                cell_name(cfg),
                cfg.model.search_depth.to_string(),
                cfg.num_rl_agents.to_string(),
                cfg.rl.policy_mode.to_string(),
                cfg.base_seed.to_string(),
            ];
            episode_rows(eval).map(move |row| lead.iter().cloned().chain(row).collect())
        }),
    )?;
    let mut manifests = Vec::with_capacity(results.len() + 1);
    let seeds = cells.iter().map(|c| c.experiment.base_seed).collect();
    let top_manifest = ctx.manifest("sweep", "", run, seeds, Vec::new());
    // Commit the cells first so a failing cell commit still removes the table.
    let mut committed = Vec::new();
    for (art, manifest, _) in results {
        committed.push(art.commit(manifest)?);
    }
    manifests.push(top.commit(top_manifest)?);
    manifests.extend(committed);
    Ok(manifests)
}
