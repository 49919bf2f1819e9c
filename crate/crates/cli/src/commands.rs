use std::path::{Path, PathBuf};

use adiabatic_core::levelmap::return_events;
use adiabatic_core::spectra::level_map;
use adiabatic_core::stochastic::{kl_rho, lln_slopes, mc_gain_with, Lane, RandomAccessBernoulli};
use adiabatic_core::tdse::run_period_experiment;
use adiabatic_core::{
    entropy, growth_rate, AdiabaticLevelMap, Classification, Group, IndicatorSource,
    LevelTrajectory, SegmentModelParams, SpinModelParams,
};
use serde_json::json;

use crate::config::{ExperimentConfig, Model};
use crate::output::{fmt_f64, sha256_hex, OutputDir, RunManifest};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Levelmap,
    Trajectory,
    Montecarlo,
    Tdse,
    ValidateConfig,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Levelmap => "levelmap",
            CommandKind::Trajectory => "trajectory",
            CommandKind::Montecarlo => "montecarlo",
            CommandKind::Tdse => "tdse",
            CommandKind::ValidateConfig => "validate-config",
        }
    }
}

/// Human-readable result lines and the files written.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub lines: Vec<String>,
    pub manifest: Option<PathBuf>,
}

/// Hash of the resolved configuration (after command-line overrides).
pub fn config_hash(config: &ExperimentConfig) -> Result<String, CliError> {
    Ok(sha256_hex(&serde_json::to_vec(config)?))
}

/// Validates `config` and runs `kind`, writing into `out_dir`.
pub fn run_command(
    kind: CommandKind,
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<RunSummary, CliError> {
    config.validate()?;
    if kind == CommandKind::ValidateConfig {
        return Ok(RunSummary {
            lines: vec![format!("configuration valid (model {:?})", config.model)],
            manifest: None,
        });
    }
    let required = match kind {
        CommandKind::Montecarlo => Some(Model::Bernoulli),
        CommandKind::Tdse => Some(Model::Tdse),
        _ => None,
    };
    if let Some(model) = required {
        if config.model != model {
            return Err(CliError::Config(format!(
                "`{}` needs model {model:?}, config selects {:?}",
                kind.name(),
                config.model
            )));
        }
    } else if config.model == Model::Tdse {
        return Err(CliError::Config(format!(
            "`{}` needs a level-map model, not tdse",
            kind.name()
        )));
    }

    let hash = config_hash(config)?;
    let header = vec![
        format!("adiabatic {}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", kind.name()),
        format!("model: {:?}", config.model),
        format!("seed: {}", config.seed),
        format!("config_sha256: {hash}"),
    ];
    let mut out = OutputDir::create(out_dir, header)?;
    let mut seeds = vec![config.seed];
    let mut derived = json!({});
    let lines = match kind {
        CommandKind::Levelmap | CommandKind::Trajectory => {
            let mut lines = Vec::new();
            match build_map(config)? {
                AnyMap::Finite(mut map, rows) => {
                    level_outputs(kind, config, &mut map, rows, &mut out, &mut lines)?
                }
                AnyMap::Random(mut map, rows) => {
                    level_outputs(kind, config, &mut map, rows, &mut out, &mut lines)?
                }
            }
            lines
        }
        CommandKind::Montecarlo => montecarlo(config, &mut out, &mut seeds)?,
        CommandKind::Tdse => tdse(config, &mut out, &mut derived)?,
        CommandKind::ValidateConfig => unreachable!("handled above"),
    };
    let manifest = out.finish(RunManifest {
        tool: "adiabatic",
        version: env!("CARGO_PKG_VERSION"),
        command: kind.name().to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        config_sha256: hash,
        seeds,
        config: serde_json::to_value(config)?,
        derived,
        files: Vec::new(),
    })?;
    Ok(RunSummary {
        lines,
        manifest: Some(manifest),
    })
}

enum AnyMap {
    Finite(AdiabaticLevelMap, u64),
    Random(AdiabaticLevelMap<RandomAccessBernoulli>, u64),
}

fn build_map(config: &ExperimentConfig) -> Result<AnyMap, CliError> {
    let t = &config.trajectory;
    // Finite spectra must resolve every level a trajectory may visit.
    let reach = |rows: u64| if t.k0.is_empty() { rows } else { rows.max(t.escape_threshold) } as usize;
    Ok(match config.model {
        Model::Segment => {
            let s = &config.segment;
            AnyMap::Finite(
                SegmentModelParams::new(s.a1, s.a2, reach(s.levels))?.level_map()?,
                s.levels,
            )
        }
        Model::Spin => {
            let s = &config.spin;
            AnyMap::Finite(
                SpinModelParams::new(s.b1, s.b2, reach(s.levels))?.level_map()?,
                s.levels,
            )
        }
        Model::UserSpectra => {
            let path = config.user_spectra.path.as_ref().expect("validated");
            let (s1, s2) = crate::load_user_spectra(path)?;
            let rows = s1.level_count() as u64;
            AnyMap::Finite(level_map(&s1, &s2), rows)
        }
        Model::Bernoulli => {
            let b = &config.bernoulli;
            let second = if b.common_stream { 1 } else { 2 };
            let sigma = |p, which| {
                RandomAccessBernoulli::new(p, config.seed, b.stream_id, Lane::sequence(which))
            };
            AnyMap::Random(
                AdiabaticLevelMap::new(sigma(b.beta, 1), sigma(b.gamma, second)),
                b.levels,
            )
        }
        Model::Tdse => unreachable!("rejected before building a map"),
    })
}

fn sign(g: Group) -> &'static str {
    match g {
        Group::I => "+1",
        Group::II => "-1",
    }
}

fn level_outputs<S: IndicatorSource>(
    kind: CommandKind,
    config: &ExperimentConfig,
    map: &mut AdiabaticLevelMap<S>,
    rows: u64,
    out: &mut OutputDir,
    lines: &mut Vec<String>,
) -> Result<(), CliError> {
    if kind == CommandKind::Levelmap {
        let mut table = Vec::with_capacity(rows as usize);
        for k in 1..=rows {
            let kbar = map.map_forward(k)?;
            table.push(vec![
                k.to_string(),
                sign(map.sigma1.group(k)?).into(),
                map.sigma1.prefix_sum(k)?.to_string(),
                kbar.to_string(),
                sign(map.sigma2.group(kbar)?).into(),
            ]);
        }
        out.write_csv(
            "levelmap.csv",
            &["k", "sigma1", "S1", "kbar", "sigma2_kbar"],
            table,
        )?;
        lines.push(format!("level map for k = 1..={rows} written"));
    }

    let t = &config.trajectory;
    let mut summary = Vec::new();
    for &k0 in &t.k0 {
        let forward = map.iterate(k0, t.step_limit, t.escape_threshold);
        out.write_csv(
            &format!("trajectory_k{k0}.csv"),
            &["step", "k", "ln_k", "entropy"],
            trajectory_rows(&forward),
        )?;
        summary.push(summary_row("forward", &forward));
        lines.push(describe(&forward));
        if kind == CommandKind::Trajectory {
            let backward = map.iterate_backward(k0, t.step_limit, t.escape_threshold);
            out.write_csv(
                &format!("trajectory_backward_k{k0}.csv"),
                &["step", "k", "ln_k", "entropy"],
                trajectory_rows(&backward),
            )?;
            summary.push(summary_row("backward", &backward));
            let returns: Vec<Vec<String>> = return_events(&forward.levels)
                .into_iter()
                .map(|(len, count)| vec![len.to_string(), count.to_string()])
                .collect();
            out.write_csv(
                &format!("returns_k{k0}.csv"),
                &["return_length", "count"],
                returns,
            )?;
        }
    }
    if !summary.is_empty() {
        out.write_csv(
            "trajectories.csv",
            &[
                "k0",
                "direction",
                "steps",
                "final_k",
                "classification",
                "loop_period",
                "growth_rate",
                "stopped_by",
            ],
            summary,
        )?;
    }
    Ok(())
}

fn trajectory_rows(traj: &LevelTrajectory) -> Vec<Vec<String>> {
    traj.levels
        .iter()
        .enumerate()
        .map(|(s, &k)| {
            let h = entropy(k);
            vec![
                s.to_string(),
                k.to_string(),
                fmt_f64((k as f64).ln()),
                fmt_f64(h),
            ]
        })
        .collect()
}

fn classification_name(c: &Classification) -> (&'static str, String) {
    match c {
        Classification::Loop { period } => ("loop", period.to_string()),
        Classification::Escaped { .. } => ("escaped", String::new()),
        Classification::Undetermined { .. } => ("undetermined", String::new()),
    }
}

fn summary_row(direction: &str, traj: &LevelTrajectory) -> Vec<String> {
    let (class, period) = classification_name(&traj.classification);
    vec![
        traj.start.to_string(),
        direction.to_string(),
        traj.steps().to_string(),
        traj.last().to_string(),
        class.to_string(),
        period,
        growth_rate(traj).map(fmt_f64).unwrap_or_default(),
        traj.stopped_by
            .as_ref()
            .map(|e| e.to_string())
            .unwrap_or_default(),
    ]
}

fn describe(traj: &LevelTrajectory) -> String {
    let (class, _) = classification_name(&traj.classification);
    let head: Vec<String> = traj.levels.iter().take(8).map(u64::to_string).collect();
    let more = if traj.levels.len() > 8 { ", ..." } else { "" };
    format!(
        "k0={}: {}{} ({class} after {} steps)",
        traj.start,
        head.join(", "),
        more,
        traj.steps()
    )
}

fn montecarlo(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    seeds: &mut Vec<u64>,
) -> Result<Vec<String>, CliError> {
    let b = &config.bernoulli;
    let params = b.params(config.seed)?;
    let est = mc_gain_with(&params, b.k_start, b.trials, b.backend())?;
    out.write_csv(
        "montecarlo.csv",
        &[
            "beta",
            "gamma",
            "k_start",
            "trials",
            "mean",
            "std_error",
            "kl_rho",
            "bias_allowance",
            "consistent_3se",
        ],
        [vec![
            fmt_f64(b.beta),
            fmt_f64(b.gamma),
            b.k_start.to_string(),
            b.trials.to_string(),
            fmt_f64(est.mean),
            fmt_f64(est.std_error),
            fmt_f64(est.reference),
            fmt_f64(est.bias_allowance),
            est.consistent_with_reference(3.0).to_string(),
        ]],
    )?;

    let rho = kl_rho(b.beta, b.gamma)?;
    *seeds = (config.seed..config.seed.saturating_add(b.lln_seeds)).collect();
    let runs = lln_slopes(&params, seeds, b.lln_k0, b.lln_periods, b.lln_options())?;
    let mut within = 0;
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|(seed, t)| {
            let slope = t.slope();
            let ok = slope.is_some_and(|s| (s - rho).abs() <= 0.3 * rho);
            within += usize::from(ok);
            vec![
                seed.to_string(),
                t.trajectory.steps().to_string(),
                t.trajectory.last().to_string(),
                slope.map(fmt_f64).unwrap_or_default(),
                ok.to_string(),
                t.overflowed.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "lln_slopes.csv",
        &[
            "seed",
            "periods",
            "final_k",
            "slope",
            "within_30pct",
            "overflowed",
        ],
        rows,
    )?;
    Ok(vec![
        format!(
            "mean gain {:.6} +- {:.6} over {} trials; kl_rho = {:.6}",
            est.mean, est.std_error, est.trials, rho
        ),
        format!("{within}/{} slopes within 30% of kl_rho", runs.len()),
    ])
}

fn tdse(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    derived: &mut serde_json::Value,
) -> Result<Vec<String>, CliError> {
    let s = &config.tdse;
    let grid = s.grid()?;
    let schedule = s.schedule();
    let report = run_period_experiment(&grid, &schedule, s.k0, &s.options())?;

    let mut rows = Vec::new();
    for c in &report.checkpoints {
        for (i, (e, p)) in c.energies.iter().zip(&c.populations).enumerate() {
            rows.push(vec![
                c.label.to_string(),
                fmt_f64(c.tau),
                (i + 1).to_string(),
                fmt_f64(*e),
                fmt_f64(*p),
            ]);
        }
    }
    out.write_csv(
        "tdse_checkpoints.csv",
        &["checkpoint", "tau", "level", "energy", "population"],
        rows,
    )?;
    out.write_csv(
        "tdse_energy.csv",
        &["time", "tau", "energy"],
        report
            .energy_series
            .iter()
            .map(|e| vec![fmt_f64(e.time), fmt_f64(e.tau), fmt_f64(e.energy)]),
    )?;
    let end = report.final_checkpoint();
    out.write_csv(
        "tdse_summary.csv",
        &[
            "k0",
            "k_predicted",
            "k_observed",
            "population_predicted",
            "population_observed",
            "dt",
            "steps",
            "norm_drift",
            "leakage",
        ],
        [vec![
            report.k0.to_string(),
            report.k_predicted.to_string(),
            report.k_observed.to_string(),
            fmt_f64(end.population(report.k_predicted)),
            fmt_f64(end.population(report.k_observed)),
            fmt_f64(report.dt),
            report.steps.to_string(),
            fmt_f64(report.norm_drift),
            fmt_f64(report.leakage()),
        ]],
    )?;
    *derived = json!({
        "dx": grid.dx(),
        "n_points": grid.n_points(),
        "x_max": grid.x_max(),
        "dt": report.dt,
        "steps": report.steps,
        "period_duration": schedule.period_duration(),
    });
    Ok(vec![format!(
        "k0={} predicted k={} observed k={} (I={:.4}, norm drift {:.1e})",
        report.k0,
        report.k_predicted,
        report.k_observed,
        end.population(report.k_observed),
        report.norm_drift
    )])
}
