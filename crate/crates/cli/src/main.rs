use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cutsim::harness::{
    collect_samples, gen_dataset, plan_dataset, read_episode, run_episode, safety_ablation, sweep_youngs, write_episode,
    write_sweep_csv, EpisodeRecord, Manifest, RunConfig, MANIFEST_JSON,
};
use cutsim::mpm::{Material, ReductionMode};
use cutsim::planner::{CutState, CutStyle, ObjectKind};
use cutsim::safety::{fit_model, read_samples_csv, write_samples_csv, ForceModel, ModelKind};

#[derive(Parser)]
#[command(name = "cutsim", version, about = "Knife-cutting simulation and experiment harness")]
struct Cli {
    /// TOML run configuration; every section is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Force the fixed-order scatter reduction.
    #[arg(long, global = true)]
    deterministic: bool,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Force limit for the safety module (N).
    #[arg(long, global = true)]
    fmax: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its record.
    Simulate {
        #[arg(long)]
        object: Option<String>,
        #[arg(long)]
        style: Option<String>,
        /// `middle`, `split<k>`, `ratio<r>` or `ratio<r>-right`.
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        youngs: Option<f64>,
        /// Approach speed (m/s).
        #[arg(long)]
        speed: Option<f64>,
        /// Cap commanded knife speed (m/s).
        #[arg(long)]
        velocity_limit: Option<f64>,
    },
    /// Peak force and post-impact speed across Young's moduli.
    SweepYoungs {
        /// Comma-separated moduli (Pa); defaults to the config sweep.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Collect force samples and fit the peak-force model.
    FitSafety {
        /// Fit these samples instead of simulating new ones.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Kind::Quadratic)]
        kind: Kind,
    },
    /// Paired runs with and without the velocity limit.
    SafetyAblation {
        /// Model written by `fit-safety`; fitted inline when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Commanded speed of the unlimited runs (m/s).
        #[arg(long)]
        speed: Option<f64>,
    },
    /// Augmented episodes with paired instructions for the task grid.
    GenDataset {
        #[arg(long)]
        count: Option<usize>,
        /// Plan and word episodes without simulating them.
        #[arg(long)]
        plan_only: bool,
    },
    /// Summarize verdicts of an episode directory or dataset.
    Eval {
        path: PathBuf,
        /// Re-run each episode and check the force series is bit-identical.
        #[arg(long)]
        replay: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Linear,
    Quadratic,
}

impl From<Kind> for ModelKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Linear => ModelKind::Linear,
            Kind::Quadratic => ModelKind::Quadratic,
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.sim.seed = seed;
    }
    if cli.deterministic {
        cfg.sim.reduction = ReductionMode::Deterministic;
    }
    if let Some(f) = cli.fmax {
        cfg.safety.f_max = f;
    }
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn report(record: &EpisodeRecord) {
    let s = &record.summary;
    println!(
        "{} {} {}: status {:?}, pieces {}, peak force {:.3} N, success {}",
        record.spec.task.object,
        record.spec.task.style,
        record.spec.task.state.label(),
        s.status,
        s.final_pieces,
        s.peak_force,
        record.succeeded()
    );
    if let Some(reason) = &s.verdict.reason {
        println!("  verdict: {reason}");
    }
}

fn materials_for(cfg: &RunConfig) -> Vec<Material> {
    cfg.safety
        .probe_youngs
        .iter()
        .map(|&e| Material {
            youngs_modulus: e,
            ..cfg.material.clone()
        })
        .collect()
}

fn fit_inline(cfg: &RunConfig, kind: ModelKind, out: &Path) -> Result<ForceModel> {
    let (samples, _) = collect_samples(cfg)?;
    write_samples_csv(&samples, fs::File::create(out.join("safety_samples.csv"))?)?;
    let model = fit_model(&samples, kind)?;
    model.write_json(fs::File::create(out.join("safety_model.json"))?)?;
    Ok(model)
}

fn replay_matches(record: &EpisodeRecord) -> Result<bool> {
    let again = run_episode(&record.spec)?;
    let bits = |r: &EpisodeRecord| -> Vec<[u64; 4]> {
        r.forces
            .iter()
            .map(|f| [f.t.to_bits(), f.force.x.to_bits(), f.force.y.to_bits(), f.force.z.to_bits()])
            .collect()
    };
    Ok(bits(&again) == bits(record))
}

fn eval(path: &Path, replay: bool) -> Result<bool> {
    let manifest_path = path.join(MANIFEST_JSON);
    let dirs: Vec<PathBuf> = if manifest_path.exists() {
        let manifest: Manifest = serde_json::from_slice(&fs::read(&manifest_path)?)?;
        if manifest.plan_only {
            bail!("{} holds planned episodes only; nothing to evaluate", path.display());
        }
        if !manifest.complete {
            log::warn!("manifest is flagged incomplete");
        }
        manifest
            .entries
            .iter()
            .filter(|e| e.error.is_none())
            .map(|e| path.join(&e.dir))
            .collect()
    } else {
        vec![path.to_path_buf()]
    };
    let (mut passed, mut all_replayed) = (0usize, true);
    for dir in &dirs {
        let record = read_episode(dir)?;
        report(&record);
        passed += usize::from(record.succeeded());
        if replay {
            let same = replay_matches(&record)?;
            println!("  replay {}", if same { "bit-identical" } else { "DIFFERS" });
            all_replayed &= same;
        }
    }
    println!("success {passed}/{}", dirs.len());
    Ok(all_replayed)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = load_config(&cli)?;
    let out = cli.out.clone();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    match cli.command {
        Command::Simulate {
            object,
            style,
            state,
            youngs,
            speed,
            velocity_limit,
        } => {
            if let Some(o) = object {
                cfg.task.object = ObjectKind::from_name(&o)?;
            }
            if let Some(s) = style {
                cfg.task.style = CutStyle::from_name(&s)?;
            }
            if let Some(s) = state {
                cfg.task.state = CutState::from_label(&s)?;
            }
            if let Some(e) = youngs {
                cfg.material.youngs_modulus = e;
            }
            if let Some(v) = speed {
                cfg.task.speed = v;
            }
            let mut spec = cfg.episode();
            spec.velocity_limit = velocity_limit;
            let record = run_episode(&spec)?;
            let dir = out.join(format!("episode_seed{}", spec.seed));
            write_episode(&record, &dir)?;
            report(&record);
            println!("wrote {}", dir.display());
            if record.diverged() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::SweepYoungs { values } => {
            let youngs = values.unwrap_or_else(|| cfg.sweep.youngs.clone());
            let result = sweep_youngs(&cfg, &youngs)?;
            for (row, record) in result.rows.iter().zip(&result.records) {
                write_episode(record, &out.join(format!("sweep_E{}", row.youngs)))?;
            }
            let path = out.join("sweep_summary.csv");
            write_sweep_csv(&result.rows, fs::File::create(&path)?)?;
            write_sweep_csv(&result.rows, std::io::stdout())?;
            if result.records.iter().any(EpisodeRecord::diverged) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::FitSafety { samples, kind } => {
            let model = match samples {
                Some(path) => {
                    let samples = read_samples_csv(fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?)?;
                    let model = fit_model(&samples, kind.into())?;
                    model.write_json(fs::File::create(out.join("safety_model.json"))?)?;
                    model
                }
                None => fit_inline(&cfg, kind.into(), &out)?,
            };
            println!("{}", serde_json::to_string_pretty(&model)?);
        }
        Command::SafetyAblation { model, speed } => {
            let model = match model {
                Some(path) => ForceModel::read_json(fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?)?,
                None => fit_inline(&cfg, ModelKind::Quadratic, &out)?,
            };
            let speed = speed.unwrap_or(cfg.safety.aggressive_speed);
            let table = safety_ablation(&cfg, &model, &materials_for(&cfg), speed)?;
            write_json(&out.join("safety_ablation.json"), &table)?;
            println!("module,avg_max_speed,peak_force,episodes");
            for row in &table.rows {
                println!("{},{:.4},{:.4},{}", row.module, row.avg_max_speed, row.peak_force, row.episodes);
            }
        }
        Command::GenDataset { count, plan_only } => {
            if let Some(c) = count {
                cfg.dataset.count = c;
            }
            let plan_only = plan_only || cfg.dataset.plan_only;
            let specs = plan_dataset(&cfg)?;
            let manifest = gen_dataset(&specs, &out, plan_only)?;
            let failed = manifest.entries.iter().filter(|e| e.error.is_some()).count();
            println!("{} episodes, {failed} failed, manifest {}", manifest.entries.len(), out.join(MANIFEST_JSON).display());
            if !manifest.complete {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Eval { path, replay } => {
            if !eval(&path, replay)? {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
