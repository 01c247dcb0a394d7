use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::{EpisodeSpec, RunConfig};
use crate::harness::episode::{episode_instruction, plan_episode, prepare_scene, run_episode, EpisodeRecord, EpisodeStatus};
use crate::harness::output::{write_atomically, write_episode, INSTRUCTION_TXT, TRAJECTORY_CSV};
use crate::instructions::Direction;
use crate::mpm::Material;
use crate::planner::{augment, write_trajectory_csv, CutState, CutStyle, CutTask};
use crate::safety::{safe_velocity, ForceModel, MaterialFeatures, SafetySample};

/// One line of the stiffness sweep. Diverged runs leave the measurements empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "E")]
    pub youngs: f64,
    #[serde(rename = "F_peak")]
    pub f_peak: Option<f64>,
    pub v_post: Option<f64>,
    pub t_peak_index: Option<usize>,
    pub t_vmin_index: Option<usize>,
}

impl SweepRow {
    fn from_record(youngs: f64, record: &EpisodeRecord) -> Self {
        if record.diverged() {
            return Self {
                youngs,
                f_peak: None,
                v_post: None,
                t_peak_index: None,
                t_vmin_index: None,
            };
        }
        let s = &record.summary;
        Self {
            youngs,
            f_peak: Some(s.peak_force),
            v_post: s.min_contact_speed,
            t_peak_index: s.peak_index,
            t_vmin_index: s.min_speed_index,
        }
    }
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub records: Vec<EpisodeRecord>,
}

fn with_youngs(spec: &EpisodeSpec, youngs: f64) -> EpisodeSpec {
    let mut s = spec.clone();
    s.scene.material.youngs_modulus = youngs;
    s
}

/// Runs the configured episode once per Young's modulus, in parallel.
pub fn sweep_youngs(cfg: &RunConfig, youngs: &[f64]) -> Result<SweepResult> {
    if youngs.len() < 2 {
        return Err(Error::Config(format!("a sweep needs at least two moduli, got {}", youngs.len())));
    }
    let base = cfg.episode();
    let records: Vec<EpisodeRecord> = youngs
        .par_iter()
        .map(|&e| run_episode(&with_youngs(&base, e)))
        .collect::<Result<_>>()?;
    let rows = youngs
        .iter()
        .zip(&records)
        .map(|(&e, r)| {
            if r.diverged() {
                log::warn!("sweep run at E = {e} diverged: {:?}", r.summary.status);
            }
            SweepRow::from_record(e, r)
        })
        .collect();
    Ok(SweepResult { rows, records })
}

/// Header `E,F_peak,v_post,t_peak_index,t_vmin_index`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Probes every (modulus, speed) pair in the safety settings and records the peak force.
///
/// Diverged probes are dropped from the samples but kept in the records.
pub fn collect_samples(cfg: &RunConfig) -> Result<(Vec<SafetySample>, Vec<EpisodeRecord>)> {
    let base = cfg.episode();
    let probes: Vec<(f64, f64)> = cfg
        .safety
        .probe_youngs
        .iter()
        .flat_map(|&e| cfg.safety.probe_velocities.iter().map(move |&v| (e, v)))
        .collect();
    let records: Vec<EpisodeRecord> = probes
        .par_iter()
        .map(|&(e, v)| {
            let mut spec = with_youngs(&base, e);
            spec.task.speed = v;
            run_episode(&spec)
        })
        .collect::<Result<_>>()?;
    let samples = probes
        .iter()
        .zip(&records)
        .filter(|(_, r)| !r.diverged())
        .map(|(&(e, v), r)| SafetySample {
            v,
            youngs_modulus: e,
            yield_stress: r.spec.scene.material.yield_stress,
            force: r.summary.peak_force,
        })
        .collect();
    Ok((samples, records))
}

/// One paired run of the ablation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationEpisode {
    pub module_on: bool,
    pub youngs: f64,
    pub commanded_speed: f64,
    pub v_safe: Option<f64>,
    pub max_speed: f64,
    pub peak_force: f64,
    pub status: EpisodeStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub module: String,
    /// Mean over episodes of the largest knife speed reached (m/s).
    pub avg_max_speed: f64,
    /// Largest peak force over episodes (N).
    pub peak_force: f64,
    pub episodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub f_max: f64,
    /// Force the velocity solve targeted after the residual margin (N).
    pub target_force: f64,
    pub rows: Vec<AblationRow>,
    pub episodes: Vec<AblationEpisode>,
}

fn ablation_row(module: &str, episodes: &[&AblationEpisode]) -> AblationRow {
    let n = episodes.len();
    AblationRow {
        module: module.to_string(),
        avg_max_speed: episodes.iter().map(|e| e.max_speed).sum::<f64>() / n.max(1) as f64,
        peak_force: episodes.iter().map(|e| e.peak_force).fold(0.0, f64::max),
        episodes: n,
    }
}

/// Runs each material at `speed` with and without the velocity limit from `model`.
pub fn safety_ablation(cfg: &RunConfig, model: &ForceModel, materials: &[Material], speed: f64) -> Result<AblationReport> {
    if materials.is_empty() {
        return Err(Error::Config("safety ablation needs at least one material".into()));
    }
    let margin = if cfg.safety.residual_margin {
        model.diagnostics.max_abs_residual
    } else {
        0.0
    };
    let target_force = cfg.safety.f_max - margin;
    if !(target_force > 0.0) {
        return Err(Error::Fit(format!(
            "fit residual {margin:.3} N leaves no headroom under the {} N limit",
            cfg.safety.f_max
        )));
    }
    let base = cfg.episode();
    let mut plans = Vec::new();
    for mat in materials {
        let v_safe = safe_velocity(model, &MaterialFeatures::from(mat), target_force, cfg.safety.v_range)?;
        for module_on in [false, true] {
            let mut spec = base.clone();
            spec.scene.material = mat.clone();
            spec.task.speed = speed;
            spec.velocity_limit = module_on.then_some(v_safe);
            plans.push(spec);
        }
    }
    let records: Vec<EpisodeRecord> = plans.par_iter().map(run_episode).collect::<Result<_>>()?;
    let episodes: Vec<AblationEpisode> = records
        .iter()
        .map(|r| AblationEpisode {
            module_on: r.spec.velocity_limit.is_some(),
            youngs: r.spec.scene.material.youngs_modulus,
            commanded_speed: speed,
            v_safe: r.spec.velocity_limit,
            max_speed: r.knife.iter().map(|k| k.speed).fold(0.0, f64::max),
            peak_force: r.summary.peak_force,
            status: r.summary.status.clone(),
        })
        .collect();
    let off: Vec<&AblationEpisode> = episodes.iter().filter(|e| !e.module_on).collect();
    let on: Vec<&AblationEpisode> = episodes.iter().filter(|e| e.module_on).collect();
    Ok(AblationReport {
        f_max: cfg.safety.f_max,
        target_force,
        rows: vec![ablation_row("off", &off), ablation_row("on", &on)],
        episodes,
    })
}

/// Dataset grid: configured styles and states, or every style and the thirteen dataset states.
pub fn task_grid(cfg: &RunConfig) -> Vec<(CutStyle, CutState)> {
    let styles = if cfg.dataset.styles.is_empty() {
        CutStyle::ALL.to_vec()
    } else {
        cfg.dataset.styles.clone()
    };
    let states = if cfg.dataset.states.is_empty() {
        CutState::dataset_states()
    } else {
        cfg.dataset.states.clone()
    };
    states
        .iter()
        .flat_map(|st| styles.iter().map(move |sy| (*sy, *st)))
        .collect()
}

/// Augmented episode specs for the dataset grid, `count` per task, seeded consecutively from `cfg.seed`.
pub fn plan_dataset(cfg: &RunConfig) -> Result<Vec<EpisodeSpec>> {
    let base_scene = cfg.scene();
    let mut out = Vec::new();
    for (style, state) in task_grid(cfg) {
        let mut task = CutTask {
            style,
            state,
            ..cfg.task.clone()
        };
        task.object = base_scene.kind;
        for _ in 0..cfg.dataset.count {
            let seed = cfg.seed.wrapping_add(out.len() as u64);
            let (scene, task) = augment(&base_scene, &task, &cfg.augment, seed)?;
            let mut spec = cfg.episode();
            spec.seed = seed;
            spec.scene = scene;
            spec.task = task;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let pick = rng.gen_range(0..=Direction::ALL.len());
            spec.direction = Direction::ALL.get(pick).copied();
            out.push(spec);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub seed: u64,
    pub task: String,
    /// Episode directory relative to the dataset root.
    pub dir: String,
    pub instruction: Option<String>,
    pub status: Option<EpisodeStatus>,
    pub success: Option<bool>,
    /// Why this entry has no files, if it failed to run or write.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// False when any entry failed to produce its files.
    pub complete: bool,
    pub plan_only: bool,
}

pub const MANIFEST_JSON: &str = "manifest.json";

fn task_label(spec: &EpisodeSpec) -> String {
    format!("{}/{}/{}", spec.task.object.name(), spec.task.style.name(), spec.task.state.label())
}

fn write_plan(spec: &EpisodeSpec, dir: &Path) -> Result<Option<String>> {
    let scene = prepare_scene(spec)?;
    let traj = plan_episode(spec, &scene)?;
    let instruction = episode_instruction(spec);
    write_atomically(dir, |staging| {
        let path = staging.join("spec.json");
        let json = serde_json::to_vec_pretty(spec).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        let path = staging.join(TRAJECTORY_CSV);
        write_trajectory_csv(&traj, std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?)?;
        let path = staging.join(INSTRUCTION_TXT);
        let text = instruction.as_deref().map(|s| format!("{s}\n")).unwrap_or_default();
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    })?;
    Ok(instruction)
}

/// Runs (or only plans) every spec into `out/<index>_seed<seed>` and writes the manifest.
///
/// Per-episode failures are recorded in the manifest rather than aborting the batch.
pub fn gen_dataset(specs: &[EpisodeSpec], out: &Path, plan_only: bool) -> Result<Manifest> {
    let mut seen = HashSet::new();
    if let Some(dup) = specs.iter().find(|s| !seen.insert(s.seed)) {
        return Err(Error::Config(format!("duplicate episode seed {}", dup.seed)));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let entries: Vec<ManifestEntry> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let name = format!("{i:05}_seed{}", spec.seed);
            let dir = out.join(&name);
            let mut entry = ManifestEntry {
                seed: spec.seed,
                task: task_label(spec),
                dir: name,
                instruction: None,
                status: None,
                success: None,
                error: None,
            };
            let result = if plan_only {
                write_plan(spec, &dir).map(|instruction| entry.instruction = instruction)
            } else {
                run_episode(spec).and_then(|r| {
                    entry.instruction = r.instruction.clone();
                    entry.status = Some(r.summary.status.clone());
                    entry.success = Some(r.succeeded());
                    write_episode(&r, &dir).map(|_| ())
                })
            };
            if let Err(e) = result {
                log::error!("episode {} (seed {}) failed: {e}", entry.dir, spec.seed);
                entry.error = Some(e.to_string());
            }
            entry
        })
        .collect();
    let manifest = Manifest {
        complete: entries.iter().all(|e| e.error.is_none()),
        entries,
        plan_only,
    };
    let path = out.join(MANIFEST_JSON);
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
