//! Episode orchestration and the reproduction experiments.

mod config;
mod engine;
mod episode;
mod experiments;
mod output;

pub use config::{DatasetParams, EpisodeSpec, HarnessParams, RunConfig, SafetyParams, SceneOverrides, SweepParams};
pub use engine::{Engine, EngineState, KnifeMotion, StepReport};
pub use episode::{
    achieved_planes, episode_instruction, lifted, momentum_audit, plan_episode, prepare_scene, run_episode,
    run_with_trajectory, target_normal, EpisodeRecord, EpisodeStatus, EpisodeSummary, JSample, KnifeSample,
    PreparedScene, SegmentSample,
};
pub use experiments::{
    collect_samples, gen_dataset, plan_dataset, safety_ablation, sweep_youngs, task_grid, write_sweep_csv,
    AblationEpisode, AblationReport, AblationRow, Manifest, ManifestEntry, SweepResult, SweepRow, MANIFEST_JSON,
};
pub use output::{
    read_episode, write_atomically, write_episode, write_force_csv, write_jstats_csv, write_knife_csv,
    write_segments_csv, FORCE_CSV, INSTRUCTION_TXT, JSTATS_CSV, KNIFE_CSV, RECORD_JSON, SEGMENTS_CSV, TRAJECTORY_CSV,
};
