use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::contact::ForceRecord;
use crate::error::{Error, Result};
use crate::harness::episode::{EpisodeRecord, JSample, KnifeSample, SegmentSample};
use crate::planner::write_trajectory_csv;

pub const FORCE_CSV: &str = "force.csv";
pub const KNIFE_CSV: &str = "knife.csv";
pub const JSTATS_CSV: &str = "jstats.csv";
pub const SEGMENTS_CSV: &str = "segments.csv";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const RECORD_JSON: &str = "record.json";
pub const INSTRUCTION_TXT: &str = "instruction.txt";

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

#[derive(Serialize)]
struct ForceRow {
    t: f64,
    #[serde(rename = "Fx")]
    fx: f64,
    #[serde(rename = "Fy")]
    fy: f64,
    #[serde(rename = "Fz")]
    fz: f64,
    #[serde(rename = "Fmag")]
    fmag: f64,
}

#[derive(Serialize)]
struct JRow {
    t: f64,
    #[serde(rename = "Jmin")]
    j_min: f64,
    #[serde(rename = "Jmax")]
    j_max: f64,
    clamps: usize,
}

/// Header `t,Fx,Fy,Fz,Fmag`.
pub fn write_force_csv<W: Write>(forces: &[ForceRecord], out: W) -> Result<()> {
    write_rows(
        out,
        forces.iter().map(|r| ForceRow {
            t: r.t,
            fx: r.force.x,
            fy: r.force.y,
            fz: r.force.z,
            fmag: r.magnitude,
        }),
    )
}

/// Header `t,speed,u,c_hat`.
pub fn write_knife_csv<W: Write>(samples: &[KnifeSample], out: W) -> Result<()> {
    write_rows(out, samples)
}

/// Header `t,Jmin,Jmax,clamps`.
pub fn write_jstats_csv<W: Write>(samples: &[JSample], out: W) -> Result<()> {
    write_rows(
        out,
        samples.iter().map(|s| JRow {
            t: s.t,
            j_min: s.j_min,
            j_max: s.j_max,
            clamps: s.clamps,
        }),
    )
}

pub fn write_segments_csv<W: Write>(samples: &[SegmentSample], out: W) -> Result<()> {
    write_rows(out, samples)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Fills a fresh directory at `dir` through `fill`, which must not exist yet.
///
/// Files go to a sibling staging directory that is renamed into place only
/// once `fill` succeeds, so readers never see a partial episode.
pub fn write_atomically(dir: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if dir.exists() {
        return Err(Error::io(dir, std::io::Error::new(std::io::ErrorKind::AlreadyExists, "directory exists")));
    }
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let name = dir
        .file_name()
        .ok_or_else(|| Error::Config(format!("path {} has no final component", dir.display())))?;
    let staging = parent.join(format!(".{}.partial", name.to_string_lossy()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir(&staging).map_err(|e| Error::io(&staging, e))?;
    if let Err(e) = fill(&staging) {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    fs::rename(&staging, dir).map_err(|e| Error::io(dir, e))
}

/// Writes `record` and its series as CSV into the new directory `dir`.
pub fn write_episode(record: &EpisodeRecord, dir: &Path) -> Result<PathBuf> {
    write_atomically(dir, |staging| {
        let json = serde_json::to_vec_pretty(record).map_err(|e| Error::Format(e.to_string()))?;
        let path = staging.join(RECORD_JSON);
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        write_force_csv(&record.forces, create(&staging.join(FORCE_CSV))?)?;
        write_knife_csv(&record.knife, create(&staging.join(KNIFE_CSV))?)?;
        write_jstats_csv(&record.j_stats, create(&staging.join(JSTATS_CSV))?)?;
        write_segments_csv(&record.segments, create(&staging.join(SEGMENTS_CSV))?)?;
        write_trajectory_csv(&record.trajectory, create(&staging.join(TRAJECTORY_CSV))?)?;
        let path = staging.join(INSTRUCTION_TXT);
        let text = record.instruction.as_deref().map(|s| format!("{s}\n")).unwrap_or_default();
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    })?;
    Ok(dir.to_path_buf())
}

/// Loads the record written by [`write_episode`].
pub fn read_episode(dir: &Path) -> Result<EpisodeRecord> {
    let path = dir.join(RECORD_JSON);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
