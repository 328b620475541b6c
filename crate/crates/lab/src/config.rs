//! Versioned experiment configs, the runner and its manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use typnet_core::contnet::{margin_density_experiment, MarginConfig};
use typnet_core::exec::Executor;
use typnet_core::rng::Streams;

use crate::error::{io_err, LabError, Result, Stage};
use crate::formats::{margins_table, write_json, MarginSummary, Table};
use crate::studies::*;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Root seed; every stage derives its own stream from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(flatten)]
    pub study: Study,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Study {
    OracleVsBound(OracleVsBoundConfig),
    WidthSweep(WidthSweepConfig),
    PacFrequency(PacConfig),
    VolumeDecay(VolumeConfig),
    SolveTeacher(SolveTeacherConfig),
    Margins(MarginsConfig),
}

impl Study {
    pub fn kind(&self) -> &'static str {
        match self {
            Study::OracleVsBound(_) => "oracle-vs-bound",
            Study::WidthSweep(_) => "width-sweep",
            Study::PacFrequency(_) => "pac-frequency",
            Study::VolumeDecay(_) => "volume-decay",
            Study::SolveTeacher(_) => "solve-teacher",
            Study::Margins(_) => "margins",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTeacherConfig {
    /// Name of a bundled channel spec, used when `spec` is absent.
    #[serde(default)]
    pub bundled: Option<String>,
    #[serde(default)]
    pub spec: Option<ChannelSpec>,
}

impl SolveTeacherConfig {
    pub fn resolve(&self) -> Result<ChannelSpec> {
        match (&self.spec, &self.bundled) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(name)) => bundled_spec(name),
            (None, None) => Err(LabError::Config("solve-teacher needs `spec` or `bundled`".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginPreset {
    Desk,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginsConfig {
    #[serde(default)]
    pub preset: Option<MarginPreset>,
    #[serde(default)]
    pub config: Option<MarginConfig>,
}

impl MarginsConfig {
    pub fn resolve(&self) -> Result<MarginConfig> {
        match (self.config, self.preset) {
            (Some(c), _) => Ok(c),
            (None, Some(MarginPreset::Desk)) => Ok(MarginConfig::DESK),
            (None, Some(MarginPreset::Full)) => Ok(MarginConfig::FULL),
            (None, None) => Err(LabError::Config("margins needs `preset` or `config`".into())),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    /// Every precondition of the named study, checked before any compute.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(LabError::Config(format!("unsupported schema {}; expected {SCHEMA}", self.schema)));
        }
        if self.workers == Some(0) {
            return Err(LabError::Config("workers must be positive".into()));
        }
        match &self.study {
            Study::OracleVsBound(c) => c.validate(),
            Study::WidthSweep(c) => c.validate(),
            Study::PacFrequency(c) => c.validate(),
            Study::VolumeDecay(c) => c.validate(),
            Study::SolveTeacher(c) => {
                let s = c.resolve()?;
                typnet_core::bounds::n_lemma1(1.0, s.eps, s.delta).stage("solve_teacher_scale")?;
                Ok(())
            }
            Study::Margins(c) => {
                let m = c.resolve()?;
                if m.d1_star == 0 || m.d1_star > m.d1 || m.n == 0 || m.trials == 0 || m.d0 == 0 {
                    return Err(LabError::Config("margins needs 0 < d1_star <= d1 and positive d0, n, trials".into()));
                }
                Ok(())
            }
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub kind: String,
    pub name: Option<String>,
    pub config_sha256: String,
    pub tool_version: String,
    pub seed: u64,
    pub workers: usize,
    pub timings: Vec<StageTiming>,
    pub outputs: Vec<OutputDigest>,
}

/// What a study produced, before anything touches the disk.
pub struct StudyOutput {
    pub table: Table,
    pub summary: serde_json::Value,
    /// Whether the study's own acceptance rule held, when it has one.
    pub pass: Option<bool>,
}

/// Runs the configured study and returns its table and JSON summary.
pub fn run_study<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<StudyOutput> {
    cfg.validate()?;
    let seed = Streams::new(cfg.seed).named(cfg.study.kind()).seed();
    Ok(match &cfg.study {
        Study::OracleVsBound(c) => {
            let rows = oracle_vs_bound(c, exec)?;
            let pass = rows.iter().all(|r| r.pass);
            StudyOutput {
                table: bound_check_table(&rows),
                summary: serde_json::json!({ "rows": rows, "all_pass": pass }),
                pass: Some(pass),
            }
        }
        Study::WidthSweep(c) => {
            let rep = width_sweep(c, seed, exec)?;
            StudyOutput { table: width_table(&rep), summary: serde_json::to_value(&rep)?, pass: None }
        }
        Study::PacFrequency(c) => {
            let rep = pac_frequency_check(c, seed, exec)?;
            StudyOutput { table: pac_table(&rep), pass: Some(rep.pass), summary: serde_json::to_value(&rep)? }
        }
        Study::VolumeDecay(c) => {
            let rep = volume_decay(c, seed, exec)?;
            StudyOutput {
                table: volume_table(&rep),
                pass: Some(rep.pass_within_delta && rep.pass_nonincreasing),
                summary: serde_json::to_value(&rep)?,
            }
        }
        Study::SolveTeacher(c) => {
            let rep = solve_teacher(&c.resolve()?)?;
            StudyOutput { table: teacher_scale_table(&rep), summary: serde_json::to_value(&rep)?, pass: None }
        }
        Study::Margins(c) => {
            let rep = margin_density_experiment(&c.resolve()?, seed, exec).stage("margins")?;
            StudyOutput {
                table: margins_table(&rep),
                summary: serde_json::to_value(MarginSummary::of(&rep))?,
                pass: None,
            }
        }
    })
}

/// Runs the study and writes `<kind>.csv`, `<kind>.json` and `manifest.json`
/// into `out_dir`.
pub fn run_experiment<E: Executor>(cfg: &ExperimentConfig, out_dir: &Path, exec: &E) -> Result<RunManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let kind = cfg.study.kind();
    let start = Instant::now();
    let out = run_study(cfg, exec)?;
    let compute = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let csv_name = format!("{kind}.csv");
    let json_name = format!("{kind}.json");
    let csv = out.table.to_bytes()?;
    let mut json = serde_json::to_vec_pretty(&out.summary)?;
    json.push(b'\n');
    let mut outputs = Vec::new();
    for (name, bytes) in [(csv_name, csv), (json_name, json)] {
        let path = out_dir.join(&name);
        std::fs::write(&path, &bytes).map_err(io_err(&path))?;
        outputs.push(OutputDigest {
            file: name,
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = RunManifest {
        schema: SCHEMA,
        kind: kind.into(),
        name: cfg.name.clone(),
        config_sha256: cfg.digest(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        workers: exec.workers(),
        timings: vec![
            StageTiming { stage: kind.into(), seconds: compute },
            StageTiming { stage: "write".into(), seconds: start.elapsed().as_secs_f64() },
        ],
        outputs,
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
