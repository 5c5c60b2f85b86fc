//! Parallel execution of an experiment and persistence of its outputs.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::checks::{checks_table, Check};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiments::{run_instance, schemas, InstanceOutput};
use crate::instances::{build_instance, instance_slots, Instance};
use crate::table::Table;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's thread count.
    pub threads: Option<usize>,
    /// Report each finished instance on stderr.
    pub progress: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub instances: usize,
    /// `(instance_id, error)` for every instance that failed.
    pub failures: Vec<(String, String)>,
    pub failed_checks: usize,
    pub files: Vec<String>,
}

impl RunSummary {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn git_revision() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

type InstanceResult = std::result::Result<(Instance, InstanceOutput), (String, Option<Instance>, String)>;

/// Runs every instance of `cfg`, writing CSV tables, `checks.csv`,
/// `failures.csv`, one graph JSON per instance and `manifest.json` to
/// `out_dir`. A failing instance is recorded and the batch continues.
pub fn run_experiment(cfg: &ExperimentConfig, config_text: &str, out_dir: &Path, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let started = Instant::now();
    let graphs_dir = out_dir.join("graphs");
    create_dir(&graphs_dir)?;
    let slots = instance_slots(&cfg.graphs, cfg.master_seed);
    let total = slots.len();
    let done = AtomicUsize::new(0);
    let work = |slot: &crate::instances::InstanceSlot| -> InstanceResult {
        let t0 = Instant::now();
        let inst = build_instance(&cfg.graphs, slot).map_err(|e| (slot.id.clone(), None, e.to_string()))?;
        let result = run_instance(cfg, &inst);
        if opts.progress {
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            let status = if result.is_ok() { "done" } else { "FAILED" };
            eprintln!("[{k}/{total}] {} {status} in {:.1}s", slot.id, t0.elapsed().as_secs_f64());
        }
        match result {
            Ok(out) => Ok((inst, out)),
            Err(e) => Err((slot.id.clone(), Some(inst), e.to_string())),
        }
    };
    let threads = opts.threads.or(cfg.threads);
    let results: Vec<InstanceResult> = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start {t} threads: {e}")))?
            .install(|| slots.par_iter().map(work).collect()),
        None => slots.par_iter().map(work).collect(),
    };

    let mut tables = schemas(cfg.experiment);
    let mut checks: Vec<Check> = Vec::new();
    let mut failures = Vec::new();
    let mut instances = Vec::new();
    for r in results {
        let (inst, status) = match r {
            Ok((inst, out)) => {
                for (t, part) in tables.iter_mut().zip(out.tables) {
                    t.extend(part);
                }
                checks.extend(out.checks);
                (Some(inst), "ok".to_string())
            }
            Err((id, inst, err)) => {
                failures.push((id, err.clone()));
                (inst, err)
            }
        };
        if let Some(inst) = inst {
            let file = format!("graphs/{}.json", inst.id);
            write_file(&out_dir.join(&file), &inst.graph.to_json())?;
            instances.push(json!({"instance_id": inst.id, "graph": file, "status": status}));
        }
    }
    let failed_checks = checks.iter().filter(|c| !c.passed()).count();
    let checks = checks_table(&checks);
    let mut failure_table = Table::new("failures", &["instance_id", "error"]);
    for (id, err) in &failures {
        failure_table.push(vec![id.as_str().into(), err.as_str().into()]);
    }
    tables.push(checks);
    tables.push(failure_table);
    for t in &tables {
        t.write(out_dir)?;
    }

    let files: serde_json::Map<String, serde_json::Value> =
        tables.iter().map(|t| (t.file_name(), json!(t.columns))).collect();
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment.name(),
        "config": cfg,
        "config_sha256": sha256_hex(config_text),
        "git_revision": git_revision(),
        "instances": instances,
        "files": files,
        "failures": failures.iter().map(|(id, e)| json!({"instance_id": id, "error": e})).collect::<Vec<_>>(),
        "failed_checks": failed_checks,
        "timing": {"wall_time_seconds": started.elapsed().as_secs_f64()},
    });
    write_file(&out_dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        instances: total,
        failures,
        failed_checks,
        files: tables.iter().map(Table::file_name).collect(),
    })
}
