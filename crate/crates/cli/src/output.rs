//! Deterministic file layout for run outputs: `summary.json` with sorted
//! keys (the timestamp is isolated in a single field), CSV tables with fixed
//! headers, and optional per-step field dumps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use cuspflow_core::{EvolutionTrace, ExperimentResult, ScalarField, SingularMesh};

use crate::config::RunConfig;
use crate::CliError;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub struct OutputWriter {
    dir: PathBuf,
    pub artifacts: Vec<String>,
}

impl OutputWriter {
    /// Create `<root>/<name>/`, where `root` is the `--out` flag when given,
    /// else the `CUSPFLOW_OUT` environment variable, else the configured
    /// output directory.
    pub fn create(config: &RunConfig, out_flag: Option<&Path>, name: &str) -> Result<Self, CliError> {
        let root = match out_flag {
            Some(p) => p.to_path_buf(),
            None => match std::env::var_os("CUSPFLOW_OUT") {
                Some(v) => PathBuf::from(v),
                None => PathBuf::from(&config.output.directory),
            },
        };
        let dir = root.join(name);
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, artifacts: Vec::new() })
    }

    fn write(&mut self, file: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.push(file.to_string());
        Ok(path)
    }

    /// Write `summary.json`. Key order is stable (serde_json sorts object
    /// keys); rerunning the same configuration and seed differs only in the
    /// `timestamp_unix` field.
    pub fn write_summary(
        &mut self,
        config: &RunConfig,
        result: &ExperimentResult,
    ) -> Result<PathBuf, CliError> {
        let mut metrics = Map::new();
        for (k, v) in &result.metrics {
            metrics.insert(k.clone(), json!(v));
        }
        let verdicts: Vec<Value> = result
            .verdicts
            .iter()
            .map(|v| {
                json!({
                    "name": v.name,
                    "pass": v.pass,
                    "tolerance": v.tolerance,
                    "observed": v.observed,
                })
            })
            .collect();
        let timestamp =
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let summary = json!({
            "name": result.name,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp_unix": timestamp,
            "seed": config.discretization.seed,
            "config_digest": format!("{:016x}", fnv1a64(config.to_toml().as_bytes())),
            "input_digest": result.input_digest,
            "metrics": Value::Object(metrics),
            "verdicts": verdicts,
            "notes": result.notes,
            "artifacts": self.artifacts,
            "pass": result.passed(),
        });
        let text = serde_json::to_string_pretty(&summary)
            .map_err(|e| CliError::Io(format!("cannot serialize summary: {e}")))?;
        let path = self.dir.join("summary.json");
        fs::write(&path, text + "\n")
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// One CSV per named series: `x,y` rows under the series name.
    pub fn write_series(&mut self, result: &ExperimentResult) -> Result<(), CliError> {
        let series: Vec<(String, Vec<(f64, f64)>)> =
            result.series.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        for (name, rows) in series {
            let mut text = String::from("x,y\n");
            for (x, y) in rows {
                text.push_str(&format!("{x},{y}\n"));
            }
            self.write(&format!("{name}.csv"), &text)?;
        }
        Ok(())
    }

    /// Trace table with the fixed header
    /// `step,t,l1,l2,linf,min,max,mass,newton_iters`.
    pub fn write_trace(&mut self, trace: &EvolutionTrace) -> Result<(), CliError> {
        let mut text = String::from("step,t,l1,l2,linf,min,max,mass,newton_iters\n");
        for (step, d) in trace.diagnostics.iter().enumerate() {
            text.push_str(&format!(
                "{step},{},{},{},{},{},{},{},{}\n",
                d.time, d.l1, d.l2, d.linf, d.min, d.max, d.mass, d.newton_iters
            ));
        }
        self.write("trace.csv", &text)?;
        Ok(())
    }

    /// Field dump with header `i_t,i_theta,t,theta,u`.
    pub fn write_field(
        &mut self,
        file: &str,
        mesh: &SingularMesh,
        u: &ScalarField,
    ) -> Result<(), CliError> {
        let mut text = String::from("i_t,i_theta,t,theta,u\n");
        for idx in 0..mesh.n_cells() {
            let (i_t, i_theta) = mesh.cell_coords(idx);
            let (t, theta) = mesh.cell_center(idx);
            text.push_str(&format!("{i_t},{i_theta},{t},{theta},{}\n", u[idx]));
        }
        self.write(file, &text)?;
        Ok(())
    }

    /// Per-step field dumps under `fields/step_%06d.csv`.
    pub fn write_trace_fields(
        &mut self,
        mesh: &SingularMesh,
        trace: &EvolutionTrace,
    ) -> Result<(), CliError> {
        let states: Vec<ScalarField> = trace.states.clone();
        for (step, state) in states.iter().enumerate() {
            self.write_field(&format!("fields/step_{step:06}.csv"), mesh, state)?;
        }
        Ok(())
    }

    /// Mesh dump with header `i_t,i_theta,t,theta,rho,measure`.
    pub fn write_mesh(&mut self, mesh: &SingularMesh) -> Result<(), CliError> {
        let mut text = String::from("i_t,i_theta,t,theta,rho,measure\n");
        for idx in 0..mesh.n_cells() {
            let (i_t, i_theta) = mesh.cell_coords(idx);
            let (t, theta) = mesh.cell_center(idx);
            text.push_str(&format!(
                "{i_t},{i_theta},{t},{theta},{},{}\n",
                mesh.rho()[idx],
                mesh.volume_weights()[idx]
            ));
        }
        self.write("mesh.csv", &text)?;
        Ok(())
    }
}
