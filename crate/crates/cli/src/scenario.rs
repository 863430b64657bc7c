use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::Value;
use sharpwave::model::config::{lookup, opt_f64, opt_str, spec_from_json};
use sharpwave::renorm::{ExtractOptions, RenormConfig};
use sharpwave::{demos, ProblemSpec};

use crate::exit::Failure;

pub const DEFAULT_RESOLUTION: usize = 32;

/// A loaded config document with command line overrides applied.
pub struct Scenario {
    pub name: String,
    pub doc: Value,
    pub spec: ProblemSpec,
    pub resolution: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// Reads `PATH` or a bundled scenario written `demo:NAME`.
pub fn read_config(source: &str) -> anyhow::Result<Value> {
    let text = match source.strip_prefix("demo:") {
        Some(name) => demos::get(name)
            .ok_or_else(|| {
                let names: Vec<&str> = demos::ALL.iter().map(|(n, _)| *n).collect();
                Failure::Config(format!(
                    "unknown demo {name:?}; bundled: {}",
                    names.join(", ")
                ))
            })?
            .to_string(),
        None => std::fs::read_to_string(source)
            .map_err(|e| Failure::Config(format!("cannot read config {source}: {e}")))?,
    };
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{source}: {e}")).into())
}

impl Scenario {
    pub fn from_doc(
        doc: Value,
        out: &Path,
        resolution: Option<usize>,
        seed: u64,
    ) -> anyhow::Result<Self> {
        let spec = spec_from_json(&doc)?;
        let from_doc = match lookup(&doc, "resolution") {
            Ok(v) => Some(
                v.as_u64()
                    .filter(|&n| n >= 4)
                    .ok_or_else(|| Failure::Config("resolution must be an integer >= 4".into()))?
                    as usize,
            ),
            Err(_) => None,
        };
        let resolution = resolution.or(from_doc).unwrap_or(DEFAULT_RESOLUTION);
        if resolution < 4 {
            return Err(
                Failure::Config(format!("--resolution must be >= 4, got {resolution}")).into(),
            );
        }
        let name = doc
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or("scenario")
            .to_string();
        Ok(Self {
            name,
            doc,
            spec,
            resolution,
            seed,
            out: out.to_path_buf(),
        })
    }

    pub fn load(
        source: &str,
        out: &Path,
        resolution: Option<usize>,
        seed: u64,
    ) -> anyhow::Result<Self> {
        Self::from_doc(read_config(source)?, out, resolution, seed)
    }

    pub fn hash(&self) -> String {
        self.spec.hash(self.resolution)
    }

    pub fn f64_or(&self, path: &str, default: f64) -> anyhow::Result<f64> {
        Ok(opt_f64(&self.doc, path)?.unwrap_or(default))
    }

    pub fn usize_or(&self, path: &str, default: usize) -> anyhow::Result<usize> {
        match lookup(&self.doc, path) {
            Ok(v) => Ok(v.as_u64().ok_or_else(|| {
                Failure::Config(format!("key `{path}` must be a nonnegative integer"))
            })? as usize),
            Err(_) => Ok(default),
        }
    }

    pub fn str_or<'a>(&'a self, path: &str, default: &'a str) -> anyhow::Result<&'a str> {
        Ok(opt_str(&self.doc, path)?.unwrap_or(default))
    }

    pub fn has(&self, path: &str) -> bool {
        lookup(&self.doc, path).is_ok()
    }

    pub fn renorm_config(&self) -> anyhow::Result<RenormConfig> {
        let d = RenormConfig::default();
        Ok(RenormConfig {
            cfl: self.f64_or("wave.cfl", d.cfl)?,
            crossings: self.usize_or("wave.crossings", 16)?,
            left_periods: self.usize_or("wave.left_periods", d.left_periods)?,
            right_periods: self.usize_or("wave.right_periods", d.right_periods)?,
            frames_per_period: self.usize_or("wave.frames_per_period", d.frames_per_period)?,
            ..d
        })
    }

    pub fn extract_options(&self) -> anyhow::Result<ExtractOptions> {
        let d = ExtractOptions::default();
        Ok(ExtractOptions {
            tol_renorm: self.f64_or("wave.tol_renorm", d.tol_renorm)?,
            ..d
        })
    }

    pub fn dir(&self, task: &str) -> anyhow::Result<PathBuf> {
        let d = self.out.join(task);
        std::fs::create_dir_all(&d)
            .with_context(|| format!("cannot create output directory {}", d.display()))?;
        Ok(d)
    }
}
