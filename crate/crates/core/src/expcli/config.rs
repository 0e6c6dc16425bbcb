use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::RunConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SteadyCheck,
    Stability,
    PerimeterGrowth,
    RearrangeTest,
    KernelTable,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SteadyCheck => "steady-check",
            Self::Stability => "stability",
            Self::PerimeterGrowth => "perimeter-growth",
            Self::RearrangeTest => "rearrange-test",
            Self::KernelTable => "kernel-table",
        }
    }

    fn default_t_end(self) -> f64 {
        match self {
            Self::SteadyCheck => 5.0,
            _ => 20.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    pub dmax: Option<f64>,
    pub dmin: Option<f64>,
    pub nodes0: Option<usize>,
    pub raster_res: Option<usize>,
    pub output_every: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Half-width of the empty slit of the rectangle.
    pub h: f64,
    /// Fillet radius; defaults to `h / 2.5`.
    pub r: Option<f64>,
    /// Velocity sample points.
    pub samples: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            h: 0.05,
            r: None,
            samples: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RearrangeSection {
    pub seed: u64,
    pub cases: usize,
    pub nx: usize,
    pub ny: usize,
    pub xmax: f64,
}

impl Default for RearrangeSection {
    fn default() -> Self {
        Self {
            seed: 7,
            cases: 100,
            nx: 64,
            ny: 64,
            xmax: 4.0,
        }
    }
}

/// Sectioned `key = value` configuration of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub rearrange: RearrangeSection,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            run: RunSection::default(),
            experiment: ExperimentSection::default(),
            rearrange: RearrangeSection::default(),
        }
    }

    /// Parses a config file; its `kind`, when present, must match.
    pub fn from_toml(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let mut value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(kind) = kind {
            match value.get("kind").and_then(|v| v.as_str()) {
                Some(k) if k != kind.name() => {
                    return Err(Error::Config(format!(
                        "config is for `{k}`, not `{}`",
                        kind.name()
                    )));
                }
                Some(_) => {}
                None => {
                    value.insert("kind".into(), toml::Value::String(kind.name().into()));
                }
            }
        }
        value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path, kind: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, kind)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn rectangle_r(&self) -> f64 {
        self.experiment.r.unwrap_or(self.experiment.h / 2.5)
    }

    /// Run parameters with experiment defaults filled in.
    pub fn run_config(&self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let r = &self.run;
        let cfg = RunConfig {
            dt: r.dt.unwrap_or(d.dt),
            t_end: r.t_end.unwrap_or(self.kind.default_t_end()),
            dmax: r.dmax,
            dmin: r.dmin,
            nodes0: r.nodes0.unwrap_or(d.nodes0),
            raster_res: r.raster_res.unwrap_or(d.raster_res),
            output_every: r.output_every.unwrap_or(d.output_every),
            out_dir: r.out_dir.clone(),
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}
