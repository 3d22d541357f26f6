//! Per-command parameter blocks, read from a TOML file and overridden by flags.

use std::path::{Path, PathBuf};

use rectfrag_core::optimizer::BallMetric;
use rectfrag_core::simulator::DEFAULT_CAP;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub simulate: SimulateConfig,
    pub render: RenderConfig,
    pub rates: RatesConfig,
    pub kappa_map: KappaMapConfig,
    pub verify: VerifyConfig,
    pub optimize: OptimizeConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub seed: u64,
    pub time: Option<f64>,
    pub generation: Option<u32>,
    pub cap: usize,
    pub snapshot: PathBuf,
    /// Number of evenly spaced frames over `[0, time]`.
    pub frames: usize,
    pub frames_dir: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            seed: 1,
            time: None,
            generation: None,
            cap: DEFAULT_CAP,
            snapshot: "snapshot.csv".into(),
            frames: 0,
            frames_dir: "frames".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub frames: Vec<PathBuf>,
    pub frames_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Rectangles with `|ln(B/H)|` at most this are drawn as near-square.
    pub threshold: f64,
    pub size: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig { frames: Vec::new(), frames_dir: None, out_dir: "svg".into(), threshold: 0.1, size: 512.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub path: Option<PathBuf>,
    pub a: f64,
    pub b: f64,
    pub out: Option<PathBuf>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig { path: None, a: 0.0, b: 1.0, out: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KappaMapConfig {
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    pub steps: usize,
    pub out: PathBuf,
}

impl Default for KappaMapConfig {
    fn default() -> Self {
        KappaMapConfig { lambda: [0.05, 4.0], mu: [0.05, 4.0], steps: 80, out: "kappa_map.csv".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Fraction of the full sample sizes.
    pub scale: f64,
    pub out: Option<PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 2026, scale: 1.0, out: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub seed: u64,
    pub n: usize,
    pub m: f64,
    pub endpoint: Option<[f64; 2]>,
    /// Slopes of a linear ball center.
    pub ball_center: Option<[f64; 2]>,
    pub radius: f64,
    pub metric: BallMetric,
    pub sweeps: Option<usize>,
    pub random_starts: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            seed: 1,
            n: 4,
            m: 3.0,
            endpoint: None,
            ball_center: None,
            radius: 0.1,
            metric: BallMetric::Grid,
            sweeps: None,
            random_starts: None,
            out_dir: "optimize".into(),
        }
    }
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_blocks_and_rejects_unknown_keys() {
        let c: FileConfig = toml::from_str("[simulate]\nseed = 7\ntime = 1.5\n[optimize]\nmetric = \"sup\"\n").unwrap();
        assert_eq!(c.simulate.seed, 7);
        assert_eq!(c.simulate.time, Some(1.5));
        assert_eq!(c.optimize.metric, BallMetric::Sup);
        assert_eq!(c.render.threshold, 0.1);
        assert!(toml::from_str::<FileConfig>("[simulate]\nsede = 7\n").is_err());
    }

    #[test]
    fn flags_override() {
        let mut c = SimulateConfig::default();
        set(&mut c.seed, Some(9));
        set(&mut c.cap, None);
        assert_eq!((c.seed, c.cap), (9, DEFAULT_CAP));
    }
}
