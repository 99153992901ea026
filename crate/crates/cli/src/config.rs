//! Experiment configuration: per-experiment presets, a TOML file layer and
//! command-line overrides, applied in that order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GapSweep,
    Convergence,
    MagnonBand,
    WannierProfile,
    Weights,
    SolitonBand,
    TwistedSpectrum,
    Bandwidth,
    PhaseStats,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::GapSweep => "gap-sweep",
            Experiment::Convergence => "convergence",
            Experiment::MagnonBand => "magnon-band",
            Experiment::WannierProfile => "wannier-profile",
            Experiment::Weights => "weights",
            Experiment::SolitonBand => "soliton-band",
            Experiment::TwistedSpectrum => "twisted-spectrum",
            Experiment::Bandwidth => "bandwidth",
            Experiment::PhaseStats => "phase-stats",
        }
    }

    /// Experiments on the ferromagnetic twisted chain (J = 1, h varies).
    pub fn is_twisted(self) -> bool {
        matches!(self, Experiment::SolitonBand | Experiment::TwistedSpectrum)
    }
}

/// Distribution of the starting circuit angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StartScheme {
    /// `U(−0.01, 0.01)` around zero.
    Zeros,
    /// `U(−π/2, π/2)`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    /// Coupling values; the model grid is every `(j, h)` pair.
    pub j: Vec<f64>,
    pub h: Vec<f64>,
    pub twisted: bool,
    /// Circuit depth for single-depth experiments.
    pub depth: usize,
    /// Depth list for the convergence sweep.
    pub depths: Vec<usize>,
    /// Independent optimizations per point.
    pub restarts: usize,
    pub seed: u64,
    pub start: StartScheme,
}

/// Every field optional; used for both the file layer and the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub n: Option<usize>,
    pub j: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub twisted: Option<bool>,
    pub depth: Option<usize>,
    pub depths: Option<Vec<usize>>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub start: Option<StartScheme>,
}

impl ConfigOverrides {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Fields set in `other` win.
    pub fn merged(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            experiment: other.experiment.or(self.experiment),
            n: other.n.or(self.n),
            j: other.j.or(self.j),
            h: other.h.or(self.h),
            twisted: other.twisted.or(self.twisted),
            depth: other.depth.or(self.depth),
            depths: other.depths.or(self.depths),
            restarts: other.restarts.or(self.restarts),
            seed: other.seed.or(self.seed),
            start: other.start.or(self.start),
        }
    }
}

const PARAMAGNETIC: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

impl ExperimentConfig {
    pub fn preset(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            n: 9,
            j: PARAMAGNETIC.to_vec(),
            h: vec![1.0],
            twisted: false,
            depth: 8,
            depths: (1..=8).collect(),
            restarts: 6,
            seed: 0,
            start: StartScheme::Zeros,
        };
        match experiment {
            Experiment::GapSweep => ExperimentConfig { depth: 6, restarts: 4, ..base },
            Experiment::Convergence => ExperimentConfig { j: vec![0.3, 0.5, 0.7, 0.9], restarts: 4, ..base },
            Experiment::MagnonBand => ExperimentConfig { j: vec![0.3, 0.7], ..base },
            Experiment::WannierProfile | Experiment::Weights => {
                ExperimentConfig { restarts: 30, start: StartScheme::Uniform, ..base }
            }
            Experiment::SolitonBand => ExperimentConfig { j: vec![1.0], h: vec![0.5], twisted: true, ..base },
            Experiment::TwistedSpectrum => {
                ExperimentConfig { j: vec![1.0], h: vec![0.3, 0.6], twisted: true, restarts: 1, ..base }
            }
            Experiment::Bandwidth => base,
            Experiment::PhaseStats => {
                ExperimentConfig { j: vec![0.3, 0.9], restarts: 100, start: StartScheme::Uniform, ..base }
            }
        }
    }

    /// Preset for the overrides' experiment (or `fallback`), then overrides.
    pub fn resolve(overrides: ConfigOverrides, fallback: Experiment) -> Result<Self, CliError> {
        let experiment = overrides.experiment.unwrap_or(fallback);
        let p = Self::preset(experiment);
        let config = ExperimentConfig {
            experiment,
            n: overrides.n.unwrap_or(p.n),
            j: overrides.j.unwrap_or(p.j),
            h: overrides.h.unwrap_or(p.h),
            twisted: overrides.twisted.unwrap_or(p.twisted),
            depth: overrides.depth.unwrap_or(p.depth),
            depths: overrides.depths.unwrap_or(p.depths),
            restarts: overrides.restarts.unwrap_or(p.restarts),
            seed: overrides.seed.unwrap_or(p.seed),
            start: overrides.start.unwrap_or(p.start),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: String| Err(CliError::Config(format!("field `{field}`: {msg}")));
        if self.n.is_multiple_of(2) || self.n < 3 || self.n > 13 {
            return fail("n", format!("must be odd and within 3..=13, got {}", self.n));
        }
        if self.j.is_empty() || self.h.is_empty() {
            return fail("j/h", "coupling lists must be nonempty".into());
        }
        for (name, list) in [("j", &self.j), ("h", &self.h)] {
            if let Some(bad) = list.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return fail(name, format!("values must be finite and non-negative, got {bad}"));
            }
        }
        if self.experiment.is_twisted() != self.twisted {
            return fail(
                "twisted",
                format!("experiment {} requires twisted = {}", self.experiment.name(), self.experiment.is_twisted()),
            );
        }
        if self.depth == 0 {
            return fail("depth", "must be at least 1".into());
        }
        if self.depths.is_empty() || self.depths[0] == 0 || self.depths.windows(2).any(|w| w[1] <= w[0]) {
            return fail("depths", "must be positive and strictly increasing".into());
        }
        if self.restarts == 0 {
            return fail("restarts", "must be at least 1".into());
        }
        if self.experiment == Experiment::PhaseStats && self.restarts < 30 {
            return fail("restarts", format!("phase statistics need at least 30 runs, got {}", self.restarts));
        }
        Ok(())
    }

    /// Every `(j, h)` pair, `j` varying slowest.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.j.iter().flat_map(|&j| self.h.iter().map(move |&h| (j, h))).collect()
    }
}

/// Parses `"1,2,5"` or ranges like `"1..8"` (inclusive) and mixtures.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| format!("bad range start in `{part}`"))?;
            let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| format!("bad range end in `{part}`"))?;
            if b < a {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad integer `{part}`"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    let out: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| format!("bad number `{p}`")))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_usize_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_usize_list("1,3..=4, 8").unwrap(), vec![1, 3, 4, 8]);
        assert!(parse_usize_list("4..2").is_err());
        assert_eq!(parse_f64_list("0.1, 0.5").unwrap(), vec![0.1, 0.5]);
        assert!(parse_f64_list("x").is_err());
    }

    #[test]
    fn file_then_flags() {
        let file = ConfigOverrides::from_toml_str("experiment = \"convergence\"\nj = [0.5]\ndepths = [1, 2]\n", "t").unwrap();
        let flags = ConfigOverrides { depths: Some(vec![1, 2, 3]), ..Default::default() };
        let c = ExperimentConfig::resolve(file.merged(flags), Experiment::GapSweep).unwrap();
        assert_eq!(c.experiment, Experiment::Convergence);
        assert_eq!(c.j, vec![0.5]);
        assert_eq!(c.depths, vec![1, 2, 3]);
    }

    #[test]
    fn unknown_field_reports_location() {
        let err = ConfigOverrides::from_toml_str("n = 9\nbogus = 1\n", "cfg.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn rejects_even_sites_and_wrong_twist() {
        let o = ConfigOverrides { n: Some(8), ..Default::default() };
        assert!(ExperimentConfig::resolve(o, Experiment::GapSweep).is_err());
        let o = ConfigOverrides { twisted: Some(true), ..Default::default() };
        assert!(ExperimentConfig::resolve(o, Experiment::GapSweep).is_err());
    }
}
