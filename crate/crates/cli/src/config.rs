//! Run configuration. Precedence: command line, then the `--config` file,
//! then the defaults below.

use std::path::{Path, PathBuf};

use pde_select::pde::{Differentiation, LibrarySpec, NamedScale, PenaltyScale};
use pde_select::{Domain, InitialCondition, Strategy};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Output directory. Not written back into `config.json` so that runs
    /// differing only in location produce identical files.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub simulate: SimulateConfig,
    pub library: LibraryConfig,
    pub sweep: SweepSettings,
    pub equivalence: EquivalenceSettings,
    pub scan: ScanSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub nu: f64,
    pub domain: Domain,
    pub initial: InitialCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LibraryConfig {
    /// Field CSV to build from; simulated from `simulate` when absent.
    pub field: Option<PathBuf>,
    pub max_poly_degree: usize,
    pub max_deriv_order: usize,
    pub differentiation: Differentiation,
    pub n_samples: usize,
    /// Observation noise on `u_t`, as a fraction of its RMS.
    pub target_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Library CSV to load; built from `library` when absent.
    pub library: Option<PathBuf>,
    /// Largest support size; all library terms when absent.
    pub max_size: Option<usize>,
    pub a_n: Vec<PenaltyScale<f64>>,
    pub n_boot: usize,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceSettings {
    pub instances: usize,
    pub perturb: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    pub schedule: Vec<PenaltyScale<f64>>,
    pub oracle: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            simulate: SimulateConfig::default(),
            library: LibraryConfig::default(),
            sweep: SweepSettings::default(),
            equivalence: EquivalenceSettings::default(),
            scan: ScanSettings::default(),
        }
    }
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            nu: 0.1,
            domain: Domain::default(),
            initial: InitialCondition::sine(),
        }
    }
}

impl Default for LibraryConfig {
    fn default() -> Self {
        Self {
            field: None,
            max_poly_degree: 3,
            max_deriv_order: 3,
            differentiation: Differentiation::CentralFd,
            n_samples: 10_000,
            target_noise: 0.1,
        }
    }
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            library: None,
            max_size: None,
            a_n: vec![PenaltyScale::Value(1.0), PenaltyScale::Named(NamedScale::LogN)],
            n_boot: 100,
            strategy: Strategy::Auto,
        }
    }
}

impl Default for EquivalenceSettings {
    fn default() -> Self {
        Self {
            instances: 200,
            perturb: false,
        }
    }
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            schedule: vec![
                PenaltyScale::Value(1.0),
                PenaltyScale::Value(2.0),
                PenaltyScale::Value(4.0),
                PenaltyScale::Named(NamedScale::LogN),
            ],
            oracle: vec!["u*u_x".into(), "u_xx".into()],
        }
    }
}

impl LibraryConfig {
    pub fn spec(&self) -> LibrarySpec {
        LibrarySpec {
            max_poly_degree: self.max_poly_degree,
            max_deriv_order: self.max_deriv_order,
            differentiation: self.differentiation,
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with the file at `path`, if any.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(anyhow::anyhow!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Rejects values no command could run with.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        let sim = &self.simulate;
        if !(sim.nu > 0.0) || !sim.nu.is_finite() {
            return usage(format!("nu must be a positive number, got {}", sim.nu));
        }
        if !(self.library.target_noise >= 0.0) || !self.library.target_noise.is_finite() {
            return usage(format!("target_noise must be non-negative, got {}", self.library.target_noise));
        }
        if self.library.n_samples == 0 {
            return usage("n_samples must be positive".into());
        }
        if self.sweep.a_n.is_empty() {
            return usage("at least one a_N is required".into());
        }
        for a in self.sweep.a_n.iter().chain(&self.scan.schedule) {
            if let PenaltyScale::Value(v) = a {
                if !(*v > 0.0) || !v.is_finite() {
                    return usage(format!("a_N values must be positive, got {v}"));
                }
            }
        }
        if self.sweep.n_boot < pde_select::uncertainty::MIN_BOOTSTRAP_REPLICATES {
            return usage(format!(
                "n_boot must be at least {}, got {}",
                pde_select::uncertainty::MIN_BOOTSTRAP_REPLICATES,
                self.sweep.n_boot
            ));
        }
        if self.sweep.max_size == Some(0) {
            return usage("max_size must be positive".into());
        }
        if self.equivalence.instances == 0 {
            return usage("instances must be positive".into());
        }
        if self.scan.oracle.is_empty() {
            return usage("the oracle support needs at least one term".into());
        }
        Ok(())
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Parses `1,2.5,log_n` into penalty scales.
pub fn parse_scales(text: &str) -> Result<Vec<PenaltyScale<f64>>, String> {
    text.split(',')
        .map(|s| s.trim())
        .map(|s| match s {
            "log_n" | "logN" | "log(N)" => Ok(PenaltyScale::Named(NamedScale::LogN)),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(PenaltyScale::Value)
                .ok_or_else(|| format!("expected a positive number or log_n, got {s:?}")),
        })
        .collect()
}
