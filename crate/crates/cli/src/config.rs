use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use ctarget::heteroclinic::{EndCondition, SearchConfig};
use ctarget::ControlScheme;
use serde::{Deserialize, Serialize};

/// Orbit-search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSettings {
    pub newton_tol: f64,
    pub max_iter: usize,
    pub capture_radius: f64,
    pub end_condition: EndCondition,
}

/// Wigner export settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSettings {
    /// Grid points per direction are `2N × oversample`.
    pub oversample: usize,
}

/// A complete run description. Every field is required except `orbit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "K")]
    pub k: f64,
    pub tau: usize,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    /// Scheme for `propagate` and `wigner`.
    pub scheme: ControlScheme,
    /// Schemes for `sweep`.
    pub schemes: Vec<ControlScheme>,
    /// Dimension for `propagate` and `wigner`.
    #[serde(rename = "N")]
    pub n: usize,
    /// Dimensions for `sweep`, strictly ascending.
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub unwind_period: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub search: SearchSettings,
    pub wigner: WignerSettings,
    /// Orbit file, relative to the config file; searched for when absent.
    #[serde(default)]
    pub orbit: Option<PathBuf>,
}

impl RunConfig {
    /// Reads and validates `path`, resolving `orbit` against its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(orbit) = &config.orbit {
            if orbit.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.orbit = Some(base.join(orbit));
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.k.is_finite() && self.k > 0.0, "K must be positive, got {}", self.k);
        for (name, [q, p]) in [("alpha", self.alpha), ("beta", self.beta)] {
            ensure!(q.is_finite() && p.is_finite(), "{name} must be finite");
        }
        ensure!(
            self.n >= 2 && self.n % 2 == 0,
            "N must be even and at least 2, got {}",
            self.n
        );
        ensure!(!self.n_list.is_empty(), "N_list must not be empty");
        for &n in &self.n_list {
            ensure!(n >= 2 && n % 2 == 0, "N_list entries must be even and at least 2, got {n}");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            bail!("N_list must be strictly ascending");
        }
        ensure!(!self.schemes.is_empty(), "schemes must not be empty");
        ensure!(self.unwind_period >= 1, "unwind_period must be at least 1");
        ensure!(self.wigner.oversample >= 1, "wigner.oversample must be at least 1");
        ensure!(
            self.search.newton_tol > 0.0 && self.search.capture_radius > 0.0,
            "search tolerances must be positive"
        );
        ensure!(self.search.max_iter >= 1, "search.max_iter must be at least 1");
        Ok(())
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            tau: self.tau,
            alpha: (self.alpha[0], self.alpha[1]),
            beta: (self.beta[0], self.beta[1]),
            newton_tol: self.search.newton_tol,
            max_iter: self.search.max_iter,
            candidate_windings: Vec::new(),
            capture_radius: self.search.capture_radius,
            end_condition: self.search.end_condition,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_are_valid() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let main = RunConfig::load(&dir.join("table_one.json")).unwrap();
        assert_eq!((main.k, main.tau, main.n), (8.0, 6, 200));
        assert_eq!(main.search_config(), SearchConfig::default());
        let identity = RunConfig::load(&dir.join("identity.json")).unwrap();
        assert!(identity.orbit.unwrap().ends_with("identity_orbit.json"));
    }
}
