//! Experiment configuration: a flat `key = value` file, overridable key by
//! key from the command line.

use crate::error::{LabError, Result};
use crate::sweep::Sweep;
use cusp_spectra::laplace2d::EdgeBc;
use cusp_spectra::{BoundaryCoefficient, CuspProfile};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Route {
    Count2d,
    ModeSum,
    Predict,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Count2d, Route::ModeSum, Route::Predict];

    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Count2d => "count2d",
            Route::ModeSum => "modesum",
            Route::Predict => "predict",
        }
    }
}

impl FromStr for Route {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "count2d" => Ok(Route::Count2d),
            "modesum" => Ok(Route::ModeSum),
            "predict" => Ok(Route::Predict),
            other => Err(LabError::Config(format!("unknown route `{other}`"))),
        }
    }
}

/// Randomized or exhaustive checks run alongside a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    /// `N^Neumann - N^Dirichlet ∈ {0, 1}` for the reduced operator.
    RankOne,
    /// Counts never increase when σ is scaled up by random factors.
    SigmaMonotone,
    /// Interface Dirichlet/Neumann splits bracket the unsplit count.
    Bracketing,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::RankOne => "rank_one",
            Suite::SigmaMonotone => "sigma_monotone",
            Suite::Bracketing => "bracketing",
        }
    }
}

impl FromStr for Suite {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rank_one" => Ok(Suite::RankOne),
            "sigma_monotone" => Ok(Suite::SigmaMonotone),
            "bracketing" => Ok(Suite::Bracketing),
            other => Err(LabError::Config(format!("unknown suite `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeshOverrides {
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub profile: String,
    pub sigma: String,
    /// Upper-side coefficient; `sigma` is then the lower one.
    pub sigma2: Option<String>,
    pub lambda: Sweep,
    pub routes: Vec<Route>,
    pub suites: Vec<Suite>,
    pub mesh: MeshOverrides,
    pub resolution: f64,
    pub bc_bottom: EdgeBc,
    pub bc_top: EdgeBc,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// When false, timing columns are written as zero so outputs are byte-stable.
    pub timings: bool,
    /// Ceiling for any single banded factorization.
    pub mem_budget_mb: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            profile: "power:alpha=2".into(),
            sigma: "const:v=1".into(),
            sigma2: None,
            lambda: Sweep::Log {
                lo: 100.0,
                hi: 1000.0,
                steps: 4,
            },
            routes: vec![Route::ModeSum, Route::Predict],
            suites: vec![Suite::RankOne, Suite::SigmaMonotone],
            mesh: MeshOverrides::default(),
            resolution: 10.0,
            bc_bottom: EdgeBc::Robin,
            bc_top: EdgeBc::Robin,
            out: None,
            seed: 0,
            timings: true,
            mem_budget_mb: 4096,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| LabError::Config(format!("bad value `{value}` for `{key}`")))
}

fn list<T: FromStr<Err = LabError>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(T::from_str)
        .collect()
}

impl ExperimentConfig {
    /// Sets one key. Unknown keys are configuration errors.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "profile" => self.profile = v.to_string(),
            "sigma" | "sigma1" => self.sigma = v.to_string(),
            "sigma2" => self.sigma2 = Some(v.to_string()),
            "lambda" => self.lambda = v.parse()?,
            "routes" => self.routes = list(v)?,
            "suites" => self.suites = list(v)?,
            "nx" => self.mesh.nx = Some(parse(key, v)?),
            "nt" => self.mesh.nt = Some(parse(key, v)?),
            "xmax" => self.mesh.x_max = Some(parse(key, v)?),
            "resolution" => self.resolution = parse(key, v)?,
            "bc_bottom" => self.bc_bottom = v.parse().map_err(LabError::from)?,
            "bc_top" => self.bc_top = v.parse().map_err(LabError::from)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "seed" => self.seed = parse(key, v)?,
            "timings" => self.timings = parse(key, v)?,
            "mem_budget_mb" => self.mem_budget_mb = parse(key, v)?,
            other => return Err(LabError::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_kv(text: &str, base: Self) -> Result<Self> {
        let mut cfg = base;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            // presets contain '=' themselves, so only the first one splits
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected key = value, got `{raw}`", i + 1)))?;
            cfg.apply(k, v)
                .map_err(|e| LabError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_kv(&text, Self::default())
    }

    pub fn parsed_profile(&self) -> Result<CuspProfile> {
        Ok(self.profile.parse()?)
    }

    pub fn parsed_sigma(&self) -> Result<BoundaryCoefficient> {
        match &self.sigma2 {
            None => Ok(self.sigma.parse()?),
            Some(upper) => Ok(BoundaryCoefficient::pair(self.sigma.parse()?, upper.parse()?)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.routes.is_empty() {
            return Err(LabError::Config("at least one route is required".into()));
        }
        self.lambda.validate_positive()?;
        if !(self.resolution >= 10.0) {
            return Err(LabError::Config(format!("resolution must be >= 10, got {}", self.resolution)));
        }
        self.parsed_profile()?;
        self.parsed_sigma()?;
        Ok(())
    }

    pub fn has(&self, route: Route) -> bool {
        self.routes.contains(&route)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let text = "# comment\nprofile = power:alpha=3\nlambda = 10:100:3\nroutes = count2d, predict\nseed = 7\n";
        let mut cfg = ExperimentConfig::parse_kv(text, ExperimentConfig::default()).unwrap();
        assert_eq!(cfg.profile, "power:alpha=3");
        assert_eq!(cfg.routes, vec![Route::Count2d, Route::Predict]);
        assert_eq!(cfg.seed, 7);
        cfg.apply("seed", "9").unwrap();
        assert_eq!(cfg.seed, 9);
        cfg.validate().unwrap();
    }

    #[test]
    fn errors_are_config_errors() {
        let base = ExperimentConfig::default;
        for bad in ["nonsense", "colour = red", "routes = fast", "lambda = 1:2", "nx = many"] {
            let e = ExperimentConfig::parse_kv(bad, base()).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{bad}");
        }
        let mut cfg = base();
        cfg.routes.clear();
        assert!(cfg.validate().is_err());
        cfg = base();
        cfg.lambda = Sweep::List(vec![]);
        assert!(cfg.validate().is_err());
        cfg = base();
        cfg.profile = "power:alpha=-1".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sigma_pair() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply("sigma1", "const:v=0.5").unwrap();
        cfg.apply("sigma2", "const:v=2").unwrap();
        let s = cfg.parsed_sigma().unwrap();
        assert!(s.is_pair());
        assert_eq!(s.sigma1(3.0), 0.5);
        assert_eq!(s.sigma2(3.0), 2.0);
    }
}
