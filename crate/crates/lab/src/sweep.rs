//! Parameter sweeps written as `lo:hi:steps[-log|-lin]` or comma lists.

use crate::error::{LabError, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Log { lo: f64, hi: f64, steps: usize },
    Linear { lo: f64, hi: f64, steps: usize },
    List(Vec<f64>),
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Sweep::List(ref v) => v.clone(),
            Sweep::Log { lo, hi, steps } => spaced(steps, |s| lo * (hi / lo).powf(s)),
            Sweep::Linear { lo, hi, steps } => spaced(steps, |s| lo + (hi - lo) * s),
        }
    }

    /// Checks `hi > lo > 0` for ranges and positivity for lists.
    pub fn validate_positive(&self) -> Result<()> {
        match *self {
            Sweep::List(ref v) => {
                if v.is_empty() {
                    return Err(LabError::Config("empty sweep".into()));
                }
                if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                    return Err(LabError::Config(format!("sweep values must be positive, got {bad}")));
                }
                Ok(())
            }
            Sweep::Log { lo, hi, steps } | Sweep::Linear { lo, hi, steps } => {
                if steps == 0 {
                    return Err(LabError::Config("empty sweep".into()));
                }
                if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                    return Err(LabError::Config(format!("sweep needs hi > lo > 0, got {lo}:{hi}")));
                }
                Ok(())
            }
        }
    }
}

fn spaced(steps: usize, at: impl Fn(f64) -> f64) -> Vec<f64> {
    if steps == 1 {
        return vec![at(0.0)];
    }
    (0..steps).map(|i| at(i as f64 / (steps - 1) as f64)).collect()
}

fn number(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| LabError::Config(format!("not a number: `{s}`")))
}

impl FromStr for Sweep {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(LabError::Config("empty sweep".into()));
        }
        if !s.contains(':') {
            return s.split(',').map(number).collect::<Result<Vec<_>>>().map(Sweep::List);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let (lo, hi, count, scale) = match parts.as_slice() {
            [lo, hi, rest] => {
                let (n, scale) = rest.split_once('-').unwrap_or((rest, "log"));
                (lo, hi, n, scale)
            }
            [lo, hi, n, scale] => (lo, hi, *n, *scale),
            _ => return Err(LabError::Config(format!("bad range `{s}`, expected lo:hi:steps[-log|-lin]"))),
        };
        let steps = count
            .trim()
            .parse()
            .map_err(|_| LabError::Config(format!("bad step count in `{s}`")))?;
        let (lo, hi) = (number(lo)?, number(hi)?);
        match scale.trim() {
            "log" => Ok(Sweep::Log { lo, hi, steps }),
            "lin" | "linear" => Ok(Sweep::Linear { lo, hi, steps }),
            other => Err(LabError::Config(format!("unknown sweep scale `{other}`"))),
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sweep::Log { lo, hi, steps } => write!(f, "{lo}:{hi}:{steps}-log"),
            Sweep::Linear { lo, hi, steps } => write!(f, "{lo}:{hi}:{steps}-lin"),
            Sweep::List(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", items.join(","))
            }
        }
    }
}
