//! JSON sweep specification.
//!
//! ```json
//! {
//!   "base": { "omega1": 1.0, "nu": 0.8, "lambda": 0.5, "coupling_j": 0.3, "omega2": 0.7, "n_photon": 0, "n_prime": 0 },
//!   "axis": "lambda",
//!   "values": [0.0, 0.25, 0.5],
//!   "levels": [1, 2, 3, 4],
//!   "loop_steps": 4096,
//!   "theta": 1.5707963267948966,
//!   "outputs": ["berry_magnetic", "concurrence"]
//! }
//! ```
//!
//! Every field is optional; missing ones take the defaults below.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use geophase::eigen::MIN_LOOP_STEPS;
use geophase::Params;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Loop samples used by the CLI unless overridden.
pub const DEFAULT_STEPS: usize = 4096;

/// Default polar angle of the two-mode rotation.
pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseParams {
    pub omega1: f64,
    pub nu: f64,
    pub lambda: f64,
    pub coupling_j: f64,
    pub omega2: f64,
    pub n_photon: u32,
    pub n_prime: u32,
}

impl Default for BaseParams {
    fn default() -> Self {
        Self::from(Params::reference())
    }
}

impl From<Params> for BaseParams {
    fn from(p: Params) -> Self {
        Self {
            omega1: p.omega1,
            nu: p.nu,
            lambda: p.lambda,
            coupling_j: p.coupling_j,
            omega2: p.omega2,
            n_photon: p.n_photon,
            n_prime: p.n_prime,
        }
    }
}

impl From<BaseParams> for Params {
    fn from(b: BaseParams) -> Self {
        Params::new(b.omega1, b.nu, b.lambda, b.coupling_j, b.omega2, b.n_photon).with_n_prime(b.n_prime)
    }
}

/// Sweepable quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Omega1,
    Nu,
    Lambda,
    #[serde(alias = "J")]
    CouplingJ,
    Omega2,
    #[serde(alias = "n")]
    NPhoton,
    #[serde(alias = "n'")]
    NPrime,
    Theta,
}

impl Axis {
    pub const ALL: [Axis; 8] =
        [Axis::Omega1, Axis::Nu, Axis::Lambda, Axis::CouplingJ, Axis::Omega2, Axis::NPhoton, Axis::NPrime, Axis::Theta];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Omega1 => "omega1",
            Axis::Nu => "nu",
            Axis::Lambda => "lambda",
            Axis::CouplingJ => "coupling_j",
            Axis::Omega2 => "omega2",
            Axis::NPhoton => "n_photon",
            Axis::NPrime => "n_prime",
            Axis::Theta => "theta",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Axis::NPhoton | Axis::NPrime)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "J" | "j" => Some(Axis::CouplingJ),
            "n" => Some(Axis::NPhoton),
            "n'" => Some(Axis::NPrime),
            _ => None,
        };
        alias.or_else(|| Axis::ALL.into_iter().find(|a| a.name() == s.replace('-', "_"))).ok_or_else(|| {
            let names: Vec<&str> = Axis::ALL.iter().map(|a| a.name()).collect();
            format!("unknown axis '{s}', expected one of {}", names.join(", "))
        })
    }
}

/// Quantities a sweep can compute per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    BerryMagnetic,
    BerryQuantized,
    BerryTwomode,
    MixedPhase,
    MixedTwomode,
    Concurrence,
}

impl Output {
    pub const ALL: [Output; 6] = [
        Output::BerryMagnetic,
        Output::BerryQuantized,
        Output::BerryTwomode,
        Output::MixedPhase,
        Output::MixedTwomode,
        Output::Concurrence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::BerryMagnetic => "berry_magnetic",
            Output::BerryQuantized => "berry_quantized",
            Output::BerryTwomode => "berry_twomode",
            Output::MixedPhase => "mixed_phase",
            Output::MixedTwomode => "mixed_twomode",
            Output::Concurrence => "concurrence",
        }
    }

    /// Column prefix of a phase output; `None` for scalar outputs.
    pub fn phase_prefix(self) -> Option<&'static str> {
        match self {
            Output::BerryMagnetic => Some("magnetic"),
            Output::BerryQuantized => Some("quantized"),
            Output::BerryTwomode => Some("twomode"),
            Output::MixedPhase => Some("mixed"),
            Output::MixedTwomode => Some("mixed_twomode"),
            Output::Concurrence => None,
        }
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Output::ALL.into_iter().find(|o| o.name() == s.replace('-', "_")).ok_or_else(|| {
            let names: Vec<&str> = Output::ALL.iter().map(|o| o.name()).collect();
            format!("unknown output '{s}', expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub base: BaseParams,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub levels: Vec<usize>,
    pub loop_steps: usize,
    pub theta: f64,
    pub outputs: Vec<Output>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            base: BaseParams::default(),
            axis: Axis::Lambda,
            values: Vec::new(),
            levels: vec![1, 2, 3, 4],
            loop_steps: DEFAULT_STEPS,
            theta: DEFAULT_THETA,
            outputs: vec![Output::BerryMagnetic, Output::Concurrence],
        }
    }
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid sweep spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.loop_steps < MIN_LOOP_STEPS {
            return bad(format!("loop_steps must be at least {MIN_LOOP_STEPS}, got {}", self.loop_steps));
        }
        if self.levels.is_empty() {
            return bad("levels must not be empty".into());
        }
        if let Some(l) = self.levels.iter().find(|l| !(1..=4).contains(*l)) {
            return bad(format!("level {l} out of range 1..=4"));
        }
        let mut sorted = self.levels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.levels.len() {
            return bad("levels must not repeat".into());
        }
        if self.outputs.is_empty() {
            return bad("outputs must not be empty".into());
        }
        if !self.theta.is_finite() {
            return bad(format!("theta must be finite, got {}", self.theta));
        }
        for v in &self.values {
            if !v.is_finite() {
                return bad(format!("sweep value {v} is not finite"));
            }
            if self.axis.is_integer() && (v.fract() != 0.0 || *v < 0.0 || *v > f64::from(u32::MAX)) {
                return bad(format!("axis {} takes nonnegative integers, got {v}", self.axis));
            }
        }
        let base = [self.base.omega1, self.base.nu, self.base.lambda, self.base.coupling_j, self.base.omega2];
        if base.iter().any(|x| !x.is_finite()) {
            return bad("base parameters must be finite".into());
        }
        Ok(())
    }

    /// Model parameters and `θ` at one sweep value.
    pub fn point(&self, value: f64) -> (Params, f64) {
        let mut b = self.base;
        let mut theta = self.theta;
        match self.axis {
            Axis::Omega1 => b.omega1 = value,
            Axis::Nu => b.nu = value,
            Axis::Lambda => b.lambda = value,
            Axis::CouplingJ => b.coupling_j = value,
            Axis::Omega2 => b.omega2 = value,
            Axis::NPhoton => b.n_photon = value as u32,
            Axis::NPrime => b.n_prime = value as u32,
            Axis::Theta => theta = value,
        }
        (b.into(), theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let spec = SweepSpec::from_json("{}").unwrap();
        assert_eq!(spec, SweepSpec::default());
        assert_eq!(Params::from(spec.base), Params::reference());
    }

    #[test]
    fn parses_full_document() {
        let spec = SweepSpec::from_json(
            r#"{"base": {"lambda": 2.0, "n_photon": 1}, "axis": "n_photon", "values": [0, 1, 2],
                "levels": [2], "loop_steps": 64, "outputs": ["berry_quantized"]}"#,
        )
        .unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.base.lambda, 2.0);
        assert_eq!(spec.axis, Axis::NPhoton);
        let (p, _) = spec.point(2.0);
        assert_eq!(p.n_photon, 2);
        assert_eq!(p.lambda, 2.0);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(SweepSpec::from_json(r#"{"lamda": 1}"#).is_err());
        assert!(SweepSpec::from_json(r#"{"axis": "mass"}"#).is_err());
        let spec = SweepSpec { loop_steps: 8, ..SweepSpec::default() };
        assert!(spec.validate().is_err());
        let spec = SweepSpec { axis: Axis::NPhoton, values: vec![0.5], ..SweepSpec::default() };
        assert!(spec.validate().is_err());
        let spec = SweepSpec { levels: vec![1, 5], ..SweepSpec::default() };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn axis_names_round_trip() {
        for a in Axis::ALL {
            assert_eq!(a.name().parse::<Axis>().unwrap(), a);
        }
        assert_eq!("J".parse::<Axis>().unwrap(), Axis::CouplingJ);
        assert_eq!("coupling-j".parse::<Axis>().unwrap(), Axis::CouplingJ);
    }
}
