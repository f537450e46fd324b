//! Run configuration: JSON parsing, defaults, validation and the content hash.

use std::fmt;
use std::str::FromStr;

use bimodal_core::dynamics::{AtomicState, Variant};
use bimodal_core::effective::{DetuningConvention, DriveParams, SystemParams};
use bimodal_core::sweep::{Axis, AxisQuantity, Field};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    StaticPhase,
    DrivenPhase,
    EffectiveParams,
    Echo,
}

impl Command {
    pub const ALL: [Command; 4] = [Command::StaticPhase, Command::DrivenPhase, Command::EffectiveParams, Command::Echo];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::StaticPhase => "static-phase",
            Command::DrivenPhase => "driven-phase",
            Command::EffectiveParams => "effective-params",
            Command::Echo => "echo",
        }
    }

    fn needs_drive(self) -> bool {
        !matches!(self, Command::StaticPhase)
    }

    fn default_window(self) -> u32 {
        match self {
            Command::StaticPhase => 8,
            _ => 5,
        }
    }

    fn default_sweep(self) -> Vec<AxisBlock> {
        let axis = |parameter: &str, start, stop, points| AxisBlock {
            name: None,
            parameter: parameter.to_string(),
            start,
            stop,
            points,
        };
        match self {
            Command::StaticPhase => vec![axis("g1/Omega1", 0.0, 5.0, 101), axis("g2/Omega2", 0.0, 5.0, 101)],
            Command::DrivenPhase => vec![axis("delta2/Omega2", 0.0, 0.02, 101), axis("2theta", 0.0, 5.0, 101)],
            Command::EffectiveParams => vec![axis("omega_D", 0.05, 6.0, 1000)],
            Command::Echo => Vec::new(),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub omega1: f64,
    pub omega2: f64,
    #[serde(rename = "Omega1")]
    pub cavity1: f64,
    #[serde(rename = "Omega2")]
    pub cavity2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Default for ModelBlock {
    fn default() -> Self {
        let s = SystemParams::resonant(0.05, 0.05);
        Self { omega1: s.omega1, omega2: s.omega2, cavity1: s.cavity1, cavity2: s.cavity2, g1: s.g1, g2: s.g2 }
    }
}

impl ModelBlock {
    pub fn params(&self) -> Result<SystemParams, CliError> {
        Ok(SystemParams::new(self.omega1, self.omega2, self.cavity1, self.cavity2, self.g1, self.g2)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveBlock {
    #[serde(rename = "A_D")]
    pub amplitude: f64,
    #[serde(rename = "omega_D")]
    pub frequency: f64,
}

impl Default for DriveBlock {
    fn default() -> Self {
        Self { amplitude: 0.09, frequency: 0.18 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationBlock {
    pub n_c1: usize,
    pub n_c2: usize,
    /// Defaults to 8 for static sweeps and 5 for driven ones.
    pub block_window: Option<u32>,
    pub sideband_eps: f64,
}

impl Default for TruncationBlock {
    fn default() -> Self {
        Self { n_c1: 6, n_c2: 6, block_window: None, sideband_eps: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl AxisBlock {
    fn axis(&self) -> Result<Axis, CliError> {
        let q: AxisQuantity = self.parameter.parse()?;
        if self.points == 0 {
            return Err(CliError::constraint("sweep.points", "points >= 1"));
        }
        let mut axis = Axis::linspace(q, self.start, self.stop, self.points);
        if let Some(n) = &self.name {
            axis = axis.with_name(n.clone());
        }
        axis.validate()?;
        Ok(axis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsBlock {
    pub t_max: f64,
    pub dt_max: Option<f64>,
    pub samples: usize,
    pub initial_state: String,
    pub alpha1: f64,
    pub alpha2: f64,
    /// `rotating-effective` or `tilde`.
    pub pair: String,
}

impl Default for DynamicsBlock {
    fn default() -> Self {
        Self {
            t_max: 200.0,
            dt_max: None,
            samples: 2000,
            initial_state: "2".into(),
            alpha1: 0.01,
            alpha2: 0.01,
            pair: "rotating-effective".into(),
        }
    }
}

impl DynamicsBlock {
    pub fn variants(&self) -> Result<(Variant, Variant), CliError> {
        match self.pair.as_str() {
            "rotating-effective" => Ok((Variant::Rotating, Variant::Effective)),
            "tilde" => Ok((Variant::EffectiveTilde1, Variant::ThreeLevelJcTilde)),
            other => Err(CliError::Config(format!(
                "dynamics.pair: unknown pair `{other}`, expected rotating-effective or tilde"
            ))),
        }
    }

    pub fn atom(&self) -> Result<AtomicState, CliError> {
        self.initial_state
            .parse()
            .map_err(|e| CliError::Config(format!("dynamics.initial_state: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    #[default]
    Auto,
    Count(usize),
}

impl Serialize for Workers {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Workers::Auto => s.serialize_str("auto"),
            Workers::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Workers {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Workers;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive integer or \"auto\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Workers, E> {
                if v == 0 {
                    return Err(E::custom("workers must be at least 1"));
                }
                Ok(Workers::Count(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Workers, E> {
                if v < 1 {
                    return Err(E::custom("workers must be at least 1"));
                }
                Ok(Workers::Count(v as usize))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Workers, E> {
                if v == "auto" {
                    Ok(Workers::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Magnitude,
    Signed,
}

impl From<Convention> for DetuningConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Magnitude => DetuningConvention::Magnitude,
            Convention::Signed => DetuningConvention::Signed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub drive: Option<DriveBlock>,
    pub truncation: TruncationBlock,
    pub sweep: Option<Vec<AxisBlock>>,
    pub dynamics: DynamicsBlock,
    pub convention: Convention,
    pub output: String,
    pub workers: Workers,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelBlock::default(),
            drive: None,
            truncation: TruncationBlock::default(),
            sweep: None,
            dynamics: DynamicsBlock::default(),
            convention: Convention::default(),
            output: "out".into(),
            workers: Workers::Auto,
        }
    }
}

/// Parses a JSON document, applies defaults and validates every invariant
/// that does not depend on the command.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = if text.trim().is_empty() {
        RunConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.model.params()?;
        if let Some(d) = &self.drive {
            DriveParams::new(d.amplitude, d.frequency)?;
        }
        let t = &self.truncation;
        if t.n_c1 < 1 {
            return Err(CliError::constraint("truncation.n_c1", "n_c1 >= 1"));
        }
        if t.n_c2 < 1 {
            return Err(CliError::constraint("truncation.n_c2", "n_c2 >= 1"));
        }
        if t.block_window == Some(0) {
            return Err(CliError::constraint("truncation.block_window", "block_window >= 1"));
        }
        if !(t.sideband_eps > 0.0 && t.sideband_eps < 1.0) {
            return Err(CliError::constraint("truncation.sideband_eps", "0 < sideband_eps < 1"));
        }
        if let Some(axes) = &self.sweep {
            check_axes(axes)?;
        }
        let d = &self.dynamics;
        if !(d.t_max > 0.0 && d.t_max.is_finite()) {
            return Err(CliError::constraint("dynamics.t_max", "t_max > 0"));
        }
        if let Some(dt) = d.dt_max {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::constraint("dynamics.dt_max", "dt_max > 0"));
            }
        }
        if d.samples < 2 {
            return Err(CliError::constraint("dynamics.samples", "samples >= 2"));
        }
        if !d.alpha1.is_finite() || !d.alpha2.is_finite() {
            return Err(CliError::constraint("dynamics.alpha", "finite coherent amplitudes"));
        }
        d.atom()?;
        d.variants()?;
        if self.output.is_empty() {
            return Err(CliError::constraint("output", "non-empty path"));
        }
        Ok(())
    }

    /// Fills the command-dependent defaults and checks the sweep against the
    /// command.
    pub fn resolve(&self, command: Command) -> Result<ResolvedRun, CliError> {
        self.validate()?;
        let mut cfg = self.clone();
        if command.needs_drive() && cfg.drive.is_none() {
            cfg.drive = Some(DriveBlock::default());
        }
        if !command.needs_drive() {
            cfg.drive = None;
        }
        cfg.truncation.block_window.get_or_insert(command.default_window());
        let axes_cfg = cfg.sweep.get_or_insert_with(|| command.default_sweep()).clone();
        let axes = axes_cfg.iter().map(AxisBlock::axis).collect::<Result<Vec<_>, _>>()?;
        match command {
            Command::StaticPhase | Command::DrivenPhase if axes.len() != 2 => {
                return Err(CliError::Config(format!("{command} needs exactly two sweep axes, got {}", axes.len())));
            }
            Command::EffectiveParams if axes.is_empty() || axes.len() > 2 => {
                return Err(CliError::Config(format!("{command} needs one or two sweep axes, got {}", axes.len())));
            }
            Command::Echo if axes.len() > 2 => {
                return Err(CliError::Config(format!("{command} accepts at most two sweep axes, got {}", axes.len())));
            }
            _ => {}
        }
        if !command.needs_drive() {
            if let Some(a) = axes.iter().find(|a| a.quantity.needs_drive()) {
                return Err(CliError::Config(format!(
                    "sweep parameter `{}` needs a drive; {command} has none",
                    a.quantity
                )));
            }
        }
        let hash = config_hash(command, &cfg);
        Ok(ResolvedRun {
            command,
            sys: cfg.model.params()?,
            drive: cfg.drive.as_ref().map(|d| DriveParams::new(d.amplitude, d.frequency)).transpose()?,
            axes,
            hash,
            config: cfg,
        })
    }
}

fn check_axes(axes: &[AxisBlock]) -> Result<(), CliError> {
    let mut seen: Vec<Field> = Vec::new();
    for a in axes {
        let axis = a.axis()?;
        let field = axis.quantity.field();
        if seen.contains(&field) {
            return Err(CliError::Config(format!(
                "sweep: two axes map onto the same parameter `{}`",
                field.as_str()
            )));
        }
        seen.push(field);
    }
    Ok(())
}

/// A config with every default filled in for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub command: Command,
    pub config: RunConfig,
    pub sys: SystemParams,
    pub drive: Option<DriveParams>,
    pub axes: Vec<Axis>,
    pub hash: String,
}

impl ResolvedRun {
    pub fn block_window(&self) -> u32 {
        self.config.truncation.block_window.expect("resolved")
    }

    pub fn cells_total(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis assignments of cell `k`, first axis slowest.
    pub fn cell_point(&self, k: usize) -> Vec<(AxisQuantity, f64)> {
        let mut rest = k;
        let mut out = vec![(AxisQuantity::G1, 0.0); self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            let n = a.values.len();
            out[i] = (a.quantity, a.values[rest % n]);
            rest /= n;
        }
        out
    }
}

/// Sorted-key JSON of the resolved config; numbers go through `f64`, so
/// `1`, `1.0` and `1e0` canonicalize identically.
pub fn canonical_json(command: Command, cfg: &RunConfig) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let serde_json::Value::Object(m) = &mut v {
        m.insert("command".into(), command.as_str().into());
    }
    serde_json::to_string(&v).expect("value serializes")
}

/// First 64 bits of the SHA-256 of the canonical JSON, as hex.
pub fn config_hash(command: Command, cfg: &RunConfig) -> String {
    let digest = Sha256::digest(canonical_json(command, cfg).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
