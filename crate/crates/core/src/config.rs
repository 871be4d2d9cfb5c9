//! Run configuration: TOML text with one table per section.
//!
//! ```toml
//! [model]
//! kind = "h2plus_reduced"          # h2plus_reduced | point_charge | harmonic
//! nuclear_masses = [1863.15, 1863.15]
//! cap = "auto"                     # or a number, 1/bohr
//!
//! [grid]
//! n_points = 32
//! step = 0.075
//! offset = -1.1625
//!
//! [propagator]
//! d_tau = 0.075
//! ```
//!
//! Every problem found is reported at once, before any computation starts.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxisSpec, GridSpec};
use crate::operators::ParticleMasses;
use crate::propagator::PropagatorParams;
use crate::sampler::PRNG_ID;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Optimize,
    Sample,
    Scan,
    Chain,
    Validate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Optimize => "optimize",
            Command::Sample => "sample",
            Command::Scan => "scan",
            Command::Chain => "chain",
            Command::Validate => "validate",
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

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "optimize" => Command::Optimize,
            "sample" => Command::Sample,
            "scan" => Command::Scan,
            "chain" => Command::Chain,
            "validate" => Command::Validate,
            other => return Err(format!("unknown command `{other}`")),
        })
    }
}

// Raw sections mirror the file layout; every field is optional so that
// validation can list all missing keys together.

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<RawModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<RawGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<RawInitial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagator: Option<RawPropagator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<RawSampling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<RawScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<RawChain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<RawOutput>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nuclear_masses: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub electron_mass: Option<f64>,
    /// `"auto"` or a number.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<toml::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAxis {
    pub n_points: usize,
    pub step: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<RawAxis>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPropagator {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub renormalize_every: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSampling {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_obs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prng_id: Option<String>,
    /// Wavefunction dump to sample from; when absent the optimization runs first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScan {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChain {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spring_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<String>>,
    /// Electron position `(r_cx, r_cy)` for the conditional density slice.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slice_electron: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    H2plusReduced { masses: ParticleMasses, cap: f64 },
    PointCharge { separation: f64, cap: f64 },
    Harmonic { mass: f64, omega: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    pub n_obs: usize,
    pub seed: u64,
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub mass: f64,
    pub spring_k: f64,
    pub lengths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub csv: bool,
    pub binary: bool,
    pub slice_electron: [f64; 2],
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<ModelSpec>,
    pub grid: Option<GridSpec>,
    pub alpha: f64,
    pub propagator: PropagatorParams,
    pub sampling: SamplingSpec,
    pub scan: Option<ScanSpec>,
    pub chain: Option<ChainSpec>,
    pub output: OutputSpec,
    /// The configuration with every default filled in, for artifact headers.
    pub resolved: RawConfig,
}

pub const DEFAULT_CHAIN_LENGTHS: [usize; 9] = [50, 100, 200, 500, 1000, 2000, 3000, 5000, 10000];

pub fn parse(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
}

pub fn load(path: &std::path::Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

fn positive(problems: &mut Vec<String>, key: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        problems.push(format!("`{key}` must be positive and finite, got {v}"));
    }
}

fn cap_value(problems: &mut Vec<String>, v: Option<&toml::Value>) -> Option<f64> {
    match v {
        None => None,
        Some(toml::Value::String(s)) if s == "auto" => None,
        Some(toml::Value::Float(f)) if *f > 0.0 => Some(*f),
        Some(toml::Value::Integer(i)) if *i > 0 => Some(*i as f64),
        Some(other) => {
            problems.push(format!("`model.cap` must be \"auto\" or a positive number, got {other}"));
            None
        }
    }
}

impl RunConfig {
    /// Validates `raw` for `command` (which overrides `raw.command`).
    pub fn from_raw(raw: RawConfig, command: Option<Command>) -> Result<Self> {
        let mut problems = Vec::new();
        let command = match (command, raw.command.as_deref()) {
            (Some(c), _) => c,
            (None, Some(s)) => match s.parse() {
                Ok(c) => c,
                Err(e) => return Err(Error::Config(vec![e])),
            },
            (None, None) => return Err(Error::Config(vec!["missing key `command`".into()])),
        };
        let mut resolved = raw.clone();
        resolved.command = Some(command.as_str().to_string());

        let needs_model = match command {
            Command::Optimize => true,
            Command::Sample => raw.sampling.as_ref().and_then(|s| s.input.as_ref()).is_none(),
            _ => false,
        };
        let needs_grid = needs_model || command == Command::Scan;
        let needs_propagator = needs_model || command == Command::Scan;

        // model
        let mut model = None;
        let mut n_axes = 0;
        if needs_model {
            let m = raw.model.clone().unwrap_or_default();
            match m.kind.as_deref() {
                None => problems.push("missing key `model.kind`".into()),
                Some("h2plus_reduced") => {
                    n_axes = 4;
                    let me = m.electron_mass.unwrap_or(1.0);
                    match &m.nuclear_masses {
                        None => problems.push("missing key `model.nuclear_masses`".into()),
                        Some(v) if v.len() != 2 => problems.push(format!(
                            "`model.nuclear_masses` needs two entries, got {}",
                            v.len()
                        )),
                        Some(v) => match ParticleMasses::new(v[0], v[1], me) {
                            Ok(masses) => {
                                model = Some(ModelSpec::H2plusReduced { masses, cap: 0.0 })
                            }
                            Err(e) => problems.push(format!("`model`: {e}")),
                        },
                    }
                    resolved.model.get_or_insert_with(Default::default).electron_mass = Some(me);
                }
                Some("point_charge") => {
                    n_axes = 2;
                    match m.separation {
                        None => problems.push("missing key `model.separation`".into()),
                        Some(r) if !(r >= 0.0) => {
                            problems.push(format!("`model.separation` must be non-negative, got {r}"))
                        }
                        Some(r) => model = Some(ModelSpec::PointCharge { separation: r, cap: 0.0 }),
                    }
                }
                Some("harmonic") => {
                    n_axes = m.dims.unwrap_or(1);
                    if n_axes == 0 {
                        problems.push("`model.dims` must be at least 1".into());
                    }
                    let mass = m.mass.unwrap_or(1.0);
                    let omega = m.omega.unwrap_or(1.0);
                    positive(&mut problems, "model.mass", mass);
                    positive(&mut problems, "model.omega", omega);
                    model = Some(ModelSpec::Harmonic { mass, omega });
                    let rm = resolved.model.get_or_insert_with(Default::default);
                    rm.mass = Some(mass);
                    rm.omega = Some(omega);
                    rm.dims = Some(n_axes);
                }
                Some(other) => problems.push(format!(
                    "unknown `model.kind` \"{other}\" (expected h2plus_reduced, point_charge or harmonic)"
                )),
            }
        }
        if command == Command::Scan {
            n_axes = 2;
        }

        // grid
        let mut grid = None;
        if needs_grid {
            let g = raw.grid.clone().unwrap_or_default();
            let axes: Option<Vec<RawAxis>> = match (&g.axes, g.n_points, g.step) {
                (Some(axes), _, _) => Some(axes.clone()),
                (None, Some(n), Some(step)) => {
                    let offset = g.offset.unwrap_or(-0.5 * step * (n as f64 - 1.0));
                    resolved.grid.get_or_insert_with(Default::default).offset = Some(offset);
                    Some(vec![RawAxis { n_points: n, step, offset }; n_axes.max(1)])
                }
                (None, n, s) => {
                    if n.is_none() {
                        problems.push("missing key `grid.n_points` (or `grid.axes`)".into());
                    }
                    if s.is_none() {
                        problems.push("missing key `grid.step` (or `grid.axes`)".into());
                    }
                    None
                }
            };
            if let Some(axes) = axes {
                if n_axes > 0 && axes.len() != n_axes {
                    problems.push(format!(
                        "`grid.axes` lists {} axes, the model needs {n_axes}",
                        axes.len()
                    ));
                } else {
                    let built: std::result::Result<Vec<AxisSpec>, _> = axes
                        .iter()
                        .map(|a| AxisSpec::new(a.n_points, a.step, a.offset))
                        .collect();
                    match built {
                        Ok(built) => {
                            let g = if n_axes == 4 {
                                GridSpec::with_labels(
                                    built,
                                    ["R_x", "R_y", "r_cx", "r_cy"].map(String::from).to_vec(),
                                )
                            } else {
                                GridSpec::new(built)
                            };
                            match g {
                                Ok(g) => grid = Some(g),
                                Err(e) => problems.push(format!("`grid`: {e}")),
                            }
                        }
                        Err(e) => problems.push(format!("`grid`: {e}")),
                    }
                }
            }
        }

        // softening cap
        let cap_raw = raw.model.as_ref().and_then(|m| m.cap.as_ref());
        let cap_override = cap_value(&mut problems, cap_raw);
        if let Some(g) = &grid {
            let auto = crate::operators::auto_cap(g, 0, 1.min(g.ndim() - 1));
            let cap = cap_override.unwrap_or(auto);
            match &mut model {
                Some(ModelSpec::H2plusReduced { cap: c, .. }) | Some(ModelSpec::PointCharge { cap: c, .. }) => {
                    *c = cap
                }
                _ => {}
            }
            if matches!(model, Some(ModelSpec::H2plusReduced { .. }) | Some(ModelSpec::PointCharge { .. }))
                || command == Command::Scan
            {
                resolved.model.get_or_insert_with(Default::default).cap = Some(toml::Value::Float(cap));
            }
        }

        // initial state
        let alpha = raw.initial.as_ref().and_then(|i| i.alpha).unwrap_or(0.5);
        if needs_model {
            positive(&mut problems, "initial.alpha", alpha);
            resolved.initial = Some(RawInitial { alpha: Some(alpha) });
        }

        // propagator
        let rp = raw.propagator.clone().unwrap_or_default();
        let defaults = PropagatorParams::default();
        let propagator = PropagatorParams {
            d_tau: rp.d_tau.unwrap_or(defaults.d_tau),
            max_steps: rp.max_steps.unwrap_or(defaults.max_steps),
            energy_tol: rp.energy_tol.unwrap_or(defaults.energy_tol),
            check_every: rp.check_every.unwrap_or(defaults.check_every),
            renormalize_every: rp.renormalize_every.unwrap_or(defaults.renormalize_every),
        };
        if needs_propagator {
            if let Err(e) = propagator.validate() {
                problems.push(format!("`propagator`: {e}"));
            }
            resolved.propagator = Some(RawPropagator {
                d_tau: Some(propagator.d_tau),
                max_steps: Some(propagator.max_steps),
                energy_tol: Some(propagator.energy_tol),
                check_every: Some(propagator.check_every),
                renormalize_every: Some(propagator.renormalize_every),
            });
        }

        // sampling
        let rs = raw.sampling.clone().unwrap_or_default();
        let sampling = SamplingSpec {
            n_obs: rs.n_obs.unwrap_or(200),
            seed: rs.seed.unwrap_or(0),
            input: rs.input.clone(),
        };
        if command == Command::Sample {
            if sampling.n_obs == 0 {
                problems.push("`sampling.n_obs` must be at least 1".into());
            }
            if let Some(id) = &rs.prng_id {
                if !PRNG_ID.starts_with(id.as_str()) {
                    problems.push(format!("unsupported `sampling.prng_id` \"{id}\" (available: \"{PRNG_ID}\")"));
                }
            }
            resolved.sampling = Some(RawSampling {
                n_obs: Some(sampling.n_obs),
                seed: Some(sampling.seed),
                prng_id: Some(PRNG_ID.to_string()),
                input: sampling.input.clone(),
            });
        }

        // scan
        let mut scan = None;
        if command == Command::Scan {
            let s = raw.scan.clone().unwrap_or_default();
            let spec = ScanSpec {
                r_min: s.r_min.unwrap_or(0.25),
                r_max: s.r_max.unwrap_or(0.60),
                r_step: s.r_step.unwrap_or(0.01),
            };
            positive(&mut problems, "scan.r_min", spec.r_min);
            positive(&mut problems, "scan.r_step", spec.r_step);
            if !(spec.r_max >= spec.r_min) {
                problems.push(format!("`scan.r_max` ({}) is below `scan.r_min` ({})", spec.r_max, spec.r_min));
            }
            resolved.scan = Some(RawScan {
                r_min: Some(spec.r_min),
                r_max: Some(spec.r_max),
                r_step: Some(spec.r_step),
            });
            scan = Some(spec);
        }

        // chain
        let mut chain = None;
        if command == Command::Chain {
            let c = raw.chain.clone().unwrap_or_default();
            let spec = ChainSpec {
                mass: c.mass.unwrap_or(1.0),
                spring_k: c.spring_k.unwrap_or(1.0),
                lengths: c.lengths.unwrap_or_else(|| DEFAULT_CHAIN_LENGTHS.to_vec()),
            };
            positive(&mut problems, "chain.mass", spec.mass);
            positive(&mut problems, "chain.spring_k", spec.spring_k);
            if spec.lengths.is_empty() {
                problems.push("`chain.lengths` is empty".into());
            }
            if let Some(n) = spec.lengths.iter().find(|n| **n < 2) {
                problems.push(format!("`chain.lengths` entries must be at least 2, got {n}"));
            }
            resolved.chain = Some(RawChain {
                mass: Some(spec.mass),
                spring_k: Some(spec.spring_k),
                lengths: Some(spec.lengths.clone()),
            });
            chain = Some(spec);
        }

        // output
        let ro = raw.output.clone().unwrap_or_default();
        let formats = ro.formats.clone().unwrap_or_else(|| vec!["csv".into(), "bin".into()]);
        for f in &formats {
            if f != "csv" && f != "bin" {
                problems.push(format!("unknown output format \"{f}\" (expected csv or bin)"));
            }
        }
        let output = OutputSpec {
            directory: ro.directory.clone().unwrap_or_else(|| PathBuf::from("out")),
            csv: formats.iter().any(|f| f == "csv"),
            binary: formats.iter().any(|f| f == "bin"),
            slice_electron: ro.slice_electron.unwrap_or([0.0375, 0.0375]),
        };
        resolved.output = Some(RawOutput {
            directory: Some(output.directory.clone()),
            formats: Some(formats),
            slice_electron: Some(output.slice_electron),
        });

        if let (Some(ModelSpec::H2plusReduced { .. }), Some(g)) = (&model, &grid) {
            for (axis, value) in [(2, output.slice_electron[0]), (3, output.slice_electron[1])] {
                let a = g.axis(axis);
                if a.index_of(value).is_none() {
                    problems.push(format!(
                        "`output.slice_electron` value {value} is not on axis {}; nearest points {:?}",
                        g.labels()[axis],
                        a.nearest(value)
                    ));
                }
            }
        }

        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        Ok(Self {
            command,
            model,
            grid,
            alpha,
            propagator,
            sampling,
            scan,
            chain,
            output,
            resolved,
        })
    }

    pub fn set_output_dir(&mut self, dir: PathBuf) {
        self.resolved.output.get_or_insert_with(Default::default).directory = Some(dir.clone());
        self.output.directory = dir;
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.sampling.seed = seed;
        if let Some(s) = self.resolved.sampling.as_mut() {
            s.seed = Some(seed);
        }
    }

    /// Header lines (without comment markers) embedded in every artifact.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("version = {}", crate::VERSION),
            format!("command = {}", self.command),
            format!("seed = {}", self.sampling.seed),
            format!("prng_id = {PRNG_ID}"),
            "resolved configuration:".to_string(),
        ];
        let text = toml::to_string(&self.resolved).unwrap_or_else(|e| format!("<unserializable: {e}>"));
        lines.extend(text.lines().filter(|l| !l.is_empty()).map(|l| format!("  {l}")));
        lines
    }
}
