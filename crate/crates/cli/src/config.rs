//! JSON run configuration with documented defaults.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use krein_pt::potential::{parse_potential, PotentialExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("config key '{key}': {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    fn new(key: &str, reason: impl Into<String>) -> Self {
        ConfigError {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainConfig {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingConfig {
    pub enabled: bool,
    pub newton_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub num_states: usize,
    pub real_tol: f64,
    pub residual_tol: f64,
    pub orthogonality_tol: f64,
    pub shooting: ShootingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsConfig {
    pub dt: f64,
    pub t_final: f64,
    pub observable: String,
    /// Steps between stored states.
    pub stride: usize,
    /// Grid for time evolution, separate from the spectral grid.
    pub domain: DomainConfig,
    /// Indices of the eigenstates summed (with unit weights) into the
    /// initial state.
    pub initial_states: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub potential: String,
    pub domain: DomainConfig,
    pub solver: SolverConfig,
    pub dynamics: DynamicsConfig,
    pub output: OutputConfig,
    #[serde(skip)]
    pub expr: PotentialExpr,
}

pub const OBSERVABLES: [&str; 5] = ["hamiltonian", "momentum", "i_x", "position", "parity"];

impl Default for RunConfig {
    fn default() -> Self {
        let potential = "i*x^3".to_string();
        RunConfig {
            expr: parse_potential(&potential).expect("default potential parses"),
            potential,
            domain: DomainConfig {
                half_width: 10.0,
                points: 2001,
            },
            solver: SolverConfig {
                num_states: 5,
                real_tol: 1e-6,
                residual_tol: 1e-8,
                orthogonality_tol: 1e-6,
                shooting: ShootingConfig {
                    enabled: true,
                    newton_tol: 1e-12,
                    max_iter: 50,
                },
            },
            dynamics: DynamicsConfig {
                dt: 0.001,
                t_final: 1.0,
                observable: "hamiltonian".to_string(),
                stride: 10,
                domain: DomainConfig {
                    half_width: 3.0,
                    points: 601,
                },
                initial_states: vec![0],
            },
            output: OutputConfig {
                format: OutputFormat::Csv,
                path: None,
            },
        }
    }
}

/// Reads, fills defaults and validates.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("io", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ConfigError::new("document", e.to_string()))?;
    let root = value
        .as_object()
        .ok_or_else(|| ConfigError::new("document", "expected a JSON object"))?;
    let mut cfg = RunConfig::default();
    let mut reader = Reader::new(root, "");
    if let Some(p) = reader.string("potential")? {
        cfg.potential = p;
    }
    if let Some(domain) = reader.object("domain")? {
        read_domain(domain, "domain", &mut cfg.domain)?;
    }
    if let Some(mut solver) = reader.object("solver")? {
        let s = &mut cfg.solver;
        set(&mut s.num_states, solver.uint("num_states")?);
        set(&mut s.real_tol, solver.real("real_tol")?);
        set(&mut s.residual_tol, solver.real("residual_tol")?);
        set(&mut s.orthogonality_tol, solver.real("orthogonality_tol")?);
        if let Some(mut shooting) = solver.object("shooting")? {
            set(&mut s.shooting.enabled, shooting.boolean("enabled")?);
            set(&mut s.shooting.newton_tol, shooting.real("newton_tol")?);
            set(&mut s.shooting.max_iter, shooting.uint("max_iter")?);
            shooting.finish()?;
        }
        solver.finish()?;
    }
    if let Some(mut dynamics) = reader.object("dynamics")? {
        let d = &mut cfg.dynamics;
        set(&mut d.dt, dynamics.real("dt")?);
        set(&mut d.t_final, dynamics.real("t_final")?);
        set(&mut d.observable, dynamics.string("observable")?);
        set(&mut d.stride, dynamics.uint("stride")?);
        if let Some(domain) = dynamics.object("domain")? {
            read_domain(domain, "dynamics.domain", &mut d.domain)?;
        }
        set(&mut d.initial_states, dynamics.uint_list("initial_states")?);
        dynamics.finish()?;
    }
    if let Some(mut output) = reader.object("output")? {
        if let Some(format) = output.string("format")? {
            cfg.output.format = match format.as_str() {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                other => {
                    return Err(ConfigError::new(
                        "output.format",
                        format!("expected csv or json, got '{other}'"),
                    ))
                }
            };
        }
        cfg.output.path = output.string("path")?;
        output.finish()?;
    }
    reader.finish()?;
    validate(&mut cfg)?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn read_domain(
    mut reader: Reader<'_>,
    prefix: &str,
    domain: &mut DomainConfig,
) -> Result<(), ConfigError> {
    set(&mut domain.half_width, reader.real("half_width")?);
    set(&mut domain.points, reader.uint("points")?);
    reader.finish()?;
    check_domain(domain, prefix)
}

fn check_domain(domain: &DomainConfig, prefix: &str) -> Result<(), ConfigError> {
    if !(domain.half_width > 0.0 && domain.half_width.is_finite()) {
        return Err(ConfigError::new(
            &format!("{prefix}.half_width"),
            "must be positive and finite",
        ));
    }
    if domain.points < 3 || domain.points.is_multiple_of(2) {
        return Err(ConfigError::new(
            &format!("{prefix}.points"),
            format!("must be an odd integer >= 3, got {}", domain.points),
        ));
    }
    Ok(())
}

fn validate(cfg: &mut RunConfig) -> Result<(), ConfigError> {
    cfg.expr = parse_potential(&cfg.potential)
        .map_err(|e| ConfigError::new("potential", e.to_string()))?;
    let s = &cfg.solver;
    for (key, v) in [
        ("solver.real_tol", s.real_tol),
        ("solver.residual_tol", s.residual_tol),
        ("solver.orthogonality_tol", s.orthogonality_tol),
        ("solver.shooting.newton_tol", s.shooting.newton_tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::new(
                key,
                format!("tolerance must be positive, got {v}"),
            ));
        }
    }
    if s.num_states == 0 || s.num_states > cfg.domain.points {
        return Err(ConfigError::new(
            "solver.num_states",
            format!(
                "must be between 1 and domain.points = {}",
                cfg.domain.points
            ),
        ));
    }
    if s.shooting.max_iter == 0 {
        return Err(ConfigError::new(
            "solver.shooting.max_iter",
            "must be positive",
        ));
    }
    let d = &cfg.dynamics;
    if !(d.dt > 0.0 && d.dt.is_finite()) {
        return Err(ConfigError::new("dynamics.dt", "must be positive"));
    }
    if !(d.t_final.is_finite() && d.t_final >= d.dt) {
        return Err(ConfigError::new("dynamics.t_final", "must be at least dt"));
    }
    if d.stride == 0 {
        return Err(ConfigError::new("dynamics.stride", "must be positive"));
    }
    if !OBSERVABLES.contains(&d.observable.as_str()) {
        return Err(ConfigError::new(
            "dynamics.observable",
            format!(
                "unknown observable '{}', expected one of {}",
                d.observable,
                OBSERVABLES.join(", ")
            ),
        ));
    }
    if d.initial_states.is_empty() {
        return Err(ConfigError::new(
            "dynamics.initial_states",
            "needs at least one state index",
        ));
    }
    if d.initial_states.iter().any(|&k| k >= d.domain.points) {
        return Err(ConfigError::new(
            "dynamics.initial_states",
            "index exceeds dynamics.domain.points",
        ));
    }
    check_domain(&cfg.domain, "domain")?;
    check_domain(&d.domain, "dynamics.domain")
}

/// Typed access to one JSON object; remembers which keys were consumed so
/// unknown keys can be reported.
struct Reader<'a> {
    map: &'a Map<String, Value>,
    prefix: String,
    seen: Vec<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(map: &'a Map<String, Value>, prefix: &str) -> Self {
        Reader {
            map,
            prefix: prefix.to_string(),
            seen: Vec::new(),
        }
    }

    fn key(&self, name: &str) -> String {
        if self.prefix.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.prefix)
        }
    }

    fn get(&mut self, name: &'static str) -> Option<&'a Value> {
        self.seen.push(name);
        self.map.get(name).filter(|v| !v.is_null())
    }

    fn real(&mut self, name: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| ConfigError::new(&self.key(name), "expected a number")),
        }
    }

    fn uint(&mut self, name: &'static str) -> Result<Option<usize>, ConfigError> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v.as_u64().map(|u| Some(u as usize)).ok_or_else(|| {
                ConfigError::new(&self.key(name), "expected a non-negative integer")
            }),
        }
    }

    fn uint_list(&mut self, name: &'static str) -> Result<Option<Vec<usize>>, ConfigError> {
        match self.get(name) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_u64().map(|u| u as usize))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| {
                    ConfigError::new(&self.key(name), "expected a list of non-negative integers")
                }),
            Some(_) => Err(ConfigError::new(
                &self.key(name),
                "expected a list of non-negative integers",
            )),
        }
    }

    fn boolean(&mut self, name: &'static str) -> Result<Option<bool>, ConfigError> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .as_bool()
                .map(Some)
                .ok_or_else(|| ConfigError::new(&self.key(name), "expected true or false")),
        }
    }

    fn string(&mut self, name: &'static str) -> Result<Option<String>, ConfigError> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| ConfigError::new(&self.key(name), "expected a string")),
        }
    }

    fn object(&mut self, name: &'static str) -> Result<Option<Reader<'a>>, ConfigError> {
        let key = self.key(name);
        match self.get(name) {
            None => Ok(None),
            Some(Value::Object(map)) => Ok(Some(Reader::new(map, &key))),
            Some(_) => Err(ConfigError::new(&key, "expected an object")),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.map.keys().find(|k| !self.seen.contains(&k.as_str())) {
            Some(unknown) => Err(ConfigError::new(&self.key(unknown), "unknown key")),
            None => Ok(()),
        }
    }
}
