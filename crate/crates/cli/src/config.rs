//! JSON run configuration.
//!
//! The document is deserialized strictly (unknown keys are errors), defaults
//! are filled in, and every section the command needs is converted to engine
//! types. Errors name the offending key as a dotted path such as
//! `particle.mass`.

use dipole_phase::fields::{Aabb, DEFAULT_CORE_RADIUS};
use dipole_phase::interferometer::{build_casella_with, CasellaGeometry};
use dipole_phase::quadrature::{QuadOptions, DEFAULT_MAX_DEPTH, DEFAULT_TOL};
use dipole_phase::{DipoleParticle, EngineError, FieldConfig, InterferometerSpec, KinematicState, PathSpec, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Phase,
    Force,
    Torque,
    Trajectory,
    Interfere,
    Sweep,
    Check,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Phase => "phase",
            Command::Force => "force",
            Command::Torque => "torque",
            Command::Trajectory => "trajectory",
            Command::Interfere => "interfere",
            Command::Sweep => "sweep",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    All,
    NullForce,
    Topology,
    ClosedForms,
    Duality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleDoc {
    pub mass: f64,
    pub d: [f64; 3],
    pub mu: [f64; 3],
}

fn default_core_radius() -> f64 {
    DEFAULT_CORE_RADIUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldDoc {
    RadialLine {
        lambda_e: f64,
        lambda_m: f64,
        #[serde(default = "default_core_radius")]
        core_radius: f64,
    },
    TkachukWire {
        lambda: f64,
        lambda_m: f64,
        #[serde(default = "default_core_radius")]
        core_radius: f64,
    },
    UniformBlock {
        #[serde(rename = "E0")]
        e0: [f64; 3],
        #[serde(rename = "B0")]
        b0: [f64; 3],
        min: [f64; 3],
        max: [f64; 3],
    },
    Superposition {
        members: Vec<FieldDoc>,
    },
}

fn default_normal() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathDoc {
    Circle {
        center: [f64; 3],
        radius: f64,
        #[serde(default = "default_normal")]
        normal: [f64; 3],
        winding: i32,
    },
    Polygon {
        vertices: Vec<[f64; 3]>,
        #[serde(default = "yes")]
        closed: bool,
    },
    Polyline {
        vertices: Vec<[f64; 3]>,
    },
    Parametric {
        samples: Vec<[f64; 3]>,
        #[serde(default)]
        closed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterferometerDoc {
    Casella {
        d: f64,
        mu: f64,
        #[serde(rename = "B0")]
        b0: f64,
        #[serde(rename = "E0")]
        e0: f64,
        a: f64,
        w: f64,
        /// Length of the field-free leads; defaults to `w`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lead: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub r: [f64; 3],
    pub v: [f64; 3],
    #[serde(default)]
    pub t: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_depth() -> u32 {
    DEFAULT_MAX_DEPTH
}
fn default_dt() -> f64 {
    dipole_phase::dynamics::DEFAULT_DT
}
fn default_steps() -> usize {
    1000
}
fn default_method() -> String {
    "rk4".into()
}
fn default_output() -> OutputFormat {
    OutputFormat::Json
}
fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    #[serde(default = "default_tol")]
    pub tol_quad: f64,
    #[serde(default = "default_depth")]
    pub max_depth: u32,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_output")]
    pub output: OutputFormat,
    #[serde(default)]
    pub seed: u64,
    /// Random states drawn by the null force/torque check.
    #[serde(default = "default_samples")]
    pub n_samples: usize,
}

impl Default for OptionsDoc {
    fn default() -> Self {
        OptionsDoc {
            tol_quad: default_tol(),
            max_depth: default_depth(),
            dt: default_dt(),
            steps: default_steps(),
            method: default_method(),
            output: default_output(),
            seed: 0,
            n_samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    /// Dotted path into this document, e.g. `field.lambda_e` or `particle.d.2`.
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDoc {
    pub suite: Suite,
}

/// The whole configuration document, as read and as re-emitted with defaults filled.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particle: Option<ParticleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferometer: Option<InterferometerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateDoc>,
    #[serde(default)]
    pub options: OptionsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckDoc>,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
    pub sweep: Option<SweepDoc>,
    pub suite: Option<Suite>,
}

/// A validated, fully resolved run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    /// Resolved document; re-running on it reproduces the result.
    pub doc: ConfigDoc,
    pub particle: Option<DipoleParticle>,
    pub field: Option<FieldConfig>,
    pub path: Option<PathSpec>,
    pub interferometer: Option<InterferometerSpec>,
    pub state: Option<KinematicState>,
    pub quad: QuadOptions,
}

fn schema(key: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Schema {
        key: key.into(),
        message: message.into(),
    }
}

fn engine_schema(key: &str, err: EngineError) -> CliError {
    match err {
        EngineError::InvalidConfig(m) | EngineError::InvalidGeometry(m) => schema(key, m),
        other => CliError::Engine(other),
    }
}

fn vec3(key: &str, v: [f64; 3]) -> Result<Vec3, CliError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(Vec3::from(v))
    } else {
        Err(schema(key, "components must be finite"))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(schema(key, format!("must be finite and > 0, got {v}")))
    }
}

fn build_particle(p: &ParticleDoc) -> Result<DipoleParticle, CliError> {
    let mass = positive("particle.mass", p.mass)?;
    let d = vec3("particle.d", p.d)?;
    let mu = vec3("particle.mu", p.mu)?;
    DipoleParticle::new(mass, d, mu).map_err(|e| engine_schema("particle", e))
}

fn build_field(f: &FieldDoc, key: &str) -> Result<FieldConfig, CliError> {
    let config = match f {
        FieldDoc::RadialLine {
            lambda_e,
            lambda_m,
            core_radius,
        } => FieldConfig::RadialLine {
            lambda_e: *lambda_e,
            lambda_m: *lambda_m,
            core_radius: positive(&format!("{key}.core_radius"), *core_radius)?,
        },
        FieldDoc::TkachukWire {
            lambda,
            lambda_m,
            core_radius,
        } => FieldConfig::TkachukWire {
            lambda: *lambda,
            lambda_m: *lambda_m,
            core_radius: positive(&format!("{key}.core_radius"), *core_radius)?,
        },
        FieldDoc::UniformBlock { e0, b0, min, max } => {
            let region = Aabb::new(vec3(&format!("{key}.min"), *min)?, vec3(&format!("{key}.max"), *max)?)
                .map_err(|e| engine_schema(&format!("{key}.max"), e))?;
            FieldConfig::uniform_block(
                vec3(&format!("{key}.E0"), *e0)?,
                vec3(&format!("{key}.B0"), *b0)?,
                region,
            )
        }
        FieldDoc::Superposition { members } => {
            if members.is_empty() {
                return Err(schema(format!("{key}.members"), "superposition must be non-empty"));
            }
            let members = members
                .iter()
                .enumerate()
                .map(|(i, m)| build_field(m, &format!("{key}.members.{i}")))
                .collect::<Result<Vec<_>, _>>()?;
            FieldConfig::Superposition { members }
        }
    };
    config.validate().map_err(|e| engine_schema(key, e))?;
    Ok(config)
}

fn build_points(key: &str, pts: &[[f64; 3]]) -> Result<Vec<Vec3>, CliError> {
    pts.iter()
        .enumerate()
        .map(|(i, p)| vec3(&format!("{key}.{i}"), *p))
        .collect()
}

fn build_path(p: &PathDoc) -> Result<PathSpec, CliError> {
    let path = match p {
        PathDoc::Circle {
            center,
            radius,
            normal,
            winding,
        } => {
            if *winding == 0 {
                return Err(schema("path.winding", "winding must be nonzero for closed circles"));
            }
            let normal = vec3("path.normal", *normal)?;
            if normal.norm() == 0.0 {
                return Err(schema("path.normal", "normal must be a nonzero vector"));
            }
            PathSpec::Circle {
                center: vec3("path.center", *center)?,
                radius: positive("path.radius", *radius)?,
                normal,
                winding: *winding,
            }
        }
        PathDoc::Polygon { vertices, closed } => PathSpec::Polygon {
            vertices: build_points("path.vertices", vertices)?,
            closed: *closed,
        },
        PathDoc::Polyline { vertices } => PathSpec::Polyline {
            vertices: build_points("path.vertices", vertices)?,
        },
        PathDoc::Parametric { samples, closed } => PathSpec::Parametric {
            samples: build_points("path.samples", samples)?,
            closed: *closed,
        },
    };
    path.validate().map_err(|e| engine_schema("path", e))?;
    Ok(path)
}

fn build_interferometer(doc: &mut InterferometerDoc) -> Result<InterferometerSpec, CliError> {
    let InterferometerDoc::Casella {
        d,
        mu,
        b0,
        e0,
        a,
        w,
        lead,
    } = doc;
    let geom = CasellaGeometry {
        a: positive("interferometer.a", *a)?,
        w: positive("interferometer.w", *w)?,
        lead: positive("interferometer.lead", lead.unwrap_or(*w))?,
    };
    *lead = Some(geom.lead);
    build_casella_with(*d, *mu, *b0, *e0, &geom).map_err(|e| engine_schema("interferometer", e))
}

fn build_state(s: &StateDoc) -> Result<KinematicState, CliError> {
    if !s.t.is_finite() {
        return Err(schema("state.t", "must be finite"));
    }
    Ok(KinematicState {
        r: vec3("state.r", s.r)?,
        v: vec3("state.v", s.v)?,
        t: s.t,
    })
}

fn require<'a, T>(section: &'a Option<T>, key: &str, command: Command) -> Result<&'a T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| schema(key, format!("required by the `{}` command", command.name())))
}

/// Parses the JSON text into a document, reporting the failing key path.
pub fn parse_document(text: &str) -> Result<ConfigDoc, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    match serde_path_to_error::deserialize::<_, ConfigDoc>(&mut de) {
        Ok(doc) => {
            de.end().map_err(|e| CliError::Parse(e.to_string()))?;
            Ok(doc)
        }
        Err(err) => {
            let path = err.path().to_string();
            let inner = err.into_inner();
            if inner.is_syntax() || inner.is_eof() || inner.is_io() {
                return Err(CliError::Parse(inner.to_string()));
            }
            let message = inner.to_string();
            // serde reports a missing key against its parent object
            let key = match message
                .strip_prefix("missing field `")
                .and_then(|m| m.split('`').next())
            {
                Some(field) if path == "." => field.to_string(),
                Some(field) => format!("{path}.{field}"),
                None => path,
            };
            Err(schema(key, message))
        }
    }
}

/// Parses and validates a configuration for `command`.
pub fn parse_config(text: &str, command: Command, overrides: &Overrides) -> Result<RunSpec, CliError> {
    let doc = parse_document(text)?;
    resolve(doc, command, overrides)
}

/// Applies overrides, fills defaults and builds the engine objects.
pub fn resolve(mut doc: ConfigDoc, command: Command, overrides: &Overrides) -> Result<RunSpec, CliError> {
    if let Some(f) = overrides.format {
        doc.options.output = f;
    }
    if let Some(s) = overrides.seed {
        doc.options.seed = s;
    }
    if let Some(s) = &overrides.sweep {
        doc.sweep = Some(s.clone());
    }
    if let Some(s) = overrides.suite {
        doc.check = Some(CheckDoc { suite: s });
    }

    let o = &doc.options;
    positive("options.tol_quad", o.tol_quad)?;
    positive("options.dt", o.dt)?;
    if o.max_depth == 0 {
        return Err(schema("options.max_depth", "must be >= 1"));
    }
    if o.method != "rk4" {
        return Err(schema(
            "options.method",
            format!("unknown integrator `{}` (expected \"rk4\")", o.method),
        ));
    }
    if o.n_samples == 0 {
        return Err(schema("options.n_samples", "must be >= 1"));
    }
    let quad = QuadOptions {
        tol: o.tol_quad,
        max_depth: o.max_depth,
    };

    let needs: &[&str] = match command {
        Command::Phase | Command::Sweep => &["particle", "field", "path"],
        Command::Force | Command::Torque | Command::Trajectory => &["particle", "field", "state"],
        Command::Interfere => &["interferometer"],
        Command::Check => &[],
    };
    for key in needs {
        let present = match *key {
            "particle" => doc.particle.is_some(),
            "field" => doc.field.is_some(),
            "path" => doc.path.is_some(),
            "state" => doc.state.is_some(),
            _ => doc.interferometer.is_some(),
        };
        if !present {
            return Err(schema(*key, format!("required by the `{}` command", command.name())));
        }
    }
    if command == Command::Sweep {
        let s = require(&doc.sweep, "sweep", command)?;
        if s.steps == 0 {
            return Err(schema("sweep.steps", "must be >= 1"));
        }
        if !s.from.is_finite() || !s.to.is_finite() {
            return Err(schema("sweep.from", "sweep range must be finite"));
        }
    }
    if command == Command::Check && doc.check.is_none() {
        doc.check = Some(CheckDoc { suite: Suite::All });
    }

    let particle = doc.particle.as_ref().map(build_particle).transpose()?;
    let field = doc.field.as_ref().map(|f| build_field(f, "field")).transpose()?;
    let path = doc.path.as_ref().map(build_path).transpose()?;
    let state = doc.state.as_ref().map(build_state).transpose()?;
    let interferometer = doc.interferometer.as_mut().map(build_interferometer).transpose()?;

    Ok(RunSpec {
        command,
        doc,
        particle,
        field,
        path,
        interferometer,
        state,
        quad,
    })
}
