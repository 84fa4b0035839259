use dipole_phase::dynamics::{canonical_momentum, force, integrate_trajectory, potential_energy, torque};
use dipole_phase::holonomy::phase_line_integral_with;
use dipole_phase::interferometer::arm_phase_result;
use dipole_phase::validation::{
    check_closed_forms, check_duality, check_null_force_torque, check_topological_invariance,
};
use dipole_phase::{CheckReport, DipoleParticle, FieldConfig, FringeResult, Integrator, PhaseResult, Vec3};
use serde::Serialize;
use serde_json::Value;

use crate::config::{self, Command, ConfigDoc, OutputFormat, Overrides, RunSpec, Suite, SweepDoc};
use crate::error::{engine_exit_code, CliError};

/// Rendered result document and the exit code the process should return.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
    /// Diagnostic for stderr when the run produced output but did not succeed.
    pub diagnostic: Option<String>,
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    command: &'a str,
    spec: &'a ConfigDoc,
    result: R,
}

#[derive(Serialize)]
struct PhaseOut {
    gamma_total: f64,
    gamma_ac: f64,
    gamma_hmw: f64,
    quad_error: f64,
    n_evals: usize,
    /// `exp(−iγ)` as `[re, im]`
    phase_factor: [f64; 2],
}

impl From<PhaseResult> for PhaseOut {
    fn from(p: PhaseResult) -> Self {
        PhaseOut {
            gamma_total: p.gamma_total,
            gamma_ac: p.gamma_ac,
            gamma_hmw: p.gamma_hmw,
            quad_error: p.quad_error,
            n_evals: p.n_evals,
            phase_factor: [p.gamma_total.cos(), -p.gamma_total.sin()],
        }
    }
}

#[derive(Serialize)]
struct ForceOut {
    force: [f64; 3],
    canonical_momentum: [f64; 3],
    potential_energy: f64,
}

#[derive(Serialize)]
struct TorqueOut {
    torque: [f64; 3],
}

#[derive(Serialize)]
struct StateOut {
    t: f64,
    r: [f64; 3],
    v: [f64; 3],
}

#[derive(Serialize)]
struct TrajectoryOut {
    method: &'static str,
    dt: f64,
    steps_requested: usize,
    steps_completed: usize,
    complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    states: Vec<StateOut>,
}

#[derive(Serialize)]
struct InterfereOut {
    delta_gamma: f64,
    intensity: f64,
    arm1: PhaseResult,
    arm2: PhaseResult,
}

#[derive(Serialize)]
struct SweepRow {
    param_name: String,
    param_value: f64,
    gamma_total: f64,
    gamma_ac: f64,
    gamma_hmw: f64,
    quad_error: f64,
    n_evals: usize,
}

#[derive(Serialize)]
struct SweepOut {
    param: String,
    rows: Vec<SweepRow>,
}

#[derive(Serialize)]
struct CheckOut {
    suite: Suite,
    pass: bool,
    reports: Vec<CheckReport>,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn ok(output: String) -> Outcome {
    Outcome {
        output,
        exit_code: 0,
        diagnostic: None,
    }
}

fn render_json<R: Serialize>(spec: &RunSpec, result: R) -> Result<String, CliError> {
    let doc = Document {
        command: spec.command.name(),
        spec: &spec.doc,
        result,
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn render_csv<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render<R: Serialize, C: Serialize>(spec: &RunSpec, result: R, rows: &[C]) -> Result<String, CliError> {
    match spec.doc.options.output {
        OutputFormat::Json => render_json(spec, result),
        OutputFormat::Csv => render_csv(rows),
    }
}

// Sections are guaranteed by `config::resolve` for each command.
fn particle(spec: &RunSpec) -> &DipoleParticle {
    spec.particle.as_ref().expect("particle resolved")
}

fn field(spec: &RunSpec) -> &FieldConfig {
    spec.field.as_ref().expect("field resolved")
}

fn run_phase(spec: &RunSpec) -> Result<PhaseResult, CliError> {
    let path = spec.path.as_ref().expect("path resolved");
    Ok(phase_line_integral_with(particle(spec), field(spec), path, &spec.quad)?)
}

/// Parses, validates and runs in one go.
pub fn execute(text: &str, command: Command, overrides: &Overrides) -> Result<Outcome, CliError> {
    run(&config::parse_config(text, command, overrides)?)
}

pub fn run(spec: &RunSpec) -> Result<Outcome, CliError> {
    match spec.command {
        Command::Phase => {
            let p = run_phase(spec)?;
            #[derive(Serialize)]
            struct Row {
                gamma_total: f64,
                gamma_ac: f64,
                gamma_hmw: f64,
                quad_error: f64,
                n_evals: usize,
            }
            let row = Row {
                gamma_total: p.gamma_total,
                gamma_ac: p.gamma_ac,
                gamma_hmw: p.gamma_hmw,
                quad_error: p.quad_error,
                n_evals: p.n_evals,
            };
            Ok(ok(render(spec, PhaseOut::from(p), &[row])?))
        }
        Command::Force => {
            let state = spec.state.as_ref().expect("state resolved");
            let f = force(particle(spec), state, field(spec))?;
            let p = canonical_momentum(particle(spec), state, field(spec))?;
            let u = potential_energy(particle(spec), state, field(spec))?;
            let out = ForceOut {
                force: arr(&f),
                canonical_momentum: arr(&p),
                potential_energy: u,
            };
            #[derive(Serialize)]
            struct Row {
                fx: f64,
                fy: f64,
                fz: f64,
                px: f64,
                py: f64,
                pz: f64,
                potential_energy: f64,
            }
            let row = Row {
                fx: f.x,
                fy: f.y,
                fz: f.z,
                px: p.x,
                py: p.y,
                pz: p.z,
                potential_energy: u,
            };
            Ok(ok(render(spec, out, &[row])?))
        }
        Command::Torque => {
            let state = spec.state.as_ref().expect("state resolved");
            let t = torque(particle(spec), state, field(spec))?;
            #[derive(Serialize)]
            struct Row {
                tx: f64,
                ty: f64,
                tz: f64,
            }
            let row = Row {
                tx: t.x,
                ty: t.y,
                tz: t.z,
            };
            Ok(ok(render(spec, TorqueOut { torque: arr(&t) }, &[row])?))
        }
        Command::Trajectory => run_trajectory(spec),
        Command::Interfere => {
            let ifm = spec.interferometer.as_ref().expect("interferometer resolved");
            ifm.validate()?;
            let a1 = arm_phase_result(&ifm.arm1, &ifm.particle, &spec.quad)?;
            let a2 = arm_phase_result(&ifm.arm2, &ifm.particle, &spec.quad)?;
            let fringe = FringeResult::from_phase(a1.gamma_total - a2.gamma_total);
            #[derive(Serialize)]
            struct Row {
                delta_gamma: f64,
                intensity: f64,
                gamma_arm1: f64,
                gamma_arm2: f64,
            }
            let row = Row {
                delta_gamma: fringe.delta_gamma,
                intensity: fringe.intensity,
                gamma_arm1: a1.gamma_total,
                gamma_arm2: a2.gamma_total,
            };
            let out = InterfereOut {
                delta_gamma: fringe.delta_gamma,
                intensity: fringe.intensity,
                arm1: a1,
                arm2: a2,
            };
            Ok(ok(render(spec, out, &[row])?))
        }
        Command::Sweep => run_sweep(spec),
        Command::Check => run_check(spec),
    }
}

fn run_trajectory(spec: &RunSpec) -> Result<Outcome, CliError> {
    let state = spec.state.as_ref().expect("state resolved");
    let o = &spec.doc.options;
    let tr = integrate_trajectory(particle(spec), state, field(spec), o.dt, o.steps, Integrator::Rk4)?;
    let states: Vec<StateOut> = tr
        .states
        .iter()
        .map(|s| StateOut {
            t: s.t,
            r: arr(&s.r),
            v: arr(&s.v),
        })
        .collect();
    let exit_code = tr.error.as_ref().map_or(0, engine_exit_code);
    let diagnostic = tr.error.as_ref().map(|e| format!("trajectory stopped early: {e}"));
    let output = match o.output {
        OutputFormat::Json => render_json(
            spec,
            TrajectoryOut {
                method: tr.method.name(),
                dt: tr.dt,
                steps_requested: o.steps,
                steps_completed: tr.states.len().saturating_sub(1),
                complete: tr.is_complete(),
                error: tr.error.as_ref().map(ToString::to_string),
                states,
            },
        )?,
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row {
                t: f64,
                x: f64,
                y: f64,
                z: f64,
                vx: f64,
                vy: f64,
                vz: f64,
            }
            let rows: Vec<Row> = states
                .iter()
                .map(|s| Row {
                    t: s.t,
                    x: s.r[0],
                    y: s.r[1],
                    z: s.r[2],
                    vx: s.v[0],
                    vy: s.v[1],
                    vz: s.v[2],
                })
                .collect();
            render_csv(&rows)?
        }
    };
    Ok(Outcome {
        output,
        exit_code,
        diagnostic,
    })
}

/// Evenly spaced values from `from` to `to` inclusive.
pub fn sweep_values(s: &SweepDoc) -> Vec<f64> {
    if s.steps == 1 {
        return vec![s.from];
    }
    let step = (s.to - s.from) / (s.steps - 1) as f64;
    (0..s.steps)
        .map(|i| {
            if i == s.steps - 1 {
                s.to
            } else {
                s.from + step * i as f64
            }
        })
        .collect()
}

fn sweep_error(message: impl Into<String>) -> CliError {
    CliError::Schema {
        key: "sweep.param".into(),
        message: message.into(),
    }
}

/// Replaces the number at dotted `path` (object keys or array indices) in `root`.
fn set_number(root: &mut Value, path: &str, value: f64) -> Result<(), CliError> {
    let mut node = root;
    for key in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| sweep_error(format!("`{path}` does not name a value in the configuration")))?;
    }
    let Value::Number(current) = node else {
        return Err(sweep_error(format!("`{path}` is not a numeric value")));
    };
    *node = if current.is_f64() {
        serde_json::Number::from_f64(value).map(Value::Number)
    } else if value.fract() == 0.0 && value.abs() < 2f64.powi(53) {
        Some(Value::from(value as i64))
    } else {
        return Err(sweep_error(format!("`{path}` takes integers, got {value}")));
    }
    .ok_or_else(|| sweep_error(format!("non-finite sweep value {value}")))?;
    Ok(())
}

fn run_sweep(spec: &RunSpec) -> Result<Outcome, CliError> {
    let sweep = spec.doc.sweep.clone().expect("sweep resolved");
    if sweep.param.starts_with("sweep") || sweep.param.starts_with("options") {
        return Err(sweep_error("only particle, field and path values can be swept"));
    }
    let base = serde_json::to_value(&spec.doc).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut rows = Vec::with_capacity(sweep.steps);
    for value in sweep_values(&sweep) {
        let mut doc = base.clone();
        set_number(&mut doc, &sweep.param, value)?;
        let doc: ConfigDoc = serde_json::from_value(doc).map_err(|e| sweep_error(e.to_string()))?;
        let point = config::resolve(doc, Command::Phase, &Overrides::default())?;
        let p = run_phase(&point)?;
        rows.push(SweepRow {
            param_name: sweep.param.clone(),
            param_value: value,
            gamma_total: p.gamma_total,
            gamma_ac: p.gamma_ac,
            gamma_hmw: p.gamma_hmw,
            quad_error: p.quad_error,
            n_evals: p.n_evals,
        });
    }
    let output = match spec.doc.options.output {
        OutputFormat::Json => render_json(
            spec,
            SweepOut {
                param: sweep.param.clone(),
                rows,
            },
        )?,
        OutputFormat::Csv => render_csv(&rows)?,
    };
    Ok(ok(output))
}

/// Particle and field used by `check` when the configuration omits them.
pub fn default_check_setup() -> (DipoleParticle, FieldConfig) {
    let z = Vec3::new(0.0, 0.0, 1.0);
    (
        DipoleParticle::new(1.0, z, z).expect("valid default particle"),
        FieldConfig::radial_line(1.0, 1.0),
    )
}

fn run_check(spec: &RunSpec) -> Result<Outcome, CliError> {
    let suite = spec.doc.check.as_ref().map_or(Suite::All, |c| c.suite);
    let (default_particle, default_field) = default_check_setup();
    let p = spec.particle.as_ref().unwrap_or(&default_particle);
    let f = spec.field.as_ref().unwrap_or(&default_field);
    let seed = spec.doc.options.seed;
    let n = spec.doc.options.n_samples;

    let mut reports = Vec::new();
    if matches!(suite, Suite::All | Suite::NullForce) {
        reports.push(check_null_force_torque(f, p, n, seed)?);
    }
    if matches!(suite, Suite::All | Suite::Topology) {
        reports.push(check_topological_invariance(f, p, seed)?);
    }
    if matches!(suite, Suite::All | Suite::ClosedForms) {
        reports.push(check_closed_forms(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Duality) {
        reports.push(check_duality(seed)?);
    }
    let pass = reports.iter().all(|r| r.pass);

    let output = match spec.doc.options.output {
        OutputFormat::Json => render_json(
            spec,
            CheckOut {
                suite,
                pass,
                reports: reports.clone(),
            },
        )?,
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row {
                name: String,
                pass: bool,
                metric: f64,
                threshold: f64,
                n_samples: usize,
                seed: u64,
            }
            let mut rows = Vec::new();
            for r in &reports {
                let mut push = |name: String, r: &CheckReport| {
                    rows.push(Row {
                        name,
                        pass: r.pass,
                        metric: r.metric,
                        threshold: r.threshold,
                        n_samples: r.n_samples,
                        seed: r.seed,
                    })
                };
                push(r.name.clone(), r);
                for part in &r.parts {
                    push(format!("{}.{}", r.name, part.name), part);
                }
            }
            render_csv(&rows)?
        }
    };
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    Ok(Outcome {
        output,
        exit_code: if pass { 0 } else { 2 },
        diagnostic: (!pass).then(|| format!("failed checks: {}", failed.join(", "))),
    })
}
