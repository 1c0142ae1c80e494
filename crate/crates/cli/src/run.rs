use std::fs;
use std::path::Path;

use energy_core::asymptotics::{q_sweep, r_sweep, SweepBudget, SweepReport};
use energy_core::bodies::{pi_p_ellipsoid, sphere_lr_moment, BodySpec};
use energy_core::discrete_energy::{balance_defect, estimate_mp, max_energy_in_body, GridKind, Method};
use energy_core::embedding::{embed_snowflake, radius_closed_form_ball, radius_growth_report, schoenberg_radius_points, PSD_TOLERANCE};
use energy_core::mc::McEstimate;
use energy_core::points::PointSet;
use energy_core::rng::RngStream;
use energy_core::specfun::closed_form_m_ball;
use energy_core::stable::gub_upper_bound;
use energy_core::Error;
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;

pub enum CliError {
    Core(Error),
    Input(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::RadiusBelowSchoenberg { .. }) => 4,
            CliError::Core(e) if e.is_solver_failure() => 3,
            _ => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Input(s) => s.clone(),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// A flat view of the result for CSV output.
#[derive(Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Outcome {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub table: Table,
}

#[derive(Serialize)]
struct Tagged<'a> {
    method: Method,
    #[serde(flatten)]
    estimate: &'a McEstimate,
}

fn mc_json(e: &McEstimate) -> Value {
    serde_json::to_value(Tagged {
        method: Method::MonteCarlo,
        estimate: e,
    })
    .expect("serializable")
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_body(arg: &BodyArg) -> Result<BodySpec> {
    let text = match (&arg.body, &arg.body_file) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => read_file(path)?,
        (None, None) => return Err(CliError::Input("a body is required".into())),
    };
    Ok(BodySpec::from_json_str(&text)?)
}

fn load_points(path: &Path) -> Result<PointSet> {
    let (points, _) = PointSet::from_csv_str(&read_file(path)?)?;
    Ok(points)
}

/// `m_p` for bounds: a supplied value, the exact value 1 at `p = 1`, or a grid estimate.
fn resolve_mp(p: f64, supplied: Option<f64>) -> Result<(f64, &'static str)> {
    if let Some(mp) = supplied {
        if !(mp > 0.0 && mp.is_finite()) {
            return Err(CliError::Core(Error::Domain(format!("--mp must be positive, got {mp}"))));
        }
        return Ok((mp, "supplied"));
    }
    if p == 1.0 {
        return Ok((1.0, "exact"));
    }
    let (_, rep) = estimate_mp(p, &SweepBudget::default().mp_grids, GridKind::Chebyshev)?;
    Ok((rep.value, "grid-estimate"))
}

fn with(config: Value, extra: Value) -> Value {
    let mut config = config;
    if let (Value::Object(c), Value::Object(e)) = (&mut config, extra) {
        c.extend(e);
    }
    config
}

pub fn run(common: &Common, command: &Command) -> Result<Outcome> {
    let seed = common.seed;
    let base = json!({ "seed": seed });
    match command {
        Command::Mp(a) => {
            let kind = if a.uniform { GridKind::Uniform } else { GridKind::Chebyshev };
            let (measure, report) = estimate_mp(a.p, &a.grids, kind)?;
            let mut table = Table::new(&["resolution", "value", "condition", "method"]);
            for t in &report.trace {
                table.push(vec![t.resolution.to_string(), num(t.value), opt(t.condition), "linear-system".into()]);
            }
            let mut result = json!({
                "report": report,
                "balance_defect": balance_defect(measure.weights()),
            });
            if a.weights {
                result["measure"] = to_value(&measure);
            }
            Ok(Outcome {
                command: "mp",
                config: with(to_value(a), json!({ "grid": kind })),
                result,
                table,
            })
        }
        Command::MaxEnergy(a) => {
            let body = load_body(&a.body)?;
            let rng = RngStream::new(seed, 1);
            let (measure, report) = max_energy_in_body(&body, a.r, a.p, &a.resolutions, rng)?;
            let reference = reference_value(&body, a.r, a.p, a.samples, RngStream::new(seed, 2))?;
            let mut table = Table::new(&["resolution", "value", "stderr", "condition", "method"]);
            for t in &report.trace {
                table.push(vec![
                    t.resolution.to_string(),
                    num(t.value),
                    String::new(),
                    opt(t.condition),
                    "linear-system".into(),
                ]);
            }
            if let Some(r) = &reference {
                table.push(vec![
                    String::new(),
                    opt(r["value"].as_f64()),
                    opt(r["stderr"].as_f64()),
                    String::new(),
                    r["method"].as_str().unwrap_or_default().to_string(),
                ]);
            }
            Ok(Outcome {
                command: "max-energy",
                config: with(to_value(a), json!({ "body": body, "seed": seed, "stream": rng.stream })),
                result: json!({
                    "lower_bound": report,
                    "support_size": measure.points().len(),
                    "reference": reference,
                }),
                table,
            })
        }
        Command::PiP(a) => {
            let t = operator(&a.operator)?;
            let rng = RngStream::new(seed, 3);
            let est = pi_p_ellipsoid(&t, a.p, a.samples, rng)?;
            let mut table = Table::new(&["estimate", "stderr", "samples", "seed", "stream", "method"]);
            table.push(mc_row(&est));
            let rows: Vec<Vec<f64>> = t.row_iter().map(|r| r.iter().copied().collect()).collect();
            Ok(Outcome {
                command: "pi-p",
                config: with(to_value(a), json!({ "matrix": rows, "seed": seed })),
                result: mc_json(&est),
                table,
            })
        }
        Command::Gub(a) => {
            let body = load_body(&a.body)?;
            let (mp, source) = resolve_mp(a.p, a.mp)?;
            let rng = RngStream::new(seed, 4);
            let est = gub_upper_bound(&body, a.r, a.p, mp, a.samples, rng)?;
            let mut table = Table::new(&["estimate", "stderr", "samples", "seed", "stream", "method"]);
            table.push(mc_row(&est));
            Ok(Outcome {
                command: "gub",
                config: with(to_value(a), json!({ "body": body, "seed": seed, "mp": mp, "mp_source": source })),
                result: mc_json(&est),
                table,
            })
        }
        Command::SphereMoment(a) => {
            let rng = RngStream::new(seed, 5);
            let est = sphere_lr_moment(a.n, a.r, a.p, a.samples, rng)?;
            let normalized = est.scaled((a.n as f64).powf((0.5 - 1.0 / a.r) * a.p));
            let mut table = Table::new(&["estimate", "stderr", "samples", "seed", "stream", "method"]);
            table.push(mc_row(&est));
            Ok(Outcome {
                command: "sphere-moment",
                config: with(to_value(a), base),
                result: json!({ "moment": mc_json(&est), "normalized": mc_json(&normalized) }),
                table,
            })
        }
        Command::Asymptotics(a) => {
            let budget = SweepBudget {
                points: a.points,
                samples: a.samples,
                mp_grids: a.mp_grids.clone(),
            };
            let rng = RngStream::new(seed, 6);
            let report = match (a.sweep.q, a.sweep.r) {
                (Some(q), None) => q_sweep(q, a.p, &a.n_list, &budget, rng)?,
                (None, Some(r)) => r_sweep(r, a.p, &a.n_list, &budget, rng)?,
                _ => return Err(CliError::Input("exactly one of --q or --r is required".into())),
            };
            let sweep = to_value(&report.sweep);
            Ok(Outcome {
                command: "asymptotics",
                config: with(with(to_value(a), sweep), base),
                table: sweep_table(&report),
                result: to_value(&report),
            })
        }
        Command::Radius(a) => radius(a, seed),
        Command::Embed(a) => {
            let points = load_points(&a.points)?;
            let (critical, measure) = schoenberg_radius_points(&points, a.alpha)?;
            let radius = a.radius.unwrap_or(critical);
            let emb = embed_snowflake(&points, a.alpha, radius)?;
            let m = emb.coordinates.len();
            let header: Vec<String> = (1..=m).map(|k| format!("y{k}")).collect();
            let mut table = Table {
                header,
                rows: Vec::new(),
            };
            for row in &emb.coordinates {
                table.push(row.iter().map(|v| num(*v)).collect());
            }
            Ok(Outcome {
                command: "embed",
                config: with(to_value(a), json!({ "psd_tolerance": PSD_TOLERANCE })),
                result: json!({
                    "schoenberg_radius": critical,
                    "energy_weights": measure.weights(),
                    "embedding": emb,
                }),
                table,
            })
        }
    }
}

fn mc_row(e: &McEstimate) -> Vec<String> {
    vec![
        num(e.estimate),
        num(e.stderr),
        e.samples.to_string(),
        e.seed.to_string(),
        e.stream.to_string(),
        "monte-carlo".into(),
    ]
}

fn sweep_table(report: &SweepReport) -> Table {
    let mut table = Table::new(&[
        "n",
        "lower",
        "lower_direct",
        "lower_floor",
        "lower_method",
        "upper",
        "upper_stderr",
        "upper_method",
    ]);
    for r in &report.rows {
        table.push(vec![
            r.n.to_string(),
            num(r.lower),
            num(r.lower_direct),
            num(r.lower_floor),
            "linear-system".into(),
            num(r.upper.estimate),
            num(r.upper.stderr),
            "monte-carlo".into(),
        ]);
    }
    table
}

fn operator(arg: &OperatorArg) -> Result<DMatrix<f64>> {
    match (&arg.semi_axes, &arg.matrix) {
        (Some(a), None) => {
            let body = BodySpec::ellipsoid_semi_axes(a.clone())?;
            match body {
                BodySpec::Ellipsoid(e) => Ok(e.operator().clone()),
                _ => unreachable!("ellipsoid constructor"),
            }
        }
        (None, Some(text)) => {
            let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| CliError::Input(format!("--matrix: {e}")))?;
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Input("--matrix must be a non-empty square matrix".into()));
            }
            Ok(DMatrix::from_row_iterator(n, n, rows.into_iter().flatten()))
        }
        _ => Err(CliError::Input("exactly one of --semi-axes or --matrix is required".into())),
    }
}

/// Closed-form or `π_p` reference for Euclidean balls, ellipsoids and the interval under `d_2`.
fn reference_value(body: &BodySpec, r: f64, p: f64, samples: usize, rng: RngStream) -> Result<Option<Value>> {
    if r != 2.0 {
        return Ok(None);
    }
    let (mp, source) = match body {
        BodySpec::LqBall { q, .. } if *q != 2.0 => return Ok(None),
        _ => resolve_mp(p, None)?,
    };
    Ok(Some(match body {
        BodySpec::Interval => json!({ "value": mp, "method": Method::ClosedForm, "mp": mp, "mp_source": source }),
        BodySpec::LqBall { n, .. } => json!({
            "value": closed_form_m_ball(*n, p, mp)?,
            "method": Method::ClosedForm,
            "mp": mp,
            "mp_source": source,
        }),
        BodySpec::Ellipsoid(e) => {
            let est = pi_p_ellipsoid(e.operator(), p, samples, rng)?.scaled(mp);
            json!({
                "value": est.estimate,
                "stderr": est.stderr,
                "samples": est.samples,
                "method": Method::MonteCarlo,
                "mp": mp,
                "mp_source": source,
            })
        }
    }))
}

fn radius(a: &RadiusArgs, seed: u64) -> Result<Outcome> {
    let config = with(to_value(a), json!({ "seed": seed }));
    if let Some(n) = a.n {
        let (mp, source) = resolve_mp(2.0 * a.alpha, a.mp)?;
        let value = radius_closed_form_ball(n, a.alpha, mp)?;
        let mut table = Table::new(&["n", "alpha", "radius", "mp", "method"]);
        table.push(vec![n.to_string(), num(a.alpha), num(value), num(mp), "closed-form".into()]);
        return Ok(Outcome {
            command: "radius",
            config: with(config, json!({ "mp": mp, "mp_source": source })),
            result: json!({ "radius": value, "method": Method::ClosedForm }),
            table,
        });
    }
    if let Some(path) = &a.points {
        let points = load_points(path)?;
        let (value, measure) = schoenberg_radius_points(&points, a.alpha)?;
        let mut table = Table::new(&["points", "alpha", "radius", "method"]);
        table.push(vec![points.len().to_string(), num(a.alpha), num(value), "linear-system".into()]);
        return Ok(Outcome {
            command: "radius",
            config,
            result: json!({
                "radius": value,
                "method": Method::LinearSystem,
                "measure": measure,
            }),
            table,
        });
    }
    let q = a.q.ok_or_else(|| CliError::Input("one of --n, --points or --q is required".into()))?;
    let budget = SweepBudget {
        points: a.budget_points,
        samples: a.samples,
        mp_grids: SweepBudget::default().mp_grids,
    };
    let report = radius_growth_report(q, a.alpha, &a.n_list, &budget, RngStream::new(seed, 7))?;
    let mut table = Table::new(&["n", "r_lower", "lower_method", "r_upper", "r_upper_stderr", "upper_method"]);
    for r in &report.rows {
        table.push(vec![
            r.n.to_string(),
            num(r.r_lower),
            "linear-system".into(),
            num(r.r_upper),
            num(r.r_upper_stderr),
            "monte-carlo".into(),
        ]);
    }
    Ok(Outcome {
        command: "radius",
        config,
        result: to_value(&report),
        table,
    })
}
