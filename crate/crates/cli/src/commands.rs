//! Command implementations. Each command merges its `--config` JSON with the
//! flag overrides, deserializes the result, computes, then writes.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use layerpot::campanato::{iterate, BoundaryGridSpec};
use layerpot::experiments::{
    blowup_density_control, blowup_density_scan, blowup_graph_control, blowup_graph_scan, key_lemma_ratio, BlowupScan,
    SampleSpec,
};
use layerpot::geometry::{FamilyDescriptor, Interface};
use layerpot::modulus::{classify_dini_with, DiniConfig};
use layerpot::potential::radial_oracle;
use layerpot::{BallContext, Point, QuadratureSpec};

use crate::config::{
    BlowupConfig, ClassifyConfig, EvalConfig, IterateConfig, JumpConfig, KeyLemmaConfig, RadialConfig,
};
use crate::error::Failure;
use crate::output::{emit, num, Table};
use crate::{Cli, Command, ExperimentCmd, ModulusCmd, OracleCmd, SolveCmd};

const NOT_CONVERGED: &str = "not_converged";

pub fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    let mut m = base_config(cli.config.as_deref())?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Modulus(ModulusCmd::Classify { family, params, ladder }) => {
            set(&mut m, "family", family.clone().map(Value::String));
            set(&mut m, "params", params.as_deref().map(|p| parse_json(p, "params")).transpose()?);
            set(&mut m, "ladder", ladder.as_deref().map(|l| list(l, "ladder")).transpose()?);
            set(&mut m, "tol", cli.tol.map(Value::from));
            classify(resolve(m)?, out)
        }
        Command::Solve(SolveCmd::Eval { problem, points, gradient }) => {
            set(&mut m, "problem", problem.as_deref().map(|p| read_json(p, "problem")).transpose()?);
            set(&mut m, "points", points.as_deref().map(read_points).transpose()?);
            if *gradient {
                m.insert("gradient".into(), Value::Bool(true));
            }
            set_tol(&mut m, &["problem", "quadrature"], cli.tol);
            eval(resolve(m)?, out)
        }
        Command::Solve(SolveCmd::Jump { problem, x0, h_ladder, order }) => {
            set(&mut m, "problem", problem.as_deref().map(|p| read_json(p, "problem")).transpose()?);
            set(&mut m, "x0", x0.as_deref().map(|x| list(x, "x0")).transpose()?);
            set(&mut m, "h_ladder", h_ladder.as_deref().map(|x| list(x, "h_ladder")).transpose()?);
            set(&mut m, "order", order.map(Value::from));
            set_tol(&mut m, &["problem", "quadrature"], cli.tol);
            jump(resolve(m)?, out)
        }
        Command::Oracle(OracleCmd::Radial { s, r, g0, radii }) => {
            set(&mut m, "s", s.map(Value::from));
            set(&mut m, "r", r.map(Value::from));
            set(&mut m, "g0", g0.map(Value::from));
            set(&mut m, "radii", radii.as_deref().map(|x| list(x, "radii")).transpose()?);
            radial(resolve(m)?, out)
        }
        Command::Experiment(ExperimentCmd::BlowupGraph { control }) => {
            blowup_flags(&mut m, *control, cli.tol);
            blowup(resolve(m)?, Target::Graph, out)
        }
        Command::Experiment(ExperimentCmd::BlowupDensity { control }) => {
            blowup_flags(&mut m, *control, cli.tol);
            blowup(resolve(m)?, Target::Density, out)
        }
        Command::Experiment(ExperimentCmd::KeyLemma { samples, seed }) => {
            set(&mut m, "samples", samples.map(Value::from));
            set(&mut m, "seed", seed.map(Value::from));
            set_tol(&mut m, &["quadrature"], cli.tol);
            key_lemma(resolve(m)?, out)
        }
        Command::Experiment(ExperimentCmd::Iterate { problem, rho, steps, samples, seed }) => {
            set(&mut m, "problem", problem.as_deref().map(|p| read_json(p, "problem")).transpose()?);
            set(&mut m, "rho", rho.map(Value::from));
            set(&mut m, "steps", steps.map(Value::from));
            set(&mut m, "samples", samples.map(Value::from));
            set(&mut m, "seed", seed.map(Value::from));
            set_tol(&mut m, &["problem", "quadrature"], cli.tol);
            run_iterate(resolve(m)?, out)
        }
    }
}

fn base_config(path: Option<&Path>) -> Result<Map<String, Value>, Failure> {
    match path {
        None => Ok(Map::new()),
        Some(p) => match read_json(p, "config")? {
            Value::Object(m) => Ok(m),
            _ => Err(Failure::schema("config", "expected a JSON object")),
        },
    }
}

fn read_json(path: &Path, field: &str) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::schema(field, format!("{}: {e}", path.display())))?;
    parse_json(&text, field)
}

fn parse_json(text: &str, field: &str) -> Result<Value, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::schema(field, e))
}

fn list(text: &str, field: &str) -> Result<Value, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map(Value::from))
        .collect::<Result<Vec<_>, _>>()
        .map(Value::Array)
        .map_err(|e| Failure::schema(field, e))
}

/// One point per row; a non-numeric first row is taken as a header.
fn read_points(path: &Path) -> Result<Value, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::schema("points", format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::schema("points", e))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(Value::from(v)),
            Err(_) if i == 0 => {}
            Err(e) => return Err(Failure::schema("points", format!("row {}: {e}", i + 1))),
        }
    }
    Ok(Value::Array(rows))
}

fn set(m: &mut Map<String, Value>, key: &str, v: Option<Value>) {
    if let Some(v) = v {
        m.insert(key.into(), v);
    }
}

fn set_tol(m: &mut Map<String, Value>, path: &[&str], tol: Option<f64>) {
    let Some(tol) = tol else { return };
    let mut cur = m;
    for key in path {
        let entry = cur.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
        let Value::Object(next) = entry else { return };
        cur = next;
    }
    cur.insert("target_tol".into(), Value::from(tol));
}

fn blowup_flags(m: &mut Map<String, Value>, control: bool, tol: Option<f64>) {
    if control {
        m.insert("control".into(), Value::Bool(true));
    }
    set_tol(m, &["quadrature"], tol);
}

fn resolve<C: DeserializeOwned>(m: Map<String, Value>) -> Result<C, Failure> {
    serde_json::from_value(Value::Object(m)).map_err(|e| Failure::schema("config", e))
}

fn core(field: &str, e: layerpot::Error) -> Failure {
    match e {
        layerpot::Error::Argument(_) | layerpot::Error::Domain(_) => Failure::schema(field, e),
        other => Failure::runtime(other),
    }
}

fn clean(msg: impl ToString) -> String {
    msg.to_string().replace('\n', " ")
}

fn status(failed: bool) -> u8 {
    if failed {
        3
    } else {
        0
    }
}

fn point(coords: &[f64], n: usize, field: &str) -> Result<Point<f64>, Failure> {
    if coords.len() != n {
        return Err(Failure::schema(field, format!("expected {n} coordinates, got {}", coords.len())));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Failure::schema(field, "coordinates must be finite"));
    }
    Ok(Point::new(coords))
}

fn classify(cfg: ClassifyConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let descriptor = FamilyDescriptor {
        family: cfg.family.clone(),
        params: cfg.params.clone(),
        n: None,
    };
    let modulus = descriptor.modulus::<f64>().map_err(|e| core("params", e))?;
    if !(cfg.tol > 0.0) {
        return Err(Failure::schema("tol", "must be positive"));
    }
    let dini = DiniConfig {
        tol: cfg.tol,
        growth_factor: cfg.growth_factor,
        quadrature: QuadratureSpec::default().with_tol(cfg.tol),
    };
    let c = classify_dini_with(&modulus, &cfg.ladder, &dini).map_err(|e| core("ladder", e))?;
    let mut table = Table::new(["delta", "partial_integral", "log_dini_partial", "verdict", "log_dini_verdict", "est_error"]);
    let verdict = label(&c.verdict);
    let log_verdict = label(&c.log_dini);
    for ((delta, p), (_, lp)) in c.partial_integrals.iter().zip(&c.log_dini_partials) {
        table.push(vec![num(*delta), num(*p), num(*lp), verdict.clone(), log_verdict.clone(), num(c.est_error)]);
    }
    let summary = json!({
        "verdict": c.verdict,
        "log_dini": c.log_dini,
        "integral": c.integral,
        "log_dini_integral": c.log_dini_integral,
        "series_sums": c.series_sums,
        "est_error": c.est_error,
    });
    emit(out, "modulus classify", &cfg, &summary, &table)?;
    Ok(0)
}

fn label(v: &impl serde::Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn eval(cfg: EvalConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let problem = cfg.problem.build()?;
    let n = problem.dim();
    let r = problem.ctx().radius();
    let mut points = Vec::with_capacity(cfg.points.len());
    for (i, c) in cfg.points.iter().enumerate() {
        let field = format!("points[{i}]");
        let p = point(c, n, &field)?;
        if p.norm() >= r {
            return Err(Failure::schema(&field, "point must lie inside the open ball"));
        }
        points.push(p);
    }
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("u".into());
    if cfg.gradient {
        header.extend((1..=n).map(|i| format!("du_dx{i}")));
    }
    header.extend(["est_error".into(), "failure".into()]);
    let mut table = Table::new(header);
    let values = problem.evaluate_many(&points);
    let grads = cfg.gradient.then(|| problem.evaluate_gradient_many(&points));
    for (i, (x, v)) in points.iter().zip(values).enumerate() {
        let mut row: Vec<String> = x.coords().iter().map(|c| num(*c)).collect();
        let mut err = 0.0;
        let mut failure = String::new();
        match v {
            Ok(e) => {
                row.push(num(e.value));
                err += e.est_error;
                if !e.converged {
                    failure = NOT_CONVERGED.into();
                }
            }
            Err(e) => {
                row.push(num(f64::NAN));
                failure = clean(e);
            }
        }
        if let Some(grads) = &grads {
            match &grads[i] {
                Ok(g) => {
                    row.extend(g.value.coords().iter().map(|c| num(*c)));
                    err = err.max(g.est_error);
                    if !g.converged && failure.is_empty() {
                        failure = NOT_CONVERGED.into();
                    }
                }
                Err(e) => {
                    row.extend((0..n).map(|_| num(f64::NAN)));
                    if failure.is_empty() {
                        failure = clean(e);
                    }
                }
            }
        }
        row.push(num(err));
        table.failed |= !failure.is_empty();
        row.push(failure);
        table.push(row);
    }
    let summary = json!({ "points": points.len(), "failed": table.failed });
    emit(out, "solve eval", &cfg, &summary, &table)?;
    Ok(status(table.failed))
}

fn jump(cfg: JumpConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let problem = cfg.problem.build()?;
    let x0 = point(&cfg.x0, problem.dim(), "x0")?;
    let res = match cfg.order {
        Some(p) => problem.transmission_jump_with_order(&x0, &cfg.h_ladder, p),
        None => problem.transmission_jump(&x0, &cfg.h_ladder),
    }
    .map_err(|e| core("x0/h_ladder", e))?;
    let mut table = Table::new(["h", "derivative_plus", "derivative_minus", "jump", "est_error", "failure"]);
    for s in &res.per_h {
        table.push(vec![
            num(s.h),
            num(s.derivative_plus),
            num(s.derivative_minus),
            num(s.jump),
            num(res.est_error),
            String::new(),
        ]);
    }
    table.failed = !res.converged;
    table.push(vec![
        num(0.0),
        num(f64::NAN),
        num(f64::NAN),
        num(res.jump),
        num(res.est_error),
        if res.converged { String::new() } else { NOT_CONVERGED.into() },
    ]);
    let summary = json!({
        "jump": res.jump,
        "order": res.order,
        "g_x0": problem.density().value(&x0),
        "est_error": res.est_error,
        "converged": res.converged,
    });
    emit(out, "solve jump", &cfg, &summary, &table)?;
    Ok(status(table.failed))
}

fn radial(cfg: RadialConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let ctx = BallContext::new(3, cfg.r).map_err(|e| core("r", e))?;
    let mut table = Table::new(["norm_x", "u"]);
    for &x in &cfg.radii {
        let u = radial_oracle(x, cfg.s, &ctx, cfg.g0).map_err(|e| core("radii/s", e))?;
        table.push(vec![num(x), num(u)]);
    }
    emit(out, "oracle radial", &cfg, &json!({}), &table)?;
    Ok(0)
}

#[derive(Clone, Copy)]
enum Target {
    Graph,
    Density,
}

fn blowup(cfg: BlowupConfig, target: Target, out: Option<&Path>) -> Result<u8, Failure> {
    if cfg.j_min > cfg.j_max {
        return Err(Failure::schema("j_min", "must not exceed j_max"));
    }
    let js: Vec<u32> = (cfg.j_min..=cfg.j_max).collect();
    let scan = match (target, cfg.control) {
        (Target::Graph, false) => blowup_graph_scan(&js, cfg.n, cfg.quadrature),
        (Target::Graph, true) => blowup_graph_control(&js, cfg.n, cfg.quadrature),
        (Target::Density, false) => blowup_density_scan(&js, cfg.n, cfg.quadrature),
        (Target::Density, true) => blowup_density_control(&js, cfg.n, cfg.quadrature),
    }
    .map_err(|e| core("config", e))?;
    let table = blowup_table(&js, &scan);
    let summary = json!({
        "slope": scan.fit.slope,
        "intercept": scan.fit.intercept,
        "strictly_decreasing": scan.strictly_decreasing(),
        "relative_variation": scan.relative_variation(),
        "max_abs": scan.max_abs(),
    });
    let name = match target {
        Target::Graph => "experiment blowup-graph",
        Target::Density => "experiment blowup-density",
    };
    emit(out, name, &cfg, &summary, &table)?;
    Ok(status(table.failed))
}

fn blowup_table(js: &[u32], scan: &BlowupScan<f64>) -> Table {
    let mut table = Table::new(["j", "epsilon", "r_epsilon", "log_log", "derivative", "est_error", "failure"]);
    for (i, j) in js.iter().enumerate() {
        let r_eps = scan.r_epsilons.as_ref().map_or(f64::NAN, |r| r[i]);
        let ok = scan.converged[i];
        table.failed |= !ok;
        table.push(vec![
            j.to_string(),
            num(scan.epsilons[i]),
            num(r_eps),
            num(scan.log_log[i]),
            num(scan.derivative_values[i]),
            num(scan.est_errors[i]),
            if ok { String::new() } else { NOT_CONVERGED.into() },
        ]);
    }
    table
}

fn key_lemma(cfg: KeyLemmaConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let graph = match cfg.interface.interface::<f64>(3).map_err(|e| core("interface", e))? {
        Interface::Graph(g) => g,
        Interface::Sphere(_) => return Err(Failure::schema("interface", "a graph family is required")),
    };
    let g = cfg.density.density::<f64>(3).map_err(|e| core("density", e))?;
    let grid = SampleSpec {
        count: cfg.samples,
        seed: cfg.seed,
    };
    let scan = key_lemma_ratio(&graph, &g, cfg.rho, &cfg.radii, grid, cfg.quadrature).map_err(|e| core("config", e))?;
    let mut table = Table::new(["r", "omega", "sup_w", "ratio", "est_error", "failure"]);
    for i in 0..scan.radii.len() {
        let ok = scan.converged[i];
        table.failed |= !ok;
        table.push(vec![
            num(scan.radii[i]),
            num(scan.omegas[i]),
            num(scan.sups[i]),
            num(scan.ratios[i]),
            num(scan.est_errors[i]),
            if ok { String::new() } else { NOT_CONVERGED.into() },
        ]);
    }
    let summary = json!({ "growth": scan.growth(), "samples": scan.samples });
    emit(out, "experiment key-lemma", &cfg, &summary, &table)?;
    Ok(status(table.failed))
}

fn run_iterate(cfg: IterateConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let problem = cfg.problem.build()?;
    let n = problem.dim();
    let g0 = problem.density().g0();
    let grid = BoundaryGridSpec {
        n_theta: cfg.n_theta,
        n_phi: cfg.n_phi,
    };
    let fit = SampleSpec {
        count: cfg.samples,
        seed: cfg.seed,
    };
    let run = iterate(&problem, cfg.rho, cfg.steps, grid, fit).map_err(|e| core("config", e))?;
    let mut header = vec!["k".to_string()];
    header.extend((1..=n).map(|i| format!("a_plus_{i}")));
    header.extend((1..=n).map(|i| format!("a_minus_{i}")));
    header.extend(
        ["b", "d_k", "sup_error_plus", "sup_error_minus", "increment", "jump_defect", "est_error", "failure"]
            .map(String::from),
    );
    let width = header.len();
    let mut table = Table::new(header);
    for s in &run.states {
        let mut row = vec![s.k.to_string()];
        row.extend(s.l_plus.a.coords().iter().map(|c| num(*c)));
        row.extend(s.l_minus.a.coords().iter().map(|c| num(*c)));
        row.extend([
            num(s.l_plus.b),
            num(s.d_k),
            num(s.sup_error_plus),
            num(s.sup_error_minus),
            num(s.increment),
            num(s.jump_defect(g0)),
            num(s.est_error),
        ]);
        table.failed |= !s.converged;
        row.push(if s.converged { String::new() } else { NOT_CONVERGED.into() });
        table.push(row);
    }
    if let Some(e) = &run.failure {
        let k = run.states.last().map_or(0, |s| s.k + 1);
        let mut row = vec![k.to_string()];
        row.extend((2..width).map(|_| num(f64::NAN)));
        row.push(clean(e));
        table.failed = true;
        table.push(row);
    }
    let summary = json!({
        "steps_completed": run.states.len(),
        "failure": run.failure.as_ref().map(|e| e.to_string()),
    });
    emit(out, "experiment iterate", &cfg, &summary, &table)?;
    Ok(status(table.failed))
}
