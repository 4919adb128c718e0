use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use qccs_core::ast::{pretty, Process};
use qccs_core::equiv::{
    bisim_process, dsb_estimate, dsrb_estimate, reduction_bisim, EquivError, GameOptions, Outcome, Verdict,
};
use qccs_core::parse::{build_register, parse_file, parse_process, SourceFile, StateDecl};
use qccs_core::qnum::{diamond_distance, ComplexMatrix};
use qccs_core::reduce::normal_form;
use qccs_core::sos::{build_lts, Configuration, FreshPolicy, Lts, LtsBounds};

use crate::{Format, Global, Kind, Pair, Run};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    File(String),
    Diagnostics(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Diagnostics(_) => 1,
            CliError::Usage(_) => 64,
            CliError::File(_) => 66,
            CliError::Internal(_) => 70,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::File(m) => write!(f, "file error: {m}"),
            CliError::Diagnostics(m) => f.write_str(m),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<EquivError> for CliError {
    fn from(e: EquivError) -> Self {
        match e {
            EquivError::EmptySuite => CliError::Usage(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

type Res<T> = Result<T, CliError>;

fn internal(e: impl fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

pub fn load(path: &Path) -> Res<SourceFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::File(format!("{}: {e}", path.display())))?;
    parse_file(&text).map_err(|ds| {
        CliError::Diagnostics(
            ds.iter()
                .map(|d| format!("{}:{d}", path.display()))
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })
}

/// A constant's body, or else `name` read as a process term.
pub fn resolve(file: &SourceFile, name: &str) -> Res<Process> {
    if let Some(p) = file.process(name) {
        return Ok(p.clone());
    }
    parse_process(name, &file.env)
        .map_err(|d| CliError::Usage(format!("`{name}` is neither a constant nor a process term ({d})")))
}

pub fn states<'a>(file: &'a SourceFile, names: &[String]) -> Res<Vec<&'a StateDecl>> {
    names
        .iter()
        .map(|n| file.state(n).ok_or_else(|| CliError::Usage(format!("no state named `{n}`"))))
        .collect()
}

fn game_options(g: &Global) -> GameOptions {
    let mut o = GameOptions {
        fresh: g.fresh,
        ..GameOptions::default()
    };
    if let Some(s) = g.seed {
        o.seed = s;
        o.diamond.seed = s;
    }
    o
}

/// Writes to stdout; a closed pipe ends output quietly.
pub fn emit(text: &str) -> Res<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(internal(e)),
        _ => Ok(()),
    }
}

fn emit_json(v: &serde_json::Value) -> Res<()> {
    emit(&(serde_json::to_string_pretty(v).map_err(internal)? + "\n"))
}

pub fn parse(path: &Path) -> Res<u8> {
    load(path)?;
    emit("ok\n")?;
    Ok(0)
}

fn configuration(g: &Global, run: &Run) -> Res<(SourceFile, Configuration)> {
    let file = load(&run.file)?;
    let p = resolve(&file, &run.proc_)?;
    let s = states(&file, std::slice::from_ref(&run.state))?[0];
    let reg = build_register(&[&p], &[s], &file.env, g.fresh).map_err(CliError::Diagnostics)?;
    let st = s.instantiate(&reg).map_err(|e| CliError::Diagnostics(e.to_string()))?;
    Ok((file, Configuration::new(p, st)))
}

fn explore(g: &Global, run: &Run, depth: usize, max_nodes: usize) -> Res<Lts> {
    let (file, c) = configuration(g, run)?;
    let bounds = LtsBounds {
        max_depth: depth,
        max_nodes,
    };
    build_lts(c, &file.env, bounds, FreshPolicy::default()).map_err(internal)
}

fn matrix_json(m: &ComplexMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect();
    json!(rows)
}

pub fn steps(g: &Global, run: &Run, depth: usize, format: Format) -> Res<u8> {
    let lts = explore(g, run, depth, LtsBounds::default().max_nodes)?;
    match format {
        Format::Text => {
            let mut text = String::new();
            for (_, act, b) in &lts.edges {
                let n = &lts.nodes[*b].config;
                text.push_str(&format!("{act} :: {} :: {}\n", pretty(&n.process), n.state.fingerprint()));
            }
            emit(&text)?;
            Ok(0)
        }
        Format::Json => {
            let steps: Vec<_> = lts
                .edges
                .iter()
                .map(|(a, act, b)| {
                    let n = &lts.nodes[*b].config;
                    json!({
                        "from": a,
                        "to": b,
                        "action": act.to_string(),
                        "process": pretty(&n.process),
                        "state": n.state.fingerprint(),
                        "register": n.state.register().vars().map(|v| v.to_string()).collect::<Vec<_>>(),
                        "density": matrix_json(n.state.matrix()),
                    })
                })
                .collect();
            emit_json(&json!({ "steps": steps, "truncated": lts.is_truncated() }))?;
            Ok(0)
        }
        Format::Dot => Err(CliError::Usage("steps prints text or json".into())),
    }
}

pub fn lts(g: &Global, run: &Run, format: Format, depth: usize, max_nodes: usize, out: Option<&Path>) -> Res<u8> {
    let lts = explore(g, run, depth, max_nodes)?;
    let text = match format {
        Format::Dot => lts.to_dot(),
        Format::Json => serde_json::to_string_pretty(&lts.to_json()).map_err(internal)? + "\n",
        Format::Text => return Err(CliError::Usage("lts writes dot or json".into())),
    };
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::File(format!("{}: {e}", path.display())))?,
        None => emit(&text)?,
    }
    Ok(0)
}

pub fn nf(path: &Path, name: &str) -> Res<u8> {
    let file = load(path)?;
    let p = resolve(&file, name)?;
    emit(&format!("{}\n", pretty(&normal_form(&p).map_err(internal)?)))?;
    Ok(0)
}

fn verdict_code(v: &Verdict) -> u8 {
    match v.result {
        Outcome::Bisimilar => 0,
        Outcome::NotBisimilar => 2,
        Outcome::Unknown => 3,
    }
}

pub fn bisim(g: &Global, pair: &Pair, reduction: bool) -> Res<u8> {
    let file = load(&pair.file)?;
    let (p, q) = (resolve(&file, &pair.p)?, resolve(&file, &pair.q)?);
    let sts = states(&file, &pair.states)?;
    let mut o = game_options(g);
    if let Some(d) = pair.depth {
        o.depth = d;
    }
    if let Some(t) = pair.tol {
        o.tol = t;
    }
    if let Some(n) = pair.random_product {
        o.random_product = n;
    }
    if let Some(n) = pair.random_entangled {
        o.random_entangled = n;
    }
    let v = if reduction {
        reduction_bisim(&p, &q, &file.env, &sts, &o)?
    } else {
        bisim_process(&p, &q, &file.env, &sts, &o)?
    };
    emit_json(&serde_json::to_value(&v).map_err(internal)?)?;
    Ok(verdict_code(&v))
}

pub struct DistanceArgs {
    pub file: PathBuf,
    pub kind: Kind,
    pub p: Option<String>,
    pub q: Option<String>,
    pub e: Option<String>,
    pub f: Option<String>,
    pub states: Vec<String>,
    pub budget: Option<usize>,
    pub depth: Option<usize>,
    pub tol: Option<f64>,
    pub starts: Option<usize>,
}

fn required<'a>(v: &'a Option<String>, flag: &str, kind: &str) -> Res<&'a str> {
    v.as_deref()
        .ok_or_else(|| CliError::Usage(format!("--kind {kind} needs --{flag}")))
}

pub fn distance(g: &Global, a: &DistanceArgs) -> Res<u8> {
    let file = load(&a.file)?;
    let mut o = game_options(g);
    if let Some(s) = a.starts {
        o.diamond.starts = s;
    }
    if a.kind == Kind::Diamond {
        let op = |flag: &str, v: &Option<String>| -> Res<_> {
            let name = required(v, flag, "diamond")?;
            file.env
                .ops
                .get(name)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("no operation named `{name}`")))
        };
        let (e, f) = (op("e", &a.e)?, op("f", &a.f)?);
        let d = diamond_distance(&e, &f, &o.diamond).map_err(|e| CliError::Usage(e.to_string()))?;
        emit(&format!("{d}\n"))?;
        return Ok(0);
    }
    let kind = if a.kind == Kind::Sb { "sb" } else { "srb" };
    let p = resolve(&file, required(&a.p, "p", kind)?)?;
    let q = resolve(&file, required(&a.q, "q", kind)?)?;
    let sts = states(&file, &a.states)?;
    if let Some(d) = a.depth {
        o.depth = d;
    }
    if let Some(t) = a.tol {
        o.tol = t;
    }
    if let Some(b) = a.budget {
        if b < 3 {
            return Err(CliError::Usage("--budget must allow at least 3 probes".into()));
        }
        // Probes at 0 and 1, then one halving per probe.
        o.distance_tol = 0.5f64.powi((b - 2) as i32);
    }
    let est = if a.kind == Kind::Sb {
        dsb_estimate(&p, &q, &file.env, &sts, &o)?
    } else {
        dsrb_estimate(&p, &q, &file.env, &sts, &o)?
    };
    let mut v = serde_json::to_value(&est).map_err(internal)?;
    v["kind"] = json!(kind);
    emit_json(&v)?;
    Ok(0)
}
