use std::collections::BTreeSet;

use serde::Serialize;

use super::lexer::Pos;
use crate::ast::{free_vars, AstError, Env, Process};
use crate::names::Var;
use crate::qnum::{kets, ComplexMatrix, GateRegistry, QState, QnumError, Register, VarType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Bisim,
    NotBisim,
    RBisim,
    NotRBisim,
}

/// A `check` directive: an expected verdict for a pair of processes.
#[derive(Clone, Debug)]
pub struct Check {
    pub kind: CheckKind,
    pub p: Process,
    pub q: Process,
    pub states: Vec<String>,
    pub pos: Pos,
}

/// A named initial state, given as a product of factors over variable
/// groups. Variables of a register not covered by the factors start in
/// `|0>`.
#[derive(Clone, Debug)]
pub struct StateDecl {
    pub name: String,
    pub parts: Vec<(Vec<Var>, ComplexMatrix)>,
    pub pos: Pos,
}

impl StateDecl {
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.parts.iter().flat_map(|(vs, _)| vs.iter())
    }

    /// The state over `register`, padding uncovered variables with `|0>`.
    pub fn instantiate(&self, register: &Register) -> Result<QState, QnumError> {
        let mut parts = self.parts.clone();
        for v in self.vars() {
            if !register.contains(v) {
                return Err(QnumError::UnknownVar(format!("{v} (used by state `{}`)", self.name)));
            }
        }
        let covered: BTreeSet<&Var> = self.vars().collect();
        for (v, t) in register.entries() {
            if !covered.contains(v) {
                parts.push((vec![v.clone()], ComplexMatrix::outer(&kets::basis(t.dim, 0))));
            }
        }
        QState::product(register.clone(), &parts)
    }
}

/// A parsed `.qccs` file.
#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub env: Env,
    pub gates: GateRegistry,
    pub states: Vec<StateDecl>,
    pub checks: Vec<Check>,
}

impl SourceFile {
    pub fn state(&self, name: &str) -> Option<&StateDecl> {
        self.states.iter().find(|s| s.name == name)
    }

    /// Body of a constant, for `--proc NAME` style lookups.
    pub fn process(&self, name: &str) -> Option<&Process> {
        self.env.constant(name).map(|d| &d.body)
    }
}

/// Types of every variable a process can touch: free variables and input
/// binders, following constant definitions.
pub fn used_types(procs: &[&Process], env: &Env) -> Result<BTreeSet<VarType>, AstError> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for p in procs {
        collect_types(p, env, &mut out, &mut seen)?;
    }
    Ok(out)
}

fn collect_types(
    p: &Process,
    env: &Env,
    out: &mut BTreeSet<VarType>,
    seen: &mut BTreeSet<String>,
) -> Result<(), AstError> {
    let ty = |v: &Var| env.type_of(v).ok_or_else(|| AstError::UnknownVar(v.to_string()));
    match p {
        Process::Const { name, args } => {
            for a in args {
                out.insert(ty(a)?);
            }
            if seen.insert(name.to_string()) {
                let def = env
                    .constant(name)
                    .ok_or_else(|| AstError::UnknownConstant(name.to_string()))?;
                collect_types(&def.body, env, out, seen)?;
            }
        }
        Process::Nil => {}
        Process::Tau(b) | Process::Restrict(b, _) => collect_types(b, env, out, seen)?,
        Process::Op { vars, body, .. } => {
            for v in vars {
                out.insert(ty(v)?);
            }
            collect_types(body, env, out, seen)?;
        }
        Process::Input { var, body, .. } | Process::Output { var, body, .. } => {
            out.insert(ty(var)?);
            collect_types(body, env, out, seen)?;
        }
        Process::Sum(a, b) | Process::Par(a, b) => {
            collect_types(a, env, out, seen)?;
            collect_types(b, env, out, seen)?;
        }
    }
    Ok(())
}

/// The active register for running `procs` from the given states: their
/// free variables, the variables the states mention, plus `fresh` reserved
/// variables `#<type>_k` for every type the processes use.
pub fn build_register(
    procs: &[&Process],
    states: &[&StateDecl],
    env: &Env,
    fresh: usize,
) -> Result<Register, String> {
    let mut vars: BTreeSet<Var> = BTreeSet::new();
    for p in procs {
        vars.extend(free_vars(p));
    }
    for s in states {
        vars.extend(s.vars().cloned());
    }
    let types = used_types(procs, env).map_err(|e| e.to_string())?;
    let mut entries = Vec::new();
    for v in vars {
        let t = env.type_of(&v).ok_or_else(|| format!("undeclared variable `{v}`"))?;
        entries.push((v, t));
    }
    for t in types {
        for k in 0..fresh {
            entries.push((Var::fresh(&t.name, k), t.clone()));
        }
    }
    Register::new(entries).map_err(|e| e.to_string())
}
