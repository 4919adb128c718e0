use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::names::{Chan, Var};
use crate::qnum::{SuperOp, VarType};

/// A qCCS process term.
#[derive(Clone, Debug)]
pub enum Process {
    /// `A(x1, ..., xn)`.
    Const { name: Arc<str>, args: Vec<Var> },
    Nil,
    Tau(Box<Process>),
    /// `E[X].P`; `vars[i]` is bound to slot `i` of `op`.
    Op {
        op: Arc<SuperOp>,
        vars: Vec<Var>,
        body: Box<Process>,
    },
    Input {
        chan: Chan,
        var: Var,
        body: Box<Process>,
    },
    Output {
        chan: Chan,
        var: Var,
        body: Box<Process>,
    },
    Sum(Box<Process>, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Restrict(Box<Process>, BTreeSet<Chan>),
}

impl Process {
    pub fn nil() -> Self {
        Process::Nil
    }

    pub fn constant(name: &str, args: Vec<Var>) -> Self {
        Process::Const {
            name: Arc::from(name),
            args,
        }
    }

    pub fn tau(body: Process) -> Self {
        Process::Tau(Box::new(body))
    }

    pub fn op(op: Arc<SuperOp>, vars: Vec<Var>, body: Process) -> Self {
        Process::Op {
            op,
            vars,
            body: Box::new(body),
        }
    }

    pub fn input(chan: Chan, var: Var, body: Process) -> Self {
        Process::Input {
            chan,
            var,
            body: Box::new(body),
        }
    }

    pub fn output(chan: Chan, var: Var, body: Process) -> Self {
        Process::Output {
            chan,
            var,
            body: Box::new(body),
        }
    }

    pub fn sum(p: Process, q: Process) -> Self {
        Process::Sum(Box::new(p), Box::new(q))
    }

    pub fn par(p: Process, q: Process) -> Self {
        Process::Par(Box::new(p), Box::new(q))
    }

    pub fn restrict(p: Process, chans: impl IntoIterator<Item = Chan>) -> Self {
        Process::Restrict(Box::new(p), chans.into_iter().collect())
    }

    /// Sum of a list, right-nested; the empty sum is `nil`.
    pub fn sum_of(mut items: Vec<Process>) -> Self {
        match items.len() {
            0 => Process::Nil,
            1 => items.pop().unwrap(),
            _ => {
                let last = items.pop().unwrap();
                items.into_iter().rev().fold(last, |acc, p| Process::sum(p, acc))
            }
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Process::Const { .. } | Process::Nil => 0,
            Process::Tau(b) | Process::Restrict(b, _) => b.size(),
            Process::Op { body, .. } | Process::Input { body, .. } | Process::Output { body, .. } => body.size(),
            Process::Sum(p, q) | Process::Par(p, q) => p.size() + q.size(),
        }
    }

    /// True if no constant occurs in the term.
    pub fn is_finite(&self) -> bool {
        match self {
            Process::Const { .. } => false,
            Process::Nil => true,
            Process::Tau(b) | Process::Restrict(b, _) => b.is_finite(),
            Process::Op { body, .. } | Process::Input { body, .. } | Process::Output { body, .. } => {
                body.is_finite()
            }
            Process::Sum(p, q) | Process::Par(p, q) => p.is_finite() && q.is_finite(),
        }
    }

    /// Every super-operator occurring in the term, constants not unfolded.
    pub fn ops(&self) -> Vec<Arc<SuperOp>> {
        let mut out = Vec::new();
        self.collect_ops(&mut out);
        out
    }

    fn collect_ops(&self, out: &mut Vec<Arc<SuperOp>>) {
        match self {
            Process::Const { .. } | Process::Nil => {}
            Process::Tau(b) | Process::Restrict(b, _) => b.collect_ops(out),
            Process::Op { op, body, .. } => {
                out.push(op.clone());
                body.collect_ops(out);
            }
            Process::Input { body, .. } | Process::Output { body, .. } => body.collect_ops(out),
            Process::Sum(p, q) | Process::Par(p, q) => {
                p.collect_ops(out);
                q.collect_ops(out);
            }
        }
    }
}

/// `A(x1, ..., xn) = body`.
#[derive(Clone, Debug)]
pub struct ConstDef {
    pub name: String,
    pub params: Vec<Var>,
    pub body: Process,
}

/// Declarations a term is interpreted against.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub types: BTreeMap<String, VarType>,
    pub vars: BTreeMap<Var, VarType>,
    pub channels: BTreeSet<Chan>,
    pub consts: BTreeMap<String, ConstDef>,
    pub ops: BTreeMap<String, Arc<SuperOp>>,
}

impl Env {
    /// Environment with the builtin `qubit` type.
    pub fn new() -> Self {
        let mut env = Env::default();
        env.types.insert("qubit".into(), VarType::qubit());
        env
    }

    pub fn declare_type(&mut self, ty: VarType) {
        self.types.insert(ty.name.clone(), ty);
    }

    pub fn declare_var(&mut self, v: Var, ty: VarType) {
        self.vars.insert(v, ty);
    }

    pub fn declare_chan(&mut self, c: Chan) {
        self.channels.insert(c);
    }

    /// Type of a declared or reserved variable.
    pub fn type_of(&self, v: &Var) -> Option<VarType> {
        if let Some(t) = self.vars.get(v) {
            return Some(t.clone());
        }
        v.reserved_type().and_then(|t| self.types.get(t).cloned())
    }

    pub fn constant(&self, name: &str) -> Option<&ConstDef> {
        self.consts.get(name)
    }
}
