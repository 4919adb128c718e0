use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::lexer::{lex, Diagnostic, Pos, Tok, Token};
use super::source::{Check, CheckKind, SourceFile, StateDecl};
use crate::ast::{check_const_def, well_formed, ConstDef, Env, Process};
use crate::names::{Chan, Var};
use crate::qnum::gates::rz;
use crate::qnum::kets;
use crate::qnum::superop::{
    amplitude_damping, computational_projectors, depolarizing, from_system_environment, measurement_superop,
    MeasureMode,
};
use crate::qnum::{ComplexMatrix, GateRegistry, QState, Register, Slot, SuperOp, VarType, C64, TOL_H};

type PResult<T> = Result<T, Diagnostic>;

/// Parses a `.qccs` source file. Syntax errors stop at the first problem;
/// well-formedness of definitions and checks is reported for all of them.
pub fn parse_file(text: &str) -> Result<SourceFile, Vec<Diagnostic>> {
    let tokens = lex(text, false).map_err(|d| vec![d])?;
    let mut p = Parser::new(tokens, Env::new(), false);
    let mut file = SourceFile::default();
    let mut def_pos = Vec::new();
    while !p.at_eof() {
        p.declaration(&mut file, &mut def_pos).map_err(|d| vec![d])?;
    }
    file.env = p.env;
    file.gates = p.gates;

    let mut diags = Vec::new();
    for (name, pos) in &def_pos {
        if let Err(v) = check_const_def(&file.env.consts[name], &file.env) {
            diags.push(Diagnostic::new(*pos, v.to_string()));
        }
    }
    for c in &file.checks {
        for proc_ in [&c.p, &c.q] {
            if let Err(v) = well_formed(proc_, &file.env) {
                diags.push(Diagnostic::new(c.pos, v.to_string()));
            }
        }
        for s in &c.states {
            if file.state(s).is_none() {
                diags.push(Diagnostic::new(c.pos, format!("unknown state `{s}`")));
            }
        }
    }
    if diags.is_empty() {
        Ok(file)
    } else {
        Err(diags)
    }
}

/// Parses a single process term against an existing environment.
pub fn parse_process(text: &str, env: &Env) -> Result<Process, Diagnostic> {
    parse_process_with(text, env, false)
}

/// Like [`parse_process`], optionally accepting reserved `#` names (used to
/// read back printed terms that contain generated binders).
pub fn parse_process_with(text: &str, env: &Env, allow_reserved: bool) -> Result<Process, Diagnostic> {
    let tokens = lex(text, allow_reserved)?;
    let mut p = Parser::new(tokens, env.clone(), allow_reserved);
    let proc_ = p.process()?;
    p.expect_eof()?;
    Ok(proc_)
}

struct Measurement {
    slots: Vec<Slot>,
    ops: Vec<ComplexMatrix>,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    env: Env,
    gates: GateRegistry,
    measures: BTreeMap<String, Measurement>,
    allow_reserved: bool,
}

impl Parser {
    fn new(toks: Vec<Token>, env: Env, allow_reserved: bool) -> Self {
        Parser {
            toks,
            at: 0,
            env,
            gates: GateRegistry::new(),
            measures: BTreeMap::new(),
            allow_reserved,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(self.pos(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn integer(&mut self) -> PResult<usize> {
        match *self.peek() {
            Tok::Number(x) if x >= 0.0 && x.fract() == 0.0 => {
                self.bump();
                Ok(x as usize)
            }
            _ => self.unexpected("a non-negative integer"),
        }
    }

    // ---- declarations ----

    fn declaration(&mut self, file: &mut SourceFile, def_pos: &mut Vec<(String, Pos)>) -> PResult<()> {
        let pos = self.pos();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.unexpected("a declaration"),
        };
        match kw.as_str() {
            "type" => {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                let dim = self.integer()?;
                self.expect_sym(";")?;
                let ty = VarType::new(&name, dim).map_err(|e| Diagnostic::new(pos, e.to_string()))?;
                self.env.declare_type(ty);
            }
            "chan" => {
                self.bump();
                loop {
                    let c = self.ident()?;
                    self.env.declare_chan(Chan::new(&c));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            }
            "var" => {
                self.bump();
                let mut names = vec![self.ident()?];
                while self.eat_sym(",") {
                    names.push(self.ident()?);
                }
                self.expect_sym(":")?;
                let ty = self.type_ref()?;
                self.expect_sym(";")?;
                for n in names {
                    self.env.declare_var(Var::new(&n), ty.clone());
                }
            }
            "gate" => {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                let m = self.matrix()?;
                self.expect_sym(";")?;
                self.gates
                    .register(&name, m)
                    .map_err(|e| Diagnostic::new(pos, e.to_string()))?;
            }
            "op" => {
                self.bump();
                self.op_decl(pos)?;
            }
            "state" => {
                self.bump();
                let decl = self.state_decl(pos)?;
                if file.state(&decl.name).is_some() {
                    return Err(Diagnostic::new(pos, format!("state `{}` declared twice", decl.name)));
                }
                file.states.push(decl);
            }
            "check" => {
                self.bump();
                let c = self.check_decl(pos)?;
                file.checks.push(c);
            }
            _ => {
                let name = self.ident()?;
                let mut params = Vec::new();
                if self.eat_sym("(") {
                    if !self.is_sym(")") {
                        params = self.var_list()?;
                    }
                    self.expect_sym(")")?;
                }
                self.expect_sym("=")?;
                let body = self.process()?;
                self.expect_sym(";")?;
                if self.env.consts.contains_key(&name) {
                    return Err(Diagnostic::new(pos, format!("constant `{name}` defined twice")));
                }
                self.env.consts.insert(name.clone(), ConstDef { name: name.clone(), params, body });
                def_pos.push((name, pos));
            }
        }
        Ok(())
    }

    fn type_ref(&mut self) -> PResult<VarType> {
        let pos = self.pos();
        let name = self.ident()?;
        self.env
            .types
            .get(&name)
            .cloned()
            .ok_or_else(|| Diagnostic::new(pos, format!("unknown type `{name}`")))
    }

    fn slots(&mut self) -> PResult<Vec<Slot>> {
        self.expect_sym("(")?;
        let mut slots = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.type_ref()?;
            slots.push(Slot::new(&name, ty));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(slots)
    }

    /// Qubit slots `a0, a1, ...` covering dimension `d`, if `d` is a power of two.
    fn default_slots(&self, d: usize, pos: Pos) -> PResult<Vec<Slot>> {
        let qubit = self.env.types.get("qubit").cloned().unwrap_or_else(VarType::qubit);
        if d < 2 || !d.is_power_of_two() {
            return Err(Diagnostic::new(pos, format!("dimension {d} needs an explicit `on (...)` clause")));
        }
        let n = d.trailing_zeros() as usize;
        Ok((0..n).map(|i| Slot::new(&format!("a{i}"), qubit.clone())).collect())
    }

    fn op_decl(&mut self, pos: Pos) -> PResult<()> {
        let name = self.ident()?;
        let mut slots = if self.eat_kw("on") { Some(self.slots()?) } else { None };
        self.expect_sym("=")?;
        let body_pos = self.pos();
        let kw = self.ident()?;
        let lift = |r: Result<SuperOp, crate::qnum::QnumError>| r.map_err(|e| Diagnostic::new(body_pos, e.to_string()));
        let op = match kw.as_str() {
            "kraus" => {
                self.expect_sym("{")?;
                let mut ms = vec![self.matrix()?];
                while self.eat_sym(";") {
                    if self.is_sym("}") {
                        break;
                    }
                    ms.push(self.matrix()?);
                }
                self.expect_sym("}")?;
                let slots = self.trailing_slots(&mut slots, ms[0].rows(), body_pos)?;
                lift(SuperOp::new(slots, ms, &name))?
            }
            "gate" => {
                let g = self.ident()?;
                let m = if g == "Rz" {
                    self.expect_sym("(")?;
                    let theta = self.real_expr()?;
                    self.expect_sym(")")?;
                    rz(theta)
                } else {
                    self.gates
                        .matrix(&g)
                        .ok_or_else(|| Diagnostic::new(body_pos, format!("unknown gate `{g}`")))?
                };
                let slots = self.trailing_slots(&mut slots, m.rows(), body_pos)?;
                lift(SuperOp::unitary(slots, m, &name))?
            }
            "identity" => {
                let slots = self.trailing_slots(&mut slots, 0, body_pos)?;
                SuperOp::identity(slots).with_label(&name)
            }
            "measure" => {
                let ops = if self.eat_kw("computational") {
                    None
                } else {
                    self.expect_sym("{")?;
                    let mut ms = vec![self.matrix()?];
                    while self.eat_sym(";") {
                        if self.is_sym("}") {
                            break;
                        }
                        ms.push(self.matrix()?);
                    }
                    self.expect_sym("}")?;
                    Some(ms)
                };
                let d = ops.as_ref().map(|m| m[0].rows()).unwrap_or(0);
                let slots = self.trailing_slots(&mut slots, d, body_pos)?;
                let dim: usize = slots.iter().map(|s| s.ty.dim).product();
                let ops = ops.unwrap_or_else(|| computational_projectors(dim));
                let op = lift(measurement_superop(slots.clone(), ops.clone(), MeasureMode::Total, &name))?;
                self.measures.insert(name.clone(), Measurement { slots, ops });
                op
            }
            "branch" => {
                let m = self.integer()?;
                self.expect_kw("of")?;
                let mpos = self.pos();
                let of = self.ident()?;
                let meas = self
                    .measures
                    .get(&of)
                    .ok_or_else(|| Diagnostic::new(mpos, format!("`{of}` is not a declared measurement")))?;
                let (ms, ops) = (meas.slots.clone(), meas.ops.clone());
                let slots = slots.take().unwrap_or(ms);
                self.eat_trailing_on_forbidden()?;
                lift(measurement_superop(slots, ops, MeasureMode::Branch(m), &name))?
            }
            "amplitude_damping" | "depolarizing" => {
                self.expect_sym("(")?;
                let x = self.real_expr()?;
                self.expect_sym(")")?;
                let mut slots = self.trailing_slots(&mut slots, 2, body_pos)?;
                if slots.len() != 1 {
                    return Err(Diagnostic::new(body_pos, format!("`{kw}` acts on one variable")));
                }
                let slot = slots.remove(0);
                let op = if kw == "amplitude_damping" {
                    lift(amplitude_damping(slot, x))?
                } else {
                    lift(depolarizing(slot, x))?
                };
                op.with_label(&name)
            }
            "sysenv" => {
                // sysenv env N unitary [[..]] [projector [[..]]]
                self.expect_kw("env")?;
                let env_dim = self.integer()?;
                self.expect_kw("unitary")?;
                let u = self.matrix()?;
                let proj = if self.eat_kw("projector") {
                    self.matrix()?
                } else {
                    ComplexMatrix::identity(u.rows())
                };
                if env_dim == 0 || u.rows() % env_dim != 0 {
                    return Err(Diagnostic::new(body_pos, "environment dimension does not divide the unitary"));
                }
                let slots = self.trailing_slots(&mut slots, u.rows() / env_dim, body_pos)?;
                lift(from_system_environment(slots, env_dim, &u, &proj, &name))?
            }
            other => return Err(Diagnostic::new(body_pos, format!("unknown operation kind `{other}`"))),
        };
        self.expect_sym(";")?;
        if self.env.ops.contains_key(&name) {
            return Err(Diagnostic::new(pos, format!("operation `{name}` declared twice")));
        }
        self.env.ops.insert(name, Arc::new(op));
        Ok(())
    }

    fn eat_trailing_on_forbidden(&mut self) -> PResult<()> {
        if self.is_kw("on") {
            return self.err("`branch` takes its variables from the measurement");
        }
        Ok(())
    }

    /// Slots given before `=`, or after the body as `on (...)`, or qubit
    /// defaults matching dimension `d`.
    fn trailing_slots(&mut self, slots: &mut Option<Vec<Slot>>, d: usize, pos: Pos) -> PResult<Vec<Slot>> {
        if self.eat_kw("on") {
            if slots.is_some() {
                return self.err("variables given twice");
            }
            *slots = Some(self.slots()?);
        }
        let s = match slots.take() {
            Some(s) => s,
            None => self.default_slots(d, pos)?,
        };
        let dim: usize = s.iter().map(|x| x.ty.dim).product();
        if d != 0 && dim != d {
            return Err(Diagnostic::new(pos, format!("operator has dimension {d}, variables give {dim}")));
        }
        Ok(s)
    }

    fn state_decl(&mut self, pos: Pos) -> PResult<StateDecl> {
        let name = self.ident()?;
        self.expect_sym("=")?;
        let mut parts: Vec<(Vec<Var>, ComplexMatrix)> = Vec::new();
        let mut seen = BTreeSet::new();
        loop {
            let ppos = self.pos();
            let vars = if self.eat_sym("(") {
                let v = self.var_list()?;
                self.expect_sym(")")?;
                v
            } else {
                vec![self.var()?]
            };
            for v in &vars {
                if !seen.insert(v.clone()) {
                    return Err(Diagnostic::new(ppos, format!("`{v}` given twice in state `{name}`")));
                }
            }
            self.expect_sym(":")?;
            let dims: Vec<usize> = vars.iter().map(|v| self.env.type_of(v).unwrap().dim).collect();
            let m = self.state_value(&dims, ppos)?;
            parts.push((vars, m));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(";")?;
        let reg = Register::new(
            parts
                .iter()
                .flat_map(|(vs, _)| vs.iter().map(|v| (v.clone(), self.env.type_of(v).unwrap()))),
        )
        .map_err(|e| Diagnostic::new(pos, e.to_string()))?;
        QState::product(reg, &parts).map_err(|e| Diagnostic::new(pos, format!("state `{name}`: {e}")))?;
        Ok(StateDecl { name, parts, pos })
    }

    fn state_value(&mut self, dims: &[usize], pos: Pos) -> PResult<ComplexMatrix> {
        let d: usize = dims.iter().product();
        match self.peek().clone() {
            Tok::Ket(s) => {
                self.bump();
                let v = match s.as_str() {
                    "+" if d == 2 => kets::plus(),
                    "-" if d == 2 => kets::minus(),
                    digits if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) => {
                        let ds: Vec<usize> = digits.chars().map(|c| c as usize - '0' as usize).collect();
                        if ds.len() == dims.len() && ds.iter().zip(dims).all(|(a, b)| a < b) {
                            let idx = ds.iter().zip(dims).fold(0, |acc, (a, b)| acc * b + a);
                            kets::basis(d, idx)
                        } else if dims.len() == 1 && digits.parse::<usize>().is_ok_and(|k| k < d) {
                            kets::basis(d, digits.parse().unwrap())
                        } else {
                            return Err(Diagnostic::new(pos, format!("`|{s}>` does not fit dimensions {dims:?}")));
                        }
                    }
                    _ => return Err(Diagnostic::new(pos, format!("unknown ket `|{s}>`"))),
                };
                Ok(ComplexMatrix::outer(&v))
            }
            Tok::Ident(s) if s.starts_with("bell") => {
                self.bump();
                let k = match s.as_str() {
                    "bell00" => 0,
                    "bell01" => 1,
                    "bell10" => 2,
                    "bell11" => 3,
                    _ => return Err(Diagnostic::new(pos, format!("unknown Bell state `{s}`"))),
                };
                if dims != [2, 2] {
                    return Err(Diagnostic::new(pos, "Bell states need two qubits"));
                }
                Ok(ComplexMatrix::outer(&kets::bell(k)))
            }
            Tok::Ident(s) if s == "mixed" => {
                self.bump();
                Ok(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
            }
            Tok::Ident(s) if s == "ket" => {
                self.bump();
                let amps = self.vector()?;
                if amps.len() != d {
                    return Err(Diagnostic::new(pos, format!("ket has {} amplitudes, expected {d}", amps.len())));
                }
                let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if (n - 1.0).abs() > TOL_H {
                    return Err(Diagnostic::new(pos, format!("ket has norm {n}")));
                }
                Ok(ComplexMatrix::outer(&amps))
            }
            Tok::Sym("[") => {
                let m = self.matrix()?;
                if m.rows() != d || m.cols() != d {
                    return Err(Diagnostic::new(pos, format!("density matrix must be {d}x{d}")));
                }
                Ok(m)
            }
            _ => self.unexpected("a ket, Bell state, `mixed`, `ket [...]` or a matrix"),
        }
    }

    fn check_decl(&mut self, pos: Pos) -> PResult<Check> {
        let kpos = self.pos();
        let kind = match self.ident()?.as_str() {
            "bisim" => CheckKind::Bisim,
            "nobisim" => CheckKind::NotBisim,
            "rbisim" => CheckKind::RBisim,
            "norbisim" => CheckKind::NotRBisim,
            other => return Err(Diagnostic::new(kpos, format!("unknown check `{other}`"))),
        };
        let p = self.process()?;
        self.eat_sym(",");
        let q = self.process()?;
        let mut states = Vec::new();
        if self.eat_kw("with") {
            self.expect_kw("states")?;
            self.expect_sym("{")?;
            if !self.is_sym("}") {
                loop {
                    states.push(self.ident()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
        }
        self.expect_sym(";")?;
        Ok(Check { kind, p, q, states, pos })
    }

    // ---- processes ----

    fn process(&mut self) -> PResult<Process> {
        let mut p = self.par()?;
        while self.eat_sym("+") {
            let q = self.par()?;
            p = Process::sum(p, q);
        }
        Ok(p)
    }

    fn par(&mut self) -> PResult<Process> {
        let mut p = self.res()?;
        while self.eat_sym("||") {
            let q = self.res()?;
            p = Process::par(p, q);
        }
        Ok(p)
    }

    fn res(&mut self) -> PResult<Process> {
        let mut p = self.prefix()?;
        while self.eat_sym("\\") {
            self.expect_sym("{")?;
            let mut l = BTreeSet::new();
            if !self.is_sym("}") {
                loop {
                    l.insert(self.chan()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            p = Process::Restrict(Box::new(p), l);
        }
        Ok(p)
    }

    fn prefix(&mut self) -> PResult<Process> {
        if self.eat_kw("tau") {
            self.expect_sym(".")?;
            return Ok(Process::tau(self.prefix()?));
        }
        if let Tok::Ident(name) = self.peek().clone() {
            match self.peek2() {
                Tok::Sym("[") => {
                    let pos = self.pos();
                    self.bump();
                    self.bump();
                    let braced = self.eat_sym("{");
                    let vars = self.var_list()?;
                    if braced {
                        self.expect_sym("}")?;
                    }
                    self.expect_sym("]")?;
                    self.expect_sym(".")?;
                    let op = self
                        .env
                        .ops
                        .get(&name)
                        .cloned()
                        .ok_or_else(|| Diagnostic::new(pos, format!("unknown operation `{name}`")))?;
                    return Ok(Process::op(op, vars, self.prefix()?));
                }
                Tok::Sym(s @ ("?" | "!")) => {
                    let input = *s == "?";
                    let c = self.chan()?;
                    self.bump();
                    let x = self.var()?;
                    self.expect_sym(".")?;
                    let body = self.prefix()?;
                    return Ok(if input {
                        Process::input(c, x, body)
                    } else {
                        Process::output(c, x, body)
                    });
                }
                _ => {}
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Process> {
        if self.eat_kw("nil") {
            return Ok(Process::Nil);
        }
        if self.eat_sym("(") {
            let p = self.process()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if matches!(name.as_str(), "tau" | "nil") {
                return self.unexpected("a process");
            }
            self.bump();
            let mut args = Vec::new();
            if self.eat_sym("(") {
                if !self.is_sym(")") {
                    args = self.var_list()?;
                }
                self.expect_sym(")")?;
            }
            return Ok(Process::constant(&name, args));
        }
        self.unexpected("a process")
    }

    fn var(&mut self) -> PResult<Var> {
        let pos = self.pos();
        let name = self.ident()?;
        let v = Var::new(&name);
        if self.env.type_of(&v).is_none() {
            return Err(Diagnostic::new(pos, format!("undeclared variable `{name}`")));
        }
        if v.is_reserved() && !self.allow_reserved {
            return Err(Diagnostic::new(pos, "names starting with `#` are reserved"));
        }
        Ok(v)
    }

    fn var_list(&mut self) -> PResult<Vec<Var>> {
        let mut vs = vec![self.var()?];
        while self.eat_sym(",") {
            vs.push(self.var()?);
        }
        Ok(vs)
    }

    fn chan(&mut self) -> PResult<Chan> {
        let pos = self.pos();
        let name = self.ident()?;
        let c = Chan::new(&name);
        if !self.env.channels.contains(&c) {
            return Err(Diagnostic::new(pos, format!("undeclared channel `{name}`")));
        }
        Ok(c)
    }

    // ---- numbers and matrices ----

    fn vector(&mut self) -> PResult<Vec<C64>> {
        self.expect_sym("[")?;
        let mut row = vec![self.cexpr()?];
        while self.eat_sym(",") {
            row.push(self.cexpr()?);
        }
        self.expect_sym("]")?;
        Ok(row)
    }

    fn matrix(&mut self) -> PResult<ComplexMatrix> {
        let pos = self.pos();
        self.expect_sym("[")?;
        let mut rows = vec![self.vector()?];
        while self.eat_sym(",") {
            rows.push(self.vector()?);
        }
        self.expect_sym("]")?;
        let m = ComplexMatrix::from_rows(rows).map_err(|e| Diagnostic::new(pos, e.to_string()))?;
        if !m.is_square() {
            return Err(Diagnostic::new(pos, "matrix must be square"));
        }
        Ok(m)
    }

    fn real_expr(&mut self) -> PResult<f64> {
        let pos = self.pos();
        let z = self.cexpr()?;
        if z.im.abs() > 1e-12 {
            return Err(Diagnostic::new(pos, "expected a real number"));
        }
        Ok(z.re)
    }

    fn cexpr(&mut self) -> PResult<C64> {
        let mut z = self.cterm()?;
        loop {
            if self.eat_sym("+") {
                z += self.cterm()?;
            } else if self.eat_sym("-") {
                z -= self.cterm()?;
            } else {
                return Ok(z);
            }
        }
    }

    fn cterm(&mut self) -> PResult<C64> {
        let mut z = self.cunary()?;
        loop {
            if self.eat_sym("*") {
                z *= self.cunary()?;
            } else if self.eat_sym("/") {
                let pos = self.pos();
                let d = self.cunary()?;
                if d.norm() == 0.0 {
                    return Err(Diagnostic::new(pos, "division by zero"));
                }
                z /= d;
            } else {
                return Ok(z);
            }
        }
    }

    fn cunary(&mut self) -> PResult<C64> {
        if self.eat_sym("-") {
            return Ok(-self.cunary()?);
        }
        if self.eat_sym("+") {
            return self.cunary();
        }
        let base = self.catom()?;
        if self.eat_sym("^") {
            let e = self.cunary()?;
            return Ok(if e.im == 0.0 && e.re.fract() == 0.0 {
                base.powi(e.re as i32)
            } else {
                base.powc(e)
            });
        }
        Ok(base)
    }

    fn catom(&mut self) -> PResult<C64> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(x) => {
                self.bump();
                Ok(C64::new(x, 0.0))
            }
            Tok::Imag(x) => {
                self.bump();
                Ok(C64::new(0.0, x))
            }
            Tok::Sym("(") => {
                self.bump();
                let z = self.cexpr()?;
                self.expect_sym(")")?;
                Ok(z)
            }
            Tok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "i" => Ok(C64::new(0.0, 1.0)),
                    "pi" => Ok(C64::new(std::f64::consts::PI, 0.0)),
                    "sqrt" | "exp" | "sin" | "cos" => {
                        self.expect_sym("(")?;
                        let a = self.cexpr()?;
                        self.expect_sym(")")?;
                        Ok(match s.as_str() {
                            "sqrt" => a.sqrt(),
                            "exp" => a.exp(),
                            "sin" => a.sin(),
                            _ => a.cos(),
                        })
                    }
                    _ => Err(Diagnostic::new(pos, format!("unknown name `{s}` in number"))),
                }
            }
            _ => self.unexpected("a number"),
        }
    }
}
