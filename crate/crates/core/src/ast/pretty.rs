//! Surface syntax printer with minimal parentheses.
//!
//! Levels, loosest first: `+` (0), `||` (1), `\` (2), prefixes (3), atoms (4).
//! `+` and `||` associate to the left.

use std::fmt;

use super::process::Process;

fn level(p: &Process) -> u8 {
    match p {
        Process::Sum(..) => 0,
        Process::Par(..) => 1,
        Process::Restrict(..) => 2,
        Process::Tau(_) | Process::Op { .. } | Process::Input { .. } | Process::Output { .. } => 3,
        Process::Nil | Process::Const { .. } => 4,
    }
}

fn child(f: &mut fmt::Formatter<'_>, p: &Process, min: u8) -> fmt::Result {
    if level(p) < min {
        write!(f, "({p})")
    } else {
        write!(f, "{p}")
    }
}

fn list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: impl IntoIterator<Item = T>) -> fmt::Result {
    for (i, x) in items.into_iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Nil => write!(f, "nil"),
            Process::Const { name, args } => {
                write!(f, "{name}(")?;
                list(f, args)?;
                write!(f, ")")
            }
            Process::Tau(b) => {
                write!(f, "tau.")?;
                child(f, b, 3)
            }
            Process::Op { op, vars, body } => {
                write!(f, "{}[", op.label())?;
                list(f, vars)?;
                write!(f, "].")?;
                child(f, body, 3)
            }
            Process::Input { chan, var, body } => {
                write!(f, "{chan}?{var}.")?;
                child(f, body, 3)
            }
            Process::Output { chan, var, body } => {
                write!(f, "{chan}!{var}.")?;
                child(f, body, 3)
            }
            Process::Sum(a, b) => {
                child(f, a, 0)?;
                write!(f, " + ")?;
                child(f, b, 1)
            }
            Process::Par(a, b) => {
                child(f, a, 1)?;
                write!(f, " || ")?;
                child(f, b, 2)
            }
            Process::Restrict(b, l) => {
                child(f, b, 2)?;
                write!(f, " \\ {{")?;
                list(f, l)?;
                write!(f, "}}")
            }
        }
    }
}

/// Pretty-prints a process in the surface syntax.
pub fn pretty(p: &Process) -> String {
    p.to_string()
}
