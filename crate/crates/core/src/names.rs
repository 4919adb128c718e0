//! Quantum variable and channel names.
//!
//! Names starting with `#` are reserved by the toolkit and can never be
//! written in source files:
//!
//! * `#<type>_<k>` are fresh register variables, seeded into the active
//!   register so that input moves always have an unused target.
//! * `#<type>~<k>` are binder names produced by substitution and
//!   α-canonicalization; they only ever occur bound.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// A quantum variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

/// A channel name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chan(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    /// The `k`-th fresh register variable of a type.
    pub fn fresh(type_name: &str, k: usize) -> Self {
        Var(Arc::from(format!("#{type_name}_{k}")))
    }

    /// The `k`-th reserved binder name of a type.
    pub fn bound(type_name: &str, k: usize) -> Self {
        Var(Arc::from(format!("#{type_name}~{k}")))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('#')
    }

    /// True for `#<type>_<k>` names.
    pub fn is_fresh(&self) -> bool {
        self.split_reserved().is_some_and(|(_, sep, _)| sep == '_')
    }

    /// Index `k` of a fresh register variable.
    pub fn fresh_index(&self) -> Option<usize> {
        match self.split_reserved() {
            Some((_, '_', k)) => Some(k),
            _ => None,
        }
    }

    /// Type name encoded in a reserved name.
    pub fn reserved_type(&self) -> Option<&str> {
        self.split_reserved().map(|(ty, _, _)| ty)
    }

    fn split_reserved(&self) -> Option<(&str, char, usize)> {
        let rest = self.0.strip_prefix('#')?;
        let pos = rest.rfind(['_', '~'])?;
        let sep = rest[pos..].chars().next()?;
        let k = rest[pos + 1..].parse().ok()?;
        Some((&rest[..pos], sep, k))
    }
}

impl Chan {
    pub fn new(name: &str) -> Self {
        Chan(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

impl From<&str> for Chan {
    fn from(s: &str) -> Self {
        Chan::new(s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Chan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Chan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl Serialize for Chan {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}
