use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    Clock,
    Parameter,
    Auxiliary,
}

/// Handle to a variable registered in a [`Registry`]. Ordering follows
/// registration order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    index: u32,
    kind: VarKind,
}

impl VarId {
    /// Reserved auxiliary variable used transiently by time elapse.
    pub(crate) const DELTA: VarId = VarId {
        index: u32::MAX,
        kind: VarKind::Auxiliary,
    };

    pub fn index(self) -> u32 {
        self.index
    }

    pub fn kind(self) -> VarKind {
        self.kind
    }

    pub fn is_clock(self) -> bool {
        self.kind == VarKind::Clock
    }

    pub fn is_param(self) -> bool {
        self.kind == VarKind::Parameter
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            VarKind::Clock => 'x',
            VarKind::Parameter => 'p',
            VarKind::Auxiliary => 'a',
        };
        write!(f, "{tag}{}", self.index)
    }
}

/// Name table for every variable of one analysis.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    by_name: HashMap<String, VarId>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    pub fn register(&mut self, name: &str, kind: VarKind) -> Result<VarId, GeometryError> {
        if self.by_name.contains_key(name) {
            return Err(GeometryError::DuplicateVariable(name.to_string()));
        }
        let id = VarId {
            index: self.names.len() as u32,
            kind,
        };
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.kinds.iter().enumerate().map(|(i, k)| VarId {
            index: i as u32,
            kind: *k,
        })
    }

    pub fn of_kind(&self, kind: VarKind) -> Vec<VarId> {
        self.vars().filter(|v| v.kind == kind).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut r = Registry::new();
        let x = r.register("x", VarKind::Clock).unwrap();
        let p = r.register("p", VarKind::Parameter).unwrap();
        assert!(r.register("x", VarKind::Parameter).is_err());
        assert_eq!(r.lookup("p"), Some(p));
        assert_eq!(r.name(x), "x");
        assert!(x < p);
        assert_eq!(r.of_kind(VarKind::Clock), vec![x]);
    }
}
