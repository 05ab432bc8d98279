//! Name-keyed registries of interchangeable strategies.
//!
//! Two families are pluggable: how the path asymmetry `Δ` is computed
//! ([`DeltaMethod`]) and how the coincidence rate is evaluated
//! ([`CoincidenceEngine`]). Front ends select members by name at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::FockEngine;
use crate::geometry::{DeltaMethod, ExactDelta, WeakFieldDelta};
use crate::opalg::{CoincidenceEngine, SecondOrderEngine, WickEngine};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Arc<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Adds or replaces the entry under `name`.
    pub fn register(&mut self, name: &'static str, strategy: Arc<T>) -> &mut Self {
        self.entries.insert(name, strategy);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// `exact` and `weak`.
pub fn delta_methods() -> Registry<dyn DeltaMethod> {
    let mut r: Registry<dyn DeltaMethod> = Registry::new("delta method");
    for m in [
        Arc::new(ExactDelta) as Arc<dyn DeltaMethod>,
        Arc::new(WeakFieldDelta),
    ] {
        r.register(m.name(), m);
    }
    r
}

/// `wick`, `second-order` and `fock`.
pub fn coincidence_engines() -> Registry<dyn CoincidenceEngine> {
    let mut r: Registry<dyn CoincidenceEngine> = Registry::new("coincidence engine");
    for e in [
        Arc::new(WickEngine) as Arc<dyn CoincidenceEngine>,
        Arc::new(SecondOrderEngine),
        Arc::new(FockEngine),
    ] {
        r.register(e.name(), e);
    }
    r
}
