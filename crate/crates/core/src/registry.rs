//! Named spaces with the metric each one is checked against.

use std::collections::BTreeMap;

use crate::convex::{builtin, ConvexSpaceSpec};
use crate::error::{Error, Result};
use crate::metric::{ExtMetric, Metric};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceEntry {
    pub space: ConvexSpaceSpec,
    pub metric: ExtMetric,
    /// `build_algebra` is expected to reject this space.
    pub expect_reject: bool,
}

impl SpaceEntry {
    pub fn new(space: ConvexSpaceSpec, metric: Metric, expect_reject: bool) -> Result<Self> {
        let metric = ExtMetric::new(&space, metric)?;
        Ok(SpaceEntry {
            space,
            metric,
            expect_reject,
        })
    }
}

/// Spaces keyed by id, iterated in id order.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    entries: BTreeMap<String, SpaceEntry>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// Every built-in space. The box uses `ℓ∞`; `C` uses the `0/1` metric and is expected to be rejected.
    pub fn builtins() -> Self {
        let mut reg = Registry::empty();
        for space in builtin::all() {
            let (metric, expect_reject) = match space.id.as_str() {
                "box" => (Metric::LInf, false),
                "C" => (Metric::Discrete, true),
                _ => (Metric::default_for(&space), false),
            };
            let entry = SpaceEntry::new(space, metric, expect_reject)
                .expect("built-in metrics fit their spaces");
            reg.insert(entry).expect("built-in ids are distinct");
        }
        reg
    }

    pub fn insert(&mut self, entry: SpaceEntry) -> Result<()> {
        let id = entry.space.id.clone();
        if self.entries.contains_key(&id) {
            return Err(Error::Invalid(format!("duplicate space id {id:?}")));
        }
        self.entries.insert(id, entry);
        Ok(())
    }

    /// Inserts or replaces, returning the replaced entry.
    pub fn upsert(&mut self, entry: SpaceEntry) -> Option<SpaceEntry> {
        self.entries.insert(entry.space.id.clone(), entry)
    }

    pub fn get(&self, id: &str) -> Result<&SpaceEntry> {
        self.entries
            .get(id)
            .ok_or_else(|| Error::Invalid(format!("unknown space id {id:?}")))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = &SpaceEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
