use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, Vocabulary};

/// Sparse per-entity counts over relation features.
///
/// Keys are feature indices: the relation id itself, or `2 * relation +
/// role` (0 = head, 1 = tail) when tables are direction-aware. Only
/// non-zero counts are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RelationComponentTable {
    counts: BTreeMap<u32, u32>,
    pub owner: Option<EntityId>,
}

impl RelationComponentTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut t = Self::new();
        for (k, v) in counts {
            t.set(k, v);
        }
        t
    }

    pub fn get(&self, feature: u32) -> u32 {
        self.counts.get(&feature).copied().unwrap_or(0)
    }

    /// Sets a count; zero removes the feature from the support.
    pub fn set(&mut self, feature: u32, count: u32) {
        if count == 0 {
            self.counts.remove(&feature);
        } else {
            self.counts.insert(feature, count);
        }
    }

    pub fn increment(&mut self, feature: u32) {
        *self.counts.entry(feature).or_insert(0) += 1;
    }

    /// Features with a non-zero count, ascending.
    pub fn support(&self) -> Vec<u32> {
        self.counts.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn contains(&self, feature: u32) -> bool {
        self.counts.contains_key(&feature)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Every count multiplied by `c`.
    pub fn scaled(&self, c: u32) -> Self {
        RelationComponentTable {
            counts: self.counts.iter().map(|(&k, &v)| (k, v * c)).collect(),
            owner: self.owner,
        }
    }

    /// Average count over the support.
    pub fn mean_count(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::DegenerateEntity);
        }
        Ok(self.total() as f64 / self.support_len() as f64)
    }
}

/// Width of the feature axis for `n_relations` relations.
pub fn n_features(n_relations: usize, direction_aware: bool) -> usize {
    if direction_aware {
        2 * n_relations
    } else {
        n_relations
    }
}

/// Counts the triples of `g` in which `e` takes part, per relation.
pub fn build_table(g: &KnowledgeGraph, e: EntityId, direction_aware: bool) -> Result<RelationComponentTable> {
    if e.index() >= g.n_entities() {
        return Err(Error::UnknownEntity(e.0));
    }
    let mut t = RelationComponentTable {
        owner: Some(e),
        ..Default::default()
    };
    for &(r, _) in g.out_edges(e) {
        t.increment(feature_index(r.0, 0, direction_aware));
    }
    for &(r, other) in g.in_edges(e) {
        // a self-loop is one triple; count it once unless roles are split
        if other == e && !direction_aware {
            continue;
        }
        t.increment(feature_index(r.0, 1, direction_aware));
    }
    Ok(t)
}

/// Tables for every entity of `g`.
pub fn build_tables(g: &KnowledgeGraph, direction_aware: bool) -> Vec<RelationComponentTable> {
    (0..g.n_entities() as u32)
        .map(|e| build_table(g, EntityId(e), direction_aware).expect("entity in range"))
        .collect()
}

fn feature_index(rel: u32, role: u32, direction_aware: bool) -> u32 {
    if direction_aware {
        2 * rel + role
    } else {
        rel
    }
}

/// Diagnostic dump as `entity,relation,count` rows.
pub fn write_tables_csv(
    path: impl AsRef<Path>,
    tables: &[RelationComponentTable],
    vocab: &Vocabulary,
    direction_aware: bool,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "entity,relation,count").map_err(|e| Error::io(path, e))?;
    for (i, t) in tables.iter().enumerate() {
        let ent = t
            .owner
            .and_then(|e| vocab.entity_name(e))
            .map(str::to_owned)
            .unwrap_or_else(|| format!("#{i}"));
        for (k, c) in t.iter() {
            let rel = if direction_aware {
                let name = vocab.relation_name(crate::kg::RelationId(k / 2)).unwrap_or("?");
                format!("{name}:{}", if k % 2 == 0 { "head" } else { "tail" })
            } else {
                vocab.relation_name(crate::kg::RelationId(k)).unwrap_or("?").to_owned()
            };
            writeln!(w, "{ent},{rel},{c}").map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
