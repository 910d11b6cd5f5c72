//! Triple store, vocabularies and evaluation-set construction.
//!
//! Entities of the original graph always receive smaller ids than entities
//! of the emerging graph. The first unseen id is recorded as the vocabulary
//! boundary, which turns link classification into a range test.

mod dataset;
mod evalset;
mod io;
pub mod synthetic;

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

pub use dataset::{Dataset, DatasetPaths};
pub use evalset::{build_eval_set, EvalSet, Manifest, MixRatio};
pub use io::{load_triples, parse_triples, read_vocab_file, write_triples, write_vocab_files};

/// Dense index into the entity vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

/// Dense index into the relation vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationId(pub u32);

impl EntityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One directed labeled edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub rel: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: u32, rel: u32, tail: u32) -> Self {
        Triple {
            head: EntityId(head),
            rel: RelationId(rel),
            tail: EntityId(tail),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head.0, self.rel.0, self.tail.0)
    }
}

/// How a link relates to the original graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LinkClass {
    /// Both endpoints are unseen.
    Enclosing,
    /// Exactly one endpoint is unseen.
    Bridging,
    /// Both endpoints are seen.
    Transductive,
}

impl LinkClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkClass::Enclosing => "enclosing",
            LinkClass::Bridging => "bridging",
            LinkClass::Transductive => "transductive",
        }
    }
}

/// Token <-> id maps shared by the original graph and the emerging graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entities: Vec<String>,
    entity_ids: HashMap<String, EntityId>,
    relations: Vec<String>,
    relation_ids: HashMap<String, RelationId>,
    boundary: Option<u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entity_ids.get(name).copied()
    }

    pub fn relation_id(&self, name: &str) -> Option<RelationId> {
        self.relation_ids.get(name).copied()
    }

    pub fn entity_name(&self, id: EntityId) -> Option<&str> {
        self.entities.get(id.index()).map(String::as_str)
    }

    pub fn relation_name(&self, id: RelationId) -> Option<&str> {
        self.relations.get(id.index()).map(String::as_str)
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn intern_entity(&mut self, name: &str) -> EntityId {
        if let Some(&id) = self.entity_ids.get(name) {
            return id;
        }
        let id = EntityId(self.entities.len() as u32);
        self.entities.push(name.to_owned());
        self.entity_ids.insert(name.to_owned(), id);
        id
    }

    pub fn intern_relation(&mut self, name: &str) -> RelationId {
        if let Some(&id) = self.relation_ids.get(name) {
            return id;
        }
        let id = RelationId(self.relations.len() as u32);
        self.relations.push(name.to_owned());
        self.relation_ids.insert(name.to_owned(), id);
        id
    }

    /// Records that every entity interned so far belongs to the original
    /// graph. Entities interned later are unseen.
    pub fn mark_boundary(&mut self) {
        self.boundary = Some(self.entities.len() as u32);
    }

    /// First unseen entity id, if a boundary was recorded.
    pub fn boundary(&self) -> Option<u32> {
        self.boundary
    }

    pub fn set_boundary(&mut self, boundary: u32) -> Result<()> {
        if boundary as usize > self.entities.len() {
            return Err(Error::InvalidData(format!(
                "boundary {boundary} exceeds entity count {}",
                self.entities.len()
            )));
        }
        self.boundary = Some(boundary);
        Ok(())
    }

    pub fn is_unseen(&self, e: EntityId) -> bool {
        match self.boundary {
            Some(b) => e.0 >= b,
            None => false,
        }
    }

    /// Classifies `t` relative to the original graph.
    pub fn classify_link(&self, t: &Triple) -> Result<LinkClass> {
        for e in [t.head, t.tail] {
            if e.index() >= self.entities.len() {
                return Err(Error::UnknownEntity(e.0));
            }
        }
        if t.rel.index() >= self.relations.len() {
            return Err(Error::UnknownRelationId(t.rel.0));
        }
        Ok(match (self.is_unseen(t.head), self.is_unseen(t.tail)) {
            (true, true) => LinkClass::Enclosing,
            (false, false) => LinkClass::Transductive,
            _ => LinkClass::Bridging,
        })
    }
}

/// Indexed triple store with per-entity adjacency.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeGraph {
    triples: Vec<Triple>,
    out_adj: Vec<Vec<(RelationId, EntityId)>>,
    in_adj: Vec<Vec<(RelationId, EntityId)>>,
    index: HashSet<Triple>,
    n_relations: usize,
}

impl KnowledgeGraph {
    /// Builds a graph over `n_entities` x `n_relations` ids. Rejects
    /// out-of-range ids and duplicate triples.
    pub fn from_triples(n_entities: usize, n_relations: usize, triples: Vec<Triple>) -> Result<Self> {
        let mut out_adj = vec![Vec::new(); n_entities];
        let mut in_adj = vec![Vec::new(); n_entities];
        let mut index = HashSet::with_capacity(triples.len());
        for t in &triples {
            for e in [t.head, t.tail] {
                if e.index() >= n_entities {
                    return Err(Error::UnknownEntity(e.0));
                }
            }
            if t.rel.index() >= n_relations {
                return Err(Error::UnknownRelationId(t.rel.0));
            }
            if !index.insert(*t) {
                return Err(Error::InvalidData(format!("duplicate triple {t}")));
            }
            out_adj[t.head.index()].push((t.rel, t.tail));
            in_adj[t.tail.index()].push((t.rel, t.head));
        }
        Ok(KnowledgeGraph {
            triples,
            out_adj,
            in_adj,
            index,
            n_relations,
        })
    }

    pub fn empty(n_entities: usize, n_relations: usize) -> Self {
        Self::from_triples(n_entities, n_relations, Vec::new()).expect("empty graph is valid")
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn n_entities(&self) -> usize {
        self.out_adj.len()
    }

    pub fn n_relations(&self) -> usize {
        self.n_relations
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.index.contains(t)
    }

    pub fn out_edges(&self, e: EntityId) -> &[(RelationId, EntityId)] {
        &self.out_adj[e.index()]
    }

    pub fn in_edges(&self, e: EntityId) -> &[(RelationId, EntityId)] {
        &self.in_adj[e.index()]
    }

    pub fn degree(&self, e: EntityId) -> usize {
        self.out_adj[e.index()].len() + self.in_adj[e.index()].len()
    }

    /// Neighbors over the undirected view, with the relation of the
    /// connecting edge. Self-loops appear twice.
    pub fn undirected_neighbors(&self, e: EntityId) -> impl Iterator<Item = (RelationId, EntityId)> + '_ {
        self.out_adj[e.index()]
            .iter()
            .chain(self.in_adj[e.index()].iter())
            .copied()
    }

    /// Entities with at least one incident triple.
    pub fn active_entities(&self) -> Vec<EntityId> {
        (0..self.n_entities() as u32)
            .map(EntityId)
            .filter(|&e| self.degree(e) > 0)
            .collect()
    }

    /// Graph holding the triples of both graphs. Entity and relation
    /// spaces are the larger of the two.
    pub fn union(&self, other: &KnowledgeGraph) -> Result<KnowledgeGraph> {
        let n_entities = self.n_entities().max(other.n_entities());
        let n_relations = self.n_relations.max(other.n_relations);
        let triples = self.triples.iter().chain(other.triples.iter()).copied().collect();
        Self::from_triples(n_entities, n_relations, triples)
    }

    /// Same triples over a larger entity space.
    pub fn widen(&self, n_entities: usize) -> Result<KnowledgeGraph> {
        Self::from_triples(
            n_entities.max(self.n_entities()),
            self.n_relations,
            self.triples.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> KnowledgeGraph {
        KnowledgeGraph::from_triples(
            4,
            2,
            vec![Triple::new(0, 0, 1), Triple::new(3, 0, 0), Triple::new(0, 1, 2)],
        )
        .unwrap()
    }

    #[test]
    fn adjacency_is_consistent_with_triples() {
        let g = toy();
        for t in g.triples() {
            assert!(g.out_edges(t.head).contains(&(t.rel, t.tail)));
            assert!(g.in_edges(t.tail).contains(&(t.rel, t.head)));
        }
        let degree_sum: usize = (0..4).map(|e| g.degree(EntityId(e))).sum();
        assert_eq!(degree_sum, 2 * g.len());
    }

    #[test]
    fn duplicate_and_out_of_range_are_rejected() {
        assert!(KnowledgeGraph::from_triples(2, 1, vec![Triple::new(0, 0, 1); 2]).is_err());
        assert!(matches!(
            KnowledgeGraph::from_triples(2, 1, vec![Triple::new(0, 0, 5)]),
            Err(Error::UnknownEntity(5))
        ));
        assert!(matches!(
            KnowledgeGraph::from_triples(2, 1, vec![Triple::new(0, 3, 1)]),
            Err(Error::UnknownRelationId(3))
        ));
    }

    #[test]
    fn classify_is_a_range_test() {
        let mut v = Vocabulary::new();
        v.intern_relation("r");
        v.intern_entity("a");
        v.intern_entity("b");
        v.mark_boundary();
        v.intern_entity("x");
        v.intern_entity("y");
        assert_eq!(v.classify_link(&Triple::new(2, 0, 3)).unwrap(), LinkClass::Enclosing);
        assert_eq!(v.classify_link(&Triple::new(0, 0, 3)).unwrap(), LinkClass::Bridging);
        assert_eq!(v.classify_link(&Triple::new(3, 0, 1)).unwrap(), LinkClass::Bridging);
        assert_eq!(v.classify_link(&Triple::new(0, 0, 1)).unwrap(), LinkClass::Transductive);
        assert!(matches!(
            v.classify_link(&Triple::new(0, 0, 9)),
            Err(Error::UnknownEntity(9))
        ));
    }

    #[test]
    fn undirected_neighbors_cover_both_directions() {
        let g = toy();
        let mut n: Vec<_> = g.undirected_neighbors(EntityId(0)).map(|(_, e)| e.0).collect();
        n.sort();
        assert_eq!(n, vec![1, 2, 3]);
    }
}
