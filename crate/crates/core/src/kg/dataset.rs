use std::collections::HashSet;
use std::path::PathBuf;

use super::{load_triples, KnowledgeGraph, LinkClass, Triple, Vocabulary};
use crate::error::{Error, Result};

/// File locations of one benchmark split.
#[derive(Clone, Debug, Default)]
pub struct DatasetPaths {
    /// Original graph, used for training.
    pub train: PathBuf,
    /// Extra known triples (filtering only).
    pub valid: Option<PathBuf>,
    /// Observed part of the emerging graph.
    pub dekg: Option<PathBuf>,
    pub test_enclosing: Option<PathBuf>,
    pub test_bridging: Option<PathBuf>,
}

/// All graphs of a split over one shared vocabulary.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub vocab: Vocabulary,
    /// Original graph.
    pub train: KnowledgeGraph,
    /// Observed emerging graph.
    pub dekg: KnowledgeGraph,
    /// Original and emerging graph together; scoring context at test time.
    pub context: KnowledgeGraph,
    pub valid: Vec<Triple>,
    pub test_enclosing: Vec<Triple>,
    pub test_bridging: Vec<Triple>,
}

impl Dataset {
    /// Loads a split. `relations`, when given, fixes the relation ids (for
    /// example the vocabulary a checkpoint was trained with).
    pub fn load(paths: &DatasetPaths, relations: Option<&[String]>) -> Result<Self> {
        let seed_vocab = relations.map(Vocabulary::with_relations);
        let (_, mut vocab) = load_triples(&paths.train, seed_vocab.as_ref())?;
        let (train, _) = load_triples(&paths.train, Some(&vocab))?;
        vocab.mark_boundary();

        let mut dekg = Vec::new();
        if let Some(p) = &paths.dekg {
            let (g, v) = load_triples(p, Some(&vocab))?;
            vocab = v;
            for t in g.triples() {
                if vocab.classify_link(t)? != LinkClass::Enclosing {
                    return Err(Error::InvalidData(format!(
                        "{}: triple {} touches the original graph",
                        p.display(),
                        t
                    )));
                }
            }
            dekg = g.triples().to_vec();
        }

        let mut load_checked = |path: &Option<PathBuf>, want: Option<LinkClass>| -> Result<Vec<Triple>> {
            let Some(p) = path else { return Ok(Vec::new()) };
            let (g, v) = load_triples(p, Some(&vocab))?;
            vocab = v;
            if let Some(want) = want {
                for t in g.triples() {
                    let got = vocab.classify_link(t)?;
                    if got != want {
                        return Err(Error::InvalidData(format!(
                            "{}: triple {} is {}, expected {}",
                            p.display(),
                            t,
                            got.as_str(),
                            want.as_str()
                        )));
                    }
                }
            }
            Ok(g.triples().to_vec())
        };
        let test_enclosing = load_checked(&paths.test_enclosing, Some(LinkClass::Enclosing))?;
        let test_bridging = load_checked(&paths.test_bridging, Some(LinkClass::Bridging))?;
        let valid = load_checked(&paths.valid, None)?;

        let n_e = vocab.n_entities();
        let n_r = vocab.n_relations();
        let train = train.widen(n_e)?;
        let dekg = KnowledgeGraph::from_triples(n_e, n_r, dekg)?;
        let context = train.union(&dekg)?;
        Ok(Dataset {
            vocab,
            train,
            dekg,
            context,
            valid,
            test_enclosing,
            test_bridging,
        })
    }

    /// Every triple of every split; the filter set for ranking.
    pub fn known_triples(&self) -> HashSet<Triple> {
        self.train
            .triples()
            .iter()
            .chain(self.dekg.triples())
            .chain(&self.valid)
            .chain(&self.test_enclosing)
            .chain(&self.test_bridging)
            .copied()
            .collect()
    }
}
