//! The combined scorer: semantic plus topological score.

use rand::RngCore;

use crate::clrm::{build_tables, RelationComponentTable, RelationFeatureBank};
use crate::error::{Error, Result};
use crate::gsm::{labeled_subgraph, ExtractOptions, GnnOutput, GnnParameters, LabelMode, LabeledSubgraph};
use crate::kg::{EntityId, KnowledgeGraph, Triple};
use crate::numeric::{ParameterStore, Tape, Tensor, Var};
use crate::rng::{stream, Stream};

/// Shape and switches of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    pub n_relations: usize,
    pub dim: usize,
    pub hops: usize,
    pub layers: usize,
    pub node_cap: usize,
    pub labeling: LabelMode,
    /// Adds the semantic score to the topological one.
    pub semantic: bool,
}

impl ModelConfig {
    pub fn extract_options(&self) -> ExtractOptions {
        ExtractOptions {
            hops: self.hops,
            mode: self.labeling,
            node_cap: self.node_cap,
        }
    }
}

/// Parameter layout; all scoring reads values from a separate store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub bank: RelationFeatureBank,
    pub gnn: GnnParameters,
    pub config: ModelConfig,
}

/// Graph and relation-component tables a score is computed against.
#[derive(Clone, Copy, Debug)]
pub struct ScoringContext<'a> {
    pub graph: &'a KnowledgeGraph,
    pub tables: &'a [RelationComponentTable],
}

/// Tables owned alongside the graph they were built from.
#[derive(Clone, Debug)]
pub struct Context {
    pub graph: KnowledgeGraph,
    pub tables: Vec<RelationComponentTable>,
}

impl Context {
    pub fn new(graph: KnowledgeGraph) -> Self {
        let tables = build_tables(&graph, false);
        Context { graph, tables }
    }

    pub fn view(&self) -> ScoringContext<'_> {
        ScoringContext {
            graph: &self.graph,
            tables: &self.tables,
        }
    }
}

/// Score components recorded on a tape.
#[derive(Clone, Copy, Debug)]
pub struct ScoreVars {
    pub total: Var,
    pub semantic: Option<Var>,
    pub topological: Var,
    pub gnn: GnnOutput,
}

impl Architecture {
    /// Registers every slot in `store`.
    pub fn register(store: &mut ParameterStore, config: ModelConfig) -> Result<Self> {
        if config.hops == 0 || config.node_cap == 0 {
            return Err(Error::Config("hops and node_cap must be positive".into()));
        }
        let bank = RelationFeatureBank::register(store, config.n_relations, config.dim, false)?;
        let gnn = GnnParameters::register(store, config.n_relations, config.hops, config.dim, config.layers)?;
        Ok(Architecture { bank, gnn, config })
    }

    /// Recovers the layout of a loaded store.
    pub fn bind(store: &ParameterStore, labeling: LabelMode, semantic: bool, node_cap: usize) -> Result<Self> {
        let bank = RelationFeatureBank::bind(store)?;
        let gnn = GnnParameters::bind(store)?;
        if bank.n_relations != gnn.n_relations || bank.dim != gnn.dim {
            return Err(Error::Checkpoint("semantic and topological parts disagree".into()));
        }
        let config = ModelConfig {
            n_relations: gnn.n_relations,
            dim: gnn.dim,
            hops: gnn.hops(),
            layers: gnn.layers.len(),
            node_cap,
            labeling,
            semantic,
        };
        Ok(Architecture { bank, gnn, config })
    }

    pub fn subgraph(&self, graph: &KnowledgeGraph, t: &Triple) -> Result<LabeledSubgraph> {
        labeled_subgraph(graph, t, &self.config.extract_options())
    }

    /// Fused embedding of `e`, or a zero row when its table is empty.
    pub fn entity_embedding(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        ctx: &ScoringContext<'_>,
        e: EntityId,
    ) -> Result<Var> {
        let table = ctx.tables.get(e.index()).ok_or(Error::UnknownEntity(e.0))?;
        if table.is_empty() {
            tape.constant(Tensor::zeros(1, self.config.dim))
        } else {
            self.bank.fuse(tape, store, table)
        }
    }

    /// Records the score of `t` on `tape`.
    pub fn score_on_tape(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        ctx: &ScoringContext<'_>,
        t: &Triple,
        dropout: Option<(f64, &mut dyn RngCore)>,
    ) -> Result<ScoreVars> {
        let sg = self.subgraph(ctx.graph, t)?;
        self.score_subgraph(tape, store, ctx, t, &sg, dropout)
    }

    /// Like [`Self::score_on_tape`] with a pre-extracted subgraph.
    pub fn score_subgraph(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        ctx: &ScoringContext<'_>,
        t: &Triple,
        sg: &LabeledSubgraph,
        dropout: Option<(f64, &mut dyn RngCore)>,
    ) -> Result<ScoreVars> {
        let gnn = self.gnn.forward(tape, store, sg, t.rel, dropout)?;
        let topological = self.gnn.topological_score(tape, store, &gnn, t.rel)?;
        let (total, semantic) = if self.config.semantic {
            let ei = self.entity_embedding(tape, store, ctx, t.head)?;
            let ej = self.entity_embedding(tape, store, ctx, t.tail)?;
            let s = self.bank.semantic_score(tape, store, ei, t.rel, ej)?;
            (tape.add(s, topological)?, Some(s))
        } else {
            (topological, None)
        };
        Ok(ScoreVars {
            total,
            semantic,
            topological,
            gnn,
        })
    }
}

/// Architecture plus parameter values.
#[derive(Clone, Debug)]
pub struct Model {
    pub arch: Architecture,
    pub store: ParameterStore,
}

impl Model {
    /// Fresh model with parameters drawn from the init stream of `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut store = ParameterStore::new();
        let arch = Architecture::register(&mut store, config)?;
        let mut rng = stream(seed, Stream::Init);
        arch.bank.init(&mut store, &mut rng);
        arch.gnn.init(&mut store, &mut rng);
        Ok(Model { arch, store })
    }

    /// Inference score (no dropout).
    pub fn score(&self, ctx: &ScoringContext<'_>, t: &Triple) -> Result<f64> {
        let mut tape = Tape::new();
        let s = self.arch.score_on_tape(&mut tape, &self.store, ctx, t, None)?;
        tape.scalar(s.total)
    }

    /// `(semantic, topological)` parts; semantic is 0 when disabled.
    pub fn score_parts(&self, ctx: &ScoringContext<'_>, t: &Triple) -> Result<(f64, f64)> {
        let mut tape = Tape::new();
        let s = self.arch.score_on_tape(&mut tape, &self.store, ctx, t, None)?;
        let sem = match s.semantic {
            Some(v) => tape.scalar(v)?,
            None => 0.0,
        };
        Ok((sem, tape.scalar(s.topological)?))
    }

    /// Fused semantic embedding of `e` and the last-layer topological
    /// embeddings of both endpoints of `t`.
    pub fn embeddings(&self, ctx: &ScoringContext<'_>, t: &Triple) -> Result<LinkEmbeddings> {
        let mut tape = Tape::new();
        let s = self.arch.score_on_tape(&mut tape, &self.store, ctx, t, None)?;
        let hs = self.arch.entity_embedding(&mut tape, &self.store, ctx, t.head)?;
        let ts = self.arch.entity_embedding(&mut tape, &self.store, ctx, t.tail)?;
        let row = |v: Var| tape.value(v).data().to_vec();
        Ok(LinkEmbeddings {
            head_semantic: row(hs),
            tail_semantic: row(ts),
            head_topological: row(s.gnn.head),
            tail_topological: row(s.gnn.tail),
            graph: row(s.gnn.graph),
        })
    }
}

/// Raw vectors behind one link's score.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkEmbeddings {
    pub head_semantic: Vec<f64>,
    pub tail_semantic: Vec<f64>,
    pub head_topological: Vec<f64>,
    pub tail_topological: Vec<f64>,
    pub graph: Vec<f64>,
}
