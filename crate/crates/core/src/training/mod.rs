//! Negative sampling, loss assembly and the SGD epoch loop.
//!
//! Each positive contributes a margin ranking term against its corrupted
//! negatives plus a weighted contrastive term on the relation-component
//! tables of its two endpoints. Per-triple gradients are computed on a
//! worker pool and summed in batch order, so results do not depend on the
//! number of workers.

mod config;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::clrm::{contrastive_loss, sample_length, sample_pair, ContrastivePair, RelationComponentTable};
use crate::error::{Error, Result};
use crate::eval::{evaluate_links, mrr, ModelScorer, Pattern, TieMode};
use crate::kg::{EntityId, KnowledgeGraph, LinkClass, Triple};
use crate::model::{Architecture, Context, Model, ScoringContext};
use crate::numeric::{sgd_step, ParameterStore, Tape, Tensor, Var};
use crate::rng::{stream, substream, Stream};

pub use config::{Ablation, TrainConfig};

/// Attempts per negative before giving up.
pub const MAX_CORRUPTION_ATTEMPTS: usize = 1000;

/// Replaces the head or the tail (fair coin) of `positive` with a uniform
/// entity from `entities`, `k` times. Corruptions that are known positives
/// or self-loops are redrawn.
pub fn sample_negatives(
    positive: &Triple,
    entities: &[EntityId],
    is_known: impl Fn(&Triple) -> bool,
    k: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Triple>> {
    if entities.len() < 2 {
        return Err(Error::InvalidData(
            "negative sampling needs at least two entities".into(),
        ));
    }
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut found = None;
        for _ in 0..MAX_CORRUPTION_ATTEMPTS {
            let e = entities[rng.gen_range(0..entities.len())];
            let cand = if rng.gen_bool(0.5) {
                Triple { head: e, ..*positive }
            } else {
                Triple { tail: e, ..*positive }
            };
            if cand.head != cand.tail && cand != *positive && !is_known(&cand) {
                found = Some(cand);
                break;
            }
        }
        out.push(found.ok_or(Error::NegativeSampling(
            positive.head.0,
            positive.rel.0,
            positive.tail.0,
            MAX_CORRUPTION_ATTEMPTS,
        ))?);
    }
    Ok(out)
}

/// `[gamma - pos + neg]_+`.
pub fn margin_loss(tape: &mut Tape, pos: Var, neg: Var, gamma: f64) -> Result<Var> {
    let d = tape.sub(neg, pos)?;
    let d = tape.add_scalar(d, gamma)?;
    tape.hinge(d)
}

/// Positives with their negatives and contrastive examples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Batch {
    pub positives: Vec<Triple>,
    /// `negatives_per_positive` consecutive entries per positive.
    pub negatives: Vec<Triple>,
    /// Examples for both endpoints of each positive.
    pub contrastive: Vec<Vec<ContrastivePair>>,
    pub k: usize,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.positives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty()
    }

    pub fn negatives_of(&self, i: usize) -> &[Triple] {
        &self.negatives[i * self.k..(i + 1) * self.k]
    }
}

/// Up to `n` contrastive examples anchored at `e`. Tables that admit no
/// perturbation yield none.
pub fn sample_contrastive(
    table: &RelationComponentTable,
    n_features: usize,
    n: usize,
    theta: f64,
    rng: &mut impl Rng,
) -> Result<Vec<ContrastivePair>> {
    let mut out = Vec::with_capacity(n);
    if table.is_empty() {
        return Ok(out);
    }
    for _ in 0..n {
        let lp = sample_length(table, rng);
        let ln = sample_length(table, rng);
        match sample_pair(table, n_features, rng, theta, lp, ln) {
            Ok(p) => out.push(p),
            Err(Error::InvalidTableOp(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Draws negatives and contrastive examples for `positives`. The
/// contrastive stream is not touched when the term is disabled.
pub fn assemble_batch(
    positives: &[Triple],
    ctx: &ScoringContext<'_>,
    entities: &[EntityId],
    config: &TrainConfig,
    n_features: usize,
    corruption: &mut impl Rng,
    contrastive: &mut impl Rng,
) -> Result<Batch> {
    let k = config.negatives_per_positive;
    let mut batch = Batch {
        positives: positives.to_vec(),
        k,
        ..Default::default()
    };
    for p in positives {
        batch
            .negatives
            .extend(sample_negatives(p, entities, |t| ctx.graph.contains(t), k, corruption)?);
    }
    for p in positives {
        let mut pairs = Vec::new();
        if config.contrastive_weight() > 0.0 {
            for e in [p.head, p.tail] {
                let table = ctx.tables.get(e.index()).ok_or(Error::UnknownEntity(e.0))?;
                pairs.extend(sample_contrastive(
                    table,
                    n_features,
                    config.contrastive_samples,
                    config.theta,
                    contrastive,
                )?);
            }
        }
        batch.contrastive.push(pairs);
    }
    Ok(batch)
}

/// Where the dropout masks of a triple come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DropoutKey {
    pub seed: u64,
    pub epoch: u64,
    /// Position of the triple within the epoch.
    pub index: u64,
}

/// Loss of one positive, on a tape.
#[derive(Clone, Copy, Debug)]
pub struct TripleLoss {
    pub total: Var,
    pub rank: f64,
    pub contrastive: f64,
}

/// `sum_k [gamma - phi(pos) + phi(neg_k)]_+ + w * mean L_c` for positive
/// `i` of `batch`. Without a dropout key, no edges are dropped.
#[allow(clippy::too_many_arguments)]
pub fn triple_loss(
    tape: &mut Tape,
    arch: &Architecture,
    store: &ParameterStore,
    ctx: &ScoringContext<'_>,
    batch: &Batch,
    i: usize,
    config: &TrainConfig,
    dropout: Option<DropoutKey>,
) -> Result<TripleLoss> {
    let score = |tape: &mut Tape, t: &Triple, slot: u64| -> Result<Var> {
        let v = match dropout {
            Some(key) if config.beta > 0.0 => {
                let mut rng = substream(key.seed, Stream::Dropout, &[key.epoch, key.index, slot]);
                arch.score_on_tape(tape, store, ctx, t, Some((config.beta, &mut rng)))?
            }
            _ => arch.score_on_tape(tape, store, ctx, t, None)?,
        };
        Ok(v.total)
    };
    let pos = score(tape, &batch.positives[i], 0)?;
    let mut terms = Vec::with_capacity(batch.k);
    for (j, neg) in batch.negatives_of(i).iter().enumerate() {
        let n = score(tape, neg, 1 + j as u64)?;
        terms.push(margin_loss(tape, pos, n, config.gamma_rank)?);
    }
    let stacked = tape.concat_rows(&terms)?;
    let rank = tape.sum(stacked)?;
    let rank_value = tape.scalar(rank)?;

    let w = config.contrastive_weight();
    let pairs = &batch.contrastive[i];
    if w == 0.0 || pairs.is_empty() {
        return Ok(TripleLoss {
            total: rank,
            rank: rank_value,
            contrastive: 0.0,
        });
    }
    let mut terms = Vec::with_capacity(pairs.len());
    let mut anchor: Option<(&RelationComponentTable, Var)> = None;
    for p in pairs {
        let a = match anchor {
            Some((t, v)) if *t == p.anchor => v,
            _ => {
                let v = arch.bank.fuse(tape, store, &p.anchor)?;
                anchor = Some((&p.anchor, v));
                v
            }
        };
        let pv = arch.bank.fuse(tape, store, &p.positive)?;
        let nv = arch.bank.fuse(tape, store, &p.negative)?;
        terms.push(contrastive_loss(tape, a, pv, nv, config.gamma_c)?);
    }
    let stacked = tape.concat_rows(&terms)?;
    let lc = tape.mean(stacked)?;
    let lc_value = tape.scalar(lc)?;
    let weighted = tape.scale(lc, w)?;
    let total = tape.add(rank, weighted)?;
    Ok(TripleLoss {
        total,
        rank: rank_value,
        contrastive: lc_value,
    })
}

/// Sum of [`triple_loss`] over the batch on one tape. Triple `i` uses
/// dropout index `first_index + i`.
pub fn total_loss(
    tape: &mut Tape,
    arch: &Architecture,
    store: &ParameterStore,
    ctx: &ScoringContext<'_>,
    batch: &Batch,
    config: &TrainConfig,
    dropout: Option<DropoutKey>,
) -> Result<Var> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let mut parts = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let key = dropout.map(|k| DropoutKey {
            index: k.index + i as u64,
            ..k
        });
        parts.push(triple_loss(tape, arch, store, ctx, batch, i, config, key)?.total);
    }
    let stacked = tape.concat_rows(&parts)?;
    tape.sum(stacked)
}

/// Summed losses of one epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub total: f64,
    pub rank: f64,
    pub contrastive: f64,
}

/// Writes the per-epoch loss log.
pub fn write_loss_csv(path: impl AsRef<Path>, losses: &[EpochLoss]) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::from("epoch,loss_total,loss_rank,loss_contrastive\n");
    for l in losses {
        let _ = writeln!(s, "{},{},{},{}", l.epoch, l.total, l.rank, l.contrastive);
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Held-out links for early stopping.
#[derive(Clone, Copy)]
pub struct Validation<'a> {
    pub context: ScoringContext<'a>,
    pub triples: &'a [Triple],
    pub known: &'a HashSet<Triple>,
}

#[derive(Clone, Copy, Default)]
pub struct TrainOptions<'a> {
    pub validation: Option<Validation<'a>>,
    /// Receives a parameter dump when training diverges.
    pub dump_dir: Option<&'a Path>,
    pub progress: Option<&'a (dyn Fn(&EpochLoss) + Sync)>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: Model,
    pub losses: Vec<EpochLoss>,
    /// Epoch whose parameters were kept when early stopping is active.
    pub best_epoch: Option<usize>,
}

fn validation_mrr(model: &Model, v: &Validation<'_>) -> Result<f64> {
    let scorer = ModelScorer {
        model,
        context: v.context,
    };
    let links: Vec<(Triple, LinkClass)> = v.triples.iter().map(|&t| (t, LinkClass::Transductive)).collect();
    let results = evaluate_links(&scorer, &links, v.known, &[Pattern::Tail], TieMode::Average)?;
    let ranks: Vec<f64> = results.iter().map(|r| r.rank).collect();
    mrr(&ranks)
}

fn dump_state(dir: Option<&Path>, store: &ParameterStore, config: &TrainConfig, epoch: usize) -> Option<PathBuf> {
    let dir = dir?;
    let path = dir.join(format!("diverged-epoch{epoch}.bin"));
    store.save_checkpoint(&path, &config.pairs()).ok().map(|_| path)
}

/// Trains a fresh model on `graph`.
pub fn train(graph: &KnowledgeGraph, config: &TrainConfig, opts: &TrainOptions<'_>) -> Result<TrainOutcome> {
    config.validate()?;
    if graph.is_empty() {
        return Err(Error::Empty("training graph"));
    }
    let model = Model::new(config.model_config(graph.n_relations()), config.seed)?;
    train_from(model, graph, config, opts)
}

/// Continues training `model` on `graph`.
pub fn train_from(
    mut model: Model,
    graph: &KnowledgeGraph,
    config: &TrainConfig,
    opts: &TrainOptions<'_>,
) -> Result<TrainOutcome> {
    let ctx_owned = Context::new(graph.clone());
    let ctx = ctx_owned.view();
    let entities = graph.active_entities();
    let arch = model.arch.clone();
    let n_features = arch.bank.n_features;

    let mut shuffle = stream(config.seed, Stream::Shuffle);
    let mut corruption = stream(config.seed, Stream::Corruption);
    let mut contrastive = stream(config.seed, Stream::Contrastive);
    let mut order: Vec<Triple> = graph.triples().to_vec();
    let mut losses = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ParameterStore)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle);
        let mut sums = EpochLoss {
            epoch,
            total: 0.0,
            rank: 0.0,
            contrastive: 0.0,
        };
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch = assemble_batch(
                chunk,
                &ctx,
                &entities,
                config,
                n_features,
                &mut corruption,
                &mut contrastive,
            )?;
            let first = (b * config.batch_size) as u64;
            let store = &model.store;
            let per_triple: Vec<Result<_>> = (0..batch.len())
                .into_par_iter()
                .map(|i| {
                    let mut tape = Tape::new();
                    let key = DropoutKey {
                        seed: config.seed,
                        epoch: epoch as u64,
                        index: first + i as u64,
                    };
                    let l = triple_loss(&mut tape, &arch, store, &ctx, &batch, i, config, Some(key))?;
                    let total = tape.scalar(l.total)?;
                    let grads = tape.backward(l.total, &Tensor::scalar(1.0), store)?;
                    Ok((grads, total, l.rank, l.contrastive))
                })
                .collect();
            for r in per_triple {
                let (grads, total, rank, con) = match r {
                    Ok(x) => x,
                    Err(e @ Error::NonFinite(_)) => {
                        let dumped = dump_state(opts.dump_dir, &model.store, config, epoch);
                        return Err(Error::NonFinite(format!(
                            "{e} at epoch {epoch}, batch {b}{}",
                            dumped
                                .map(|p| format!("; parameters dumped to {}", p.display()))
                                .unwrap_or_default()
                        )));
                    }
                    Err(e) => return Err(e),
                };
                model.store.accumulate(&grads)?;
                sums.total += total;
                sums.rank += rank;
                sums.contrastive += con;
            }
            if let Err(e) = sgd_step(&mut model.store, config.lr) {
                let dumped = dump_state(opts.dump_dir, &model.store, config, epoch);
                return Err(Error::NonFinite(format!(
                    "{e} at epoch {epoch}, batch {b}{}",
                    dumped
                        .map(|p| format!("; parameters dumped to {}", p.display()))
                        .unwrap_or_default()
                )));
            }
        }
        if !sums.total.is_finite() {
            return Err(Error::NonFinite(format!("epoch {epoch} loss")));
        }
        if let Some(cb) = opts.progress {
            cb(&sums);
        }
        losses.push(sums);

        if let (Some(v), true) = (opts.validation.as_ref(), config.patience > 0) {
            let m = validation_mrr(&model, v)?;
            match &best {
                Some((b, _, _)) if m <= *b => {}
                _ => best = Some((m, epoch, model.store.clone())),
            }
            let (_, best_epoch, _) = best.as_ref().expect("set above");
            if epoch - best_epoch >= config.patience {
                break;
            }
        }
    }
    let best_epoch = match best {
        Some((_, e, store)) => {
            model.store = store;
            Some(e)
        }
        None => None,
    };
    Ok(TrainOutcome {
        model,
        losses,
        best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{grad_check, GradCheckOptions};

    fn toy() -> KnowledgeGraph {
        KnowledgeGraph::from_triples(
            6,
            2,
            vec![
                Triple::new(0, 0, 1),
                Triple::new(1, 1, 2),
                Triple::new(2, 0, 3),
                Triple::new(3, 1, 4),
                Triple::new(4, 0, 5),
                Triple::new(5, 1, 0),
                Triple::new(0, 1, 3),
            ],
        )
        .unwrap()
    }

    fn small() -> TrainConfig {
        TrainConfig {
            d: 4,
            layers: 1,
            t: 1,
            epochs: 20,
            batch_size: 4,
            contrastive_samples: 2,
            ..Default::default()
        }
    }

    #[test]
    fn negatives_come_from_the_enumerated_corruption_set() {
        let g = KnowledgeGraph::from_triples(3, 1, vec![Triple::new(0, 0, 1), Triple::new(1, 0, 2)]).unwrap();
        let ents = g.active_entities();
        let pos = Triple::new(0, 0, 1);
        // corruptions of (0,0,1) minus positives and self-loops
        let allowed = [Triple::new(2, 0, 1), Triple::new(0, 0, 2)];
        let mut rng = stream(0, Stream::Corruption);
        let mut seen = HashSet::new();
        for _ in 0..200 {
            let n = sample_negatives(&pos, &ents, |t| g.contains(t), 1, &mut rng).unwrap();
            assert_eq!(n.len(), 1);
            assert!(allowed.contains(&n[0]), "{}", n[0]);
            assert!((n[0].head == pos.head) ^ (n[0].tail == pos.tail));
            seen.insert(n[0]);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn exhausted_corruptions_fail() {
        let g = KnowledgeGraph::from_triples(2, 1, vec![Triple::new(0, 0, 1), Triple::new(1, 0, 0)]).unwrap();
        let mut rng = stream(0, Stream::Corruption);
        let r = sample_negatives(
            &Triple::new(0, 0, 1),
            &g.active_entities(),
            |t| g.contains(t),
            1,
            &mut rng,
        );
        assert!(matches!(r, Err(Error::NegativeSampling(0, 0, 1, _))));
    }

    #[test]
    fn margin_examples() {
        let mut tape = Tape::new();
        let mut m = |p: f64, n: f64| {
            let a = tape.constant(Tensor::scalar(p)).unwrap();
            let b = tape.constant(Tensor::scalar(n)).unwrap();
            let l = margin_loss(&mut tape, a, b, 10.0).unwrap();
            tape.scalar(l).unwrap()
        };
        assert_eq!(m(10.0, 0.0), 0.0);
        assert_eq!(m(3.0, 3.0), 10.0);
        assert_eq!(m(20.0, 0.0), 0.0);
    }

    fn batch_for(g: &KnowledgeGraph, c: &TrainConfig, ctx: &Context) -> (Model, Batch) {
        let m = Model::new(c.model_config(2), 3).unwrap();
        let b = assemble_batch(
            &g.triples()[..4],
            &ctx.view(),
            &g.active_entities(),
            c,
            m.arch.bank.n_features,
            &mut stream(1, Stream::Corruption),
            &mut stream(1, Stream::Contrastive),
        )
        .unwrap();
        (m, b)
    }

    #[test]
    fn batch_shape_and_contrastive_stream_untouched_under_ablation() {
        let g = toy();
        let ctx = Context::new(g.clone());
        let mut c = small();
        c.negatives_per_positive = 3;
        let (_, b) = batch_for(&g, &c, &ctx);
        assert_eq!(b.negatives.len(), 3 * b.positives.len());
        assert!(b.contrastive.iter().all(|p| !p.is_empty()));
        c.disable_contrastive = true;
        let mut con = stream(1, Stream::Contrastive);
        let before = con.clone();
        let b = assemble_batch(
            &g.triples()[..4],
            &ctx.view(),
            &g.active_entities(),
            &c,
            2,
            &mut stream(1, Stream::Corruption),
            &mut con,
        )
        .unwrap();
        assert!(b.contrastive.iter().all(Vec::is_empty));
        assert_eq!(con, before);
    }

    #[test]
    fn total_loss_is_sum_of_component_oracles() {
        let g = toy();
        let ctx = Context::new(g.clone());
        let c = small();
        let (m, b) = batch_for(&g, &c, &ctx);
        let mut tape = Tape::new();
        let total = total_loss(&mut tape, &m.arch, &m.store, &ctx.view(), &b, &c, None).unwrap();
        let total = tape.scalar(total).unwrap();

        let mut want = 0.0;
        for i in 0..b.len() {
            let pos = m.score(&ctx.view(), &b.positives[i]).unwrap();
            for n in b.negatives_of(i) {
                want += (c.gamma_rank - pos + m.score(&ctx.view(), n).unwrap()).max(0.0);
            }
            // contrastive oracle on plain vectors
            let f = m.store.value(m.arch.bank.features);
            let fuse = |t: &crate::clrm::RelationComponentTable| -> Vec<f64> {
                let tot = t.total() as f64;
                (0..c.d)
                    .map(|j| t.iter().map(|(k, n)| n as f64 * f.at(k as usize, j)).sum::<f64>() / tot)
                    .collect()
            };
            let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let pairs = &b.contrastive[i];
            let lc: f64 = pairs
                .iter()
                .map(|p| {
                    let a = fuse(&p.anchor);
                    (dist(&fuse(&p.positive), &a) - dist(&fuse(&p.negative), &a) + c.gamma_c).max(0.0)
                })
                .sum::<f64>()
                / pairs.len() as f64;
            want += c.sigma * lc;
        }
        assert!((total - want).abs() < 1e-9, "{total} vs {want}");

        // sigma = 0 leaves only the ranking part
        let c0 = TrainConfig {
            sigma: 0.0,
            ..c.clone()
        };
        let mut tape = Tape::new();
        let l0 = total_loss(&mut tape, &m.arch, &m.store, &ctx.view(), &b, &c0, None).unwrap();
        let mut rank = 0.0;
        for i in 0..b.len() {
            let pos = m.score(&ctx.view(), &b.positives[i]).unwrap();
            for n in b.negatives_of(i) {
                rank += (c.gamma_rank - pos + m.score(&ctx.view(), n).unwrap()).max(0.0);
            }
        }
        assert!((tape.scalar(l0).unwrap() - rank).abs() < 1e-9);
    }

    #[test]
    fn loss_is_permutation_invariant() {
        let g = toy();
        let ctx = Context::new(g.clone());
        let c = small();
        let (m, b) = batch_for(&g, &c, &ctx);
        let mut rev = b.clone();
        rev.positives.reverse();
        rev.contrastive.reverse();
        rev.negatives = (0..b.len()).rev().flat_map(|i| b.negatives_of(i).to_vec()).collect();
        let eval = |b: &Batch| {
            let mut tape = Tape::new();
            let l = total_loss(&mut tape, &m.arch, &m.store, &ctx.view(), b, &c, None).unwrap();
            tape.scalar(l).unwrap()
        };
        assert!((eval(&b) - eval(&rev)).abs() < 1e-9);
    }

    #[test]
    fn total_loss_gradients_check_out() {
        let g = toy();
        let ctx = Context::new(g.clone());
        let c = small();
        let (mut m, b) = batch_for(&g, &c, &ctx);
        let arch = m.arch.clone();
        let key = DropoutKey {
            seed: 5,
            epoch: 1,
            index: 0,
        };
        let report = grad_check(
            &mut m.store,
            |tape, s| total_loss(tape, &arch, s, &ctx.view(), &b, &c, Some(key)),
            GradCheckOptions::default(),
        )
        .unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let g = toy();
        let c = TrainConfig {
            lr: 0.0,
            epochs: 2,
            ..small()
        };
        let out = train(&g, &c, &TrainOptions::default()).unwrap();
        let fresh = Model::new(c.model_config(2), c.seed).unwrap();
        assert_eq!(out.model.store, fresh.store);
        for id in fresh.store.ids() {
            let a = out.model.store.value(id).data();
            let b = fresh.store.value(id).data();
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn loss_decreases_and_runs_reproduce() {
        let g = toy();
        let c = small();
        let a = train(&g, &c, &TrainOptions::default()).unwrap();
        assert!(a.losses.last().unwrap().total < a.losses[0].total, "{:?}", a.losses);
        let b = train(&g, &c, &TrainOptions::default()).unwrap();
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.model.store, b.model.store);
    }
}
