//! Entity-independent semantic scoring.
//!
//! An entity is represented only through its relation-component table: the
//! count-weighted mean of learned per-relation feature vectors. No parameter
//! is keyed by entity, so entities never seen in training embed the same way
//! as seen ones.

mod ops;
mod table;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::RelationId;
use crate::numeric::{ParameterStore, SlotId, Tape, Tensor, Var};

pub use ops::{count_upper_bound, op_addition, op_deletion, op_variation, sample_length, sample_pair, ContrastivePair};
pub use table::{build_table, build_tables, n_features, write_tables_csv, RelationComponentTable};

/// Relation feature bank `F` and the DistMult relation weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelationFeatureBank {
    /// `n_features x dim`
    pub features: SlotId,
    /// `n_relations x dim`
    pub rel_sem: SlotId,
    pub n_features: usize,
    pub n_relations: usize,
    pub dim: usize,
}

impl RelationFeatureBank {
    pub const FEATURES: &'static str = "clrm.features";
    pub const REL_SEM: &'static str = "clrm.rel_sem";

    /// Adds zero-filled slots to `store`.
    pub fn register(store: &mut ParameterStore, n_relations: usize, dim: usize, direction_aware: bool) -> Result<Self> {
        let nf = n_features(n_relations, direction_aware);
        Ok(RelationFeatureBank {
            features: store.add(Self::FEATURES, Tensor::zeros(nf, dim))?,
            rel_sem: store.add(Self::REL_SEM, Tensor::zeros(n_relations, dim))?,
            n_features: nf,
            n_relations,
            dim,
        })
    }

    /// Looks up existing slots (for example after loading a checkpoint).
    pub fn bind(store: &ParameterStore) -> Result<Self> {
        let features = store.id(Self::FEATURES)?;
        let rel_sem = store.id(Self::REL_SEM)?;
        let f = store.value(features);
        let r = store.value(rel_sem);
        if f.cols() != r.cols() {
            return Err(Error::shape("bank", "feature and relation widths differ"));
        }
        Ok(RelationFeatureBank {
            features,
            rel_sem,
            n_features: f.rows(),
            n_relations: r.rows(),
            dim: f.cols(),
        })
    }

    pub fn init(&self, store: &mut ParameterStore, rng: &mut impl Rng) {
        let bound = 1.0 / (self.dim as f64).sqrt();
        store.init_uniform(self.features, bound, rng);
        store.init_uniform(self.rel_sem, bound, rng);
    }

    /// `sum_k a_k f_k / sum_k a_k` as a `1 x dim` value.
    pub fn fuse(&self, tape: &mut Tape, store: &ParameterStore, table: &RelationComponentTable) -> Result<Var> {
        if table.is_empty() {
            return Err(Error::DegenerateEntity);
        }
        let total = table.total() as f64;
        let mut rows = Vec::with_capacity(table.support_len());
        let mut weights = Vec::with_capacity(table.support_len());
        for (k, c) in table.iter() {
            if k as usize >= self.n_features {
                return Err(Error::shape("fuse", format!("feature {k} of {}", self.n_features)));
            }
            rows.push(k as usize);
            weights.push(c as f64 / total);
        }
        let f = tape.param_rows(store, self.features, &rows)?;
        let w = tape.constant(Tensor::row(&weights))?;
        tape.matmul(w, f)
    }

    /// DistMult score `sum(e_i * r_k * e_j)` as 1x1.
    pub fn semantic_score(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        ei: Var,
        rk: RelationId,
        ej: Var,
    ) -> Result<Var> {
        if rk.index() >= self.n_relations {
            return Err(Error::UnknownRelationId(rk.0));
        }
        let r = tape.param_rows(store, self.rel_sem, &[rk.index()])?;
        let (a, b) = (tape.value(ei), tape.value(ej));
        if a.rows() != 1 || b.rows() != 1 || a.cols() != self.dim || b.cols() != self.dim {
            return Err(Error::shape(
                "semantic_score",
                format!("{:?} and {:?} against width {}", a.shape(), b.shape(), self.dim),
            ));
        }
        let p = tape.mul(ei, r)?;
        let p = tape.mul(p, ej)?;
        tape.sum(p)
    }
}

/// `[d(pos, anchor) - d(neg, anchor) + gamma]_+` with Euclidean `d`.
pub fn contrastive_loss(tape: &mut Tape, anchor: Var, positive: Var, negative: Var, gamma: f64) -> Result<Var> {
    let dp = tape.euclidean(positive, anchor)?;
    let dn = tape.euclidean(negative, anchor)?;
    let x = tape.sub(dp, dn)?;
    let x = tape.add_scalar(x, gamma)?;
    tape.hinge(x)
}

/// Mean of [`contrastive_loss`] over several examples of one anchor.
pub fn contrastive_loss_mean(tape: &mut Tape, anchor: Var, examples: &[(Var, Var)], gamma: f64) -> Result<Var> {
    if examples.is_empty() {
        return Err(Error::Empty("contrastive examples"));
    }
    let mut terms = Vec::with_capacity(examples.len());
    for &(p, n) in examples {
        terms.push(contrastive_loss(tape, anchor, p, n, gamma)?);
    }
    let stacked = tape.concat_rows(&terms)?;
    tape.mean(stacked)
}
