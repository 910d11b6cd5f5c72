//! Random perturbations of relation-component tables.
//!
//! Varying a count keeps an entity's semantics (positives); attaching a new
//! relation or removing one entirely changes them (negatives).

use rand::seq::SliceRandom;
use rand::Rng;

use super::RelationComponentTable;
use crate::error::{Error, Result};

/// Anchor with one positive and one negative example.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContrastivePair {
    pub anchor: RelationComponentTable,
    pub positive: RelationComponentTable,
    pub negative: RelationComponentTable,
}

/// Inclusive upper bound `ceil(m * theta)` for new counts, at least 1.
pub fn count_upper_bound(table: &RelationComponentTable, theta: f64) -> Result<u32> {
    let m = table.mean_count()?;
    Ok(((m * theta).ceil() as u32).max(1))
}

/// Relation variation: one supported count is redrawn from
/// `[1, ceil(m * theta)]`. The support never changes.
pub fn op_variation(table: &RelationComponentTable, rng: &mut impl Rng, theta: f64) -> Result<RelationComponentTable> {
    let support = table.support();
    let &k = support
        .choose(rng)
        .ok_or(Error::InvalidTableOp("variation needs a non-empty support"))?;
    let hi = count_upper_bound(table, theta)?;
    let mut out = table.clone();
    out.set(k, rng.gen_range(1..=hi));
    Ok(out)
}

/// Relation addition: one unsupported feature out of `n_features` gets a
/// count from `[1, ceil(m * theta)]`.
pub fn op_addition(
    table: &RelationComponentTable,
    n_features: usize,
    rng: &mut impl Rng,
    theta: f64,
) -> Result<RelationComponentTable> {
    let candidates: Vec<u32> = (0..n_features as u32).filter(|&k| !table.contains(k)).collect();
    add_from(table, &candidates, rng, theta)
}

/// Relation deletion: one supported feature is zeroed. Needs at least two
/// supported features so the result can still be fused.
pub fn op_deletion(table: &RelationComponentTable, rng: &mut impl Rng) -> Result<RelationComponentTable> {
    delete_from(table, &table.support(), rng)
}

fn add_from(
    table: &RelationComponentTable,
    candidates: &[u32],
    rng: &mut impl Rng,
    theta: f64,
) -> Result<RelationComponentTable> {
    let &k = candidates
        .choose(rng)
        .ok_or(Error::InvalidTableOp("addition needs an unsupported relation"))?;
    let hi = count_upper_bound(table, theta)?;
    let mut out = table.clone();
    out.set(k, rng.gen_range(1..=hi));
    Ok(out)
}

fn delete_from(
    table: &RelationComponentTable,
    candidates: &[u32],
    rng: &mut impl Rng,
) -> Result<RelationComponentTable> {
    if table.support_len() < 2 {
        return Err(Error::InvalidTableOp("deletion needs at least two supported relations"));
    }
    let &k = candidates
        .choose(rng)
        .ok_or(Error::InvalidTableOp("deletion has no candidate relation"))?;
    let mut out = table.clone();
    out.set(k, 0);
    Ok(out)
}

/// Default sequence length: uniform in {1, 2, 3}, capped by the support size.
pub fn sample_length(table: &RelationComponentTable, rng: &mut impl Rng) -> usize {
    rng.gen_range(1..=3usize).min(table.support_len().max(1))
}

/// Builds a positive with `len_pos` variations and a negative with
/// `len_neg` interleaved additions and deletions.
///
/// The negative starts with one addition and one deletion whenever each is
/// feasible. Additions only draw features outside the anchor's support and
/// deletions only remove anchor features, so later steps can never undo
/// earlier ones and the negative's support always differs from the anchor's.
pub fn sample_pair(
    anchor: &RelationComponentTable,
    n_features: usize,
    rng: &mut impl Rng,
    theta: f64,
    len_pos: usize,
    len_neg: usize,
) -> Result<ContrastivePair> {
    if anchor.is_empty() {
        return Err(Error::DegenerateEntity);
    }
    let mut positive = anchor.clone();
    for _ in 0..len_pos {
        positive = op_variation(&positive, rng, theta)?;
    }

    let mut negative = anchor.clone();
    let (mut added, mut deleted) = (false, false);
    for step in 0..len_neg.max(1) {
        let add_pool: Vec<u32> = (0..n_features as u32)
            .filter(|&k| !anchor.contains(k) && !negative.contains(k))
            .collect();
        let del_pool: Vec<u32> = negative.support().into_iter().filter(|&k| anchor.contains(k)).collect();
        let can_add = !add_pool.is_empty();
        let can_del = negative.support_len() >= 2 && !del_pool.is_empty();
        let do_add = match (can_add, can_del) {
            (false, false) if step == 0 => {
                return Err(Error::InvalidTableOp("table admits neither addition nor deletion"))
            }
            (false, false) => break,
            (true, false) => true,
            (false, true) => false,
            (true, true) if !added => true,
            (true, true) if !deleted => false,
            (true, true) => rng.gen_bool(0.5),
        };
        if do_add {
            negative = add_from(&negative, &add_pool, rng, theta)?;
            added = true;
        } else {
            negative = delete_from(&negative, &del_pool, rng)?;
            deleted = true;
        }
    }
    Ok(ContrastivePair {
        anchor: anchor.clone(),
        positive,
        negative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn t(c: &[(u32, u32)]) -> RelationComponentTable {
        RelationComponentTable::from_counts(c.iter().copied())
    }

    #[test]
    fn variation_stays_in_range_and_keeps_support() {
        let mut rng = stream(0, Stream::Contrastive);
        let base = t(&[(0, 2), (1, 1)]);
        for _ in 0..200 {
            let v = op_variation(&base, &mut rng, 2.0).unwrap();
            assert_eq!(v.support(), vec![0, 1]);
            // m = 1.5, theta = 2 -> [1, 3]
            assert!(v.iter().all(|(_, c)| (1..=3).contains(&c)));
        }
    }

    #[test]
    fn variation_fixed_point() {
        let mut rng = stream(1, Stream::Contrastive);
        assert_eq!(op_variation(&t(&[(0, 1)]), &mut rng, 1.0).unwrap(), t(&[(0, 1)]));
        assert!(op_variation(&t(&[]), &mut rng, 1.0).is_err());
    }

    #[test]
    fn addition_grows_support_by_one() {
        let mut rng = stream(2, Stream::Contrastive);
        let theta = 2.0;
        for _ in 0..100 {
            let a = op_addition(&t(&[(0, 2)]), 3, &mut rng, theta).unwrap();
            assert_eq!(a.support_len(), 2);
            assert_eq!(a.get(0), 2);
            let new = a.support().into_iter().find(|&k| k != 0).unwrap();
            assert!(new == 1 || new == 2);
            // m = 2 -> [1, ceil(2 * theta)] = [1, 4]
            assert!((1..=4).contains(&a.get(new)));
        }
        let full = t(&[(0, 1), (1, 1), (2, 1)]);
        assert!(op_addition(&full, 3, &mut rng, theta).is_err());
    }

    #[test]
    fn deletion_shrinks_support_by_one() {
        let mut rng = stream(3, Stream::Contrastive);
        for _ in 0..50 {
            let d = op_deletion(&t(&[(0, 2), (1, 1)]), &mut rng).unwrap();
            assert!(d == t(&[(0, 2)]) || d == t(&[(1, 1)]));
        }
        assert!(op_deletion(&t(&[(0, 1)]), &mut rng).is_err());
    }

    #[test]
    fn pair_invariants() {
        let mut rng = stream(4, Stream::Contrastive);
        let anchor = t(&[(0, 3), (2, 1), (5, 2)]);
        for len in 1..=4 {
            let p = sample_pair(&anchor, 8, &mut rng, 2.0, 1, len).unwrap();
            assert_eq!(p.positive.support(), anchor.support());
            let differing = anchor.iter().filter(|&(k, c)| p.positive.get(k) != c).count();
            assert!(differing <= 1);
            assert_ne!(p.negative.support(), anchor.support());
            assert!(!p.negative.is_empty());
            if len >= 2 {
                let added = p.negative.support().iter().any(|k| !anchor.contains(*k));
                let removed = anchor.support().iter().any(|k| !p.negative.contains(*k));
                assert!(added && removed, "{p:?}");
            }
        }
    }

    #[test]
    fn pair_on_single_relation_table_only_adds() {
        let mut rng = stream(5, Stream::Contrastive);
        let p = sample_pair(&t(&[(1, 4)]), 3, &mut rng, 2.0, 2, 3).unwrap();
        assert_ne!(p.negative.support(), vec![1]);
        assert!(!p.negative.is_empty());
        let p = sample_pair(&t(&[(1, 4)]), 3, &mut rng, 2.0, 1, 1).unwrap();
        assert!(p.negative.contains(1) && p.negative.support_len() == 2);
        // nothing can change on a one-relation vocabulary
        assert!(sample_pair(&t(&[(0, 1)]), 1, &mut rng, 2.0, 1, 1).is_err());
    }
}
