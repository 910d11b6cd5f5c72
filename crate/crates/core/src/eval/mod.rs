//! Filtered ranking and report aggregation.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::{EntityId, EvalSet, LinkClass, RelationId, Triple};
use crate::model::{Model, ScoringContext};

/// Which slot of a triple is hidden.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    /// `(?, r, t)`
    Head,
    /// `(h, ?, t)`
    Relation,
    /// `(h, r, ?)`
    Tail,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Head, Pattern::Relation, Pattern::Tail];

    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Head => "(?,r,t)",
            Pattern::Relation => "(h,?,t)",
            Pattern::Tail => "(h,r,?)",
        }
    }
}

/// How ties between the truth and other candidates are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieMode {
    /// Mean of the best and worst tied position.
    #[default]
    Average,
    /// Truth placed after every tied candidate.
    Pessimistic,
    /// Truth placed before every tied candidate.
    Optimistic,
}

impl FromStr for TieMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "average" => Ok(TieMode::Average),
            "pessimistic" => Ok(TieMode::Pessimistic),
            "optimistic" => Ok(TieMode::Optimistic),
            _ => Err(Error::Config(format!("unknown tie mode `{s}`"))),
        }
    }
}

impl fmt::Display for TieMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieMode::Average => "average",
            TieMode::Pessimistic => "pessimistic",
            TieMode::Optimistic => "optimistic",
        })
    }
}

/// Anything that assigns a plausibility score to a triple.
pub trait LinkScorer: Sync {
    fn score(&self, t: &Triple) -> Result<f64>;
    fn n_entities(&self) -> usize;
    fn n_relations(&self) -> usize;
}

/// A model scoring against a fixed context graph.
#[derive(Clone, Copy)]
pub struct ModelScorer<'a> {
    pub model: &'a Model,
    pub context: ScoringContext<'a>,
}

impl LinkScorer for ModelScorer<'_> {
    fn score(&self, t: &Triple) -> Result<f64> {
        self.model.score(&self.context, t)
    }

    fn n_entities(&self) -> usize {
        self.context.graph.n_entities()
    }

    fn n_relations(&self) -> usize {
        self.model.arch.config.n_relations
    }
}

/// One ranking query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub pattern: Pattern,
    pub triple: Triple,
}

impl Query {
    /// Every completion of the hidden slot, the truth included. Entity
    /// completions that would form a self-loop are left out.
    pub fn candidates(&self, n_entities: usize, n_relations: usize) -> Vec<Triple> {
        let t = self.triple;
        match self.pattern {
            Pattern::Head => (0..n_entities as u32)
                .map(|e| Triple { head: EntityId(e), ..t })
                .filter(|c| c.head != c.tail || *c == t)
                .collect(),
            Pattern::Tail => (0..n_entities as u32)
                .map(|e| Triple { tail: EntityId(e), ..t })
                .filter(|c| c.head != c.tail || *c == t)
                .collect(),
            Pattern::Relation => (0..n_relations as u32)
                .map(|r| Triple {
                    rel: RelationId(r),
                    ..t
                })
                .collect(),
        }
    }
}

/// `1 + #higher` plus the tie share selected by `mode`.
pub fn rank_from_scores(truth: f64, others: impl IntoIterator<Item = f64>, mode: TieMode) -> f64 {
    let (mut higher, mut tied) = (0usize, 0usize);
    for s in others {
        if s > truth {
            higher += 1;
        } else if s == truth {
            tied += 1;
        }
    }
    let base = 1.0 + higher as f64;
    match mode {
        TieMode::Average => base + tied as f64 / 2.0,
        TieMode::Pessimistic => base + tied as f64,
        TieMode::Optimistic => base,
    }
}

/// Rank of the true triple among candidates that are not known positives.
pub fn filtered_rank(scorer: &dyn LinkScorer, query: &Query, known: &HashSet<Triple>, mode: TieMode) -> Result<f64> {
    let cands = query.candidates(scorer.n_entities(), scorer.n_relations());
    if !cands.contains(&query.triple) {
        return Err(Error::MissingAnswer);
    }
    let truth = scorer.score(&query.triple)?;
    let mut others = Vec::with_capacity(cands.len());
    for c in cands.iter().filter(|c| **c != query.triple && !known.contains(c)) {
        others.push(scorer.score(c)?);
    }
    Ok(rank_from_scores(truth, others, mode))
}

/// A ranked query with its link class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankResult {
    pub query: Query,
    pub rank: f64,
    pub class: LinkClass,
}

pub fn mrr(ranks: &[f64]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::Empty("ranks"));
    }
    Ok(ranks.iter().map(|r| 1.0 / r).sum::<f64>() / ranks.len() as f64)
}

pub fn hits_at(ranks: &[f64], n: usize) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::Empty("ranks"));
    }
    Ok(ranks.iter().filter(|&&r| r <= n as f64).count() as f64 / ranks.len() as f64)
}

/// Ranks every `(link, pattern)` pair on the current rayon pool. Results
/// come back in link-major, pattern-minor order. Self-loop links are
/// skipped.
pub fn evaluate_links(
    scorer: &dyn LinkScorer,
    links: &[(Triple, LinkClass)],
    known: &HashSet<Triple>,
    patterns: &[Pattern],
    mode: TieMode,
) -> Result<Vec<RankResult>> {
    let queries: Vec<(Query, LinkClass)> = links
        .iter()
        .filter(|(t, _)| t.head != t.tail)
        .flat_map(|&(triple, class)| patterns.iter().map(move |&pattern| (Query { pattern, triple }, class)))
        .collect();
    queries
        .par_iter()
        .map(|&(query, class)| {
            Ok(RankResult {
                query,
                rank: filtered_rank(scorer, &query, known, mode)?,
                class,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub mrr: f64,
    pub hits1: f64,
    pub hits5: f64,
    pub hits10: f64,
    pub n: usize,
}

impl Metrics {
    pub fn from_ranks(ranks: &[f64]) -> Result<Self> {
        Ok(Metrics {
            mrr: mrr(ranks)?,
            hits1: hits_at(ranks, 1)?,
            hits5: hits_at(ranks, 5)?,
            hits10: hits_at(ranks, 10)?,
            n: ranks.len(),
        })
    }
}

/// One line of a report: metrics averaged over seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub split: &'static str,
    /// `all` or one of the pattern strings.
    pub pattern: &'static str,
    pub metrics: Metrics,
    pub seeds: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

const SPLITS: [(&str, Option<LinkClass>); 3] = [
    ("overall", None),
    ("enclosing", Some(LinkClass::Enclosing)),
    ("bridging", Some(LinkClass::Bridging)),
];

/// Per-seed metrics averaged across seeds, for every split and pattern
/// with at least one query. `all` pools every pattern.
pub fn summarize(per_seed: &[Vec<RankResult>]) -> Result<EvalReport> {
    if per_seed.is_empty() {
        return Err(Error::Empty("seed runs"));
    }
    let mut rows = Vec::new();
    let patterns: [(&'static str, Option<Pattern>); 4] = [
        ("all", None),
        (Pattern::Head.as_str(), Some(Pattern::Head)),
        (Pattern::Relation.as_str(), Some(Pattern::Relation)),
        (Pattern::Tail.as_str(), Some(Pattern::Tail)),
    ];
    for (split, class) in SPLITS {
        for (pname, pattern) in patterns {
            let mut acc = Metrics::default();
            let mut used = 0usize;
            let mut n_total = 0usize;
            for run in per_seed {
                let ranks: Vec<f64> = run
                    .iter()
                    .filter(|r| class.is_none_or(|c| r.class == c) && pattern.is_none_or(|p| r.query.pattern == p))
                    .map(|r| r.rank)
                    .collect();
                if ranks.is_empty() {
                    continue;
                }
                let m = Metrics::from_ranks(&ranks)?;
                acc.mrr += m.mrr;
                acc.hits1 += m.hits1;
                acc.hits5 += m.hits5;
                acc.hits10 += m.hits10;
                n_total += m.n;
                used += 1;
            }
            if used == 0 {
                continue;
            }
            let k = used as f64;
            rows.push(ReportRow {
                split,
                pattern: pname,
                metrics: Metrics {
                    mrr: acc.mrr / k,
                    hits1: acc.hits1 / k,
                    hits5: acc.hits5 / k,
                    hits10: acc.hits10 / k,
                    n: (n_total as f64 / k).round() as usize,
                },
                seeds: used,
            });
        }
    }
    Ok(EvalReport { rows })
}

/// Ranks each distinct link once and aggregates it per evaluation set.
pub fn evaluate(
    scorer: &dyn LinkScorer,
    sets: &[EvalSet],
    known: &HashSet<Triple>,
    patterns: &[Pattern],
    mode: TieMode,
) -> Result<EvalReport> {
    let mut links: Vec<(Triple, LinkClass)> = Vec::new();
    let mut seen = HashSet::new();
    for s in sets {
        let tagged = s
            .enclosing
            .iter()
            .map(|&t| (t, LinkClass::Enclosing))
            .chain(s.bridging.iter().map(|&t| (t, LinkClass::Bridging)));
        for l in tagged {
            if seen.insert(l) {
                links.push(l);
            }
        }
    }
    let ranked = evaluate_links(scorer, &links, known, patterns, mode)?;
    let mut by_link: HashMap<(Triple, LinkClass), Vec<RankResult>> = HashMap::new();
    for r in ranked {
        by_link.entry((r.query.triple, r.class)).or_default().push(r);
    }
    let per_seed: Vec<Vec<RankResult>> = sets
        .iter()
        .map(|s| {
            s.enclosing
                .iter()
                .map(|&t| (t, LinkClass::Enclosing))
                .chain(s.bridging.iter().map(|&t| (t, LinkClass::Bridging)))
                .flat_map(|l| by_link.get(&l).cloned().unwrap_or_default())
                .collect()
        })
        .collect();
    summarize(&per_seed)
}

impl EvalReport {
    pub fn get(&self, split: &str, pattern: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.split == split && r.pattern == pattern)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("split,pattern,MRR,Hits@1,Hits@5,Hits@10,n_queries,seeds\n");
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{:.6},{},{}",
                r.split, r.pattern, m.mrr, m.hits1, m.hits5, m.hits10, m.n, r.seeds
            );
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<10} {:<8} {:>7} {:>7} {:>7} {:>7} {:>9} {:>5}\n",
            "split", "pattern", "MRR", "H@1", "H@5", "H@10", "n_queries", "seeds"
        );
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "{:<10} {:<8} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>9} {:>5}",
                r.split, r.pattern, m.mrr, m.hits1, m.hits5, m.hits10, m.n, r.seeds
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scores from a fixed table; unknown triples score 0.
    struct TableScorer {
        scores: HashMap<Triple, f64>,
        ne: usize,
        nr: usize,
    }

    impl LinkScorer for TableScorer {
        fn score(&self, t: &Triple) -> Result<f64> {
            Ok(*self.scores.get(t).unwrap_or(&0.0))
        }
        fn n_entities(&self) -> usize {
            self.ne
        }
        fn n_relations(&self) -> usize {
            self.nr
        }
    }

    fn scorer(entries: &[((u32, u32, u32), f64)]) -> TableScorer {
        TableScorer {
            scores: entries
                .iter()
                .map(|&((h, r, t), s)| (Triple::new(h, r, t), s))
                .collect(),
            ne: 5,
            nr: 2,
        }
    }

    #[test]
    fn rank_examples() {
        let s = scorer(&[((0, 0, 1), 5.0), ((0, 0, 2), 9.0), ((0, 0, 3), 5.0)]);
        let q = Query {
            pattern: Pattern::Tail,
            triple: Triple::new(0, 0, 1),
        };
        let none = HashSet::new();
        // one strictly higher, one tied
        assert_eq!(filtered_rank(&s, &q, &none, TieMode::Average).unwrap(), 2.5);
        assert_eq!(filtered_rank(&s, &q, &none, TieMode::Pessimistic).unwrap(), 3.0);
        assert_eq!(filtered_rank(&s, &q, &none, TieMode::Optimistic).unwrap(), 2.0);
        // the higher candidate is a known positive
        let known: HashSet<Triple> = [Triple::new(0, 0, 2)].into();
        assert_eq!(filtered_rank(&s, &q, &known, TieMode::Average).unwrap(), 1.5);
        let out_of_range = Query {
            pattern: Pattern::Tail,
            triple: Triple::new(0, 0, 9),
        };
        assert!(matches!(
            filtered_rank(&s, &out_of_range, &none, TieMode::Average),
            Err(Error::MissingAnswer)
        ));
    }

    #[test]
    fn candidate_sets() {
        let q = |p| Query {
            pattern: p,
            triple: Triple::new(1, 0, 2),
        };
        assert_eq!(q(Pattern::Head).candidates(4, 3).len(), 3);
        assert_eq!(q(Pattern::Tail).candidates(4, 3).len(), 3);
        assert_eq!(q(Pattern::Relation).candidates(4, 3).len(), 3);
    }

    #[test]
    fn metric_examples() {
        assert!((mrr(&[1.0, 2.0, 4.0]).unwrap() - 1.75 / 3.0).abs() < 1e-15);
        assert_eq!(hits_at(&[11.0], 10).unwrap(), 0.0);
        assert_eq!(mrr(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(hits_at(&[1.0, 1.0], 1).unwrap(), 1.0);
        assert!(mrr(&[]).is_err() && hits_at(&[], 1).is_err());
    }

    #[test]
    fn overall_mrr_is_weighted_mean_of_splits() {
        let mk = |h, rank, class| RankResult {
            query: Query {
                pattern: Pattern::Tail,
                triple: Triple::new(h, 0, 4),
            },
            rank,
            class,
        };
        let run = vec![
            mk(0, 1.0, LinkClass::Enclosing),
            mk(1, 3.0, LinkClass::Bridging),
            mk(2, 2.0, LinkClass::Bridging),
        ];
        let rep = summarize(&[run]).unwrap();
        let all = rep.get("overall", "all").unwrap().metrics;
        let e = rep.get("enclosing", "all").unwrap().metrics;
        let b = rep.get("bridging", "all").unwrap().metrics;
        let weighted = (e.mrr * e.n as f64 + b.mrr * b.n as f64) / (e.n + b.n) as f64;
        assert!((all.mrr - weighted).abs() < 1e-15);
        assert!(rep.get("bridging", Pattern::Head.as_str()).is_none());
        assert!(rep
            .to_csv()
            .starts_with("split,pattern,MRR,Hits@1,Hits@5,Hits@10,n_queries,seeds\n"));
    }

    #[test]
    fn seeds_average_per_seed_metrics() {
        let mk = |rank| RankResult {
            query: Query {
                pattern: Pattern::Tail,
                triple: Triple::new(0, 0, 1),
            },
            rank,
            class: LinkClass::Enclosing,
        };
        let rep = summarize(&[vec![mk(1.0)], vec![mk(4.0), mk(4.0)]]).unwrap();
        let row = rep.get("overall", "all").unwrap();
        assert_eq!(row.seeds, 2);
        assert!((row.metrics.mrr - 0.625).abs() < 1e-15);
    }
}
