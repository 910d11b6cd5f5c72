//! Synthetic two-component benchmark in which link existence is decided by
//! latent entity types, and each type is recognisable from the set of
//! relations its entities take part in.
//!
//! Relation `k` links every head of type `k % T` to every tail of type
//! `(k + 1 + k / T) % T`. The observed graphs are sparse samples of this
//! ground truth; every ground-truth triple not placed in another file goes
//! to `valid`, so the filtered protocol removes all true competitors.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::DatasetPaths;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub entities_per_component: usize,
    pub n_types: usize,
    pub n_relations: usize,
    /// Target number of observed triples per component.
    pub context_triples: usize,
    pub test_enclosing: usize,
    pub test_bridging: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            entities_per_component: 50,
            n_types: 5,
            n_relations: 8,
            context_triples: 150,
            test_enclosing: 50,
            test_bridging: 50,
            seed: 0,
        }
    }
}

type Named = (String, String, String);

/// Generated split as token triples.
#[derive(Clone, Debug, Default)]
pub struct SyntheticSplit {
    pub train: Vec<Named>,
    pub valid: Vec<Named>,
    pub dekg: Vec<Named>,
    pub test_enclosing: Vec<Named>,
    pub test_bridging: Vec<Named>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Raw {
    h: usize,
    r: usize,
    t: usize,
}

impl SyntheticConfig {
    /// (head type, tail type) of relation `k`.
    pub fn relation_types(&self, k: usize) -> (usize, usize) {
        let t = self.n_types;
        (k % t, (k + 1 + k / t) % t)
    }

    pub fn entity_type(&self, local: usize) -> usize {
        local % self.n_types
    }

    fn validate(&self) -> Result<()> {
        let t = self.n_types;
        if t < 2 || self.n_relations == 0 || self.n_relations > t * (t - 1) {
            return Err(Error::Config(format!(
                "need 2 <= types and 1 <= relations <= types*(types-1), got {t} types, {} relations",
                self.n_relations
            )));
        }
        if self.entities_per_component < t {
            return Err(Error::Config("fewer entities than types".into()));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<SyntheticSplit> {
        self.validate()?;
        let mut rng = stream(self.seed, Stream::Synthetic);
        let n = self.entities_per_component;

        // global entity index: component c, local i -> c * n + i
        let truth_between = |ca: usize, cb: usize| -> Vec<Raw> {
            let mut out = Vec::new();
            for r in 0..self.n_relations {
                let (ta, tb) = self.relation_types(r);
                for h in (0..n).filter(|&i| self.entity_type(i) == ta) {
                    for t in (0..n).filter(|&i| self.entity_type(i) == tb) {
                        out.push(Raw {
                            h: ca * n + h,
                            r,
                            t: cb * n + t,
                        });
                    }
                }
            }
            out
        };

        let mut split = SyntheticSplit::default();
        let mut leftovers = Vec::new();
        let mut observed = [Vec::new(), Vec::new()];
        let mut test_enclosing = Vec::new();
        for (c, slot) in observed.iter_mut().enumerate() {
            let truth = truth_between(c, c);
            let ctx = self.sample_context(&truth, c, &mut rng);
            let ctx_set: HashSet<Raw> = ctx.iter().copied().collect();
            let mut rest: Vec<Raw> = truth.into_iter().filter(|t| !ctx_set.contains(t)).collect();
            if c == 1 {
                rest.shuffle(&mut rng);
                let k = self.test_enclosing.min(rest.len());
                test_enclosing = rest.drain(..k).collect();
            }
            leftovers.extend(rest);
            *slot = ctx;
        }
        let mut cross = truth_between(0, 1);
        cross.extend(truth_between(1, 0));
        cross.shuffle(&mut rng);
        let k = self.test_bridging.min(cross.len());
        let test_bridging: Vec<Raw> = cross.drain(..k).collect();
        leftovers.extend(cross);

        let name = |g: usize| {
            if g < n {
                format!("g{g}")
            } else {
                format!("n{}", g - n)
            }
        };
        let named =
            |v: &[Raw]| -> Vec<Named> { v.iter().map(|x| (name(x.h), format!("r{}", x.r), name(x.t))).collect() };
        split.train = named(&observed[0]);
        split.dekg = named(&observed[1]);
        split.test_enclosing = named(&test_enclosing);
        split.test_bridging = named(&test_bridging);
        split.valid = named(&leftovers);
        Ok(split)
    }

    /// Covers every (relation, role) slot of every entity once, then tops
    /// up with random ground-truth triples.
    fn sample_context(&self, truth: &[Raw], c: usize, rng: &mut impl Rng) -> Vec<Raw> {
        let n = self.entities_per_component;
        let mut chosen = Vec::new();
        let mut set = HashSet::new();
        let mut covered: HashSet<(usize, usize, bool)> = HashSet::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for local in order {
            let e = c * n + local;
            let ty = self.entity_type(local);
            for r in 0..self.n_relations {
                let (ta, tb) = self.relation_types(r);
                for (is_head, want) in [(true, ta), (false, tb)] {
                    if ty != want || covered.contains(&(e, r, is_head)) {
                        continue;
                    }
                    let other_ty = if is_head { tb } else { ta };
                    let partners: Vec<usize> = (0..n).filter(|&i| self.entity_type(i) == other_ty).collect();
                    let p = c * n + partners[rng.gen_range(0..partners.len())];
                    let raw = if is_head {
                        Raw { h: e, r, t: p }
                    } else {
                        Raw { h: p, r, t: e }
                    };
                    if set.insert(raw) {
                        chosen.push(raw);
                    }
                    covered.insert((raw.h, r, true));
                    covered.insert((raw.t, r, false));
                }
            }
        }
        let mut pool: Vec<Raw> = truth.iter().copied().filter(|t| !set.contains(t)).collect();
        pool.shuffle(rng);
        for raw in pool {
            if chosen.len() >= self.context_triples {
                break;
            }
            set.insert(raw);
            chosen.push(raw);
        }
        chosen
    }
}

impl SyntheticSplit {
    /// Writes `train.tsv`, `valid.tsv`, `dekg.tsv`, `test_enclosing.tsv`
    /// and `test_bridging.tsv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<DatasetPaths> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, rows: &[Named]| -> Result<std::path::PathBuf> {
            let p = dir.join(name);
            let mut body = String::new();
            for (h, r, t) in rows {
                body.push_str(&format!("{h}\t{r}\t{t}\n"));
            }
            fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
            Ok(p)
        };
        Ok(DatasetPaths {
            train: put("train.tsv", &self.train)?,
            valid: Some(put("valid.tsv", &self.valid)?),
            dekg: Some(put("dekg.tsv", &self.dekg)?),
            test_enclosing: Some(put("test_enclosing.tsv", &self.test_enclosing)?),
            test_bridging: Some(put("test_bridging.tsv", &self.test_bridging)?),
        })
    }
}
