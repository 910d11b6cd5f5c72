use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;

use super::Triple;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Enclosing:bridging proportions of an evaluation set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MixRatio {
    /// 1:1
    Eq,
    /// 1:2, more bridging links
    Mb,
    /// 2:1, more enclosing links
    Me,
}

impl MixRatio {
    /// (enclosing, bridging) weights.
    pub fn weights(self) -> (usize, usize) {
        match self {
            MixRatio::Eq => (1, 1),
            MixRatio::Mb => (1, 2),
            MixRatio::Me => (2, 1),
        }
    }

    /// Largest (enclosing, bridging) counts with the exact ratio that fit in
    /// the available pools.
    pub fn counts(self, enclosing: usize, bridging: usize) -> (usize, usize) {
        let (we, wb) = self.weights();
        let unit = (enclosing / we).min(bridging / wb);
        (unit * we, unit * wb)
    }
}

impl fmt::Display for MixRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MixRatio::Eq => "EQ",
            MixRatio::Mb => "MB",
            MixRatio::Me => "ME",
        })
    }
}

impl FromStr for MixRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EQ" => Ok(MixRatio::Eq),
            "MB" => Ok(MixRatio::Mb),
            "ME" => Ok(MixRatio::Me),
            other => Err(Error::Config(format!("unknown ratio `{other}` (EQ, MB, ME)"))),
        }
    }
}

/// Test links mixed at a fixed enclosing:bridging ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalSet {
    pub enclosing: Vec<Triple>,
    pub bridging: Vec<Triple>,
    pub ratio: MixRatio,
    pub seed: u64,
}

/// Subsamples the two pools down to `ratio`. Surplus links are dropped
/// uniformly at random; survivors keep their input order.
pub fn build_eval_set(enclosing: &[Triple], bridging: &[Triple], ratio: MixRatio, seed: u64) -> Result<EvalSet> {
    let (we, wb) = ratio.weights();
    if enclosing.len() < we {
        return Err(Error::InsufficientLinks {
            class: "enclosing",
            needed: we,
            available: enclosing.len(),
        });
    }
    if bridging.len() < wb {
        return Err(Error::InsufficientLinks {
            class: "bridging",
            needed: wb,
            available: bridging.len(),
        });
    }
    let (ne, nb) = ratio.counts(enclosing.len(), bridging.len());
    let mut rng = stream(seed, Stream::Mixing);
    let enclosing = keep_random(enclosing, ne, &mut rng);
    let bridging = keep_random(bridging, nb, &mut rng);
    Ok(EvalSet {
        enclosing,
        bridging,
        ratio,
        seed,
    })
}

fn keep_random(pool: &[Triple], n: usize, rng: &mut impl rand::Rng) -> Vec<Triple> {
    if n == pool.len() {
        return pool.to_vec();
    }
    let mut idx = sample(rng, pool.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i]).collect()
}

impl EvalSet {
    pub fn len(&self) -> usize {
        self.enclosing.len() + self.bridging.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Key-value manifest: ratio tag, seed and class counts.
    pub fn manifest(&self) -> String {
        format!(
            "ratio = {}\nseed = {}\nenclosing = {}\nbridging = {}\ntotal = {}\n",
            self.ratio,
            self.seed,
            self.enclosing.len(),
            self.bridging.len(),
            self.len()
        )
    }

    pub fn write_manifest(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.manifest()).map_err(|e| Error::io(path, e))
    }
}

/// Parsed manifest fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub ratio: MixRatio,
    pub seed: u64,
    pub enclosing: usize,
    pub bridging: usize,
}

impl FromStr for Manifest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut ratio = None;
        let mut seed = None;
        let mut enclosing = None;
        let mut bridging = None;
        for line in s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidData(format!("manifest line `{line}`")))?;
            let v = v.trim();
            let bad = |_| Error::InvalidData(format!("manifest value `{v}`"));
            match k.trim() {
                "ratio" => ratio = Some(v.parse()?),
                "seed" => seed = Some(v.parse().map_err(bad)?),
                "enclosing" => enclosing = Some(v.parse().map_err(bad)?),
                "bridging" => bridging = Some(v.parse().map_err(bad)?),
                _ => {}
            }
        }
        let missing = |k: &str| Error::InvalidData(format!("manifest is missing `{k}`"));
        Ok(Manifest {
            ratio: ratio.ok_or_else(|| missing("ratio"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            enclosing: enclosing.ok_or_else(|| missing("enclosing"))?,
            bridging: bridging.ok_or_else(|| missing("bridging"))?,
        })
    }
}
