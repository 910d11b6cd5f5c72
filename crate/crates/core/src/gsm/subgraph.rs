use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, RelationId, Triple, Vocabulary};
use crate::numeric::Tensor;

/// How nodes far from one endpoint are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LabelMode {
    /// Keep every node; a distance beyond the hop budget becomes `-1`.
    #[default]
    Improved,
    /// Drop every node with a `-1` component (endpoints excepted).
    Pruned,
}

/// Extraction settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractOptions {
    pub hops: usize,
    pub mode: LabelMode,
    /// Nearest-first cap on each endpoint ball.
    pub node_cap: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            hops: 2,
            mode: LabelMode::Improved,
            node_cap: 500,
        }
    }
}

/// Union of both endpoint balls with induced edges, before labeling.
///
/// Local index 0 is the head endpoint and 1 the tail endpoint; the rest
/// follow in ascending global id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    pub nodes: Vec<EntityId>,
    pub edges: Vec<(usize, RelationId, usize)>,
    pub target: Triple,
}

/// Subgraph with a `(d_i, d_j)` label per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSubgraph {
    pub nodes: Vec<EntityId>,
    pub edges: Vec<(usize, RelationId, usize)>,
    pub labels: Vec<(i32, i32)>,
    pub endpoints: (usize, usize),
    pub hops: usize,
    pub target: Triple,
}

fn neighbors<'g>(g: &'g KnowledgeGraph, u: EntityId, skip: Triple) -> impl Iterator<Item = EntityId> + 'g {
    let out = g
        .out_edges(u)
        .iter()
        .filter(move |&&(r, v)| {
            Triple {
                head: u,
                rel: r,
                tail: v,
            } != skip
        })
        .map(|&(_, v)| v);
    let inc = g
        .in_edges(u)
        .iter()
        .filter(move |&&(r, v)| {
            Triple {
                head: v,
                rel: r,
                tail: u,
            } != skip
        })
        .map(|&(_, v)| v);
    out.chain(inc)
}

/// Nodes within `hops` of `src`, nearest first then by id, at most `cap`.
fn ball(g: &KnowledgeGraph, src: EntityId, hops: usize, skip: Triple, cap: usize) -> Vec<EntityId> {
    let mut dist: HashMap<EntityId, usize> = HashMap::from([(src, 0)]);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == hops {
            continue;
        }
        for v in neighbors(g, u, skip) {
            dist.entry(v).or_insert_with(|| {
                queue.push_back(v);
                du + 1
            });
        }
    }
    let mut found: Vec<(usize, EntityId)> = dist.into_iter().map(|(e, d)| (d, e)).collect();
    found.sort_unstable();
    found.truncate(cap.max(1));
    found.into_iter().map(|(_, e)| e).collect()
}

/// Union of the `hops`-balls around both endpoints of `target` over the
/// undirected view of `g`, with `target` itself removed. Endpoints need not
/// be connected.
pub fn extract_subgraph(g: &KnowledgeGraph, target: &Triple, opts: &ExtractOptions) -> Result<Subgraph> {
    let (ei, ej) = (target.head, target.tail);
    for e in [ei, ej] {
        if e.index() >= g.n_entities() {
            return Err(Error::UnknownEntity(e.0));
        }
    }
    if ei == ej {
        return Err(Error::SameEndpoints(ei.0));
    }
    if opts.hops == 0 {
        return Err(Error::Config("hop budget must be at least 1".into()));
    }
    let mut rest: Vec<EntityId> = ball(g, ei, opts.hops, *target, opts.node_cap)
        .into_iter()
        .chain(ball(g, ej, opts.hops, *target, opts.node_cap))
        .filter(|&e| e != ei && e != ej)
        .collect();
    rest.sort_unstable();
    rest.dedup();
    let mut nodes = vec![ei, ej];
    nodes.extend(rest);
    let local: HashMap<EntityId, usize> = nodes.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut edges = Vec::new();
    for (lu, &u) in nodes.iter().enumerate() {
        for &(r, v) in g.out_edges(u) {
            if let Some(&lv) = local.get(&v) {
                if (Triple {
                    head: u,
                    rel: r,
                    tail: v,
                }) != *target
                {
                    edges.push((lu, r, lv));
                }
            }
        }
    }
    Ok(Subgraph {
        nodes,
        edges,
        target: *target,
    })
}

/// Hop distances from `src` over the undirected edge list with `removed`
/// deleted; `-1` beyond `hops` or when unreachable.
fn distances(n: usize, adj: &[Vec<usize>], src: usize, removed: usize, hops: usize) -> Vec<i32> {
    let mut d = vec![-1i32; n];
    d[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        if d[u] as usize == hops {
            continue;
        }
        for &v in &adj[u] {
            if v != removed && d[v] < 0 {
                d[v] = d[u] + 1;
                queue.push_back(v);
            }
        }
    }
    d
}

/// Assigns `(d_i, d_j)` labels. `d_i` is measured with the tail endpoint
/// deleted and `d_j` with the head endpoint deleted. Nodes with both
/// components `-1` (possible only when the node cap cut a path) are
/// dropped; [`LabelMode::Pruned`] also drops nodes with one `-1`.
pub fn label_nodes(sg: &Subgraph, hops: usize, mode: LabelMode) -> LabeledSubgraph {
    let n = sg.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for &(u, _, v) in &sg.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let di = distances(n, &adj, 0, 1, hops);
    let dj = distances(n, &adj, 1, 0, hops);
    let mut labels: Vec<(i32, i32)> = di.into_iter().zip(dj).collect();
    labels[0] = (0, 1);
    labels[1] = (1, 0);

    let keep: Vec<bool> = labels
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            i < 2
                || match mode {
                    LabelMode::Improved => a >= 0 || b >= 0,
                    LabelMode::Pruned => a >= 0 && b >= 0,
                }
        })
        .collect();
    let mut remap = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    let mut kept_labels = Vec::new();
    for i in 0..n {
        if keep[i] {
            remap[i] = nodes.len();
            nodes.push(sg.nodes[i]);
            kept_labels.push(labels[i]);
        }
    }
    let edges = sg
        .edges
        .iter()
        .filter(|&&(u, _, v)| keep[u] && keep[v])
        .map(|&(u, r, v)| (remap[u], r, remap[v]))
        .collect();
    LabeledSubgraph {
        nodes,
        edges,
        labels: kept_labels,
        endpoints: (0, 1),
        hops,
        target: sg.target,
    }
}

/// Extraction followed by labeling.
pub fn labeled_subgraph(g: &KnowledgeGraph, target: &Triple, opts: &ExtractOptions) -> Result<LabeledSubgraph> {
    let sg = extract_subgraph(g, target, opts)?;
    Ok(label_nodes(&sg, opts.hops, opts.mode))
}

/// Writes `one_hot(d)` for `d` in `0..=hops` into `out`; `-1` leaves it zero.
fn one_hot(d: i32, hops: usize, out: &mut [f64]) -> Result<()> {
    if d < -1 || d > hops as i32 {
        return Err(Error::LabelOutOfRange { label: d, hops });
    }
    if d >= 0 {
        out[d as usize] = 1.0;
    }
    Ok(())
}

/// Node features `one_hot(d_i) ++ one_hot(d_j)`, `|nodes| x 2(hops+1)`.
pub fn encode_labels(labels: &[(i32, i32)], hops: usize) -> Result<Tensor> {
    let w = hops + 1;
    let mut t = Tensor::zeros(labels.len(), 2 * w);
    for (i, &(a, b)) in labels.iter().enumerate() {
        let row = t.row_slice_mut(i);
        one_hot(a, hops, &mut row[..w])?;
        one_hot(b, hops, &mut row[w..])?;
    }
    Ok(t)
}

impl LabeledSubgraph {
    pub fn features(&self) -> Result<Tensor> {
        encode_labels(&self.labels, self.hops)
    }

    /// Local index of a global entity, if present.
    pub fn local(&self, e: EntityId) -> Option<usize> {
        self.nodes.iter().position(|&x| x == e)
    }

    /// Node table followed by the edge list, tab separated.
    pub fn to_edge_list(&self, vocab: &Vocabulary) -> String {
        let ent = |e: EntityId| {
            vocab
                .entity_name(e)
                .map(str::to_owned)
                .unwrap_or_else(|| format!("#{}", e.0))
        };
        let rel = |r: RelationId| {
            vocab
                .relation_name(r)
                .map(str::to_owned)
                .unwrap_or_else(|| format!("#{}", r.0))
        };
        let mut s = String::new();
        let t = self.target;
        let _ = writeln!(s, "# target\t{}\t{}\t{}", ent(t.head), rel(t.rel), ent(t.tail));
        let _ = writeln!(s, "node\tentity\td_i\td_j");
        for (i, (&e, &(a, b))) in self.nodes.iter().zip(&self.labels).enumerate() {
            let _ = writeln!(s, "{i}\t{}\t{a}\t{b}", ent(e));
        }
        let _ = writeln!(s, "head\trelation\ttail\thead_label\ttail_label");
        for &(u, r, v) in &self.edges {
            let (lu, lv) = (self.labels[u], self.labels[v]);
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t({},{})\t({},{})",
                ent(self.nodes[u]),
                rel(r),
                ent(self.nodes[v]),
                lu.0,
                lu.1,
                lv.0,
                lv.1
            );
        }
        s
    }
}
