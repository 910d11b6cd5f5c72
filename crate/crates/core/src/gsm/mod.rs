//! Subgraph extraction, double-radius labeling and relational message
//! passing for topological scoring.
//!
//! The two endpoint balls are extracted independently, so a link between
//! disconnected components still yields a subgraph: two disjoint groups
//! whose labels carry a `-1` in the component of the unreachable endpoint.

mod subgraph;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::kg::RelationId;
use crate::numeric::{MessageEdge, ParameterStore, SlotId, Tape, Tensor, Var};

pub use subgraph::{
    encode_labels, extract_subgraph, label_nodes, labeled_subgraph, ExtractOptions, LabelMode, LabeledSubgraph,
    Subgraph,
};

/// Width of the label encoding for a hop budget.
pub fn feature_width(hops: usize) -> usize {
    2 * (hops + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GnnLayer {
    /// One `d_in x d_out` block per relation, forward blocks then inverse
    /// blocks, stacked vertically.
    pub rel: SlotId,
    pub self_loop: SlotId,
    pub d_in: usize,
    pub d_out: usize,
}

/// Parameter slots of the topological scorer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnnParameters {
    pub layers: Vec<GnnLayer>,
    /// Edge-relation embeddings for attention, `2n x d`.
    pub att_edge: SlotId,
    /// Target-relation embeddings for attention, `n x d`.
    pub att_target: SlotId,
    /// Bilinear attention form, `d x d`.
    pub att_mix: SlotId,
    /// Topological relation embeddings, `n x d`.
    pub rel_tpo: SlotId,
    /// Final scorer, `4d x 1`.
    pub out: SlotId,
    pub n_relations: usize,
    pub dim: usize,
}

/// Result of [`GnnParameters::forward`].
#[derive(Clone, Copy, Debug)]
pub struct GnnOutput {
    /// Node embeddings after the last layer.
    pub nodes: Var,
    pub graph: Var,
    pub head: Var,
    pub tail: Var,
}

impl GnnParameters {
    /// Adds zero-filled slots for `layers` layers of width `dim`.
    pub fn register(
        store: &mut ParameterStore,
        n_relations: usize,
        hops: usize,
        dim: usize,
        layers: usize,
    ) -> Result<Self> {
        if layers == 0 || dim == 0 || n_relations == 0 {
            return Err(Error::Config(
                "layers, width and relation count must be positive".into(),
            ));
        }
        let mut ls = Vec::with_capacity(layers);
        let mut d_in = feature_width(hops);
        for l in 0..layers {
            ls.push(GnnLayer {
                rel: store.add(&format!("gsm.l{l}.rel"), Tensor::zeros(2 * n_relations * d_in, dim))?,
                self_loop: store.add(&format!("gsm.l{l}.self"), Tensor::zeros(d_in, dim))?,
                d_in,
                d_out: dim,
            });
            d_in = dim;
        }
        Ok(GnnParameters {
            layers: ls,
            att_edge: store.add("gsm.att.edge", Tensor::zeros(2 * n_relations, dim))?,
            att_target: store.add("gsm.att.target", Tensor::zeros(n_relations, dim))?,
            att_mix: store.add("gsm.att.mix", Tensor::zeros(dim, dim))?,
            rel_tpo: store.add("gsm.rel_tpo", Tensor::zeros(n_relations, dim))?,
            out: store.add("gsm.out", Tensor::zeros(4 * dim, 1))?,
            n_relations,
            dim,
        })
    }

    /// Looks up the slots of an existing store.
    pub fn bind(store: &ParameterStore) -> Result<Self> {
        let rel_tpo = store.id("gsm.rel_tpo")?;
        let (n_relations, dim) = (store.value(rel_tpo).rows(), store.value(rel_tpo).cols());
        let mut layers = Vec::new();
        while let Ok(rel) = store.id(&format!("gsm.l{}.rel", layers.len())) {
            let self_loop = store.id(&format!("gsm.l{}.self", layers.len()))?;
            let s = store.value(self_loop);
            if store.value(rel).rows() != 2 * n_relations * s.rows() {
                return Err(Error::shape("gsm.bind", "relation blocks do not match the self-loop"));
            }
            layers.push(GnnLayer {
                rel,
                self_loop,
                d_in: s.rows(),
                d_out: s.cols(),
            });
        }
        if layers.is_empty() {
            return Err(Error::UnknownSlot("gsm.l0.rel".into()));
        }
        Ok(GnnParameters {
            layers,
            att_edge: store.id("gsm.att.edge")?,
            att_target: store.id("gsm.att.target")?,
            att_mix: store.id("gsm.att.mix")?,
            rel_tpo,
            out: store.id("gsm.out")?,
            n_relations,
            dim,
        })
    }

    /// Hop budget implied by the first layer's input width.
    pub fn hops(&self) -> usize {
        self.layers[0].d_in / 2 - 1
    }

    pub fn slots(&self) -> Vec<SlotId> {
        let mut v: Vec<SlotId> = self.layers.iter().flat_map(|l| [l.rel, l.self_loop]).collect();
        v.extend([self.att_edge, self.att_target, self.att_mix, self.rel_tpo, self.out]);
        v
    }

    pub fn init(&self, store: &mut ParameterStore, rng: &mut impl Rng) {
        let bound = 1.0 / (self.dim as f64).sqrt();
        for id in self.slots() {
            store.init_uniform(id, bound, rng);
        }
    }

    /// Gate per edge relation (forward then inverse), `2n x 1`:
    /// `sigmoid(E_edge M e_target^T)`.
    pub fn attention(&self, tape: &mut Tape, store: &ParameterStore, rk: RelationId) -> Result<Var> {
        if rk.index() >= self.n_relations {
            return Err(Error::UnknownRelationId(rk.0));
        }
        let e = tape.param(store, self.att_edge)?;
        let m = tape.param(store, self.att_mix)?;
        let q = tape.param_rows(store, self.att_target, &[rk.index()])?;
        let em = tape.matmul(e, m)?;
        let qt = tape.transpose(q)?;
        let logits = tape.matmul(em, qt)?;
        tape.sigmoid(logits)
    }

    /// Runs every layer on `sg`. With `dropout = Some((beta, rng))` each
    /// edge is removed (in both directions) with probability `beta`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        sg: &LabeledSubgraph,
        rk: RelationId,
        dropout: Option<(f64, &mut dyn RngCore)>,
    ) -> Result<GnnOutput> {
        let features = sg.features()?;
        if features.cols() != self.layers[0].d_in {
            return Err(Error::shape(
                "gnn_forward",
                format!(
                    "features have width {}, layer 0 expects {}",
                    features.cols(),
                    self.layers[0].d_in
                ),
            ));
        }
        let n = self.n_relations;
        let mut messages = Vec::with_capacity(2 * sg.edges.len());
        let mut dropout = dropout;
        for &(u, r, v) in &sg.edges {
            if r.index() >= n {
                return Err(Error::UnknownRelationId(r.0));
            }
            if let Some((beta, rng)) = dropout.as_mut() {
                if rng.gen_bool(*beta) {
                    continue;
                }
            }
            messages.push(MessageEdge {
                src: u,
                dst: v,
                rel: r.index(),
            });
            messages.push(MessageEdge {
                src: v,
                dst: u,
                rel: n + r.index(),
            });
        }
        let alpha = self.attention(tape, store, rk)?;
        let mut h = tape.constant(features)?;
        for layer in &self.layers {
            let w = tape.param(store, layer.rel)?;
            let s = tape.param(store, layer.self_loop)?;
            let agg = tape.message_pass(h, w, alpha, &messages)?;
            let own = tape.matmul(h, s)?;
            let pre = tape.add(own, agg)?;
            h = tape.relu(pre)?;
        }
        let graph = tape.mean_rows(h)?;
        let head = tape.rows(h, &[sg.endpoints.0])?;
        let tail = tape.rows(h, &[sg.endpoints.1])?;
        Ok(GnnOutput {
            nodes: h,
            graph,
            head,
            tail,
        })
    }

    /// `[h_G ++ h_i ++ h_j ++ r_tpo] W` as 1x1.
    pub fn topological_score(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        out: &GnnOutput,
        rk: RelationId,
    ) -> Result<Var> {
        if rk.index() >= self.n_relations {
            return Err(Error::UnknownRelationId(rk.0));
        }
        let r = tape.param_rows(store, self.rel_tpo, &[rk.index()])?;
        let z = tape.concat_cols(&[out.graph, out.head, out.tail, r])?;
        let w = tape.param(store, self.out)?;
        tape.matmul(z, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{KnowledgeGraph, Triple};
    use crate::numeric::{grad_check, GradCheckOptions};
    use crate::rng::{stream, Stream};

    fn setup(layers: usize, dim: usize) -> (ParameterStore, GnnParameters) {
        let mut s = ParameterStore::new();
        let p = GnnParameters::register(&mut s, 2, 1, dim, layers).unwrap();
        p.init(&mut s, &mut stream(11, Stream::Init));
        (s, p)
    }

    fn triangle() -> (KnowledgeGraph, Triple) {
        let g = KnowledgeGraph::from_triples(
            3,
            2,
            vec![Triple::new(0, 0, 2), Triple::new(2, 1, 1), Triple::new(0, 1, 1)],
        )
        .unwrap();
        (g, Triple::new(0, 1, 1))
    }

    fn opts() -> ExtractOptions {
        ExtractOptions {
            hops: 1,
            ..Default::default()
        }
    }

    #[test]
    fn bind_recovers_layout() {
        let (s, p) = setup(3, 4);
        assert_eq!(GnnParameters::bind(&s).unwrap(), p);
        assert_eq!(p.hops(), 1);
    }

    #[test]
    fn isolated_pair_uses_self_path_only() {
        let g = KnowledgeGraph::empty(2, 2);
        let (s, p) = setup(1, 3);
        let sg = labeled_subgraph(&g, &Triple::new(0, 0, 1), &opts()).unwrap();
        let mut tape = Tape::new();
        let out = p.forward(&mut tape, &s, &sg, RelationId(0), None).unwrap();
        let w = s.value(p.layers[0].self_loop);
        let x = sg.features().unwrap();
        for node in 0..2 {
            for c in 0..3 {
                let pre: f64 = (0..4).map(|k| x.at(node, k) * w.at(k, c)).sum();
                assert!((tape.value(out.nodes).at(node, c) - pre.max(0.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_weights_give_zero_embeddings() {
        let (g, t) = triangle();
        let (mut s, p) = setup(2, 3);
        s.fill_all(0.0);
        let sg = labeled_subgraph(&g, &t, &opts()).unwrap();
        let mut tape = Tape::new();
        let out = p.forward(&mut tape, &s, &sg, t.rel, None).unwrap();
        assert!(tape.value(out.graph).data().iter().all(|&x| x == 0.0));
        let sc = p.topological_score(&mut tape, &s, &out, t.rel).unwrap();
        assert_eq!(tape.scalar(sc).unwrap(), 0.0);
    }

    #[test]
    fn matches_dense_adjacency_oracle() {
        let (g, t) = triangle();
        let (s, p) = setup(1, 3);
        let sg = labeled_subgraph(&g, &t, &opts()).unwrap();
        let mut tape = Tape::new();
        let out = p.forward(&mut tape, &s, &sg, t.rel, None).unwrap();
        let got = tape.value(out.nodes);

        let x = sg.features().unwrap();
        let (nn, din, d) = (sg.nodes.len(), 4, 3);
        let att = |e: usize| {
            let ee = s.value(p.att_edge);
            let m = s.value(p.att_mix);
            let q = s.value(p.att_target);
            let mut z = 0.0;
            for a in 0..d {
                for b in 0..d {
                    z += ee.at(e, a) * m.at(a, b) * q.at(t.rel.index(), b);
                }
            }
            1.0 / (1.0 + (-z).exp())
        };
        // dense adjacency per edge relation (forward, inverse)
        let mut adj = vec![vec![vec![0.0; nn]; nn]; 4];
        for &(u, r, v) in &sg.edges {
            adj[r.index()][v][u] += 1.0;
            adj[2 + r.index()][u][v] += 1.0;
        }
        let mut deg = vec![0.0; nn];
        for a in &adj {
            for (v, row) in a.iter().enumerate() {
                deg[v] += row.iter().sum::<f64>();
            }
        }
        let wr = s.value(p.layers[0].rel);
        let ws = s.value(p.layers[0].self_loop);
        for v in 0..nn {
            for c in 0..d {
                let mut acc: f64 = (0..din).map(|k| x.at(v, k) * ws.at(k, c)).sum();
                for (rr, a) in adj.iter().enumerate() {
                    for (u, &w) in a[v].iter().enumerate() {
                        if w > 0.0 {
                            let m: f64 = (0..din).map(|k| x.at(u, k) * wr.at(rr * din + k, c)).sum();
                            acc += att(rr) * w * m / deg[v];
                        }
                    }
                }
                assert!((got.at(v, c) - acc.max(0.0)).abs() < 1e-12, "node {v} col {c}");
            }
        }

        let sc = p.topological_score(&mut tape, &s, &out, t.rel).unwrap();
        let mut z = tape.value(out.graph).data().to_vec();
        z.extend_from_slice(tape.value(out.head).data());
        z.extend_from_slice(tape.value(out.tail).data());
        z.extend_from_slice(s.value(p.rel_tpo).row_slice(t.rel.index()));
        let want: f64 = z.iter().zip(s.value(p.out).data()).map(|(a, b)| a * b).sum();
        assert!((tape.scalar(sc).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn score_of_rel_block_only() {
        let (g, t) = triangle();
        let (mut s, p) = setup(1, 2);
        let w = s.value_mut(p.out).data_mut();
        w.fill(0.0);
        w[6..8].fill(1.0);
        let sg = labeled_subgraph(&g, &t, &opts()).unwrap();
        let mut tape = Tape::new();
        let out = p.forward(&mut tape, &s, &sg, t.rel, None).unwrap();
        let sc = p.topological_score(&mut tape, &s, &out, t.rel).unwrap();
        let want: f64 = s.value(p.rel_tpo).row_slice(1).iter().sum();
        assert!((tape.scalar(sc).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn dropout_is_seeded_and_full_dropout_leaves_self_path() {
        let (g, t) = triangle();
        let (s, p) = setup(2, 3);
        let sg = labeled_subgraph(&g, &t, &opts()).unwrap();
        let run = |beta: f64, seed: u64| {
            let mut tape = Tape::new();
            let mut rng = stream(seed, Stream::Dropout);
            let out = p.forward(&mut tape, &s, &sg, t.rel, Some((beta, &mut rng))).unwrap();
            tape.value(out.nodes).data().to_vec()
        };
        assert_eq!(run(0.5, 3), run(0.5, 3));
        let mut tape = Tape::new();
        let none = p.forward(&mut tape, &s, &sg, t.rel, None).unwrap();
        assert_eq!(run(0.0, 1), tape.value(none.nodes).data());
        let empty = LabeledSubgraph {
            edges: Vec::new(),
            ..sg.clone()
        };
        let mut tape = Tape::new();
        let bare = p.forward(&mut tape, &s, &empty, t.rel, None).unwrap();
        assert_eq!(run(1.0, 9), tape.value(bare.nodes).data());
    }

    #[test]
    fn endpoint_swap_swaps_labels() {
        let g = KnowledgeGraph::from_triples(
            5,
            1,
            vec![
                Triple::new(0, 0, 2),
                Triple::new(2, 0, 3),
                Triple::new(3, 0, 1),
                Triple::new(1, 0, 4),
            ],
        )
        .unwrap();
        let a = labeled_subgraph(&g, &Triple::new(0, 0, 1), &ExtractOptions::default()).unwrap();
        let b = labeled_subgraph(&g, &Triple::new(1, 0, 0), &ExtractOptions::default()).unwrap();
        for (i, e) in a.nodes.iter().enumerate() {
            let j = b.local(*e).unwrap();
            assert_eq!(a.labels[i], (b.labels[j].1, b.labels[j].0));
        }
    }

    #[test]
    fn gradients_check_out() {
        let (g, t) = triangle();
        let (mut s, p) = setup(2, 3);
        let sg = labeled_subgraph(&g, &t, &opts()).unwrap();
        let report = grad_check(
            &mut s,
            |tape, s| {
                let out = p.forward(tape, s, &sg, t.rel, None)?;
                p.topological_score(tape, s, &out, t.rel)
            },
            GradCheckOptions::default(),
        )
        .unwrap();
        assert!(report.passed(), "{report}");
    }
}
