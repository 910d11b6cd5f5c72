//! Tape-based reverse-mode differentiation over [`Tensor`]s.
//!
//! Operations are appended to a [`Tape`] as they are evaluated. Inputs of a
//! node always precede it, so walking the tape backwards visits every node
//! once, after all of its consumers. Parameter leaves remember the slot they
//! were read from and the store version at recording time; a backward pass
//! against a store that changed in between fails with
//! [`Error::StaleTrace`].
//!
//! ReLU and square root use a zero subgradient at 0.

use super::tensor::{dot, gemm_acc, gemm_nt_acc, gemm_tn_acc};
use super::{Gradients, ParameterStore, SlotId, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

/// One directed message in [`Tape::message_pass`]: row `src` of the input
/// is transformed by relation block `rel` and delivered to row `dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MessageEdge {
    pub src: usize,
    pub dst: usize,
    pub rel: usize,
}

#[derive(Debug)]
struct MessageOp {
    h: Var,
    weights: Var,
    alpha: Var,
    edges: Vec<MessageEdge>,
    inv_deg: Vec<f64>,
    d_in: usize,
    d_out: usize,
    // src row times relation block, per edge (|edges| x d_out)
    transformed: Vec<f64>,
}

#[derive(Debug)]
enum Op {
    Constant,
    Param(SlotId),
    ParamRows(SlotId, Vec<usize>),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    MatMul(Var, Var),
    Transpose(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    Rows(Var, Vec<usize>),
    MeanRows(Var),
    Sum(Var),
    Relu(Var),
    Sigmoid(Var),
    Sqrt(Var),
    Message(Box<MessageOp>),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

/// Recorded forward computation.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    version: Option<u64>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Value of a 1x1 node.
    pub fn scalar(&self, v: Var) -> Result<f64> {
        self.value(v).item()
    }

    fn push(&mut self, value: Tensor, op: Op, name: &'static str) -> Result<Var> {
        if !value.all_finite() {
            return Err(Error::NonFinite(name.to_owned()));
        }
        self.nodes.push(Node { value, op });
        Ok(Var(self.nodes.len() - 1))
    }

    fn dims(&self, v: Var) -> (usize, usize) {
        let t = &self.nodes[v.0].value;
        (t.rows(), t.cols())
    }

    fn bind(&mut self, store: &ParameterStore) -> Result<()> {
        match self.version {
            None => {
                self.version = Some(store.version());
                Ok(())
            }
            Some(v) if v == store.version() => Ok(()),
            Some(_) => Err(Error::StaleTrace),
        }
    }

    pub fn constant(&mut self, t: Tensor) -> Result<Var> {
        self.push(t, Op::Constant, "constant")
    }

    /// Reads a whole parameter slot.
    pub fn param(&mut self, store: &ParameterStore, id: SlotId) -> Result<Var> {
        self.bind(store)?;
        let v = store.value(id);
        let t = Tensor::matrix(v.rows(), v.cols(), v.data().to_vec())?;
        self.push(t, Op::Param(id), "param")
    }

    /// Reads selected rows of a parameter slot (rows may repeat).
    pub fn param_rows(&mut self, store: &ParameterStore, id: SlotId, rows: &[usize]) -> Result<Var> {
        self.bind(store)?;
        let src = store.value(id);
        let (r, c) = (src.rows(), src.cols());
        let mut data = Vec::with_capacity(rows.len() * c);
        for &i in rows {
            if i >= r {
                return Err(Error::shape("param_rows", format!("row {i} of {r}")));
            }
            data.extend_from_slice(src.row_slice(i));
        }
        let t = Tensor::matrix(rows.len(), c, data)?;
        self.push(t, Op::ParamRows(id, rows.to_vec()), "param_rows")
    }

    fn binary_same(&self, op: &'static str, a: Var, b: Var) -> Result<(usize, usize)> {
        let (da, db) = (self.dims(a), self.dims(b));
        if da != db {
            return Err(Error::shape(op, format!("{da:?} vs {db:?}")));
        }
        Ok(da)
    }

    fn zip_with(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| f(*x, *y))
            .collect()
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (r, c) = self.binary_same("add", a, b)?;
        let t = Tensor::matrix(r, c, self.zip_with(a, b, |x, y| x + y))?;
        self.push(t, Op::Add(a, b), "add")
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (r, c) = self.binary_same("sub", a, b)?;
        let t = Tensor::matrix(r, c, self.zip_with(a, b, |x, y| x - y))?;
        self.push(t, Op::Sub(a, b), "sub")
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (r, c) = self.binary_same("mul", a, b)?;
        let t = Tensor::matrix(r, c, self.zip_with(a, b, |x, y| x * y))?;
        self.push(t, Op::Mul(a, b), "mul")
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Result<Var> {
        let (r, c) = self.dims(a);
        let data = self.value(a).data().iter().map(|x| x * k).collect();
        self.push(Tensor::matrix(r, c, data)?, Op::Scale(a, k), "scale")
    }

    /// `a + k` elementwise, recorded as `a + constant`.
    pub fn add_scalar(&mut self, a: Var, k: f64) -> Result<Var> {
        let (r, c) = self.dims(a);
        let kc = self.constant(Tensor::filled(r, c, k))?;
        self.add(a, kc)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let ((m, k), (k2, n)) = (self.dims(a), self.dims(b));
        if k != k2 {
            return Err(Error::shape("matmul", format!("{m}x{k} * {k2}x{n}")));
        }
        let mut out = vec![0.0; m * n];
        gemm_acc(self.value(a).data(), self.value(b).data(), &mut out, m, k, n);
        self.push(Tensor::matrix(m, n, out)?, Op::MatMul(a, b), "matmul")
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let t = self.value(a).transpose();
        self.push(t, Op::Transpose(a), "transpose")
    }

    /// Side-by-side concatenation; all parts need the same row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts.first().ok_or_else(|| Error::shape("concat_cols", "no inputs"))?;
        let rows = self.dims(*first).0;
        let mut cols = 0;
        for &p in parts {
            let (r, c) = self.dims(p);
            if r != rows {
                return Err(Error::shape("concat_cols", format!("{r} rows vs {rows}")));
            }
            cols += c;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row_slice(i));
            }
        }
        self.push(
            Tensor::matrix(rows, cols, data)?,
            Op::ConcatCols(parts.to_vec()),
            "concat_cols",
        )
    }

    /// Stacked concatenation; all parts need the same column count.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts.first().ok_or_else(|| Error::shape("concat_rows", "no inputs"))?;
        let cols = self.dims(*first).1;
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let (r, c) = self.dims(p);
            if c != cols {
                return Err(Error::shape("concat_rows", format!("{c} cols vs {cols}")));
            }
            rows += r;
            data.extend_from_slice(self.value(p).data());
        }
        self.push(
            Tensor::matrix(rows, cols, data)?,
            Op::ConcatRows(parts.to_vec()),
            "concat_rows",
        )
    }

    /// Selected rows of a recorded value.
    pub fn rows(&mut self, a: Var, rows: &[usize]) -> Result<Var> {
        let (r, c) = self.dims(a);
        let mut data = Vec::with_capacity(rows.len() * c);
        for &i in rows {
            if i >= r {
                return Err(Error::shape("rows", format!("row {i} of {r}")));
            }
            data.extend_from_slice(self.value(a).row_slice(i));
        }
        self.push(Tensor::matrix(rows.len(), c, data)?, Op::Rows(a, rows.to_vec()), "rows")
    }

    /// Column-wise mean over rows: `r x c -> 1 x c`.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.dims(a);
        if r == 0 {
            return Err(Error::shape("mean_rows", "zero rows"));
        }
        let mut out = vec![0.0; c];
        for i in 0..r {
            for (o, v) in out.iter_mut().zip(self.value(a).row_slice(i)) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= r as f64);
        self.push(Tensor::matrix(1, c, out)?, Op::MeanRows(a), "mean_rows")
    }

    /// Sum of all entries, as 1x1.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a), "sum")
    }

    /// Arithmetic mean of all entries, as 1x1.
    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let n = self.value(a).len();
        if n == 0 {
            return Err(Error::shape("mean", "empty input"));
        }
        let s = self.sum(a)?;
        self.scale(s, 1.0 / n as f64)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.dims(a);
        let data = self
            .value(a)
            .data()
            .iter()
            .map(|&x| if x > 0.0 { x } else { 0.0 })
            .collect();
        self.push(Tensor::matrix(r, c, data)?, Op::Relu(a), "relu")
    }

    /// `[x]_+`; the same primitive as [`relu`](Self::relu).
    pub fn hinge(&mut self, a: Var) -> Result<Var> {
        self.relu(a)
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.dims(a);
        let data = self.value(a).data().iter().map(|&x| logistic(x)).collect();
        self.push(Tensor::matrix(r, c, data)?, Op::Sigmoid(a), "sigmoid")
    }

    pub fn sqrt(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.dims(a);
        if self.value(a).data().iter().any(|&x| x < 0.0) {
            return Err(Error::NonFinite("sqrt of a negative value".into()));
        }
        let data = self.value(a).data().iter().map(|x| x.sqrt()).collect();
        self.push(Tensor::matrix(r, c, data)?, Op::Sqrt(a), "sqrt")
    }

    /// Euclidean distance between two equally shaped values, as 1x1.
    pub fn euclidean(&mut self, a: Var, b: Var) -> Result<Var> {
        let d = self.sub(a, b)?;
        let sq = self.mul(d, d)?;
        let s = self.sum(sq)?;
        self.sqrt(s)
    }

    /// Relation-specific message passing with per-relation gates.
    ///
    /// `h` is `N x d_in`, `weights` stacks one `d_in x d_out` block per
    /// relation (`R*d_in x d_out`), `alpha` is `R x 1`. Row `v` of the
    /// result is the mean over messages `e` with `e.dst == v` of
    /// `alpha[e.rel] * h[e.src] * W[e.rel]`; rows with no message are zero.
    pub fn message_pass(&mut self, h: Var, weights: Var, alpha: Var, edges: &[MessageEdge]) -> Result<Var> {
        let (n, d_in) = self.dims(h);
        let (wr, d_out) = self.dims(weights);
        let (n_rel, ac) = self.dims(alpha);
        if ac != 1 || wr != n_rel * d_in {
            return Err(Error::shape(
                "message_pass",
                format!("weights {wr}x{d_out}, alpha {n_rel}x{ac}, d_in {d_in}"),
            ));
        }
        let mut deg = vec![0usize; n];
        for e in edges {
            if e.src >= n || e.dst >= n || e.rel >= n_rel {
                return Err(Error::shape("message_pass", format!("edge {e:?} out of range")));
            }
            deg[e.dst] += 1;
        }
        let inv_deg: Vec<f64> = deg.iter().map(|&d| if d > 0 { 1.0 / d as f64 } else { 0.0 }).collect();
        let hv = self.value(h).data();
        let wv = self.value(weights).data();
        let av = self.value(alpha).data();
        let mut transformed = vec![0.0; edges.len() * d_out];
        let mut out = vec![0.0; n * d_out];
        for (k, e) in edges.iter().enumerate() {
            let block = &wv[e.rel * d_in * d_out..(e.rel + 1) * d_in * d_out];
            let msg = &mut transformed[k * d_out..(k + 1) * d_out];
            gemm_acc(&hv[e.src * d_in..(e.src + 1) * d_in], block, msg, 1, d_in, d_out);
            let w = av[e.rel] * inv_deg[e.dst];
            for (o, m) in out[e.dst * d_out..(e.dst + 1) * d_out].iter_mut().zip(msg.iter()) {
                *o += w * m;
            }
        }
        let op = MessageOp {
            h,
            weights,
            alpha,
            edges: edges.to_vec(),
            inv_deg,
            d_in,
            d_out,
            transformed,
        };
        self.push(
            Tensor::matrix(n, d_out, out)?,
            Op::Message(Box::new(op)),
            "message_pass",
        )
    }

    /// Sign pattern of every ReLU and square-root input. Two evaluations
    /// with equal signatures lie on the same smooth piece.
    pub fn kink_signature(&self) -> Vec<bool> {
        let mut sig = Vec::new();
        for node in &self.nodes {
            if let Op::Relu(a) | Op::Sqrt(a) = node.op {
                sig.extend(self.value(a).data().iter().map(|&x| x > 0.0));
            }
        }
        sig
    }

    /// Propagates `seed` (shaped like `out`) back to every parameter leaf.
    pub fn backward(&self, out: Var, seed: &Tensor, store: &ParameterStore) -> Result<Gradients> {
        let mut grads = store.gradients();
        if let Some(v) = self.version {
            if v != store.version() {
                return Err(Error::StaleTrace);
            }
        }
        if !seed.same_dims(self.value(out)) {
            return Err(Error::shape(
                "backward",
                format!("seed {:?} vs output {:?}", seed.shape(), self.value(out).shape()),
            ));
        }
        let mut adj: Vec<Option<Tensor>> = Vec::with_capacity(out.0 + 1);
        adj.resize_with(out.0 + 1, || None);
        adj[out.0] = Some(Tensor::matrix(seed.rows(), seed.cols(), seed.data().to_vec())?);

        for i in (0..=out.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => grads.slot_mut(*id).add_assign(&g),
                Op::ParamRows(id, rows) => {
                    let slot = grads.slot_mut(*id);
                    for (k, &r) in rows.iter().enumerate() {
                        for (d, s) in slot.row_slice_mut(r).iter_mut().zip(g.row_slice(k)) {
                            *d += s;
                        }
                    }
                }
                Op::Add(a, b) => {
                    acc(&mut adj, *a, &g);
                    acc(&mut adj, *b, &g);
                }
                Op::Sub(a, b) => {
                    acc(&mut adj, *a, &g);
                    let neg = map(&g, |x| -x);
                    acc(&mut adj, *b, &neg);
                }
                Op::Mul(a, b) => {
                    let ga = zip(&g, self.value(*b), |x, y| x * y);
                    let gb = zip(&g, self.value(*a), |x, y| x * y);
                    acc(&mut adj, *a, &ga);
                    acc(&mut adj, *b, &gb);
                }
                Op::Scale(a, k) => {
                    let k = *k;
                    acc(&mut adj, *a, &map(&g, |x| x * k));
                }
                Op::MatMul(a, b) => {
                    let ((m, k), (_, n)) = (self.dims(*a), self.dims(*b));
                    let mut ga = vec![0.0; m * k];
                    gemm_nt_acc(g.data(), self.value(*b).data(), &mut ga, m, n, k);
                    let mut gb = vec![0.0; k * n];
                    gemm_tn_acc(self.value(*a).data(), g.data(), &mut gb, m, k, n);
                    acc(&mut adj, *a, &Tensor::matrix(m, k, ga)?);
                    acc(&mut adj, *b, &Tensor::matrix(k, n, gb)?);
                }
                Op::Transpose(a) => acc(&mut adj, *a, &g.transpose()),
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let (r, c) = self.dims(p);
                        let mut part = Vec::with_capacity(r * c);
                        for row in 0..r {
                            part.extend_from_slice(&g.row_slice(row)[offset..offset + c]);
                        }
                        acc(&mut adj, p, &Tensor::matrix(r, c, part)?);
                        offset += c;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let (r, c) = self.dims(p);
                        let part = g.data()[offset * c..(offset + r) * c].to_vec();
                        acc(&mut adj, p, &Tensor::matrix(r, c, part)?);
                        offset += r;
                    }
                }
                Op::Rows(a, rows) => {
                    let (r, c) = self.dims(*a);
                    let mut ga = Tensor::zeros(r, c);
                    for (k, &src) in rows.iter().enumerate() {
                        for (d, s) in ga.row_slice_mut(src).iter_mut().zip(g.row_slice(k)) {
                            *d += s;
                        }
                    }
                    acc(&mut adj, *a, &ga);
                }
                Op::MeanRows(a) => {
                    let (r, c) = self.dims(*a);
                    let mut ga = Vec::with_capacity(r * c);
                    for _ in 0..r {
                        ga.extend(g.data().iter().map(|x| x / r as f64));
                    }
                    acc(&mut adj, *a, &Tensor::matrix(r, c, ga)?);
                }
                Op::Sum(a) => {
                    let (r, c) = self.dims(*a);
                    acc(&mut adj, *a, &Tensor::filled(r, c, g.data()[0]));
                }
                Op::Relu(a) => {
                    let ga = zip(&g, self.value(*a), |x, y| if y > 0.0 { x } else { 0.0 });
                    acc(&mut adj, *a, &ga);
                }
                Op::Sigmoid(a) => {
                    let ga = zip(&g, &node.value, |x, s| x * s * (1.0 - s));
                    acc(&mut adj, *a, &ga);
                }
                Op::Sqrt(a) => {
                    let ga = zip(&g, &node.value, |x, s| if s > 0.0 { x * 0.5 / s } else { 0.0 });
                    acc(&mut adj, *a, &ga);
                }
                Op::Message(m) => self.message_backward(m, &g, &mut adj)?,
            }
        }
        Ok(grads)
    }

    fn message_backward(&self, m: &MessageOp, g: &Tensor, adj: &mut [Option<Tensor>]) -> Result<()> {
        let (d_in, d_out) = (m.d_in, m.d_out);
        let hv = self.value(m.h);
        let wv = self.value(m.weights).data();
        let av = self.value(m.alpha).data();
        let mut gh = Tensor::zeros(hv.rows(), d_in);
        let mut gw = Tensor::zeros(self.value(m.weights).rows(), d_out);
        let mut ga = Tensor::zeros(av.len(), 1);
        let mut scaled = vec![0.0; d_out];
        for (k, e) in m.edges.iter().enumerate() {
            let gdst = g.row_slice(e.dst);
            let c = m.inv_deg[e.dst];
            ga.data_mut()[e.rel] += c * dot(&m.transformed[k * d_out..(k + 1) * d_out], gdst);
            let w = c * av[e.rel];
            if w == 0.0 {
                continue;
            }
            for (s, x) in scaled.iter_mut().zip(gdst) {
                *s = w * x;
            }
            let block = e.rel * d_in * d_out..(e.rel + 1) * d_in * d_out;
            // dW_rel += h_src^T * scaled
            gemm_tn_acc(
                hv.row_slice(e.src),
                &scaled,
                &mut gw.data_mut()[block.clone()],
                1,
                d_in,
                d_out,
            );
            // dh_src += scaled * W_rel^T
            gemm_nt_acc(&scaled, &wv[block], gh.row_slice_mut(e.src), 1, d_out, d_in);
        }
        acc(adj, m.h, &gh);
        acc(adj, m.weights, &gw);
        acc(adj, m.alpha, &ga);
        Ok(())
    }

    /// Backward pass whose result is added straight into `store`.
    pub fn backward_into(&self, out: Var, seed: &Tensor, store: &mut ParameterStore) -> Result<()> {
        let g = self.backward(out, seed, store)?;
        store.accumulate(&g)
    }
}

fn acc(adj: &mut [Option<Tensor>], v: Var, g: &Tensor) {
    match &mut adj[v.0] {
        Some(t) => t.add_assign(g),
        slot @ None => *slot = Some(g.clone()),
    }
}

fn map(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor::matrix(t.rows(), t.cols(), t.data().iter().map(|&x| f(x)).collect()).expect("same shape")
}

fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::matrix(a.rows(), a.cols(), data).expect("same shape")
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
