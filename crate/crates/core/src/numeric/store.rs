use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use super::Tensor;
use crate::error::{Error, Result};

const FORMAT_TAG: &str = "dekg-params/1";

/// Handle to a named parameter slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SlotId(pub(crate) usize);

#[derive(Clone, Debug, PartialEq)]
struct Slot {
    name: String,
    value: Tensor,
    grad: Tensor,
}

/// Named trainable tensors, each with a gradient of the same shape.
///
/// The store carries a version counter that changes whenever a value is
/// mutated; traces recorded against an older version are refused.
#[derive(Clone, Debug, Default)]
pub struct ParameterStore {
    slots: Vec<Slot>,
    names: HashMap<String, SlotId>,
    version: u64,
}

impl PartialEq for ParameterStore {
    fn eq(&self, other: &Self) -> bool {
        self.slots == other.slots
    }
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Tensor) -> Result<SlotId> {
        if name.is_empty() || name.contains(char::is_whitespace) || name.starts_with('@') {
            return Err(Error::Checkpoint(format!("invalid slot name `{name}`")));
        }
        if self.names.contains_key(name) {
            return Err(Error::DuplicateSlot(name.to_owned()));
        }
        let id = SlotId(self.slots.len());
        self.slots.push(Slot {
            name: name.to_owned(),
            grad: Tensor::zeros_like(&value),
            value,
        });
        self.names.insert(name.to_owned(), id);
        self.version += 1;
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Result<SlotId> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSlot(name.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SlotId> {
        (0..self.slots.len()).map(SlotId)
    }

    pub fn name(&self, id: SlotId) -> &str {
        &self.slots[id.0].name
    }

    pub fn value(&self, id: SlotId) -> &Tensor {
        &self.slots[id.0].value
    }

    /// Mutable access to a value. Invalidates outstanding traces.
    pub fn value_mut(&mut self, id: SlotId) -> &mut Tensor {
        self.version += 1;
        &mut self.slots[id.0].value
    }

    pub fn grad(&self, id: SlotId) -> &Tensor {
        &self.slots[id.0].grad
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn zero_grads(&mut self) {
        for s in &mut self.slots {
            s.grad.fill(0.0);
        }
    }

    /// Total number of scalar parameters.
    pub fn n_params(&self) -> usize {
        self.slots.iter().map(|s| s.value.len()).sum()
    }

    /// Adds `grads` into the gradient slots.
    pub fn accumulate(&mut self, grads: &Gradients) -> Result<()> {
        if grads.version != self.version {
            return Err(Error::StaleTrace);
        }
        for (slot, g) in self.slots.iter_mut().zip(&grads.slots) {
            if let Some(g) = g {
                slot.grad.add_assign(g);
            }
        }
        Ok(())
    }

    /// Fills slot `id` with values uniform in `[-bound, bound]`.
    pub fn init_uniform(&mut self, id: SlotId, bound: f64, rng: &mut impl Rng) {
        for v in self.value_mut(id).data_mut() {
            *v = if bound > 0.0 {
                rng.gen_range(-bound..=bound)
            } else {
                0.0
            };
        }
    }

    pub fn fill_all(&mut self, v: f64) {
        self.version += 1;
        for s in &mut self.slots {
            s.value.fill(v);
        }
    }

    pub(crate) fn slot_mut_pair(&mut self, id: SlotId) -> (&mut Tensor, &mut Tensor) {
        self.version += 1;
        let s = &mut self.slots[id.0];
        (&mut s.value, &mut s.grad)
    }

    /// Empty gradient buffer matching this store.
    pub fn gradients(&self) -> Gradients {
        Gradients {
            slots: vec![None; self.slots.len()],
            shapes: self.slots.iter().map(|s| s.value.shape().to_vec()).collect(),
            version: self.version,
        }
    }

    /// Writes a header line (format tag, metadata, `name:shape` per slot)
    /// followed by every value as little-endian `f64` in slot order.
    pub fn save_checkpoint(&self, path: impl AsRef<Path>, meta: &[(String, String)]) -> Result<()> {
        let path = path.as_ref();
        let mut header = String::from(FORMAT_TAG);
        for (k, v) in meta {
            if k.contains(['\t', '\n', '=']) || v.contains(['\t', '\n']) {
                return Err(Error::Checkpoint(format!("metadata `{k}` cannot be encoded")));
            }
            header.push_str(&format!("\t@{k}={v}"));
        }
        for s in &self.slots {
            let dims: Vec<String> = s.value.shape().iter().map(|d| d.to_string()).collect();
            header.push_str(&format!("\t{}:{}", s.name, dims.join("x")));
        }
        header.push('\n');

        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(header.as_bytes()).map_err(|e| Error::io(path, e))?;
        for s in &self.slots {
            for v in s.value.data() {
                w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Inverse of [`save_checkpoint`](Self::save_checkpoint). Values come
    /// back bit-identical; gradients are zero.
    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Self, Vec<(String, String)>)> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut header = String::new();
        r.read_line(&mut header).map_err(|e| Error::io(path, e))?;
        let header = header
            .strip_suffix('\n')
            .ok_or_else(|| Error::Checkpoint("missing header line".into()))?;
        let mut fields = header.split('\t');
        if fields.next() != Some(FORMAT_TAG) {
            return Err(Error::Checkpoint("unrecognised format tag".into()));
        }
        let mut meta = Vec::new();
        let mut specs = Vec::new();
        for f in fields {
            if let Some(kv) = f.strip_prefix('@') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Checkpoint(format!("bad metadata `{f}`")))?;
                meta.push((k.to_owned(), v.to_owned()));
            } else {
                let (name, shape) = f
                    .rsplit_once(':')
                    .ok_or_else(|| Error::Checkpoint(format!("bad slot `{f}`")))?;
                let shape: Vec<usize> = if shape.is_empty() {
                    Vec::new()
                } else {
                    shape
                        .split('x')
                        .map(|d| d.parse().map_err(|_| Error::Checkpoint(format!("bad shape `{shape}`"))))
                        .collect::<Result<_>>()?
                };
                specs.push((name.to_owned(), shape));
            }
        }
        let mut store = ParameterStore::new();
        let mut buf = [0u8; 8];
        for (name, shape) in specs {
            let n: usize = shape.iter().product();
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                r.read_exact(&mut buf)
                    .map_err(|_| Error::Checkpoint(format!("truncated data for `{name}`")))?;
                data.push(f64::from_le_bytes(buf));
            }
            store.add(&name, Tensor::new(shape, data)?)?;
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest).map_err(|e| Error::io(path, e))?;
        if !rest.is_empty() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", rest.len())));
        }
        Ok((store, meta))
    }
}

/// Per-slot gradient buffer, produced by a backward pass and merged into a
/// [`ParameterStore`] with [`ParameterStore::accumulate`].
#[derive(Clone, Debug)]
pub struct Gradients {
    slots: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
    version: u64,
}

impl Gradients {
    pub(crate) fn slot_mut(&mut self, id: SlotId) -> &mut Tensor {
        let shape = &self.shapes[id.0];
        self.slots[id.0].get_or_insert_with(|| {
            let n = shape.iter().product();
            Tensor::new(shape.clone(), vec![0.0; n]).expect("shape product")
        })
    }

    pub fn get(&self, id: SlotId) -> Option<&Tensor> {
        self.slots[id.0].as_ref()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Adds another buffer recorded against the same store version.
    pub fn merge(&mut self, other: &Gradients) -> Result<()> {
        if other.version != self.version || other.slots.len() != self.slots.len() {
            return Err(Error::StaleTrace);
        }
        for (i, g) in other.slots.iter().enumerate() {
            if let Some(g) = g {
                self.slot_mut(SlotId(i)).add_assign(g);
            }
        }
        Ok(())
    }
}
