//! Reverse-mode differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records primitive tensor operations during a forward pass and
//! replays them in reverse to produce exact gradients of a scalar output
//! with respect to any recorded leaf. Tapes are rebuilt per loss evaluation;
//! there is no persistent graph.
//!
//! The primitive set is deliberately small: exactly what an MLP with ReLU
//! hidden layers and the transport-cost estimators need. Everything is
//! stored as a 2-D array; scalars are 1×1.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Axis};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::{Error, Result};

static TAPE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Handle to a tensor recorded on a specific [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorRef {
    tape_id: u64,
    index: usize,
}

enum Op {
    Leaf,
    /// `a · b` (matrix product).
    MatMul(usize, usize),
    /// `a + b` with `b` a 1×k row broadcast over the rows of `a`.
    AddRow(usize, usize),
    Relu(usize),
    Add(usize, usize),
    Sub(usize, usize),
    /// Elementwise square.
    Square(usize),
    /// Multiplication by a constant.
    Scale(usize, f64),
    /// Sum of all entries, 1×1 output.
    Sum(usize),
    /// Mean of all entries, 1×1 output.
    Mean(usize),
    /// Mean over consecutive row groups of the given size: (g·k)×d → g×d.
    GroupMeanRows(usize, usize),
    /// Repeat each row k times: g×d → (g·k)×d.
    RepeatRows(usize, usize),
}

struct Node {
    value: Array2<f64>,
    op: Op,
    needs_grad: bool,
}

/// Recorded forward computation.
pub struct Tape {
    id: u64,
    nodes: Vec<Node>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            id: TAPE_COUNTER.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
        }
    }

    fn push(&mut self, value: Array2<f64>, op: Op, needs_grad: bool) -> TensorRef {
        let index = self.nodes.len();
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        TensorRef {
            tape_id: self.id,
            index,
        }
    }

    fn check(&self, t: TensorRef) -> Result<usize> {
        if t.tape_id != self.id || t.index >= self.nodes.len() {
            return Err(Error::Usage(
                "tensor does not belong to this tape".to_string(),
            ));
        }
        Ok(t.index)
    }

    fn node(&self, t: TensorRef) -> Result<&Node> {
        Ok(&self.nodes[self.check(t)?])
    }

    /// Value of a recorded tensor.
    pub fn value(&self, t: TensorRef) -> &Array2<f64> {
        &self.nodes[t.index].value
    }

    /// Value of a 1×1 tensor as a plain scalar.
    pub fn scalar(&self, t: TensorRef) -> Result<f64> {
        let v = &self.node(t)?.value;
        if v.dim() != (1, 1) {
            return Err(Error::Shape(format!(
                "expected 1x1 scalar, got {}x{}",
                v.nrows(),
                v.ncols()
            )));
        }
        Ok(v[[0, 0]])
    }

    /// Record a differentiable leaf (a parameter tensor).
    pub fn leaf(&mut self, value: Array2<f64>) -> TensorRef {
        self.push(value, Op::Leaf, true)
    }

    /// Record a non-differentiable leaf (input data held constant).
    pub fn constant(&mut self, value: Array2<f64>) -> TensorRef {
        self.push(value, Op::Leaf, false)
    }

    pub fn matmul(&mut self, a: TensorRef, b: TensorRef) -> Result<TensorRef> {
        let (ia, ib) = (self.check(a)?, self.check(b)?);
        let (va, vb) = (&self.nodes[ia].value, &self.nodes[ib].value);
        if va.ncols() != vb.nrows() {
            return Err(Error::Shape(format!(
                "matmul: {}x{} · {}x{}",
                va.nrows(),
                va.ncols(),
                vb.nrows(),
                vb.ncols()
            )));
        }
        let value = va.dot(vb);
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, Op::MatMul(ia, ib), ng))
    }

    /// Broadcast-add a 1×k row to every row of an n×k tensor.
    pub fn add_row(&mut self, a: TensorRef, row: TensorRef) -> Result<TensorRef> {
        let (ia, ib) = (self.check(a)?, self.check(row)?);
        let (va, vb) = (&self.nodes[ia].value, &self.nodes[ib].value);
        if vb.nrows() != 1 || va.ncols() != vb.ncols() {
            return Err(Error::Shape(format!(
                "add_row: {}x{} + {}x{}",
                va.nrows(),
                va.ncols(),
                vb.nrows(),
                vb.ncols()
            )));
        }
        let value = va + vb;
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, Op::AddRow(ia, ib), ng))
    }

    /// ReLU with the subgradient at 0 fixed to 0.
    pub fn relu(&mut self, a: TensorRef) -> Result<TensorRef> {
        let ia = self.check(a)?;
        let value = self.nodes[ia].value.mapv(|x| x.max(0.0));
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, Op::Relu(ia), ng))
    }

    pub fn add(&mut self, a: TensorRef, b: TensorRef) -> Result<TensorRef> {
        let (ia, ib) = (self.check(a)?, self.check(b)?);
        self.same_shape(ia, ib, "add")?;
        let value = &self.nodes[ia].value + &self.nodes[ib].value;
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, Op::Add(ia, ib), ng))
    }

    pub fn sub(&mut self, a: TensorRef, b: TensorRef) -> Result<TensorRef> {
        let (ia, ib) = (self.check(a)?, self.check(b)?);
        self.same_shape(ia, ib, "sub")?;
        let value = &self.nodes[ia].value - &self.nodes[ib].value;
        let ng = self.nodes[ia].needs_grad || self.nodes[ib].needs_grad;
        Ok(self.push(value, Op::Sub(ia, ib), ng))
    }

    pub fn square(&mut self, a: TensorRef) -> Result<TensorRef> {
        let ia = self.check(a)?;
        let value = self.nodes[ia].value.mapv(|x| x * x);
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, Op::Square(ia), ng))
    }

    pub fn scale(&mut self, a: TensorRef, c: f64) -> Result<TensorRef> {
        let ia = self.check(a)?;
        let value = self.nodes[ia].value.mapv(|x| c * x);
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(value, Op::Scale(ia, c), ng))
    }

    pub fn sum(&mut self, a: TensorRef) -> Result<TensorRef> {
        let ia = self.check(a)?;
        let s = self.nodes[ia].value.sum();
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(Array2::from_elem((1, 1), s), Op::Sum(ia), ng))
    }

    pub fn mean(&mut self, a: TensorRef) -> Result<TensorRef> {
        let ia = self.check(a)?;
        let v = &self.nodes[ia].value;
        if v.is_empty() {
            return Err(Error::Shape("mean of empty tensor".to_string()));
        }
        let m = v.sum() / v.len() as f64;
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(Array2::from_elem((1, 1), m), Op::Mean(ia), ng))
    }

    /// Mean over consecutive groups of `group` rows.
    pub fn group_mean_rows(&mut self, a: TensorRef, group: usize) -> Result<TensorRef> {
        let ia = self.check(a)?;
        let v = &self.nodes[ia].value;
        if group == 0 || v.nrows() % group != 0 {
            return Err(Error::Shape(format!(
                "group_mean_rows: {} rows not divisible into groups of {}",
                v.nrows(),
                group
            )));
        }
        let g = v.nrows() / group;
        let mut out = Array2::zeros((g, v.ncols()));
        for r in 0..g {
            let block = v.slice(ndarray::s![r * group..(r + 1) * group, ..]);
            out.row_mut(r)
                .assign(&(block.sum_axis(Axis(0)) / group as f64));
        }
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(out, Op::GroupMeanRows(ia, group), ng))
    }

    /// Repeat every row `k` times.
    pub fn repeat_rows(&mut self, a: TensorRef, k: usize) -> Result<TensorRef> {
        let ia = self.check(a)?;
        if k == 0 {
            return Err(Error::Shape("repeat_rows: k must be >= 1".to_string()));
        }
        let v = &self.nodes[ia].value;
        let mut out = Array2::zeros((v.nrows() * k, v.ncols()));
        for r in 0..v.nrows() {
            for j in 0..k {
                out.row_mut(r * k + j).assign(&v.row(r));
            }
        }
        let ng = self.nodes[ia].needs_grad;
        Ok(self.push(out, Op::RepeatRows(ia, k), ng))
    }

    fn same_shape(&self, ia: usize, ib: usize, what: &str) -> Result<()> {
        let (va, vb) = (&self.nodes[ia].value, &self.nodes[ib].value);
        if va.dim() != vb.dim() {
            return Err(Error::Shape(format!(
                "{what}: {}x{} vs {}x{}",
                va.nrows(),
                va.ncols(),
                vb.nrows(),
                vb.ncols()
            )));
        }
        Ok(())
    }

    /// Gradients of a 1×1 scalar with respect to every recorded tensor.
    ///
    /// Leaves recorded with [`Tape::constant`] and tensors the loss never
    /// touched get no stored gradient; [`Gradients::get`] reports them as
    /// zero.
    pub fn backward(&self, loss: TensorRef) -> Result<Gradients> {
        let il = self.check(loss)?;
        if self.nodes[il].value.dim() != (1, 1) {
            return Err(Error::Usage(format!(
                "backward needs a 1x1 scalar loss, got {}x{}",
                self.nodes[il].value.nrows(),
                self.nodes[il].value.ncols()
            )));
        }
        let mut grads: Vec<Option<Array2<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[il] = Some(Array2::from_elem((1, 1), 1.0));

        for i in (0..=il).rev() {
            if !self.nodes[i].needs_grad {
                grads[i] = None;
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            match self.nodes[i].op {
                Op::Leaf => {
                    grads[i] = Some(g);
                }
                Op::MatMul(a, b) => {
                    if self.nodes[a].needs_grad {
                        let da = grads[a].get_or_insert_with(|| {
                            Array2::zeros(self.nodes[a].value.raw_dim())
                        });
                        general_mat_mul(1.0, &g, &self.nodes[b].value.t(), 1.0, da);
                    }
                    if self.nodes[b].needs_grad {
                        let db = grads[b].get_or_insert_with(|| {
                            Array2::zeros(self.nodes[b].value.raw_dim())
                        });
                        general_mat_mul(1.0, &self.nodes[a].value.t(), &g, 1.0, db);
                    }
                }
                Op::AddRow(a, b) => {
                    if self.nodes[a].needs_grad {
                        accumulate(&mut grads[a], &g);
                    }
                    if self.nodes[b].needs_grad {
                        let colsum = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                        accumulate(&mut grads[b], &colsum);
                    }
                }
                Op::Relu(a) => {
                    let mut masked = g;
                    masked.zip_mut_with(&self.nodes[a].value, |gv, &x| {
                        if x <= 0.0 {
                            *gv = 0.0;
                        }
                    });
                    accumulate(&mut grads[a], &masked);
                }
                Op::Add(a, b) => {
                    if self.nodes[a].needs_grad {
                        accumulate(&mut grads[a], &g);
                    }
                    if self.nodes[b].needs_grad {
                        accumulate(&mut grads[b], &g);
                    }
                }
                Op::Sub(a, b) => {
                    if self.nodes[a].needs_grad {
                        accumulate(&mut grads[a], &g);
                    }
                    if self.nodes[b].needs_grad {
                        let neg = g.mapv(|x| -x);
                        accumulate(&mut grads[b], &neg);
                    }
                }
                Op::Square(a) => {
                    let mut dg = g;
                    dg.zip_mut_with(&self.nodes[a].value, |gv, &x| *gv *= 2.0 * x);
                    accumulate(&mut grads[a], &dg);
                }
                Op::Scale(a, c) => {
                    let dg = g.mapv(|x| c * x);
                    accumulate(&mut grads[a], &dg);
                }
                Op::Sum(a) => {
                    let s = g[[0, 0]];
                    let da = grads[a]
                        .get_or_insert_with(|| Array2::zeros(self.nodes[a].value.raw_dim()));
                    da.mapv_inplace(|x| x + s);
                }
                Op::Mean(a) => {
                    let s = g[[0, 0]] / self.nodes[a].value.len() as f64;
                    let da = grads[a]
                        .get_or_insert_with(|| Array2::zeros(self.nodes[a].value.raw_dim()));
                    da.mapv_inplace(|x| x + s);
                }
                Op::GroupMeanRows(a, group) => {
                    let da = grads[a]
                        .get_or_insert_with(|| Array2::zeros(self.nodes[a].value.raw_dim()));
                    let inv = 1.0 / group as f64;
                    for r in 0..g.nrows() {
                        let grow = g.row(r);
                        for j in 0..group {
                            let mut target = da.row_mut(r * group + j);
                            target.zip_mut_with(&grow, |t, &s| *t += s * inv);
                        }
                    }
                }
                Op::RepeatRows(a, k) => {
                    let da = grads[a]
                        .get_or_insert_with(|| Array2::zeros(self.nodes[a].value.raw_dim()));
                    for r in 0..da.nrows() {
                        for j in 0..k {
                            let grow = g.row(r * k + j);
                            let mut target = da.row_mut(r);
                            target.zip_mut_with(&grow, |t, &s| *t += s);
                        }
                    }
                }
            }
        }

        Ok(Gradients {
            tape_id: self.id,
            shapes: self.nodes.iter().map(|n| n.value.raw_dim()).collect(),
            grads,
        })
    }
}

fn accumulate(slot: &mut Option<Array2<f64>>, g: &Array2<f64>) {
    match slot {
        Some(acc) => *acc += g,
        None => *slot = Some(g.clone()),
    }
}

/// Result of a backward pass; gradients keyed by tensor handle.
pub struct Gradients {
    tape_id: u64,
    shapes: Vec<ndarray::Ix2>,
    grads: Vec<Option<Array2<f64>>>,
}

impl Gradients {
    /// Gradient with respect to `t`; zero for tensors the loss never touched.
    pub fn get(&self, t: TensorRef) -> Result<Array2<f64>> {
        if t.tape_id != self.tape_id || t.index >= self.grads.len() {
            return Err(Error::Usage(
                "tensor does not belong to the differentiated tape".to_string(),
            ));
        }
        Ok(match &self.grads[t.index] {
            Some(g) => g.clone(),
            None => Array2::zeros(self.shapes[t.index]),
        })
    }

    /// Borrowed gradient, `None` for untouched tensors.
    pub fn get_ref(&self, t: TensorRef) -> Option<&Array2<f64>> {
        if t.tape_id != self.tape_id {
            return None;
        }
        self.grads.get(t.index).and_then(|g| g.as_ref())
    }
}
