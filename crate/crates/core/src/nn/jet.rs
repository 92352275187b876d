//! Forward jets and reverse accumulation through them.
//!
//! A batch of `n` points is pushed through the network as one matrix per
//! layer, `width × (C·n)`, whose column blocks are the value channel, `d`
//! gradient channels and (optionally) the Laplacian channel:
//!
//! ```text
//! [ v(x_1..x_n) | ∂_1 v(..) | ... | ∂_d v(..) | Δv(..) ]
//! ```
//!
//! An affine layer acts on all channels with one matrix product (the bias
//! only touches the value block). An activation maps
//!
//! ```text
//! v  ↦ σ(v)
//! g_k ↦ σ′(v) g_k
//! ℓ  ↦ σ′(v) ℓ + σ″(v) Σ_k g_k²
//! ```
//!
//! Parameter gradients run the same program backwards. Points are processed
//! in fixed-size chunks whose partial sums are reduced in chunk order, so
//! results do not depend on the number of worker threads.

use rayon::prelude::*;

use super::spec::Op;
use super::Network;
use crate::{Error, Result};

pub(crate) const CHUNK: usize = 128;

/// Which derivative channels to carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetOrder {
    Value,
    Gradient,
    Laplacian,
}

impl JetOrder {
    pub fn channels(self, dim: usize) -> usize {
        match self {
            JetOrder::Value => 1,
            JetOrder::Gradient => 1 + dim,
            JetOrder::Laplacian => 2 + dim,
        }
    }

    fn has_grad(self) -> bool {
        self >= JetOrder::Gradient
    }

    fn has_laplacian(self) -> bool {
        self == JetOrder::Laplacian
    }
}

/// Value, spatial gradient and Laplacian of a scalar field at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub laplacian: f64,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            laplacian: 0.0,
        }
    }
}

/// Jets of one field at a batch of points. Channels above `order` are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct JetBatch {
    pub dim: usize,
    pub order: JetOrder,
    pub value: Vec<f64>,
    /// Row-major `n × dim`.
    pub grad: Vec<f64>,
    pub laplacian: Vec<f64>,
}

impl JetBatch {
    pub fn zeros(n: usize, dim: usize, order: JetOrder) -> Self {
        JetBatch {
            dim,
            order,
            value: vec![0.0; n],
            grad: vec![0.0; n * dim],
            laplacian: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn grad(&self, i: usize) -> &[f64] {
        &self.grad[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> PointJet<'_> {
        PointJet {
            value: self.value[i],
            grad: self.grad(i),
            laplacian: self.laplacian[i],
        }
    }

    pub fn get(&self, i: usize) -> Jet2 {
        Jet2 {
            value: self.value[i],
            grad: self.grad(i).to_vec(),
            laplacian: self.laplacian[i],
        }
    }
}

/// Borrowed jet handed to a [`PointLoss`].
#[derive(Clone, Copy, Debug)]
pub struct PointJet<'a> {
    pub value: f64,
    pub grad: &'a [f64],
    pub laplacian: f64,
}

/// Sensitivities `∂ℓ/∂(value, grad, laplacian)` written by a [`PointLoss`].
#[derive(Clone, Debug)]
pub struct JetSeed {
    pub value: f64,
    pub grad: Vec<f64>,
    pub laplacian: f64,
}

impl JetSeed {
    pub fn new(dim: usize) -> Self {
        JetSeed {
            value: 0.0,
            grad: vec![0.0; dim],
            laplacian: 0.0,
        }
    }

    fn clear(&mut self) {
        self.value = 0.0;
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        self.laplacian = 0.0;
    }
}

/// A loss that is a sum of per-point terms `ℓ_i(jet(x_i))`.
pub trait PointLoss: Sync {
    /// Highest channel the loss reads.
    fn order(&self) -> JetOrder;

    /// Returns `ℓ_i` and fills its sensitivities. `seed` arrives zeroed.
    fn point(&self, index: usize, jet: PointJet<'_>, seed: &mut JetSeed) -> f64;
}

/// Anything that can be evaluated with jets on a batch: networks and
/// closed-form fields alike.
pub trait JetField: Sync {
    fn input_dim(&self) -> usize;

    fn field_jets(&self, points: &[f64], order: JetOrder) -> Result<JetBatch>;
}

impl JetField for Network {
    fn input_dim(&self) -> usize {
        Network::input_dim(self)
    }

    fn field_jets(&self, points: &[f64], order: JetOrder) -> Result<JetBatch> {
        self.eval_jets(points, order)
    }
}

/// A closed-form field given by a function returning full jets.
pub struct FnField<F> {
    pub dim: usize,
    pub jet: F,
}

impl<F: Fn(&[f64]) -> Jet2 + Sync> JetField for FnField<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn field_jets(&self, points: &[f64], order: JetOrder) -> Result<JetBatch> {
        if points.len() % self.dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: points.len() % self.dim,
            });
        }
        let n = points.len() / self.dim;
        let mut out = JetBatch::zeros(n, self.dim, order);
        for (i, x) in points.chunks(self.dim).enumerate() {
            let j = (self.jet)(x);
            out.value[i] = j.value;
            if order >= JetOrder::Gradient {
                out.grad[i * self.dim..(i + 1) * self.dim].copy_from_slice(&j.grad);
            }
            if order == JetOrder::Laplacian {
                out.laplacian[i] = j.laplacian;
            }
        }
        Ok(out)
    }
}

impl Network {
    /// Jets of the network at `n` points stored row-major in `points`.
    pub fn eval_jets(&self, points: &[f64], order: JetOrder) -> Result<JetBatch> {
        let dim = self.spec().input_dim;
        if points.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: points.len() % dim,
            });
        }
        let n = points.len() / dim;
        let chunks: Vec<JetBatch> = points
            .par_chunks(CHUNK * dim)
            .map(|chunk| {
                let m = chunk.len() / dim;
                let out = forward(self, chunk, m, order, None);
                unpack_jets(&out, m, dim, order)
            })
            .collect();
        let mut batch = JetBatch {
            dim,
            order,
            value: Vec::with_capacity(n),
            grad: Vec::with_capacity(n * dim),
            laplacian: Vec::with_capacity(n),
        };
        for c in chunks {
            batch.value.extend(c.value);
            batch.grad.extend(c.grad);
            batch.laplacian.extend(c.laplacian);
        }
        Ok(batch)
    }

    /// `Σ_i ℓ_i` and its gradient with respect to every parameter.
    ///
    /// Frozen entries of the gradient are exactly zero. Backpropagation stops
    /// at the first layer that owns a trainable parameter.
    pub fn param_gradient<L: PointLoss>(&self, points: &[f64], loss: &L) -> Result<(f64, Vec<f64>)> {
        let dim = self.spec().input_dim;
        if points.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: points.len() % dim,
            });
        }
        let partials: Vec<Result<(f64, Vec<f64>)>> = points
            .par_chunks(CHUNK * dim)
            .enumerate()
            .map(|(c, chunk)| chunk_gradient(self, chunk, c * CHUNK, loss))
            .collect();
        let mut total = 0.0;
        let mut grad = vec![0.0; self.param_count()];
        for part in partials {
            let (value, g) = part?;
            total += value;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        for (g, &frozen) in grad.iter_mut().zip(self.freeze_mask()) {
            if frozen {
                *g = 0.0;
            }
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::numerical(format!("parameter gradient entry {i}")));
        }
        Ok((total, grad))
    }
}

fn unpack_jets(out: &[f64], n: usize, dim: usize, order: JetOrder) -> JetBatch {
    let mut batch = JetBatch::zeros(n, dim, order);
    batch.value.copy_from_slice(&out[..n]);
    if order.has_grad() {
        for k in 0..dim {
            let block = &out[(1 + k) * n..(2 + k) * n];
            for (p, &g) in block.iter().enumerate() {
                batch.grad[p * dim + k] = g;
            }
        }
    }
    if order.has_laplacian() {
        batch.laplacian.copy_from_slice(&out[(1 + dim) * n..(2 + dim) * n]);
    }
    batch
}

fn chunk_gradient<L: PointLoss>(
    net: &Network,
    points: &[f64],
    offset: usize,
    loss: &L,
) -> Result<(f64, Vec<f64>)> {
    let dim = net.spec().input_dim;
    let n = points.len() / dim;
    let order = loss.order();
    let channels = order.channels(dim);
    let cols = channels * n;

    let mut tape = Vec::new();
    let out = forward(net, points, n, order, Some(&mut tape));

    let mut seed_matrix = vec![0.0; cols];
    let mut seed = JetSeed::new(dim);
    let mut grad_buf = vec![0.0; dim];
    let mut total = 0.0;
    for p in 0..n {
        if order.has_grad() {
            for k in 0..dim {
                grad_buf[k] = out[(1 + k) * n + p];
            }
        }
        let jet = PointJet {
            value: out[p],
            grad: &grad_buf,
            laplacian: if order.has_laplacian() { out[(1 + dim) * n + p] } else { 0.0 },
        };
        seed.clear();
        let value = loss.point(offset + p, jet, &mut seed);
        if !value.is_finite() {
            return Err(Error::Numerical {
                context: "loss term".into(),
                epoch: None,
                point: Some(offset + p),
            });
        }
        total += value;
        seed_matrix[p] = seed.value;
        if order.has_grad() {
            for k in 0..dim {
                seed_matrix[(1 + k) * n + p] = seed.grad[k];
            }
        }
        if order.has_laplacian() {
            seed_matrix[(1 + dim) * n + p] = seed.laplacian;
        }
    }

    let mut grad = vec![0.0; net.param_count()];
    backward(net, n, order, tape, seed_matrix, &mut grad);
    Ok((total, grad))
}

/// Input jet: identity gradient, zero Laplacian.
fn input_matrix(points: &[f64], n: usize, dim: usize, order: JetOrder) -> Vec<f64> {
    let cols = order.channels(dim) * n;
    let mut z = vec![0.0; dim * cols];
    for k in 0..dim {
        let row = &mut z[k * cols..(k + 1) * cols];
        for p in 0..n {
            row[p] = points[p * dim + k];
        }
        if order.has_grad() {
            row[(1 + k) * n..(2 + k) * n].iter_mut().for_each(|v| *v = 1.0);
        }
    }
    z
}

/// Runs the network program. When `tape` is given, the input of every affine
/// and activation op is recorded for [`backward`].
fn forward(
    net: &Network,
    points: &[f64],
    n: usize,
    order: JetOrder,
    mut tape: Option<&mut Vec<Vec<f64>>>,
) -> Vec<f64> {
    let dim = net.spec().input_dim;
    let cols = order.channels(dim) * n;
    let params = net.params();
    let layers = net.layout().layers();
    let kind = net.spec().activation;

    let mut cur = input_matrix(points, n, dim, order);
    let mut rows = dim;
    let mut skips: Vec<Vec<f64>> = Vec::new();
    for op in net.program() {
        match *op {
            Op::Affine(l) => {
                let layer = &layers[l];
                let w = &params[layer.weight_offset..layer.bias_offset];
                let b = &params[layer.bias_offset..layer.end()];
                let mut next = vec![0.0; layer.fan_out * cols];
                gemm(
                    layer.fan_out,
                    layer.fan_in,
                    cols,
                    (w, layer.fan_in as isize, 1),
                    (&cur, cols as isize, 1),
                    0.0,
                    (&mut next, cols as isize),
                );
                for (r, &br) in b.iter().enumerate() {
                    next[r * cols..r * cols + n].iter_mut().for_each(|v| *v += br);
                }
                rows = layer.fan_out;
                let input = std::mem::replace(&mut cur, next);
                if let Some(t) = tape.as_deref_mut() {
                    t.push(input);
                }
            }
            Op::Activate => {
                let next = activate(kind, &cur, rows, n, dim, order);
                let input = std::mem::replace(&mut cur, next);
                if let Some(t) = tape.as_deref_mut() {
                    t.push(input);
                }
            }
            Op::PushSkip => skips.push(cur.clone()),
            Op::AddSkip => {
                let skip = skips.pop().expect("unbalanced skip connection");
                cur.iter_mut().zip(&skip).for_each(|(a, b)| *a += b);
            }
        }
    }
    cur
}

fn activate(
    kind: super::ActivationKind,
    s: &[f64],
    rows: usize,
    n: usize,
    dim: usize,
    order: JetOrder,
) -> Vec<f64> {
    let cols = order.channels(dim) * n;
    let mut a = vec![0.0; rows * cols];
    for r in 0..rows {
        let sr = &s[r * cols..(r + 1) * cols];
        let ar = &mut a[r * cols..(r + 1) * cols];
        for p in 0..n {
            let d = kind.derivatives(sr[p]);
            ar[p] = d.value;
            if order.has_grad() {
                let mut sq = 0.0;
                for k in 0..dim {
                    let g = sr[(1 + k) * n + p];
                    ar[(1 + k) * n + p] = d.d1 * g;
                    sq += g * g;
                }
                if order.has_laplacian() {
                    let l = (1 + dim) * n + p;
                    ar[l] = d.d1 * sr[l] + d.d2 * sq;
                }
            }
        }
    }
    a
}

fn backward(
    net: &Network,
    n: usize,
    order: JetOrder,
    mut tape: Vec<Vec<f64>>,
    seed: Vec<f64>,
    grad: &mut [f64],
) {
    let dim = net.spec().input_dim;
    let cols = order.channels(dim) * n;
    let params = net.params();
    let layers = net.layout().layers();
    let kind = net.spec().activation;
    let program = net.program();
    let trainable = net.trainable_layers();
    let Some(first) = program
        .iter()
        .position(|op| matches!(op, Op::Affine(l) if trainable[*l]))
    else {
        return;
    };

    let mut adj = seed;
    let mut skip_adj: Vec<Vec<f64>> = Vec::new();
    for (k, op) in program.iter().enumerate().rev() {
        match *op {
            Op::Affine(l) => {
                let input = tape.pop().expect("tape underflow");
                let layer = &layers[l];
                if trainable[l] {
                    // W̄ += Ā Zᵀ, b̄ += Σ value-block columns of Ā.
                    let (wg, bg) = grad[layer.weight_offset..layer.end()]
                        .split_at_mut(layer.fan_in * layer.fan_out);
                    gemm(
                        layer.fan_out,
                        cols,
                        layer.fan_in,
                        (&adj, cols as isize, 1),
                        (&input, 1, cols as isize),
                        1.0,
                        (wg, layer.fan_in as isize),
                    );
                    for (r, b) in bg.iter_mut().enumerate() {
                        *b += adj[r * cols..r * cols + n].iter().sum::<f64>();
                    }
                }
                if k == first {
                    return;
                }
                let w = &params[layer.weight_offset..layer.bias_offset];
                let mut next = vec![0.0; layer.fan_in * cols];
                gemm(
                    layer.fan_in,
                    layer.fan_out,
                    cols,
                    (w, 1, layer.fan_in as isize),
                    (&adj, cols as isize, 1),
                    0.0,
                    (&mut next, cols as isize),
                );
                adj = next;
            }
            Op::Activate => {
                let s = tape.pop().expect("tape underflow");
                activate_backward(kind, &s, &mut adj, n, dim, order);
            }
            Op::AddSkip => skip_adj.push(adj.clone()),
            Op::PushSkip => {
                let skip = skip_adj.pop().expect("unbalanced skip connection");
                adj.iter_mut().zip(&skip).for_each(|(a, b)| *a += b);
            }
        }
    }
}

/// Overwrites the output adjoint `adj` with the adjoint of the pre-activation `s`.
fn activate_backward(
    kind: super::ActivationKind,
    s: &[f64],
    adj: &mut [f64],
    n: usize,
    dim: usize,
    order: JetOrder,
) {
    let cols = order.channels(dim) * n;
    let rows = s.len() / cols;
    for r in 0..rows {
        let sr = &s[r * cols..(r + 1) * cols];
        let ar = &mut adj[r * cols..(r + 1) * cols];
        for p in 0..n {
            let d = kind.derivatives(sr[p]);
            let mut sv = ar[p] * d.d1;
            if order.has_grad() {
                let lap_adj = if order.has_laplacian() { ar[(1 + dim) * n + p] } else { 0.0 };
                let mut sq = 0.0;
                for k in 0..dim {
                    let i = (1 + k) * n + p;
                    let g = sr[i];
                    sq += g * g;
                    sv += ar[i] * d.d2 * g;
                    ar[i] = ar[i] * d.d1 + 2.0 * lap_adj * d.d2 * g;
                }
                if order.has_laplacian() {
                    let l = (1 + dim) * n + p;
                    sv += lap_adj * (d.d2 * sr[l] + d.d3 * sq);
                    ar[l] = lap_adj * d.d1;
                }
            }
            ar[p] = sv;
        }
    }
}

/// `C (m×n) = A (m×k) · B (k×n) + beta·C` with explicit row/column strides.
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: (&[f64], isize, isize),
    b: (&[f64], isize, isize),
    beta: f64,
    c: (&mut [f64], isize),
) {
    let extent = |rows: usize, cols: usize, rs: isize, cs: isize| {
        if rows == 0 || cols == 0 {
            0
        } else {
            (rows - 1) * rs as usize + (cols - 1) * cs as usize + 1
        }
    };
    assert!(a.0.len() >= extent(m, k, a.1, a.2));
    assert!(b.0.len() >= extent(k, n, b.1, b.2));
    assert!(c.0.len() >= extent(m, n, c.1, 1));
    // SAFETY: the asserts above bound every index the kernel touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.0.as_ptr(),
            a.1,
            a.2,
            b.0.as_ptr(),
            b.1,
            b.2,
            beta,
            c.0.as_mut_ptr(),
            c.1,
            1,
        );
    }
}
