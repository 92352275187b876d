use rand::distr::{Distribution, Uniform};

use super::jet::{Jet2, JetOrder};
use super::spec::{Op, ParamLayout};
use super::NetworkSpec;
use crate::rng::Rng;
use crate::{Error, Result};

/// Flat parameter vector `θ`, laid out by [`ParamLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Glorot-uniform weights, zero biases.
pub fn init_params(spec: &NetworkSpec, rng: &mut Rng) -> ParameterVector {
    let layout = spec.layout();
    let mut params = vec![0.0; layout.len()];
    for layer in layout.layers() {
        let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
        let dist = Uniform::new(-limit, limit).expect("finite Glorot limit");
        for w in &mut params[layer.weight_offset..layer.bias_offset] {
            *w = dist.sample(rng);
        }
    }
    ParameterVector(params)
}

/// A scalar-valued network together with its freeze mask.
#[derive(Clone, Debug)]
pub struct Network {
    spec: NetworkSpec,
    params: ParameterVector,
    freeze_mask: Vec<bool>,
    layout: ParamLayout,
    program: Vec<Op>,
    trainable_layers: Vec<bool>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.params == other.params
            && self.freeze_mask == other.freeze_mask
    }
}

impl Network {
    pub fn new(spec: NetworkSpec, params: ParameterVector) -> Result<Self> {
        let n = params.len();
        Self::with_mask(spec, params, vec![false; n])
    }

    pub fn with_mask(spec: NetworkSpec, params: ParameterVector, freeze_mask: Vec<bool>) -> Result<Self> {
        spec.validate()?;
        let layout = spec.layout();
        if params.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                got: params.len(),
            });
        }
        if freeze_mask.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                got: freeze_mask.len(),
            });
        }
        let program = spec.program();
        let mut net = Network {
            spec,
            params,
            freeze_mask,
            layout,
            program,
            trainable_layers: Vec::new(),
        };
        net.refresh_trainable();
        Ok(net)
    }

    pub fn init(spec: NetworkSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let params = init_params(&spec, rng);
        Self::new(spec, params)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params.0
    }

    pub fn parameter_vector(&self) -> &ParameterVector {
        &self.params
    }

    pub fn freeze_mask(&self) -> &[bool] {
        &self.freeze_mask
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub(crate) fn program(&self) -> &[Op] {
        &self.program
    }

    /// Per affine layer: does it own at least one trainable parameter?
    pub(crate) fn trainable_layers(&self) -> &[bool] {
        &self.trainable_layers
    }

    /// Mutable access to the raw parameters. Callers are responsible for
    /// honoring the freeze mask; the optimizer does.
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params.0
    }

    pub fn set_freeze_mask(&mut self, mask: Vec<bool>) -> Result<()> {
        if mask.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: mask.len(),
            });
        }
        self.freeze_mask = mask;
        self.refresh_trainable();
        Ok(())
    }

    fn refresh_trainable(&mut self) {
        self.trainable_layers = self
            .layout
            .layers()
            .iter()
            .map(|l| !self.freeze_mask[l.weight_offset..l.end()].iter().all(|&f| f))
            .collect();
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `u_θ(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_jets(x, JetOrder::Value)?.value[0])
    }

    /// `(u_θ(x), ∇u_θ(x), Δu_θ(x))`, exact up to rounding.
    pub fn eval_jet(&self, x: &[f64]) -> Result<Jet2> {
        self.check_point(x)?;
        Ok(self.eval_jets(x, JetOrder::Laplacian)?.get(0))
    }

    /// Values at a row-major batch of points.
    pub fn eval_batch(&self, points: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_jets(points, JetOrder::Value)?.value)
    }

    /// A network in the tangent set of `self`: every hidden layer is copied and
    /// frozen, the output layer starts at zero and stays trainable. The result
    /// spans `{ Σ β_k φ_k + β_0 }` where `φ_k` are the last hidden features of
    /// `self`.
    pub fn derive_frozen_adjoint(&self) -> Network {
        let mut params = self.params.clone();
        let mut mask = vec![true; self.param_count()];
        let last = *self.layout.layers().last().expect("network has an output layer");
        for i in last.weight_offset..last.end() {
            params.0[i] = 0.0;
            mask[i] = false;
        }
        Network::with_mask(self.spec.clone(), params, mask).expect("spec already validated")
    }
}
