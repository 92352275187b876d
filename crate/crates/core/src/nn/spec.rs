use serde::{Deserialize, Serialize};

use super::ActivationKind;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// `h_l = σ(W_l h_{l-1} + b_l)` for every hidden layer.
    Mlp,
    /// A plain affine lift to the hidden width, followed by blocks
    /// `h ← h + σ(W₂ σ(W₁ h + b₁) + b₂)`.
    Resnet,
}

/// Shape of a scalar-output network.
///
/// `hidden_widths` lists every hidden affine layer in order. For a resnet the
/// first entry is the lifting layer and the remaining entries come in pairs,
/// one pair per skip-connected block, all of the same width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden_widths: Vec<usize>,
    pub architecture: Architecture,
    pub activation: ActivationKind,
}

impl NetworkSpec {
    pub fn mlp(input_dim: usize, hidden_widths: Vec<usize>, activation: ActivationKind) -> Self {
        NetworkSpec {
            input_dim,
            hidden_widths,
            architecture: Architecture::Mlp,
            activation,
        }
    }

    /// `blocks` skip-connected blocks of two layers each, all `width` wide.
    pub fn resnet(input_dim: usize, width: usize, blocks: usize, activation: ActivationKind) -> Self {
        NetworkSpec {
            input_dim,
            hidden_widths: vec![width; 1 + 2 * blocks],
            architecture: Architecture::Resnet,
            activation,
        }
    }

    pub fn output_dim(&self) -> usize {
        1
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        if self.hidden_widths.iter().any(|&w| w == 0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        if self.architecture == Architecture::Resnet {
            let widths = &self.hidden_widths;
            if widths.is_empty() || widths.len() % 2 == 0 {
                return Err(Error::Config(
                    "resnet needs a lifting layer plus pairs of block layers".into(),
                ));
            }
            if widths.iter().any(|&w| w != widths[0]) {
                return Err(Error::Config(
                    "resnet block layers must share the lifting width".into(),
                ));
            }
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every affine layer, output layer last.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.hidden_widths.len() + 1);
        let mut prev = self.input_dim;
        for &w in &self.hidden_widths {
            shapes.push((prev, w));
            prev = w;
        }
        shapes.push((prev, self.output_dim()));
        shapes
    }

    /// `Σ_l N_l (1 + N_{l-1})` over all affine layers.
    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(fan_in, fan_out)| fan_out * (1 + fan_in))
            .sum()
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(self)
    }

    pub(crate) fn program(&self) -> Vec<Op> {
        let n_layers = self.hidden_widths.len() + 1;
        let mut ops = Vec::new();
        match self.architecture {
            Architecture::Mlp => {
                for l in 0..n_layers - 1 {
                    ops.push(Op::Affine(l));
                    ops.push(Op::Activate);
                }
            }
            Architecture::Resnet => {
                ops.push(Op::Affine(0));
                let mut l = 1;
                while l + 1 < n_layers {
                    ops.push(Op::PushSkip);
                    ops.push(Op::Affine(l));
                    ops.push(Op::Activate);
                    ops.push(Op::Affine(l + 1));
                    ops.push(Op::Activate);
                    ops.push(Op::AddSkip);
                    l += 2;
                }
            }
        }
        ops.push(Op::Affine(n_layers - 1));
        ops
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    Affine(usize),
    Activate,
    PushSkip,
    AddSkip,
}

/// Where one affine layer lives in the flat parameter vector.
///
/// Weights are stored row-major (`fan_out × fan_in`) and immediately followed
/// by the biases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerLayout {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

impl LayerLayout {
    pub fn end(&self) -> usize {
        self.bias_offset + self.fan_out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamSlot {
    Weight { layer: usize, row: usize, col: usize },
    Bias { layer: usize, row: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    layers: Vec<LayerLayout>,
    len: usize,
}

impl ParamLayout {
    fn new(spec: &NetworkSpec) -> Self {
        let mut offset = 0;
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let layer = LayerLayout {
                    fan_in,
                    fan_out,
                    weight_offset: offset,
                    bias_offset: offset + fan_in * fan_out,
                };
                offset = layer.end();
                layer
            })
            .collect();
        ParamLayout { layers, len: offset }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn layers(&self) -> &[LayerLayout] {
        &self.layers
    }

    pub fn index(&self, slot: ParamSlot) -> usize {
        match slot {
            ParamSlot::Weight { layer, row, col } => {
                let l = &self.layers[layer];
                debug_assert!(row < l.fan_out && col < l.fan_in);
                l.weight_offset + row * l.fan_in + col
            }
            ParamSlot::Bias { layer, row } => {
                let l = &self.layers[layer];
                debug_assert!(row < l.fan_out);
                l.bias_offset + row
            }
        }
    }

    /// Inverse of [`ParamLayout::index`].
    pub fn slot(&self, index: usize) -> Option<ParamSlot> {
        let layer = self.layers.iter().position(|l| index < l.end())?;
        let l = &self.layers[layer];
        Some(if index < l.bias_offset {
            let local = index - l.weight_offset;
            ParamSlot::Weight {
                layer,
                row: local / l.fan_in,
                col: local % l.fan_in,
            }
        } else {
            ParamSlot::Bias {
                layer,
                row: index - l.bias_offset,
            }
        })
    }
}
