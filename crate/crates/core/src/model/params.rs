use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{Elementwise, Matrix};

/// Layer widths and activations of the GCN encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderConfig {
    /// `[input, hidden..., embedding]`; one layer per consecutive pair.
    pub dims: Vec<usize>,
    pub hidden_activation: Elementwise,
    pub final_activation: Elementwise,
}

impl EncoderConfig {
    /// Tanh encoder with a 2- or 3-dimensional output.
    pub fn olga(input: usize, hidden: &[usize], embedding: usize) -> Result<Self> {
        if !(2..=3).contains(&embedding) {
            return Err(Error::param(format!(
                "OLGA embeddings must be 2- or 3-dimensional, got {embedding}"
            )));
        }
        Self::new(input, hidden, embedding, Elementwise::Tanh)
    }

    /// ReLU encoder used by the OCGNN baseline; any output width.
    pub fn ocgnn(input: usize, hidden: &[usize], embedding: usize) -> Result<Self> {
        Self::new(input, hidden, embedding, Elementwise::Relu)
    }

    fn new(input: usize, hidden: &[usize], embedding: usize, act: Elementwise) -> Result<Self> {
        let mut dims = vec![input];
        dims.extend_from_slice(hidden);
        dims.push(embedding);
        let config = EncoderConfig {
            dims,
            hidden_activation: act,
            final_activation: act,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 {
            return Err(Error::param("encoder needs at least one layer"));
        }
        if self.dims.contains(&0) {
            return Err(Error::param(format!("layer widths must be positive: {:?}", self.dims)));
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn embedding_dim(&self) -> usize {
        *self.dims.last().expect("validated")
    }

    pub fn activation(&self, layer: usize) -> Elementwise {
        if layer + 1 == self.layer_count() {
            self.final_activation
        } else {
            self.hidden_activation
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// in × out
    pub weight: Matrix,
    /// 1 × out
    pub bias: Matrix,
}

/// Encoder weights and biases.
///
/// The inner-product decoder has no parameters of its own, so the decoder
/// parameters are the encoder parameters seen through `H`;
/// [`ModelParams::decoder_params`] is the same slice as
/// [`ModelParams::encoder_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layers: Vec<Layer>,
}

impl ModelParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init(config: &EncoderConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = config
            .dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect();
                Layer {
                    weight: Matrix::from_vec(fan_in, fan_out, data).expect("sized"),
                    bias: Matrix::zeros(1, fan_out),
                }
            })
            .collect();
        ModelParams { layers }
    }

    pub fn from_layers(config: &EncoderConfig, layers: Vec<Layer>) -> Result<Self> {
        if layers.len() != config.layer_count() {
            return Err(Error::param(format!(
                "expected {} layers, got {}",
                config.layer_count(),
                layers.len()
            )));
        }
        for (l, (layer, w)) in layers.iter().zip(config.dims.windows(2)).enumerate() {
            if layer.weight.shape() != (w[0], w[1]) || layer.bias.shape() != (1, w[1]) {
                return Err(Error::Dimension {
                    op: "layer shape",
                    left: layer.weight.shape(),
                    right: (w[0], w[1]),
                });
            }
            if !layer.weight.is_finite() || !layer.bias.is_finite() {
                return Err(Error::param(format!("layer {l} has non-finite parameters")));
            }
        }
        Ok(ModelParams { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn encoder_params(&self) -> &[Layer] {
        &self.layers
    }

    pub fn decoder_params(&self) -> &[Layer] {
        &self.layers
    }

    /// Flattened as `[W0, b0, W1, b1, ...]`.
    pub fn to_matrices(&self) -> Vec<Matrix> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.clone(), l.bias.clone()])
            .collect()
    }

    /// Inverse of [`ModelParams::to_matrices`].
    pub fn from_matrices(config: &EncoderConfig, matrices: Vec<Matrix>) -> Result<Self> {
        if !matrices.len().is_multiple_of(2) {
            return Err(Error::param("parameter list must alternate weight and bias"));
        }
        let mut it = matrices.into_iter();
        let mut layers = Vec::new();
        while let (Some(weight), Some(bias)) = (it.next(), it.next()) {
            layers.push(Layer { weight, bias });
        }
        Self::from_layers(config, layers)
    }

    pub fn matrices_mut(&mut self) -> impl Iterator<Item = &mut Matrix> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias])
    }
}

/// Hypersphere boundary in embedding space, plus the OCGNN-only knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersphereConfig {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Upper bound on the fraction of interest nodes left outside (OCGNN).
    pub nu: f64,
    /// L2 weight decay λ (OCGNN).
    pub weight_decay: f64,
}

impl HypersphereConfig {
    /// OLGA sphere: fixed center at the origin.
    pub fn at_origin(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("radius must be positive, got {radius}")));
        }
        Ok(HypersphereConfig {
            center: vec![0.0; dim],
            radius,
            nu: 0.0,
            weight_decay: 0.0,
        })
    }

    pub fn ocgnn(center: Vec<f64>, radius: f64, nu: f64, weight_decay: f64) -> Result<Self> {
        let sphere = HypersphereConfig {
            center,
            radius,
            nu,
            weight_decay,
        };
        sphere.validate()?;
        Ok(sphere)
    }

    /// The radius may reach 0 when the OCGNN quantile update collapses onto
    /// the center; it is never negative.
    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::param(format!(
                "radius must be finite and >= 0, got {}",
                self.radius
            )));
        }
        if !(0.0..1.0).contains(&self.nu) {
            return Err(Error::param(format!("nu must lie in [0, 1), got {}", self.nu)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::param(format!(
                "weight decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("center must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}
