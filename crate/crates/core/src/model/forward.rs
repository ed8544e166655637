use crate::error::{Error, Result};
use crate::graphbuild::Graph;
use crate::numcore::{sigmoid, Elementwise, Matrix, Tape, Var};

use super::{EncoderConfig, ModelParams};

/// Tape handles produced by [`encode_on`].
#[derive(Debug, Clone)]
pub struct EncoderVars {
    /// Parameter leaves in [`ModelParams::to_matrices`] order.
    pub params: Vec<Var>,
    /// Embedding matrix `H` (n × d).
    pub embeddings: Var,
}

impl EncoderVars {
    pub fn weights(&self) -> impl Iterator<Item = Var> + '_ {
        self.params.iter().step_by(2).copied()
    }
}

/// Records the GCN encoder on `tape`: each layer computes
/// `act(Â · (H W) + b)` with `Â` the normalized propagation operator.
pub fn encode_on(
    tape: &mut Tape,
    graph: &Graph,
    features: &Matrix,
    config: &EncoderConfig,
    params: &ModelParams,
) -> Result<EncoderVars> {
    if params.layers().len() != config.layer_count() {
        return Err(Error::param("parameters do not match the encoder config"));
    }
    let vars: Vec<Var> = params
        .layers()
        .iter()
        .flat_map(|layer| [layer.weight.clone(), layer.bias.clone()])
        .map(|m| tape.param(m))
        .collect();
    let embeddings = encode_with(tape, graph, features, config, &vars)?;
    Ok(EncoderVars {
        params: vars,
        embeddings,
    })
}

/// Like [`encode_on`] but over parameter nodes already on the tape, given as
/// `[W0, b0, W1, b1, ...]`.
pub fn encode_with(
    tape: &mut Tape,
    graph: &Graph,
    features: &Matrix,
    config: &EncoderConfig,
    params: &[Var],
) -> Result<Var> {
    if features.rows() != graph.len() || features.cols() != config.input_dim() {
        return Err(Error::Dimension {
            op: "encode",
            left: features.shape(),
            right: (graph.len(), config.input_dim()),
        });
    }
    if params.len() != 2 * config.layer_count() {
        return Err(Error::param("parameters do not match the encoder config"));
    }
    let propagation = tape.constant(graph.propagation().clone());
    let mut h = tape.constant(features.clone());
    for (l, pair) in params.chunks(2).enumerate() {
        let hw = tape.matmul(h, pair[0])?;
        let propagated = tape.matmul(propagation, hw)?;
        let shifted = tape.add_row(propagated, pair[1])?;
        h = tape.map(shifted, config.activation(l));
    }
    Ok(h)
}

/// Node embeddings `H = g(V, A; W)`.
pub fn encode(graph: &Graph, features: &Matrix, config: &EncoderConfig, params: &ModelParams) -> Result<Matrix> {
    let mut tape = Tape::new();
    let vars = encode_on(&mut tape, graph, features, config, params)?;
    Ok(tape.value(vars.embeddings).clone())
}

/// Records `Â = σ(H Hᵀ)`.
pub fn decode_on(tape: &mut Tape, embeddings: Var) -> Result<Var> {
    let logits = tape.matmul_t(embeddings, embeddings)?;
    Ok(tape.map(logits, Elementwise::Sigmoid))
}

/// Inner-product decoder `Â = σ(H Hᵀ)`.
pub fn decode(embeddings: &Matrix) -> Matrix {
    let logits = embeddings.matmul_t(embeddings).expect("H Hᵀ is always conformable");
    logits.map(sigmoid)
}
