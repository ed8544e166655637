//! Plain-text model checkpoints.
//!
//! ```text
//! olga-checkpoint 1
//! dims 8 16 2
//! activations tanh tanh
//! center <hex> <hex>
//! radius <hex>
//! nu <hex>
//! weight_decay <hex>
//! param 8 16 <hex> ...
//! param 1 16 <hex> ...
//! ...
//! ```
//!
//! Reals are written as the 16-digit hex of their IEEE-754 bits so a
//! checkpoint reloads bit-exactly. `param` lines follow
//! [`ModelParams::to_matrices`] order.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graphbuild::{Graph, Label};
use crate::numcore::{Elementwise, Matrix};

use super::{classify, encode, EncoderConfig, HypersphereConfig, ModelParams};

const MAGIC: &str = "olga-checkpoint";
const VERSION: u32 = 1;

/// Everything needed to embed and classify nodes after training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: EncoderConfig,
    pub params: ModelParams,
    pub sphere: HypersphereConfig,
}

impl TrainedModel {
    pub fn embed(&self, graph: &Graph, features: &Matrix) -> Result<Matrix> {
        encode(graph, features, &self.config, &self.params)
    }

    pub fn predict(&self, graph: &Graph, features: &Matrix) -> Result<Vec<Label>> {
        classify(&self.embed(graph, features)?, &self.sphere)
    }

    pub fn to_checkpoint(&self) -> String {
        let hex = |v: f64| format!("{:016x}", v.to_bits());
        let join = |vals: &[f64]| vals.iter().map(|&v| hex(v)).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let dims: Vec<String> = self.config.dims.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "dims {}", dims.join(" "));
        let _ = writeln!(
            out,
            "activations {} {}",
            self.config.hidden_activation.name(),
            self.config.final_activation.name()
        );
        let _ = writeln!(out, "center {}", join(&self.sphere.center));
        let _ = writeln!(out, "radius {}", hex(self.sphere.radius));
        let _ = writeln!(out, "nu {}", hex(self.sphere.nu));
        let _ = writeln!(out, "weight_decay {}", hex(self.sphere.weight_decay));
        for m in self.params.to_matrices() {
            let _ = writeln!(out, "param {} {} {}", m.rows(), m.cols(), join(m.as_slice()));
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |key: &str| -> Result<(usize, Vec<&str>)> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::param(format!("checkpoint truncated: expected `{key}`")))?;
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some(k) if k == key => Ok((i + 1, parts.collect())),
                other => Err(Error::param(format!(
                    "checkpoint line {}: expected `{key}`, found `{}`",
                    i + 1,
                    other.unwrap_or("")
                ))),
            }
        };

        let (_, version) = next(MAGIC)?;
        if version != [VERSION.to_string().as_str()] {
            return Err(Error::param(format!("unsupported checkpoint version {version:?}")));
        }
        let (line, dims) = next("dims")?;
        let dims = dims
            .iter()
            .map(|d| d.parse::<usize>().map_err(|_| bad(line, d)))
            .collect::<Result<Vec<_>>>()?;
        let (line, acts) = next("activations")?;
        let [hidden, last] = acts.as_slice() else {
            return Err(Error::param(format!(
                "checkpoint line {line}: expected two activations"
            )));
        };
        let config = EncoderConfig {
            dims,
            hidden_activation: activation(line, hidden)?,
            final_activation: activation(line, last)?,
        };
        config.validate()?;

        let (line, center) = next("center")?;
        let center = reals(line, &center)?;
        let radius = single(next("radius")?)?;
        let nu = single(next("nu")?)?;
        let weight_decay = single(next("weight_decay")?)?;
        let sphere = HypersphereConfig {
            center,
            radius,
            nu,
            weight_decay,
        };
        sphere.validate()?;

        let mut matrices = Vec::new();
        for _ in 0..2 * config.layer_count() {
            let (line, fields) = next("param")?;
            let (shape, values) = fields.split_at(fields.len().min(2));
            let [rows, cols] = shape else {
                return Err(Error::param(format!("checkpoint line {line}: missing shape")));
            };
            let rows = rows.parse::<usize>().map_err(|_| bad(line, rows))?;
            let cols = cols.parse::<usize>().map_err(|_| bad(line, cols))?;
            matrices.push(Matrix::from_vec(rows, cols, reals(line, values)?)?);
        }
        let params = ModelParams::from_matrices(&config, matrices)?;
        if sphere.dim() != config.embedding_dim() {
            return Err(Error::param("sphere center does not match the embedding dimension"));
        }
        Ok(TrainedModel { config, params, sphere })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_checkpoint()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_checkpoint(&text).map_err(|e| match e {
            Error::Parameter(message) => Error::Format {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }
}

fn bad(line: usize, token: &str) -> Error {
    Error::param(format!("checkpoint line {line}: cannot parse `{token}`"))
}

fn real(line: usize, token: &str) -> Result<f64> {
    u64::from_str_radix(token, 16)
        .map(f64::from_bits)
        .map_err(|_| bad(line, token))
}

fn reals(line: usize, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens.iter().map(|t| real(line, t)).collect()
}

fn single((line, tokens): (usize, Vec<&str>)) -> Result<f64> {
    match tokens.as_slice() {
        [t] => real(line, t),
        _ => Err(Error::param(format!("checkpoint line {line}: expected one value"))),
    }
}

fn activation(line: usize, name: &str) -> Result<Elementwise> {
    [Elementwise::Tanh, Elementwise::Relu, Elementwise::Sigmoid]
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| bad(line, name))
}
