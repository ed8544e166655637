use crate::error::{Error, Result};
use crate::graphbuild::Label;
use crate::model::{distance, HypersphereConfig};
use crate::numcore::Matrix;

/// Unweighted mean of the interest and non-interest F1 scores. A class that
/// appears in neither sequence scores 0.
pub fn f1_macro(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension {
            op: "f1_macro",
            left: (predicted.len(), 1),
            right: (truth.len(), 1),
        });
    }
    if predicted.is_empty() {
        return Err(Error::param("f1_macro needs at least one prediction"));
    }
    let f1 = |class: Label| {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p == class, t == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * tp) as f64 / denom as f64
        }
    };
    Ok((f1(Label::Interest) + f1(Label::NonInterest)) / 2.0)
}

/// Fraction of `nodes` whose embedding lies inside or on the sphere.
pub fn inside_rate(embeddings: &Matrix, nodes: &[usize], sphere: &HypersphereConfig) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::param("inside_rate needs a non-empty node set"));
    }
    let mut inside = 0usize;
    for &i in nodes {
        if i >= embeddings.rows() {
            return Err(Error::param(format!(
                "node {i} out of range for {} embeddings",
                embeddings.rows()
            )));
        }
        if distance(embeddings.row(i), sphere)? <= 0.0 {
            inside += 1;
        }
    }
    Ok(inside as f64 / nodes.len() as f64)
}
