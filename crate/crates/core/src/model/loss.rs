//! Hypersphere, reconstruction and OCGNN objectives.
//!
//! Every loss exists twice: a `*_on` builder that records it on a [`Tape`]
//! for training, and a plain function over matrices that evaluates the same
//! recording on a throwaway tape.

use crate::error::{Error, Result};
use crate::graphbuild::Label;
use crate::numcore::{Elementwise, Matrix, Tape, Var};

use super::HypersphereConfig;

/// Signed squared distance to the sphere: `‖h − c‖² − r²`. Negative strictly
/// inside, zero on the surface.
pub fn distance(h: &[f64], sphere: &HypersphereConfig) -> Result<f64> {
    if h.len() != sphere.dim() {
        return Err(Error::Dimension {
            op: "distance",
            left: (1, h.len()),
            right: (1, sphere.dim()),
        });
    }
    let sq: f64 = h.iter().zip(&sphere.center).map(|(a, c)| (a - c) * (a - c)).sum();
    Ok(sq - sphere.radius * sphere.radius)
}

/// `f(d) = d + 1` for `d > 0`, `exp(d)` otherwise.
///
/// Continuous with a continuous first derivative at 0 and strictly
/// increasing, so interest nodes already inside the sphere still feel a pull
/// toward the center.
pub fn hypersphere_penalty(d: f64) -> f64 {
    Elementwise::ExpLinear.eval(d)
}

/// Records `‖h_i − c‖² − r²` for the selected rows, as an m×1 column.
fn sphere_distances_on(tape: &mut Tape, embeddings: Var, nodes: &[usize], sphere: &HypersphereConfig) -> Result<Var> {
    let dim = tape.value(embeddings).cols();
    if dim != sphere.dim() {
        return Err(Error::Dimension {
            op: "sphere distance",
            left: (1, dim),
            right: (1, sphere.dim()),
        });
    }
    let rows = tape.select_rows(embeddings, nodes)?;
    let neg_center = tape.constant(Matrix::row_vector(&sphere.center).scale(-1.0));
    let centered = tape.add_row(rows, neg_center)?;
    let sq = tape.row_squared_norm(centered);
    Ok(tape.add_scalar(sq, -sphere.radius * sphere.radius))
}

/// Hypersphere loss: mean of [`hypersphere_penalty`] over the interest rows.
pub fn loss_l1_on(tape: &mut Tape, embeddings: Var, interest: &[usize], sphere: &HypersphereConfig) -> Result<Var> {
    if interest.is_empty() {
        return Err(Error::param("hypersphere loss needs at least one interest node"));
    }
    let d = sphere_distances_on(tape, embeddings, interest, sphere)?;
    let penalty = tape.map(d, Elementwise::ExpLinear);
    tape.mean(penalty)
}

pub fn loss_l1(embeddings: &Matrix, interest: &[usize], sphere: &HypersphereConfig) -> Result<f64> {
    let mut tape = Tape::new();
    let h = tape.constant(embeddings.clone());
    let loss = loss_l1_on(&mut tape, h, interest, sphere)?;
    tape.scalar(loss)
}

/// Mean squared error between the rows `nodes` of the adjacency and of its
/// reconstruction, over all columns.
pub fn reconstruction_on(tape: &mut Tape, adjacency: &Matrix, reconstruction: Var, nodes: &[usize]) -> Result<Var> {
    if nodes.is_empty() {
        return Err(Error::param("reconstruction loss needs a non-empty node set"));
    }
    if adjacency.shape() != tape.value(reconstruction).shape() {
        return Err(Error::Dimension {
            op: "reconstruction",
            left: adjacency.shape(),
            right: tape.value(reconstruction).shape(),
        });
    }
    let target = tape.constant(adjacency.select_rows(nodes)?);
    let predicted = tape.select_rows(reconstruction, nodes)?;
    let diff = tape.sub(predicted, target)?;
    let sq = tape.mul(diff, diff)?;
    tape.mean(sq)
}

fn reconstruction(adjacency: &Matrix, reconstruction: &Matrix, nodes: &[usize]) -> Result<f64> {
    let mut tape = Tape::new();
    let a_hat = tape.constant(reconstruction.clone());
    let loss = reconstruction_on(&mut tape, adjacency, a_hat, nodes)?;
    tape.scalar(loss)
}

/// Reconstruction loss of the labeled (interest) rows.
pub fn loss_l2(adjacency: &Matrix, reconstructed: &Matrix, interest: &[usize]) -> Result<f64> {
    reconstruction(adjacency, reconstructed, interest)
}

/// Reconstruction loss of the unlabeled rows.
pub fn loss_l3(adjacency: &Matrix, reconstructed: &Matrix, unlabeled: &[usize]) -> Result<f64> {
    reconstruction(adjacency, reconstructed, unlabeled)
}

/// Binary enablers of the three loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LossWeights {
    pub alpha: bool,
    pub beta: bool,
    pub delta: bool,
}

impl LossWeights {
    /// Reconstruction only: (α, β, δ) = (0, 1, 1).
    pub const RECONSTRUCTION: LossWeights = LossWeights {
        alpha: false,
        beta: true,
        delta: true,
    };
    /// Hypersphere plus unlabeled reconstruction: (1, 0, 1).
    pub const ONE_CLASS: LossWeights = LossWeights {
        alpha: true,
        beta: false,
        delta: true,
    };
    pub const ALL: LossWeights = LossWeights {
        alpha: true,
        beta: true,
        delta: true,
    };

    /// From numeric enablers, each of which must be 0 or 1.
    pub fn from_values(alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        let bit = |v: f64, name: &str| {
            if v == 0.0 {
                Ok(false)
            } else if v == 1.0 {
                Ok(true)
            } else {
                Err(Error::param(format!("{name} must be 0 or 1, got {v}")))
            }
        };
        Ok(LossWeights {
            alpha: bit(alpha, "alpha")?,
            beta: bit(beta, "beta")?,
            delta: bit(delta, "delta")?,
        })
    }

    pub fn values(self) -> (f64, f64, f64) {
        let v = |b: bool| if b { 1.0 } else { 0.0 };
        (v(self.alpha), v(self.beta), v(self.delta))
    }
}

/// `L1·α + L2·β + L3·δ`.
pub fn loss_total(l1: f64, l2: f64, l3: f64, weights: LossWeights) -> f64 {
    let (a, b, d) = weights.values();
    l1 * a + l2 * b + l3 * d
}

/// Sums the enabled terms on the tape. Disabled terms are left out of the
/// graph entirely, so they contribute exactly nothing to any gradient. With
/// every term disabled the result is a constant zero.
pub fn loss_total_on(tape: &mut Tape, l1: Var, l2: Var, l3: Var, weights: LossWeights) -> Result<Var> {
    let enabled: Vec<Var> = [(weights.alpha, l1), (weights.beta, l2), (weights.delta, l3)]
        .into_iter()
        .filter_map(|(on, v)| on.then_some(v))
        .collect();
    let Some((&first, rest)) = enabled.split_first() else {
        return Ok(tape.constant(Matrix::scalar(0.0)));
    };
    rest.iter().try_fold(first, |acc, &v| tape.add(acc, v))
}

/// OCGNN objective:
/// `1/(ν|V_in|) Σ [‖h_i − c‖² − r²]⁺ + r² + λ/2 Σ_l ‖W_l‖²`.
///
/// Only weight matrices are decayed, not biases.
pub fn ocgnn_loss_on(
    tape: &mut Tape,
    embeddings: Var,
    interest: &[usize],
    sphere: &HypersphereConfig,
    weights: &[Var],
) -> Result<Var> {
    if !(sphere.nu > 0.0 && sphere.nu < 1.0) {
        return Err(Error::param(format!("OCGNN needs nu in (0, 1), got {}", sphere.nu)));
    }
    if interest.is_empty() {
        return Err(Error::param("OCGNN loss needs at least one interest node"));
    }
    let d = sphere_distances_on(tape, embeddings, interest, sphere)?;
    let hinge = tape.map(d, Elementwise::Relu);
    let total = tape.sum(hinge);
    let data_term = tape.scale(total, 1.0 / (sphere.nu * interest.len() as f64));
    let mut loss = tape.add_scalar(data_term, sphere.radius * sphere.radius);
    if sphere.weight_decay > 0.0 {
        for &w in weights {
            let sq = tape.mul(w, w)?;
            let norm = tape.sum(sq);
            let decay = tape.scale(norm, 0.5 * sphere.weight_decay);
            loss = tape.add(loss, decay)?;
        }
    }
    Ok(loss)
}

pub fn ocgnn_loss(
    embeddings: &Matrix,
    interest: &[usize],
    sphere: &HypersphereConfig,
    weights: &[Matrix],
) -> Result<f64> {
    let mut tape = Tape::new();
    let h = tape.constant(embeddings.clone());
    let w: Vec<Var> = weights.iter().map(|m| tape.constant(m.clone())).collect();
    let loss = ocgnn_loss_on(&mut tape, h, interest, sphere, &w)?;
    tape.scalar(loss)
}

/// Mean of the interest embeddings (the OCGNN center).
pub fn ocgnn_center(embeddings: &Matrix, interest: &[usize]) -> Result<Vec<f64>> {
    if interest.is_empty() {
        return Err(Error::param("center needs at least one interest node"));
    }
    let rows = embeddings.select_rows(interest)?;
    let mut center = vec![0.0; embeddings.cols()];
    for i in 0..rows.rows() {
        for (c, v) in center.iter_mut().zip(rows.row(i)) {
            *c += v;
        }
    }
    let n = interest.len() as f64;
    center.iter_mut().for_each(|c| *c /= n);
    Ok(center)
}

/// Nearest-rank quantile: the `⌈q·n⌉`-th smallest value (1-based, clamped
/// to `[1, n]`).
pub fn nearest_rank_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("quantile of an empty set"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param(format!("quantile level must lie in [0, 1], got {q}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // absorb rounding in q·n, e.g. (1 − 0.1)·10
    let rank = ((q * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(sorted.len()) - 1])
}

/// Radius update: the `(1 − ν)` nearest-rank quantile of the interest
/// distances `‖h_i − c‖`.
pub fn ocgnn_radius(embeddings: &Matrix, interest: &[usize], center: &[f64], nu: f64) -> Result<f64> {
    if interest.is_empty() {
        return Err(Error::param("radius needs at least one interest node"));
    }
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::param(format!("nu must lie in [0, 1), got {nu}")));
    }
    let distances: Vec<f64> = interest
        .iter()
        .map(|&i| {
            embeddings
                .row(i)
                .iter()
                .zip(center)
                .map(|(h, c)| (h - c) * (h - c))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    nearest_rank_quantile(&distances, 1.0 - nu)
}

/// Interest exactly when the node lies inside or on the sphere.
pub fn classify(embeddings: &Matrix, sphere: &HypersphereConfig) -> Result<Vec<Label>> {
    (0..embeddings.rows())
        .map(|i| {
            distance(embeddings.row(i), sphere).map(|d| if d <= 0.0 { Label::Interest } else { Label::NonInterest })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::model::decode;

    fn sphere(center: &[f64], r: f64) -> HypersphereConfig {
        HypersphereConfig {
            center: center.to_vec(),
            radius: r,
            nu: 0.1,
            weight_decay: 0.0,
        }
    }

    #[test]
    fn distance_examples() {
        assert_abs_diff_eq!(
            distance(&[0.2, -0.1], &sphere(&[0.2, -0.1], 0.3)).unwrap(),
            -0.09,
            epsilon = 1e-15
        );
        assert_eq!(distance(&[0.6, 0.8], &sphere(&[0.0, 0.0], 1.0)).unwrap(), 0.0);
        assert_eq!(distance(&[1.0, 0.0], &sphere(&[0.0, 0.0], 0.5)).unwrap(), 0.75);
        assert!(distance(&[1.0], &sphere(&[0.0, 0.0], 0.5)).is_err());
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(hypersphere_penalty(0.0), 1.0);
        assert_eq!(hypersphere_penalty(1.0), 2.0);
        assert_abs_diff_eq!(hypersphere_penalty(-0.09), 0.913_931_185_271_228, epsilon = 1e-12);
    }

    #[test]
    fn l1_examples() {
        let s = sphere(&[0.0, 0.0], 0.3);
        let at_center = Matrix::zeros(1, 2);
        assert_abs_diff_eq!(
            loss_l1(&at_center, &[0], &s).unwrap(),
            (-0.09_f64).exp(),
            epsilon = 1e-15
        );

        let on_surface = Matrix::from_rows(&[[0.3, 0.0], [0.0, -0.3], [0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(loss_l1(&on_surface, &[0, 1], &s).unwrap(), 1.0, epsilon = 1e-15);

        let h = Matrix::from_rows(&[[0.1, 0.5], [-0.4, 0.2], [0.9, 0.9]]).unwrap();
        let once = loss_l1(&h, &[0, 1, 2], &s).unwrap();
        let twice = loss_l1(&h, &[0, 1, 2, 0, 1, 2], &s).unwrap();
        assert_abs_diff_eq!(once, twice, epsilon = 1e-15);
        assert!(once > 0.0);
        assert!(loss_l1(&h, &[], &s).is_err());
    }

    #[test]
    fn l1_keeps_pulling_inside_the_sphere() {
        let s = sphere(&[0.0, 0.0], 0.3);
        let far_inside = loss_l1(&Matrix::row_vector(&[0.2, 0.0]), &[0], &s).unwrap();
        let closer = loss_l1(&Matrix::row_vector(&[0.1, 0.0]), &[0], &s).unwrap();
        assert!(closer < far_inside);
    }

    #[test]
    fn reconstruction_examples() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(loss_l2(&a, &a, &[0, 1]).unwrap(), 0.0);

        let zeros = Matrix::zeros(3, 3);
        let half = decode(&Matrix::zeros(3, 2));
        assert_eq!(loss_l3(&zeros, &half, &[0, 2]).unwrap(), 0.25);

        // (2·0.731058² + 2·0.268942²)/4
        let a_hat = decode(&Matrix::from_rows(&[[1.0], [1.0]]).unwrap());
        assert_abs_diff_eq!(
            loss_l2(&a, &a_hat, &[0, 1]).unwrap(),
            0.303_388_066_758_518,
            epsilon = 1e-12
        );
        assert!(loss_l3(&a, &a_hat, &[]).is_err());
    }

    #[test]
    fn total_examples() {
        let (l1, l2, l3) = (0.7, 0.2, 0.05);
        assert_eq!(loss_total(l1, l2, l3, LossWeights::RECONSTRUCTION), l2 + l3);
        assert_eq!(loss_total(l1, l2, l3, LossWeights::ONE_CLASS), l1 + l3);
        let off = LossWeights::from_values(0.0, 0.0, 0.0).unwrap();
        assert_eq!(loss_total(l1, l2, l3, off), 0.0);
        assert!(LossWeights::from_values(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn ocgnn_examples() {
        let at_center = Matrix::zeros(3, 2);
        let mut s = sphere(&[0.0, 0.0], 0.0);
        assert_eq!(ocgnn_loss(&at_center, &[0, 1, 2], &s, &[]).unwrap(), 0.0);
        s.radius = 0.5;
        assert_eq!(ocgnn_loss(&at_center, &[0, 1, 2], &s, &[]).unwrap(), 0.25);

        // (1 − 0.25)/0.1 + 0.25
        let one = Matrix::row_vector(&[1.0, 0.0]);
        assert_abs_diff_eq!(ocgnn_loss(&one, &[0], &s, &[]).unwrap(), 7.75, epsilon = 1e-12);

        s.weight_decay = 0.1;
        let w = Matrix::row_vector(&[1.0, 2.0]);
        // + 0.05 · 5
        assert_abs_diff_eq!(ocgnn_loss(&one, &[0], &s, &[w]).unwrap(), 8.0, epsilon = 1e-12);

        s.nu = 0.0;
        assert!(matches!(ocgnn_loss(&one, &[0], &s, &[]), Err(Error::Parameter(_))));
    }

    #[test]
    fn center_and_radius() {
        let h = Matrix::from_rows(&[[0.0, 0.0], [2.0, 2.0], [9.0, 9.0]]).unwrap();
        assert_eq!(ocgnn_center(&h, &[0, 1]).unwrap(), vec![1.0, 1.0]);
        assert!(ocgnn_center(&h, &[]).is_err());

        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank_quantile(&d, 0.9).unwrap(), 9.0);
        let col = Matrix::from_vec(10, 1, d.clone()).unwrap();
        let all: Vec<usize> = (0..10).collect();
        assert_eq!(ocgnn_radius(&col, &all, &[0.0], 0.1).unwrap(), 9.0);
        assert_eq!(ocgnn_radius(&col, &all, &[0.0], 1e-12).unwrap(), 10.0);
        assert_eq!(ocgnn_radius(&col, &all, &[0.0], 0.0).unwrap(), 10.0);
    }

    #[test]
    fn classification_boundary() {
        let s = sphere(&[0.0, 0.0], 0.5);
        let h = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(
            classify(&h, &s).unwrap(),
            vec![Label::Interest, Label::NonInterest, Label::Interest]
        );
    }
}
