use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graphbuild::{Dataset, Label};
use crate::numcore::Matrix;

/// Feature dimension of the `blobs` generator.
pub const BLOB_DIM: usize = 8;
/// Distance between the two blob centers, in units of the per-axis σ.
pub const BLOB_SEPARATION: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Two isotropic unit-variance Gaussians in `BLOB_DIM` dimensions whose
    /// centers sit on the diagonal, `BLOB_SEPARATION`σ apart.
    Blobs,
    /// A planar interest blob inside a non-interest annulus, lifted onto a
    /// constant third coordinate so cosine neighborhoods follow planar
    /// proximity.
    Ring,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "blobs" => Ok(SynthKind::Blobs),
            "ring" => Ok(SynthKind::Ring),
            other => Err(Error::param(format!(
                "unknown synthetic dataset `{other}` (blobs|ring)"
            ))),
        }
    }
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Blobs => "blobs",
            SynthKind::Ring => "ring",
        }
    }
}

/// Deterministic synthetic one-class dataset. Interest nodes come first.
pub fn synth_dataset(kind: SynthKind, n_interest: usize, n_non_interest: usize, seed: u64) -> Result<Dataset> {
    if n_interest == 0 || n_non_interest == 0 {
        return Err(Error::param("synthetic datasets need at least one node of each class"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n = n_interest + n_non_interest;

    let rows: Vec<Vec<f64>> = match kind {
        SynthKind::Blobs => {
            let offset = 0.5 * BLOB_SEPARATION / (BLOB_DIM as f64).sqrt();
            (0..n)
                .map(|i| {
                    let sign = if i < n_interest { 1.0 } else { -1.0 };
                    (0..BLOB_DIM).map(|_| sign * offset + normal.sample(&mut rng)).collect()
                })
                .collect()
        }
        SynthKind::Ring => (0..n)
            .map(|i| {
                let (x, y) = if i < n_interest {
                    (0.5 * normal.sample(&mut rng), 0.5 * normal.sample(&mut rng))
                } else {
                    let angle = rng.random_range(0.0..std::f64::consts::TAU);
                    let radius = 3.0 + 0.25 * normal.sample(&mut rng);
                    (radius * angle.cos(), radius * angle.sin())
                };
                vec![x, y, 4.0]
            })
            .collect(),
    };

    let mut labels = vec![Label::Interest; n_interest];
    labels.extend(std::iter::repeat_n(Label::NonInterest, n_non_interest));
    Dataset::new(kind.name(), Matrix::from_rows(&rows)?, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Leave-one-out Euclidean 1-NN accuracy, brute force.
    fn one_nn_accuracy(ds: &Dataset) -> f64 {
        let x = ds.features();
        let n = ds.len();
        let correct = (0..n)
            .filter(|&i| {
                let nearest = (0..n)
                    .filter(|&j| j != i)
                    .min_by(|&a, &b| {
                        let da: f64 = x.row(i).iter().zip(x.row(a)).map(|(p, q)| (p - q).powi(2)).sum();
                        let db: f64 = x.row(i).iter().zip(x.row(b)).map(|(p, q)| (p - q).powi(2)).sum();
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                ds.labels()[nearest] == ds.labels()[i]
            })
            .count();
        correct as f64 / n as f64
    }

    #[test]
    fn same_seed_same_features() {
        for kind in [SynthKind::Blobs, SynthKind::Ring] {
            let a = synth_dataset(kind, 20, 30, 5).unwrap();
            let b = synth_dataset(kind, 20, 30, 5).unwrap();
            assert_eq!(a.features(), b.features());
            assert_ne!(a.features(), synth_dataset(kind, 20, 30, 6).unwrap().features());
        }
    }

    #[test]
    fn blob_centers_are_six_sigma_apart() {
        let offset = 0.5 * BLOB_SEPARATION / (BLOB_DIM as f64).sqrt();
        let gap = (BLOB_DIM as f64 * (2.0 * offset).powi(2)).sqrt();
        assert!((gap - 6.0).abs() < 1e-12);
    }

    #[test]
    fn blobs_are_nearly_separable() {
        let ds = synth_dataset(SynthKind::Blobs, 250, 250, 42).unwrap();
        let acc = one_nn_accuracy(&ds);
        assert!(acc > 0.95, "1-NN accuracy {acc}");
    }

    #[test]
    fn ring_is_separable() {
        let ds = synth_dataset(SynthKind::Ring, 100, 100, 1).unwrap();
        assert!(one_nn_accuracy(&ds) > 0.95);
    }

    #[test]
    fn empty_class_is_rejected() {
        assert!(synth_dataset(SynthKind::Blobs, 0, 10, 0).is_err());
        assert!(synth_dataset(SynthKind::Ring, 10, 0, 0).is_err());
    }
}
