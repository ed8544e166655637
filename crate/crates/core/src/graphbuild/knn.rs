use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numcore::Matrix;

/// Node similarity used to pick neighbors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Similarity {
    #[default]
    Cosine,
    /// Negative squared Euclidean distance.
    Euclidean,
}

/// Pairwise similarity matrix; the diagonal is left at zero and never read.
fn similarity_matrix(features: &Matrix, metric: Similarity) -> Result<Matrix> {
    let n = features.rows();
    match metric {
        Similarity::Cosine => {
            let mut unit = features.clone();
            for i in 0..n {
                let norm = unit.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::param(format!(
                        "node {i} has a zero-norm feature row; cosine similarity is undefined"
                    )));
                }
                unit.row_mut(i).iter_mut().for_each(|v| *v /= norm);
            }
            unit.matmul_t(&unit)
        }
        Similarity::Euclidean => {
            let mut sim = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let d: f64 = features
                        .row(i)
                        .iter()
                        .zip(features.row(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    sim[(i, j)] = -d;
                }
            }
            Ok(sim)
        }
    }
}

/// Connects every node to its `k` most similar other nodes and symmetrizes
/// by edge union. Ties go to the lower node index.
///
/// Returns a binary symmetric adjacency matrix with a zero diagonal.
pub fn knn_graph(features: &Matrix, k: usize, metric: Similarity) -> Result<Matrix> {
    let n = features.rows();
    if k == 0 || k >= n {
        return Err(Error::param(format!("k must satisfy 1 <= k < n (k = {k}, n = {n})")));
    }
    if !features.is_finite() {
        return Err(Error::param("features must be finite"));
    }
    let sim = similarity_matrix(features, metric)?;

    let mut adjacency = Matrix::zeros(n, n);
    let mut candidates: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        candidates.clear();
        candidates.extend((0..n).filter(|&j| j != i));
        let row = sim.row(i);
        candidates.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        for &j in &candidates[..k] {
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
    }
    Ok(adjacency)
}

/// Symmetric GCN propagation operator `D̃^(−1/2) (A + I) D̃^(−1/2)`, with `D̃`
/// the degree matrix of `A + I`.
pub fn normalize(adjacency: &Matrix) -> Result<Matrix> {
    let n = adjacency.rows();
    if adjacency.cols() != n {
        return Err(Error::Dimension {
            op: "normalize",
            left: adjacency.shape(),
            right: (n, n),
        });
    }
    let inv_sqrt_degree: Vec<f64> = (0..n)
        .map(|i| {
            let degree = adjacency.row(i).iter().sum::<f64>() - adjacency[(i, i)] + 1.0;
            1.0 / degree.sqrt()
        })
        .collect();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let a = if i == j { 1.0 } else { adjacency[(i, j)] };
            if a != 0.0 {
                out[(i, j)] = a * inv_sqrt_degree[i] * inv_sqrt_degree[j];
            }
        }
    }
    Ok(out)
}

/// Graph structure shared by every model trained on one dataset, plus the
/// interest / unlabeled node partition of a training split.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Arc<Matrix>,
    propagation: Arc<Matrix>,
    interest: Vec<usize>,
    unlabeled: Vec<usize>,
}

impl Graph {
    /// Wraps a binary symmetric adjacency with zero diagonal. Every node
    /// starts out unlabeled.
    pub fn new(adjacency: Matrix) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n || n == 0 {
            return Err(Error::param(format!(
                "adjacency must be square and non-empty, got {:?}",
                adjacency.shape()
            )));
        }
        if adjacency.as_slice().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::param("adjacency must be binary"));
        }
        if !adjacency.is_symmetric() {
            return Err(Error::param("adjacency must be symmetric"));
        }
        if (0..n).any(|i| adjacency[(i, i)] != 0.0) {
            return Err(Error::param("adjacency must have a zero diagonal"));
        }
        let propagation = normalize(&adjacency)?;
        Ok(Graph {
            adjacency: Arc::new(adjacency),
            propagation: Arc::new(propagation),
            interest: Vec::new(),
            unlabeled: (0..n).collect(),
        })
    }

    pub fn from_features(features: &Matrix, k: usize, metric: Similarity) -> Result<Self> {
        Graph::new(knn_graph(features, k, metric)?)
    }

    /// Same structure with `interest` as the labeled set and every other node
    /// unlabeled.
    pub fn with_interest(&self, interest: &[usize]) -> Result<Graph> {
        let n = self.len();
        let mut is_interest = vec![false; n];
        for &i in interest {
            if i >= n {
                return Err(Error::param(format!("interest node {i} out of range (n = {n})")));
            }
            if std::mem::replace(&mut is_interest[i], true) {
                return Err(Error::param(format!("interest node {i} listed twice")));
            }
        }
        let mut interest = interest.to_vec();
        interest.sort_unstable();
        Ok(Graph {
            adjacency: Arc::clone(&self.adjacency),
            propagation: Arc::clone(&self.propagation),
            interest,
            unlabeled: (0..n).filter(|&i| !is_interest[i]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    pub fn propagation(&self) -> &Matrix {
        &self.propagation
    }

    pub fn interest(&self) -> &[usize] {
        &self.interest
    }

    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }

    /// Undirected edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency[(i, j)] != 0.0)
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency.row(i).iter().filter(|&&v| v != 0.0).count()
    }
}
