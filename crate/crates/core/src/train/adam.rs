use crate::error::{Error, Result};
use crate::numcore::Matrix;

/// Adam with bias-corrected first and second moments.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    /// Applies one update to `params` in place. The i-th gradient must match
    /// the i-th parameter's shape, and the parameter list must keep the same
    /// layout across calls.
    pub fn step<'a>(&mut self, params: impl IntoIterator<Item = &'a mut Matrix>, grads: &[Matrix]) -> Result<()> {
        let params: Vec<&mut Matrix> = params.into_iter().collect();
        if params.len() != grads.len() {
            return Err(Error::contract(format!(
                "adam: {} parameters but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        if self.first.is_empty() {
            self.first = grads.iter().map(|g| Matrix::zeros(g.rows(), g.cols())).collect();
            self.second = self.first.clone();
        }
        self.step += 1;
        let bias1 = 1.0 - self.beta1.powi(self.step);
        let bias2 = 1.0 - self.beta2.powi(self.step);

        for (k, (p, g)) in params.into_iter().zip(grads).enumerate() {
            if p.shape() != g.shape() || self.first[k].shape() != g.shape() {
                return Err(Error::Dimension {
                    op: "adam",
                    left: p.shape(),
                    right: g.shape(),
                });
            }
            let m = self.first[k].as_mut_slice();
            let v = self.second[k].as_mut_slice();
            for (((w, &g), m), v) in p.as_mut_slice().iter_mut().zip(g.as_slice()).zip(m).zip(v) {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *w -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}
