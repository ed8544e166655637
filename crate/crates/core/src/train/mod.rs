//! Full-batch training: Adam updates, the two-phase OLGA loss schedule, the
//! alternating OCGNN radius update and early stopping on validation f1-macro.

mod adam;
mod trace;

pub use adam::Adam;
pub(crate) use trace::write_file;
pub use trace::{read_snapshots_csv, EpochRecord, SnapshotRecord, TrainTrace};

use crate::error::{Error, Result};
use crate::evaluate::f1_macro;
use crate::graphbuild::{Dataset, FoldSplit, Graph, Label};
use crate::model::{
    classify, decode_on, encode_on, loss_l1_on, loss_total_on, ocgnn_center, ocgnn_loss_on, ocgnn_radius,
    reconstruction_on, EncoderConfig, HypersphereConfig, LossWeights, ModelParams, TrainedModel,
};
use crate::numcore::{Matrix, Tape};

/// Epochs between OCGNN radius updates.
pub const RADIUS_UPDATE_EVERY: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub learning_rate: f64,
    /// Seeds weight initialization.
    pub seed: u64,
    /// Capture embeddings every this many epochs; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 5000,
            patience: 300,
            learning_rate: 0.0005,
            seed: 0,
            snapshot_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patience == 0 || self.patience >= self.max_epochs {
            return Err(Error::param(format!(
                "patience must satisfy 0 < patience < max_epochs ({} vs {})",
                self.patience, self.max_epochs
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// OLGA's two-phase enabler schedule: reconstruction only before
/// `⌊patience/2⌋`, hypersphere plus unlabeled reconstruction from then on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub patience: usize,
}

impl Schedule {
    pub fn switch_epoch(self) -> usize {
        self.patience / 2
    }

    pub fn weights(self, epoch: usize) -> LossWeights {
        if epoch < self.switch_epoch() {
            LossWeights::RECONSTRUCTION
        } else {
            LossWeights::ONE_CLASS
        }
    }
}

/// Which objective a [`Trainer`] optimizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Hypersphere of the given radius at the origin, combined with
    /// reconstruction losses under [`Schedule`].
    Olga { radius: f64 },
    /// OCGNN hinge loss with center from the initial forward pass and radius
    /// re-estimated every [`RADIUS_UPDATE_EVERY`] epochs.
    Ocgnn { nu: f64, weight_decay: f64 },
}

/// Loss values of one epoch. For OCGNN only `total` is meaningful and
/// `l1` repeats it; `l2` and `l3` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    pub total: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

/// Everything observed during one epoch, before the parameter update.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub epoch: usize,
    pub weights: Option<LossWeights>,
    pub losses: Losses,
    pub val_f1: f64,
    /// ∂loss/∂θ in [`ModelParams::to_matrices`] order.
    pub gradients: Vec<Matrix>,
    pub embeddings: Matrix,
    /// Sphere used for this epoch's loss and validation.
    pub sphere: HypersphereConfig,
}

/// Step-wise optimizer for one (dataset, fold, hyperparameter) cell.
pub struct Trainer<'a> {
    graph: Graph,
    features: &'a Matrix,
    labels: &'a [Label],
    validation: Vec<usize>,
    validation_truth: Vec<Label>,
    encoder: EncoderConfig,
    objective: Objective,
    schedule: Schedule,
    params: ModelParams,
    sphere: HypersphereConfig,
    adam: Adam,
    epoch: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(
        graph: &Graph,
        dataset: &'a Dataset,
        fold: &FoldSplit,
        encoder: &EncoderConfig,
        objective: Objective,
        config: &TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        encoder.validate()?;
        if graph.len() != dataset.len() {
            return Err(Error::param(format!(
                "graph has {} nodes but the dataset has {}",
                graph.len(),
                dataset.len()
            )));
        }
        if fold.train_interest.is_empty() {
            return Err(Error::param("fold has no training interest nodes"));
        }
        let graph = graph.with_interest(&fold.train_interest)?;
        let params = ModelParams::init(encoder, config.seed);
        let dim = encoder.embedding_dim();

        let sphere = match objective {
            Objective::Olga { radius } => HypersphereConfig::at_origin(dim, radius)?,
            Objective::Ocgnn { nu, weight_decay } => {
                if !(nu > 0.0 && nu < 1.0) {
                    return Err(Error::param(format!("OCGNN needs nu in (0, 1), got {nu}")));
                }
                let mut tape = Tape::new();
                let vars = encode_on(&mut tape, &graph, dataset.features(), encoder, &params)?;
                let h = tape.value(vars.embeddings);
                let center = ocgnn_center(h, graph.interest())?;
                let radius = ocgnn_radius(h, graph.interest(), &center, nu)?;
                HypersphereConfig::ocgnn(center, radius, nu, weight_decay)?
            }
        };

        let validation = fold.validation_nodes();
        let validation_truth = validation.iter().map(|&i| dataset.labels()[i]).collect();
        Ok(Trainer {
            graph,
            features: dataset.features(),
            labels: dataset.labels(),
            validation,
            validation_truth,
            encoder: encoder.clone(),
            objective,
            schedule: Schedule {
                patience: config.patience,
            },
            params,
            sphere,
            adam: Adam::new(config.learning_rate),
            epoch: 0,
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn sphere(&self) -> &HypersphereConfig {
        &self.sphere
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn encoder(&self) -> &EncoderConfig {
        &self.encoder
    }

    /// Overrides the sphere radius, e.g. to probe which epochs depend on it.
    pub fn set_radius(&mut self, radius: f64) {
        self.sphere.radius = radius;
    }

    /// Forward pass, loss, backward pass and one Adam update.
    pub fn step(&mut self) -> Result<StepReport> {
        let epoch = self.epoch;
        let mut tape = Tape::new();
        let vars = encode_on(&mut tape, &self.graph, self.features, &self.encoder, &self.params)?;
        let h = vars.embeddings;

        let (loss, losses, weights) = match self.objective {
            Objective::Olga { .. } => {
                let weights = self.schedule.weights(epoch);
                let a_hat = decode_on(&mut tape, h)?;
                let l1 = loss_l1_on(&mut tape, h, self.graph.interest(), &self.sphere)?;
                let l2 = reconstruction_on(&mut tape, self.graph.adjacency(), a_hat, self.graph.interest())?;
                let l3 = if self.graph.unlabeled().is_empty() {
                    tape.constant(Matrix::scalar(0.0))
                } else {
                    reconstruction_on(&mut tape, self.graph.adjacency(), a_hat, self.graph.unlabeled())?
                };
                let total = loss_total_on(&mut tape, l1, l2, l3, weights)?;
                let losses = Losses {
                    total: tape.scalar(total)?,
                    l1: tape.scalar(l1)?,
                    l2: tape.scalar(l2)?,
                    l3: tape.scalar(l3)?,
                };
                (total, losses, Some(weights))
            }
            Objective::Ocgnn { nu, .. } => {
                if epoch > 0 && epoch.is_multiple_of(RADIUS_UPDATE_EVERY) {
                    let radius = ocgnn_radius(tape.value(h), self.graph.interest(), &self.sphere.center, nu)?;
                    self.sphere.radius = radius;
                }
                let weights: Vec<_> = vars.weights().collect();
                let loss = ocgnn_loss_on(&mut tape, h, self.graph.interest(), &self.sphere, &weights)?;
                let value = tape.scalar(loss)?;
                let losses = Losses {
                    total: value,
                    l1: value,
                    l2: 0.0,
                    l3: 0.0,
                };
                (loss, losses, None)
            }
        };

        if !losses.total.is_finite() || !tape.value(h).is_finite() {
            return Err(Error::Diverged {
                epoch,
                message: format!("non-finite loss {}", losses.total),
            });
        }

        let embeddings = tape.value(h).clone();
        let predicted: Vec<Label> = classify(&embeddings.select_rows(&self.validation)?, &self.sphere)?;
        let val_f1 = f1_macro(&predicted, &self.validation_truth)?;

        let grads = tape.backward(loss)?;
        let gradients: Vec<Matrix> = vars.params.iter().map(|&v| grads.wrt(&tape, v)).collect();
        if gradients.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                message: "non-finite gradient".into(),
            });
        }
        self.adam.step(self.params.matrices_mut(), &gradients)?;
        self.epoch += 1;

        Ok(StepReport {
            epoch,
            weights,
            losses,
            val_f1,
            gradients,
            embeddings,
            sphere: self.sphere.clone(),
        })
    }

    /// Runs until `max_epochs` or until validation f1-macro has not improved
    /// for `patience` epochs, and returns the model of the best epoch (the
    /// earliest one on ties).
    pub fn fit(mut self, config: &TrainConfig) -> Result<(TrainedModel, TrainTrace)> {
        let mut trace = TrainTrace::default();
        let mut best: Option<(f64, ModelParams, HypersphereConfig)> = None;
        let mut history: Vec<(usize, Matrix)> = Vec::new();

        while self.epoch < config.max_epochs {
            let params_before = self.params.clone();
            let report = self.step()?;
            trace.epochs.push(EpochRecord {
                epoch: report.epoch,
                loss_total: report.losses.total,
                loss_l1: report.losses.l1,
                loss_l2: report.losses.l2,
                loss_l3: report.losses.l3,
                val_f1: report.val_f1,
            });
            if best.as_ref().is_none_or(|(f1, _, _)| report.val_f1 > *f1) {
                best = Some((report.val_f1, params_before, report.sphere.clone()));
                trace.best_epoch = report.epoch;
                // the final best epoch can only move later, so earlier
                // off-grid epochs below the current midpoint are never needed
                let every = config.snapshot_every;
                if every > 0 {
                    let floor = (every + trace.best_epoch) / 2;
                    history.retain(|(e, _)| e % every == 0 || *e >= floor);
                }
            }
            if config.snapshot_every > 0 {
                history.push((report.epoch, report.embeddings));
            }
            if report.epoch - trace.best_epoch >= config.patience {
                break;
            }
        }

        if config.snapshot_every > 0 {
            let epochs = snapshot_epochs(config.snapshot_every, trace.best_epoch, self.epoch.saturating_sub(1));
            for (epoch, h) in history.into_iter().filter(|(e, _)| epochs.contains(e)) {
                trace.snapshots.extend(snapshot(&h, epoch, self.labels));
            }
        }

        let (_, params, sphere) = best.ok_or_else(|| Error::param("max_epochs must be positive"))?;
        let model = TrainedModel {
            config: self.encoder,
            params,
            sphere,
        };
        Ok((model, trace))
    }
}

/// Epochs whose embeddings are kept: every multiple of `every` up to `last`,
/// the best epoch, and the midpoint between the first non-zero multiple and
/// the best epoch.
pub fn snapshot_epochs(every: usize, best: usize, last: usize) -> Vec<usize> {
    if every == 0 {
        return Vec::new();
    }
    let mut epochs: Vec<usize> = (0..=last).step_by(every).collect();
    epochs.push(best.min(last));
    if best > every {
        epochs.push((every + best) / 2);
    }
    epochs.sort_unstable();
    epochs.dedup();
    epochs
}

/// One record per node with its embedding coordinates.
pub fn snapshot(embeddings: &Matrix, epoch: usize, labels: &[Label]) -> Vec<SnapshotRecord> {
    (0..embeddings.rows())
        .map(|i| SnapshotRecord {
            epoch,
            node_id: i,
            label: labels[i],
            coords: embeddings.row(i).to_vec(),
        })
        .collect()
}

/// Trains OLGA on one fold.
pub fn train(
    graph: &Graph,
    dataset: &Dataset,
    fold: &FoldSplit,
    encoder: &EncoderConfig,
    radius: f64,
    config: &TrainConfig,
) -> Result<(TrainedModel, TrainTrace)> {
    Trainer::new(graph, dataset, fold, encoder, Objective::Olga { radius }, config)?.fit(config)
}

/// Trains the OCGNN baseline on one fold.
pub fn train_ocgnn(
    graph: &Graph,
    dataset: &Dataset,
    fold: &FoldSplit,
    encoder: &EncoderConfig,
    config: &TrainConfig,
    nu: f64,
    weight_decay: f64,
) -> Result<(TrainedModel, TrainTrace)> {
    let objective = Objective::Ocgnn { nu, weight_decay };
    Trainer::new(graph, dataset, fold, encoder, objective, config)?.fit(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphbuild::{make_folds, synth_dataset, Similarity, SynthKind};

    #[test]
    fn schedule_switches_at_half_patience() {
        let s = Schedule { patience: 300 };
        assert_eq!(s.switch_epoch(), 150);
        assert_eq!(s.weights(0), LossWeights::RECONSTRUCTION);
        assert_eq!(s.weights(149), LossWeights::RECONSTRUCTION);
        assert_eq!(s.weights(150), LossWeights::ONE_CLASS);
        assert_eq!(Schedule { patience: 301 }.switch_epoch(), 150);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            patience: 5000,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn snapshot_epoch_selection() {
        assert_eq!(snapshot_epochs(0, 10, 20), Vec::<usize>::new());
        // 0, 150, midpoint(150, 600) = 375, 300, 450, 600 (best), 750, 900
        assert_eq!(
            snapshot_epochs(150, 600, 900),
            vec![0, 150, 300, 375, 450, 600, 750, 900]
        );
        assert_eq!(snapshot_epochs(150, 40, 100), vec![0, 40]);
    }

    fn small_problem() -> (Dataset, Graph, FoldSplit) {
        let ds = synth_dataset(SynthKind::Blobs, 30, 30, 3).unwrap();
        let graph = Graph::from_features(ds.features(), 3, Similarity::Cosine).unwrap();
        let fold = make_folds(&ds, 10, 0).unwrap().remove(0);
        (ds, graph, fold)
    }

    #[test]
    fn training_is_deterministic() {
        let (ds, graph, fold) = small_problem();
        let encoder = EncoderConfig::olga(ds.features().cols(), &[8], 2).unwrap();
        let config = TrainConfig {
            max_epochs: 60,
            patience: 20,
            learning_rate: 0.01,
            seed: 5,
            snapshot_every: 10,
        };
        let (m1, t1) = train(&graph, &ds, &fold, &encoder, 0.3, &config).unwrap();
        let (m2, t2) = train(&graph, &ds, &fold, &encoder, 0.3, &config).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(t1, t2);
        assert!(t1.best_epoch <= t1.last_epoch().unwrap());
        assert!(t1.snapshots.iter().all(|s| s.coords.len() == 2));
        assert_eq!(t1.snapshot_epochs()[0], 0);
    }

    #[test]
    fn best_epoch_has_maximal_validation_f1() {
        let (ds, graph, fold) = small_problem();
        let encoder = EncoderConfig::olga(ds.features().cols(), &[8], 2).unwrap();
        let config = TrainConfig {
            max_epochs: 120,
            patience: 40,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let (model, trace) = train(&graph, &ds, &fold, &encoder, 0.3, &config).unwrap();
        let max = trace.epochs.iter().map(|r| r.val_f1).fold(f64::MIN, f64::max);
        let best = trace.best().unwrap();
        assert_eq!(best.val_f1, max);
        assert!(trace
            .epochs
            .iter()
            .take_while(|r| r.epoch < best.epoch)
            .all(|r| r.val_f1 < max));

        // the returned model reproduces the best validation score
        let g = graph.with_interest(&fold.train_interest).unwrap();
        let val = fold.validation_nodes();
        let pred = model.predict(&g, ds.features()).unwrap();
        let pred: Vec<Label> = val.iter().map(|&i| pred[i]).collect();
        let truth: Vec<Label> = val.iter().map(|&i| ds.labels()[i]).collect();
        assert_eq!(f1_macro(&pred, &truth).unwrap(), max);
    }

    #[test]
    fn no_snapshots_when_disabled() {
        let (ds, graph, fold) = small_problem();
        let encoder = EncoderConfig::olga(ds.features().cols(), &[], 2).unwrap();
        let config = TrainConfig {
            max_epochs: 10,
            patience: 4,
            ..TrainConfig::default()
        };
        let (_, trace) = train(&graph, &ds, &fold, &encoder, 0.3, &config).unwrap();
        assert!(trace.snapshots.is_empty());
    }

    #[test]
    fn ocgnn_center_is_initial_interest_mean() {
        let (ds, graph, fold) = small_problem();
        let encoder = EncoderConfig::ocgnn(ds.features().cols(), &[8], 4).unwrap();
        let config = TrainConfig {
            max_epochs: 30,
            patience: 10,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let trainer = Trainer::new(
            &graph,
            &ds,
            &fold,
            &encoder,
            Objective::Ocgnn {
                nu: 0.1,
                weight_decay: 0.0005,
            },
            &config,
        )
        .unwrap();
        let h = crate::model::encode(trainer.graph(), ds.features(), &encoder, trainer.params()).unwrap();
        let expected = ocgnn_center(&h, &fold.train_interest).unwrap();
        assert_eq!(trainer.sphere().center, expected);

        let (model, _) = trainer.fit(&config).unwrap();
        assert_eq!(model.sphere.center, expected);
    }

    #[test]
    fn divergence_names_the_epoch() {
        // unbounded activation on huge features overflows once the sphere term is on
        let (ds, graph, fold) = small_problem();
        let huge = ds.features().map(|v| v * 1e200);
        let ds = Dataset::new("huge", huge, ds.labels().to_vec()).unwrap();
        let encoder = EncoderConfig {
            dims: vec![ds.features().cols(), 2],
            hidden_activation: crate::numcore::Elementwise::Relu,
            final_activation: crate::numcore::Elementwise::ExpLinear,
        };
        let config = TrainConfig {
            max_epochs: 50,
            patience: 10,
            ..TrainConfig::default()
        };
        let err = train(&graph, &ds, &fold, &encoder, 0.3, &config).unwrap_err();
        let Error::Diverged { epoch, .. } = err else {
            panic!("expected divergence, got {err}");
        };
        assert!(err.to_string().contains(&format!("epoch {epoch}")));
    }
}
