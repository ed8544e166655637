use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphbuild::{make_folds, Dataset, FoldSplit, Graph, Label, Similarity};
use crate::model::{classify, EncoderConfig, TrainedModel};
use crate::train::{train, train_ocgnn, TrainConfig, TrainTrace};

use super::{f1_macro, inside_rate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Olga,
    OcgnnGcn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Olga => "olga",
            Method::OcgnnGcn => "ocgnn-gcn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "olga" => Ok(Method::Olga),
            "ocgnn-gcn" | "ocgnn" => Ok(Method::OcgnnGcn),
            other => Err(Error::param(format!(
                "unknown method `{other}` (expected olga or ocgnn-gcn)"
            ))),
        }
    }
}

/// Hyperparameter lists; the search space is their cartesian product.
/// `radius` applies to OLGA only, `nu` and `weight_decay` to OCGNN only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub k: Vec<usize>,
    pub radius: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub patience: Vec<usize>,
    pub embedding_dim: Vec<usize>,
    pub nu: Vec<f64>,
    pub weight_decay: Vec<f64>,
    /// Hidden layer widths, shared by every cell.
    pub hidden: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            k: vec![1, 2, 3],
            radius: vec![0.3, 0.35, 0.4],
            learning_rate: vec![0.0001, 0.0005],
            patience: vec![300, 500],
            embedding_dim: vec![2, 3],
            nu: vec![0.001, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5],
            weight_decay: vec![0.0005],
            hidden: vec![16],
        }
    }
}

/// Values along one method-specific grid axis; `None` when it does not apply.
type Axis = Vec<Option<f64>>;

/// One point of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub k: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub embedding_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_decay: Option<f64>,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={} lr={} patience={} dim={}",
            self.k, self.learning_rate, self.patience, self.embedding_dim
        )?;
        if let Some(r) = self.radius {
            write!(f, " r={r}")?;
        }
        if let Some(nu) = self.nu {
            write!(f, " nu={nu}")?;
        }
        if let Some(wd) = self.weight_decay {
            write!(f, " weight_decay={wd}")?;
        }
        Ok(())
    }
}

impl Grid {
    pub fn cells(&self, method: Method) -> Result<Vec<Cell>> {
        let check = |name: &str, empty: bool| {
            if empty {
                Err(Error::param(format!("grid list `{name}` is empty")))
            } else {
                Ok(())
            }
        };
        check("k", self.k.is_empty())?;
        check("learning_rate", self.learning_rate.is_empty())?;
        check("patience", self.patience.is_empty())?;
        check("embedding_dim", self.embedding_dim.is_empty())?;
        let (radii, nus, decays): (Axis, Axis, Axis) = match method {
            Method::Olga => {
                check("radius", self.radius.is_empty())?;
                (self.radius.iter().copied().map(Some).collect(), vec![None], vec![None])
            }
            Method::OcgnnGcn => {
                check("nu", self.nu.is_empty())?;
                check("weight_decay", self.weight_decay.is_empty())?;
                (
                    vec![None],
                    self.nu.iter().copied().map(Some).collect(),
                    self.weight_decay.iter().copied().map(Some).collect(),
                )
            }
        };
        let mut cells = Vec::new();
        for &k in &self.k {
            for &embedding_dim in &self.embedding_dim {
                for &radius in &radii {
                    for &nu in &nus {
                        for &weight_decay in &decays {
                            for &learning_rate in &self.learning_rate {
                                for &patience in &self.patience {
                                    cells.push(Cell {
                                        k,
                                        learning_rate,
                                        patience,
                                        embedding_dim,
                                        radius,
                                        nu,
                                        weight_decay,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub method: Method,
    pub grid: Grid,
    pub n_folds: usize,
    /// Seeds the fold split; fold `i` initializes weights with `seed + i`.
    pub seed: u64,
    pub max_epochs: usize,
    pub similarity: Similarity,
    pub snapshot_every: usize,
    /// Worker threads for folds; 0 uses all cores.
    pub jobs: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            method: Method::Olga,
            grid: Grid::default(),
            n_folds: 10,
            seed: 0,
            max_epochs: 5000,
            similarity: Similarity::Cosine,
            snapshot_every: 0,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_f1: f64,
    pub val_f1: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub selected: Cell,
    /// Share of test interest nodes inside the sphere.
    pub inside_interest: f64,
    /// Share of test non-interest nodes inside the sphere.
    pub inside_non_interest: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub dataset: String,
    pub folds: Vec<FoldResult>,
    pub mean: f64,
    /// Population standard deviation of the fold scores.
    pub std: f64,
    pub mean_inside_interest: f64,
    pub mean_inside_non_interest: f64,
    /// How often each cell was selected, keyed by its description.
    pub selection_counts: BTreeMap<String, usize>,
}

/// Report plus the model and training trace of each fold's selected cell.
#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub report: EvalReport,
    pub models: Vec<TrainedModel>,
    pub traces: Vec<TrainTrace>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Cross-validates `config.method` on `dataset`: each fold picks the grid
/// cell with the best validation f1-macro and reports its test score.
pub fn run_cv(dataset: &Dataset, config: &CvConfig) -> Result<CvOutcome> {
    let cells = config.grid.cells(config.method)?;
    let folds = make_folds(dataset, config.n_folds, config.seed)?;

    let mut ks: Vec<usize> = cells.iter().map(|c| c.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let graphs = ks
        .iter()
        .map(|&k| Ok((k, Graph::from_features(dataset.features(), k, config.similarity)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    let run = || -> Result<Vec<FoldOutput>> {
        folds
            .par_iter()
            .enumerate()
            .map(|(i, fold)| run_fold(dataset, i, fold, &cells, &graphs, config))
            .collect()
    };
    let results = if config.jobs == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::contract(format!("cannot start worker pool: {e}")))?
            .install(run)?
    };

    let mut fold_results = Vec::with_capacity(results.len());
    let mut models = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    for (result, model, trace) in results {
        fold_results.push(result);
        models.push(model);
        traces.push(trace);
    }
    let scores: Vec<f64> = fold_results.iter().map(|f| f.test_f1).collect();
    let (mean, std) = mean_std(&scores);
    let (mean_inside_interest, _) = mean_std(&fold_results.iter().map(|f| f.inside_interest).collect::<Vec<_>>());
    let (mean_inside_non_interest, _) =
        mean_std(&fold_results.iter().map(|f| f.inside_non_interest).collect::<Vec<_>>());
    let mut selection_counts = BTreeMap::new();
    for f in &fold_results {
        *selection_counts.entry(f.selected.to_string()).or_insert(0) += 1;
    }
    Ok(CvOutcome {
        report: EvalReport {
            method: config.method,
            dataset: dataset.name().to_string(),
            folds: fold_results,
            mean,
            std,
            mean_inside_interest,
            mean_inside_non_interest,
            selection_counts,
        },
        models,
        traces,
    })
}

type FoldOutput = (FoldResult, TrainedModel, TrainTrace);

fn run_fold(
    dataset: &Dataset,
    index: usize,
    fold: &FoldSplit,
    cells: &[Cell],
    graphs: &BTreeMap<usize, Graph>,
    config: &CvConfig,
) -> Result<FoldOutput> {
    let input = dataset.features().cols();
    let mut best: Option<(f64, Cell, TrainedModel, TrainTrace, &Graph)> = None;
    for cell in cells {
        let annotate = |source: Error| Error::Fold {
            fold: index,
            cell: cell.to_string(),
            source: Box::new(source),
        };
        let graph = &graphs[&cell.k];
        let train_config = TrainConfig {
            max_epochs: config.max_epochs,
            patience: cell.patience,
            learning_rate: cell.learning_rate,
            seed: config.seed.wrapping_add(index as u64),
            snapshot_every: config.snapshot_every,
        };
        let (model, trace) = match (config.method, cell.radius, cell.nu, cell.weight_decay) {
            (Method::Olga, Some(r), _, _) => {
                let encoder = EncoderConfig::olga(input, &config.grid.hidden, cell.embedding_dim).map_err(annotate)?;
                train(graph, dataset, fold, &encoder, r, &train_config)
            }
            (Method::OcgnnGcn, _, Some(nu), Some(wd)) => {
                let encoder = EncoderConfig::ocgnn(input, &config.grid.hidden, cell.embedding_dim).map_err(annotate)?;
                train_ocgnn(graph, dataset, fold, &encoder, &train_config, nu, wd)
            }
            _ => return Err(Error::contract("grid cell does not match the method")),
        }
        .map_err(annotate)?;
        let val_f1 = trace.best().map_or(f64::NEG_INFINITY, |r| r.val_f1);
        if best.as_ref().is_none_or(|(f1, ..)| val_f1 > *f1) {
            best = Some((val_f1, cell.clone(), model, trace, graph));
        }
    }
    let (val_f1, selected, model, trace, graph) = best.ok_or_else(|| Error::param("grid is empty"))?;

    let partitioned = graph.with_interest(&fold.train_interest)?;
    let h = model.embed(&partitioned, dataset.features())?;
    let predicted = classify(&h, &model.sphere)?;
    let test = fold.test_nodes();
    let pred: Vec<Label> = test.iter().map(|&i| predicted[i]).collect();
    let truth: Vec<Label> = test.iter().map(|&i| dataset.labels()[i]).collect();

    Ok((
        FoldResult {
            fold: index,
            test_f1: f1_macro(&pred, &truth)?,
            val_f1,
            best_epoch: trace.best_epoch,
            epochs_run: trace.epochs.len(),
            selected,
            inside_interest: inside_rate(&h, &fold.test_interest, &model.sphere)?,
            inside_non_interest: inside_rate(&h, &fold.test_non_interest, &model.sphere)?,
            radius: model.sphere.radius,
        },
        model,
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumeration() {
        let grid = Grid::default();
        assert_eq!(grid.cells(Method::Olga).unwrap().len(), 3 * 3 * 2 * 2 * 2);
        assert_eq!(grid.cells(Method::OcgnnGcn).unwrap().len(), 3 * 7 * 2 * 2 * 2);
        let empty = Grid {
            radius: vec![],
            ..Grid::default()
        };
        assert!(empty.cells(Method::Olga).is_err());
        assert!(empty.cells(Method::OcgnnGcn).is_ok());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Olga, Method::OcgnnGcn] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("svm".parse::<Method>().is_err());
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
