use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Two-tailed Nemenyi critical values at α = 0.05 for m = 2..=10 methods.
const NEMENYI_Q05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];

/// Scores with one row per dataset and one column per method; higher is better.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn new(methods: Vec<String>, datasets: Vec<String>, scores: Vec<Vec<f64>>) -> Result<Self> {
        if datasets.len() != scores.len() {
            return Err(Error::param(format!(
                "{} dataset names for {} rows",
                datasets.len(),
                scores.len()
            )));
        }
        if let Some((i, row)) = scores.iter().enumerate().find(|(_, r)| r.len() != methods.len()) {
            return Err(Error::param(format!(
                "row {i} has {} scores for {} methods",
                row.len(),
                methods.len()
            )));
        }
        if scores.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("scores must be finite"));
        }
        Ok(ScoreTable {
            methods,
            datasets,
            scores,
        })
    }

    /// Reads `dataset,<method>,<method>,...` CSV.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let parse_err = |row: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => Error::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::other(e.to_string()),
                },
                _ => parse_err(0, e.to_string()),
            })?;
        let header = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        let methods: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut scores = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != methods.len() + 1 {
                return Err(parse_err(
                    row,
                    format!("expected {} fields, found {}", methods.len() + 1, record.len()),
                ));
            }
            datasets.push(record[0].to_string());
            scores.push(
                record
                    .iter()
                    .skip(1)
                    .map(|s| s.parse::<f64>().map_err(|_| parse_err(row, format!("bad score `{s}`"))))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        ScoreTable::new(methods, datasets, scores).map_err(|e| match e {
            Error::Parameter(message) => Error::Format {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificantPair {
    pub a: String,
    pub b: String,
    pub rank_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub methods: Vec<String>,
    pub avg_ranks: Vec<f64>,
    pub cd: f64,
    pub significant_pairs: Vec<SignificantPair>,
    pub datasets: Vec<String>,
    /// Per-dataset ranks, 1 = best, ties averaged.
    pub ranks: Vec<Vec<f64>>,
    pub friedman_chi2: f64,
    pub friedman_p: f64,
}

impl RankResult {
    pub fn rank_of(&self, method: &str) -> Option<f64> {
        self.methods.iter().position(|m| m == method).map(|i| self.avg_ranks[i])
    }

    pub fn is_significant(&self, a: &str, b: &str) -> bool {
        self.significant_pairs
            .iter()
            .any(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }

    /// Methods by ascending average rank, with the CD and significant pairs.
    pub fn summary(&self) -> String {
        let mut order: Vec<usize> = (0..self.methods.len()).collect();
        order.sort_by(|&i, &j| self.avg_ranks[i].total_cmp(&self.avg_ranks[j]).then(i.cmp(&j)));
        let width = self.methods.iter().map(String::len).max().unwrap_or(0);
        let mut out = String::from("average ranks:\n");
        for i in order {
            out.push_str(&format!("  {:<width$}  {:.4}\n", self.methods[i], self.avg_ranks[i]));
        }
        out.push_str(&format!(
            "friedman chi2 = {:.4}, p = {:.3e}\ncritical difference = {:.4}\n",
            self.friedman_chi2, self.friedman_p, self.cd
        ));
        if self.significant_pairs.is_empty() {
            out.push_str("no significant pairs\n");
        } else {
            out.push_str("significant pairs:\n");
            for p in &self.significant_pairs {
                out.push_str(&format!("  {} vs {} (gap {:.4})\n", p.a, p.b, p.rank_gap));
            }
        }
        out
    }
}

/// Ranks `values` descending (1 = largest), averaging ranks over ties.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Friedman test over datasets with the Nemenyi critical difference.
pub fn friedman_nemenyi(table: &ScoreTable) -> Result<RankResult> {
    let m = table.methods.len();
    let n = table.scores.len();
    if m < 2 || n < 2 {
        return Err(Error::param(format!(
            "rank analysis needs at least 2 methods and 2 datasets, got {m} and {n}"
        )));
    }
    let q = *NEMENYI_Q05
        .get(m - 2)
        .ok_or_else(|| Error::param(format!("critical values are tabulated for at most 10 methods, got {m}")))?;

    let ranks: Vec<Vec<f64>> = table.scores.iter().map(|row| average_ranks(row)).collect();
    let avg_ranks: Vec<f64> = (0..m)
        .map(|j| ranks.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();

    let (mf, nf) = (m as f64, n as f64);
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let chi2 = 12.0 * nf / (mf * (mf + 1.0)) * (sum_sq - mf * (mf + 1.0).powi(2) / 4.0);
    let chi2 = chi2.max(0.0);
    let p = ChiSquared::new(mf - 1.0).map_or(f64::NAN, |d| d.sf(chi2));
    let cd = q * (mf * (mf + 1.0) / (6.0 * nf)).sqrt();

    let mut significant_pairs = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let gap = (avg_ranks[a] - avg_ranks[b]).abs();
            if gap > cd {
                significant_pairs.push(SignificantPair {
                    a: table.methods[a].clone(),
                    b: table.methods[b].clone(),
                    rank_gap: gap,
                });
            }
        }
    }

    Ok(RankResult {
        methods: table.methods.clone(),
        avg_ranks,
        cd,
        significant_pairs,
        datasets: table.datasets.clone(),
        ranks,
        friedman_chi2: chi2,
        friedman_p: p,
    })
}
