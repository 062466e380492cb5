//! Confusion matrices, accuracy-vs-SNR curves and their CSV exchange
//! formats.
//!
//! Report files are named `{labelset}_{classifier}_{metric}[_{snr}].csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One classified example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub index: usize,
    #[serde(rename = "true")]
    pub truth: usize,
    #[serde(rename = "pred")]
    pub predicted: usize,
    pub snr_db: f64,
}

/// Counts with rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    class_names: Vec<String>,
    snr_db: Option<f64>,
    counts: Vec<Vec<u64>>,
}

pub fn confusion(truth: &[usize], predicted: &[usize], class_names: &[String], bucket: Option<f64>) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::Shape { expected: truth.len(), actual: predicted.len() });
    }
    let k = class_names.len();
    let mut m = ConfusionMatrix::zeros(class_names, bucket);
    for (&t, &p) in truth.iter().zip(predicted) {
        for label in [t, p] {
            if label >= k {
                return Err(Error::LabelOutOfRange { label, classes: k });
            }
        }
        m.counts[t][p] += 1;
    }
    Ok(m)
}

/// Fraction of positions where the labels agree.
pub fn accuracy(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::Shape { expected: truth.len(), actual: predicted.len() });
    }
    if truth.is_empty() {
        return Err(Error::Domain("accuracy of zero predictions".into()));
    }
    let hits = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / truth.len() as f64)
}

impl ConfusionMatrix {
    pub fn zeros(class_names: &[String], snr_db: Option<f64>) -> Self {
        let k = class_names.len();
        Self { class_names: class_names.to_vec(), snr_db, counts: vec![vec![0; k]; k] }
    }

    pub fn from_counts(class_names: &[String], snr_db: Option<f64>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = class_names.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::Shape { expected: k, actual: counts.len() });
        }
        Ok(Self { class_names: class_names.to_vec(), snr_db, counts })
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    /// Diagonal over row sum; zero for classes with no examples.
    pub fn per_class_accuracy(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: u64 = row.iter().sum();
                if n == 0 {
                    0.0
                } else {
                    row[i] as f64 / n as f64
                }
            })
            .collect()
    }

    /// Off-diagonal mass over the total.
    pub fn error_rate(&self) -> f64 {
        1.0 - self.accuracy()
    }

    /// Adds another matrix over the same classes.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.class_names != self.class_names {
            return Err(Error::Config("cannot merge matrices over different classes".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        if self.snr_db != other.snr_db {
            self.snr_db = None;
        }
        Ok(())
    }

    /// Relabels classes: old class `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.num_classes();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Config("not a permutation of the classes".into()));
        }
        let mut names = vec![String::new(); k];
        let mut counts = vec![vec![0; k]; k];
        for i in 0..k {
            names[perm[i]] = self.class_names[i].clone();
            for j in 0..k {
                counts[perm[i]][perm[j]] = self.counts[i][j];
            }
        }
        Ok(Self { class_names: names, snr_db: self.snr_db, counts })
    }

    /// Labeled `K×K` grid: header `true\pred,<names>`, then one row per
    /// true class.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("true\\pred");
        for n in &self.class_names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (name, row) in self.class_names.iter().zip(&self.counts) {
            s.push_str(name);
            for c in row {
                write!(s, ",{c}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str, snr_db: Option<f64>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let names: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_owned).collect();
        let mut counts = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.get(0) != names.get(i).map(String::as_str) {
                return Err(Error::Csv(format!("row {i} label does not match header")));
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|v| v.parse::<u64>().map_err(|e| Error::Csv(format!("bad count '{v}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            counts.push(row);
        }
        Self::from_counts(&names, snr_db, counts)
    }
}

/// Accuracy per SNR point with an optional per-class breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub snr_db: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub class_names: Vec<String>,
    /// `per_class[i][c]`: accuracy of class `c` at `snr_db[i]`.
    pub per_class: Option<Vec<Vec<f64>>>,
}

impl AccuracyCurve {
    pub fn len(&self) -> usize {
        self.snr_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snr_db.is_empty()
    }

    pub fn at(&self, snr_db: f64) -> Option<f64> {
        self.snr_db.iter().position(|&s| s == snr_db).map(|i| self.accuracy[i])
    }

    /// `snr_db,accuracy[,<class>...]` with six decimals in every field.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("snr_db,accuracy");
        if self.per_class.is_some() {
            for n in &self.class_names {
                s.push(',');
                s.push_str(n);
            }
        }
        s.push('\n');
        for i in 0..self.snr_db.len() {
            write!(s, "{:.6},{:.6}", self.snr_db[i], self.accuracy[i]).unwrap();
            if let Some(pc) = &self.per_class {
                for v in &pc[i] {
                    write!(s, ",{v:.6}").unwrap();
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("snr_db") || headers.get(1) != Some("accuracy") {
            return Err(Error::Csv("curve header must start with snr_db,accuracy".into()));
        }
        let class_names: Vec<String> = headers.iter().skip(2).map(str::to_owned).collect();
        let mut curve = AccuracyCurve {
            snr_db: Vec::new(),
            accuracy: Vec::new(),
            class_names: class_names.clone(),
            per_class: (!class_names.is_empty()).then(Vec::new),
        };
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Csv(format!("bad number '{v}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            curve.snr_db.push(vals[0]);
            curve.accuracy.push(vals[1]);
            if let Some(pc) = &mut curve.per_class {
                pc.push(vals[2..].to_vec());
            }
        }
        Ok(curve)
    }
}

/// Per-SNR confusion matrices, their aggregate and the accuracy curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub curve: AccuracyCurve,
    pub per_snr: Vec<ConfusionMatrix>,
    pub aggregate: ConfusionMatrix,
}

impl Evaluation {
    /// Buckets predictions by exact SNR value, ascending.
    pub fn from_predictions(predictions: &[Prediction], class_names: &[String]) -> Result<Self> {
        let mut grid: Vec<f64> = predictions.iter().map(|p| p.snr_db).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Self::on_grid(predictions, class_names, &grid)
    }

    /// Buckets predictions onto an explicit grid; every grid point must
    /// receive at least one prediction and every prediction a grid point.
    pub fn on_grid(predictions: &[Prediction], class_names: &[String], grid: &[f64]) -> Result<Self> {
        let mut per_snr: Vec<ConfusionMatrix> = grid.iter().map(|&s| ConfusionMatrix::zeros(class_names, Some(s))).collect();
        let k = class_names.len();
        for p in predictions {
            let bucket = grid
                .iter()
                .position(|&s| s == p.snr_db)
                .ok_or_else(|| Error::Config(format!("prediction {} at {} dB is off the grid", p.index, p.snr_db)))?;
            for label in [p.truth, p.predicted] {
                if label >= k {
                    return Err(Error::LabelOutOfRange { label, classes: k });
                }
            }
            per_snr[bucket].counts[p.truth][p.predicted] += 1;
        }
        if let Some(m) = per_snr.iter().find(|m| m.total() == 0) {
            return Err(Error::EmptyBucket(m.snr_db.unwrap()));
        }
        let mut aggregate = ConfusionMatrix::zeros(class_names, None);
        for m in &per_snr {
            aggregate.merge(m)?;
        }
        aggregate.snr_db = None;
        let curve = AccuracyCurve {
            snr_db: grid.to_vec(),
            accuracy: per_snr.iter().map(ConfusionMatrix::accuracy).collect(),
            class_names: class_names.to_vec(),
            per_class: Some(per_snr.iter().map(ConfusionMatrix::per_class_accuracy).collect()),
        };
        Ok(Self { curve, per_snr, aggregate })
    }

    /// Writes the curve, the aggregate matrix and one matrix per SNR.
    pub fn write_reports(&self, dir: &Path, labelset: &str, classifier: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join(report_file_name(labelset, classifier, "accuracy", None));
        export_curve(&self.curve, &path)?;
        written.push(path);
        let path = dir.join(report_file_name(labelset, classifier, "confusion", None));
        export_matrix(&self.aggregate, &path)?;
        written.push(path);
        for m in &self.per_snr {
            let path = dir.join(report_file_name(labelset, classifier, "confusion", m.snr_db));
            export_matrix(m, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Groups predictions by SNR and computes the accuracy curve.
pub fn curve(predictions: &[Prediction], class_names: &[String]) -> Result<AccuracyCurve> {
    Ok(Evaluation::from_predictions(predictions, class_names)?.curve)
}

pub fn report_file_name(labelset: &str, classifier: &str, metric: &str, snr_db: Option<f64>) -> String {
    match snr_db {
        Some(s) => format!("{labelset}_{classifier}_{metric}_{s}.csv"),
        None => format!("{labelset}_{classifier}_{metric}.csv"),
    }
}

pub fn export_curve(curve: &AccuracyCurve, path: &Path) -> Result<()> {
    fs::write(path, curve.to_csv())?;
    Ok(())
}

pub fn export_matrix(matrix: &ConfusionMatrix, path: &Path) -> Result<()> {
    fs::write(path, matrix.to_csv())?;
    Ok(())
}

pub fn read_curve(path: &Path) -> Result<AccuracyCurve> {
    AccuracyCurve::from_csv(&fs::read_to_string(path)?)
}

/// Reads `index,true,pred,snr_db` rows.
pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?;
    if headers.iter().collect::<Vec<_>>() != ["index", "true", "pred", "snr_db"] {
        return Err(Error::Csv(format!("expected header index,true,pred,snr_db in {}", path.display())));
    }
    Ok(rdr.deserialize().collect::<std::result::Result<Vec<Prediction>, _>>()?)
}

pub fn write_predictions(predictions: &[Prediction], path: &Path) -> Result<()> {
    let mut s = String::from("index,true,pred,snr_db\n");
    for p in predictions {
        writeln!(s, "{},{},{},{:.6}", p.index, p.truth, p.predicted, p.snr_db).unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

/// How `merge_curves` treats curves sampled on different grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridPolicy {
    /// Grids must be identical.
    Strict,
    /// Union of grids; points a curve lacks are left blank.
    Never,
    /// Union of grids; gaps inside a curve's range are linearly
    /// interpolated, points outside it are left blank.
    Linear,
}

/// Curves aligned on one SNR grid, one column per input.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedCurves {
    pub names: Vec<String>,
    pub snr_db: Vec<f64>,
    pub columns: Vec<Vec<Option<f64>>>,
}

pub fn merge_curves(curves: &[(String, AccuracyCurve)], policy: GridPolicy) -> Result<MergedCurves> {
    let first = curves.first().ok_or_else(|| Error::Config("nothing to merge".into()))?;
    let same_grid = curves.iter().all(|(_, c)| c.snr_db == first.1.snr_db);
    if !same_grid && policy == GridPolicy::Strict {
        let bad = curves.iter().find(|(_, c)| c.snr_db != first.1.snr_db).unwrap();
        return Err(Error::Config(format!(
            "SNR grid of '{}' differs from '{}'; pass --interpolate never or linear to align",
            bad.0, first.0
        )));
    }
    let mut grid: Vec<f64> = curves.iter().flat_map(|(_, c)| c.snr_db.iter().copied()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let columns = curves
        .iter()
        .map(|(_, c)| grid.iter().map(|&s| sample_curve(c, s, policy)).collect())
        .collect();
    Ok(MergedCurves { names: curves.iter().map(|(n, _)| n.clone()).collect(), snr_db: grid, columns })
}

fn sample_curve(c: &AccuracyCurve, snr: f64, policy: GridPolicy) -> Option<f64> {
    if let Some(v) = c.at(snr) {
        return Some(v);
    }
    if policy != GridPolicy::Linear {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = c.snr_db.iter().copied().zip(c.accuracy.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2).find(|w| w[0].0 < snr && snr < w[1].0).map(|w| {
        let t = (snr - w[0].0) / (w[1].0 - w[0].0);
        w[0].1 + t * (w[1].1 - w[0].1)
    })
}

impl MergedCurves {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("snr_db");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (i, snr) in self.snr_db.iter().enumerate() {
            write!(s, "{snr:.6}").unwrap();
            for col in &self.columns {
                match col[i] {
                    Some(v) => write!(s, ",{v:.6}").unwrap(),
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
        s
    }
}
