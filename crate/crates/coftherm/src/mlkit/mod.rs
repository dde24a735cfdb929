//! Feature-table analytics: Pearson correlations, random-forest
//! regression with Gini and permutation importance, and seeded k-fold
//! cross-validation.

mod forest;
mod rng;

pub use forest::{fit_forest, permutation_importance, ForestConfig, ForestModel};
pub use rng::Xoshiro256;

use std::path::Path;

use crate::{Error, Result};

/// Rows of named samples with numeric feature columns and one target
/// column (κ).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub feature_names: Vec<String>,
    /// `features[row][column]`
    pub features: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

/// Columns whose values must lie in [0, 1] when present.
const UNIT_INTERVAL_COLUMNS: &[&str] = &["void_fraction", "dmr"];

impl FeatureTable {
    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.names.len() != self.n_rows() || self.target.len() != self.n_rows() {
            return Err(Error::Regression(
                "names, features, and target lengths disagree".into(),
            ));
        }
        for (r, row) in self.features.iter().enumerate() {
            if row.len() != self.n_features() {
                return Err(Error::Regression(format!(
                    "row {r} has {} values for {} feature columns",
                    row.len(),
                    self.n_features()
                )));
            }
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Regression(format!(
                        "missing or non-finite value in row {r}, column {}",
                        self.feature_names[c]
                    )));
                }
            }
        }
        if self.target.iter().any(|v| !v.is_finite()) {
            return Err(Error::Regression("non-finite target value".into()));
        }
        for (c, name) in self.feature_names.iter().enumerate() {
            if UNIT_INTERVAL_COLUMNS.contains(&name.as_str()) {
                for (r, row) in self.features.iter().enumerate() {
                    let v = row[c];
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::Regression(format!(
                            "column {name} must lie in [0, 1]; row {r} has {v}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// CSV with a `name` column, feature columns, and a `kappa` target.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Regression(format!("{}: {e}", path.display())))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Regression(e.to_string()))?
            .iter()
            .map(|h| h.to_string())
            .collect();
        let name_col = headers.iter().position(|h| h == "name");
        let kappa_col = headers
            .iter()
            .position(|h| h == "kappa")
            .ok_or_else(|| Error::Regression("missing kappa column".into()))?;
        let feature_cols: Vec<usize> = (0..headers.len())
            .filter(|&i| Some(i) != name_col && i != kappa_col)
            .collect();

        let mut table = FeatureTable {
            names: Vec::new(),
            feature_names: feature_cols.iter().map(|&i| headers[i].clone()).collect(),
            features: Vec::new(),
            target: Vec::new(),
        };
        for (r, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Regression(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|_| {
                    Error::Regression(format!(
                        "row {r}: bad number {:?} in column {}",
                        &record[i], headers[i]
                    ))
                })
            };
            table.names.push(match name_col {
                Some(i) => record[i].to_string(),
                None => format!("row{r}"),
            });
            table.target.push(parse(kappa_col)?);
            table
                .features
                .push(feature_cols.iter().map(|&i| parse(i)).collect::<Result<_>>()?);
        }
        table.validate()?;
        Ok(table)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name");
        for f in &self.feature_names {
            out += &format!(",{f}");
        }
        out += ",kappa\n";
        for r in 0..self.n_rows() {
            out += &self.names[r];
            for v in &self.features[r] {
                out += &format!(",{v}");
            }
            out += &format!(",{}\n", self.target[r]);
        }
        out
    }

    /// A copy without the given feature column.
    pub fn drop_feature(&self, name: &str) -> Result<FeatureTable> {
        let col = self
            .feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::Regression(format!("no feature column named {name:?}")))?;
        Ok(FeatureTable {
            names: self.names.clone(),
            feature_names: self
                .feature_names
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != col)
                .map(|(_, f)| f.clone())
                .collect(),
            features: self
                .features
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != col)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect(),
            target: self.target.clone(),
        })
    }

    fn subset(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            names: rows.iter().map(|&r| self.names[r].clone()).collect(),
            feature_names: self.feature_names.clone(),
            features: rows.iter().map(|&r| self.features[r].clone()).collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
        }
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 points for a correlation".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Regression(
            "zero variance: correlation undefined".into(),
        ));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// R² = 1 − SS_res / SS_tot on the evaluation split.
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(Error::InvalidArgument("length mismatch in R²".into()));
    }
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|&y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Regression(
            "constant target on the evaluation split: R² undefined".into(),
        ));
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(&y, &p)| (y - p) * (y - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mae(y_true: &[f64], y_pred: &[f64]) -> f64 {
    y_true
        .iter()
        .zip(y_pred)
        .map(|(&y, &p)| (y - p).abs())
        .sum::<f64>()
        / y_true.len() as f64
}

/// Deterministic shuffled fold assignment: fold id per row. The first
/// `n mod k` folds receive one extra row.
pub fn fold_assignments(n_rows: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > n_rows {
        return Err(Error::InvalidArgument(format!(
            "k must be in [2, n_rows={n_rows}], got {k}"
        )));
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut rng = Xoshiro256::seed_from(seed);
    rng.shuffle(&mut order);
    let base = n_rows / k;
    let extra = n_rows % k;
    let mut assignment = vec![0usize; n_rows];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[cursor..cursor + size] {
            assignment[row] = fold;
        }
        cursor += size;
    }
    Ok(assignment)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CvResult {
    pub k: usize,
    pub mean_r2: f64,
    /// Population (ddof = 0) standard deviation of per-fold R².
    pub std_r2: f64,
    pub mean_mae: f64,
    pub fold_r2: Vec<f64>,
}

/// Seeded k-fold cross-validation of a random-forest regressor.
pub fn kfold_cv(table: &FeatureTable, k: usize, config: &ForestConfig) -> Result<CvResult> {
    table.validate()?;
    let assignment = fold_assignments(table.n_rows(), k, config.seed)?;
    let min_fold = (0..k)
        .map(|f| assignment.iter().filter(|&&a| a == f).count())
        .min()
        .unwrap();
    if min_fold < 2 {
        return Err(Error::Regression(format!(
            "fold of {min_fold} rows is too small (need ≥ 2)"
        )));
    }
    let mut fold_r2 = Vec::with_capacity(k);
    let mut fold_mae = Vec::with_capacity(k);
    for fold in 0..k {
        let train_rows: Vec<usize> = (0..table.n_rows())
            .filter(|&r| assignment[r] != fold)
            .collect();
        let test_rows: Vec<usize> = (0..table.n_rows())
            .filter(|&r| assignment[r] == fold)
            .collect();
        let train = table.subset(&train_rows);
        let test = table.subset(&test_rows);
        let model = fit_forest(&train, config)?;
        let preds = model.predict(&test);
        fold_r2.push(r2_score(&test.target, &preds)?);
        fold_mae.push(mae(&test.target, &preds));
    }
    let kf = k as f64;
    let mean_r2 = fold_r2.iter().sum::<f64>() / kf;
    let var = fold_r2.iter().map(|r| (r - mean_r2) * (r - mean_r2)).sum::<f64>() / kf;
    Ok(CvResult {
        k,
        mean_r2,
        std_r2: var.sqrt(),
        mean_mae: fold_mae.iter().sum::<f64>() / kf,
        fold_r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pearson_on_exact_lines() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y3: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let yneg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_relative_eq!(pearson(&x, &y3).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(pearson(&x, &yneg).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_zero_variance_is_an_error() {
        let x = vec![1.0, 1.0, 1.0];
        let y = vec![1.0, 2.0, 3.0];
        assert!(matches!(pearson(&x, &y), Err(Error::Regression(_))));
    }

    #[test]
    fn pearson_affine_invariance_and_sign_flip() {
        let x = vec![0.3, 1.7, 2.2, 4.8, 5.1, 6.6];
        let y = vec![2.0, 1.1, 3.9, 4.2, 5.8, 5.5];
        let r = pearson(&x, &y).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| 3.5 * v + 11.0).collect();
        assert_relative_eq!(pearson(&x2, &y).unwrap(), r, epsilon = 1e-12);
        let xneg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_relative_eq!(pearson(&xneg, &y).unwrap(), -r, epsilon = 1e-12);
    }

    #[test]
    fn fold_assignment_arithmetic() {
        // k = 2 on 4 rows → two folds of 2
        let a = fold_assignments(4, 2, 7).unwrap();
        assert_eq!(a.iter().filter(|&&f| f == 0).count(), 2);
        assert_eq!(a.iter().filter(|&&f| f == 1).count(), 2);
        // 10 rows, k = 3 → sizes 4, 3, 3
        let a = fold_assignments(10, 3, 7).unwrap();
        let sizes: Vec<usize> = (0..3)
            .map(|f| a.iter().filter(|&&x| x == f).count())
            .collect();
        assert_eq!(sizes, vec![4, 3, 3]);
    }

    #[test]
    fn fold_assignment_is_seed_deterministic() {
        assert_eq!(
            fold_assignments(50, 10, 3).unwrap(),
            fold_assignments(50, 10, 3).unwrap()
        );
        assert_ne!(
            fold_assignments(50, 10, 3).unwrap(),
            fold_assignments(50, 10, 4).unwrap()
        );
    }

    // memorization oracle: y is an exact linear function of a feature
    // with 8 repeated levels, so deep trees isolate every level into a
    // pure leaf and CV predictions are exact
    #[test]
    fn cv_on_memorizable_signal_reaches_r2_one() {
        let n_levels = 8;
        let reps = 40; // enough that no bootstrap drops a whole level
        let n = n_levels * reps;
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            rows.push((r % n_levels) as f64 / (n_levels - 1) as f64);
        }
        let table = FeatureTable {
            names: (0..n).map(|i| format!("row{i}")).collect(),
            feature_names: vec!["x1".into()],
            features: rows.iter().map(|&x| vec![x]).collect(),
            target: rows.iter().map(|&x| 3.0 * x + 1.0).collect(),
        };
        for k in [2, 5, 10] {
            let cv = kfold_cv(
                &table,
                k,
                &ForestConfig {
                    n_trees: 60,
                    mtry: Some(1),
                    seed: 5,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(
                (cv.mean_r2 - 1.0).abs() < 1e-6,
                "k={k}: mean R² = {}",
                cv.mean_r2
            );
        }
    }

    #[test]
    fn cv_is_bit_reproducible() {
        let table = forest::tests::synthetic_table(80, 2, 0.1, 22);
        let cfg = ForestConfig {
            n_trees: 10,
            seed: 12,
            ..Default::default()
        };
        let a = kfold_cv(&table, 4, &cfg).unwrap();
        let b = kfold_cv(&table, 4, &cfg).unwrap();
        assert_eq!(a.mean_r2.to_bits(), b.mean_r2.to_bits());
        assert_eq!(a.mean_mae.to_bits(), b.mean_mae.to_bits());
    }

    #[test]
    fn csv_roundtrip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        let table = FeatureTable {
            names: vec!["a".into(), "b".into()],
            feature_names: vec!["density".into(), "dmr".into()],
            features: vec![vec![0.5, 0.1], vec![0.9, 0.4]],
            target: vec![1.0, 2.0],
        };
        std::fs::write(&path, table.to_csv()).unwrap();
        let loaded = FeatureTable::from_csv(&path).unwrap();
        assert_eq!(loaded, table);
    }

    #[test]
    fn out_of_range_dmr_is_rejected() {
        let table = FeatureTable {
            names: vec!["a".into()],
            feature_names: vec!["dmr".into()],
            features: vec![vec![1.5]],
            target: vec![1.0],
        };
        assert!(table.validate().is_err());
    }

    #[test]
    fn drop_feature_removes_one_column() {
        let table = forest::tests::synthetic_table(30, 1, 0.0, 30);
        let dropped = table.drop_feature("x2").unwrap();
        assert_eq!(dropped.n_features(), table.n_features() - 1);
        assert!(dropped.feature_names.iter().all(|f| f != "x2"));
        assert!(dropped.features.iter().all(|r| r.len() == 2));
        assert!(table.drop_feature("nope").is_err());
    }
}
