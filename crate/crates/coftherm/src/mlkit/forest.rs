//! Random-forest regression: bootstrap-sampled variance-reduction CART
//! trees with per-split feature subsampling, Gini (impurity-decrease)
//! importance, and out-of-bag predictions. Fitting is deterministic for
//! a given seed: each tree owns an independent PRNG stream, so rayon
//! parallelism cannot change results.

use rayon::prelude::*;

use super::rng::Xoshiro256;
use super::FeatureTable;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ForestConfig {
    /// Number of trees (production default 100).
    pub n_trees: usize,
    /// Features tried per split; default ⌈n_features / 3⌉.
    pub mtry: Option<usize>,
    /// Minimum samples in a leaf.
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            mtry: None,
            min_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
    /// normalized per-feature impurity decrease for this tree
    importances: Vec<f64>,
    /// rows never drawn in this tree's bootstrap
    oob_rows: Vec<usize>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Tree>,
    pub n_features: usize,
    pub config: ForestConfig,
    n_train_rows: usize,
}

const MIN_FIT_ROWS: usize = 20;

pub fn fit_forest(table: &FeatureTable, config: &ForestConfig) -> Result<ForestModel> {
    let n = table.n_rows();
    let p = table.n_features();
    if n < MIN_FIT_ROWS {
        return Err(Error::Regression(format!(
            "need at least {MIN_FIT_ROWS} rows to fit a forest, got {n}"
        )));
    }
    if config.n_trees == 0 {
        return Err(Error::Regression("n_trees must be positive".into()));
    }
    if config.min_leaf == 0 {
        return Err(Error::Regression("min_leaf must be positive".into()));
    }
    let mtry = config.mtry.unwrap_or_else(|| p.div_ceil(3));
    if mtry == 0 || mtry > p {
        return Err(Error::Regression(format!(
            "mtry must be in [1, {p}], got {mtry}"
        )));
    }
    let spread = table
        .target
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    if spread.0 == spread.1 {
        return Err(Error::Regression(
            "degenerate constant target: nothing to regress".into(),
        ));
    }

    let trees: Vec<Tree> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = Xoshiro256::seed_from(config.seed ^ (t as u64).wrapping_mul(0x9e3779b9));
            grow_tree(table, mtry, config.min_leaf, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_features: p,
        config: config.clone(),
        n_train_rows: n,
    })
}

fn grow_tree(table: &FeatureTable, mtry: usize, min_leaf: usize, rng: &mut Xoshiro256) -> Tree {
    let n = table.n_rows();
    let p = table.n_features();
    let mut in_bag = vec![false; n];
    let mut rows: Vec<usize> = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.below(n);
        in_bag[r] = true;
        rows.push(r);
    }
    let oob_rows: Vec<usize> = (0..n).filter(|&r| !in_bag[r]).collect();

    let mut builder = TreeBuilder {
        table,
        mtry,
        min_leaf,
        rng,
        nodes: Vec::new(),
        raw_importance: vec![0.0; p],
    };
    builder.build(rows);
    let total: f64 = builder.raw_importance.iter().sum();
    let importances = if total > 0.0 {
        builder.raw_importance.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; p]
    };
    Tree {
        nodes: builder.nodes,
        importances,
        oob_rows,
    }
}

struct TreeBuilder<'a> {
    table: &'a FeatureTable,
    mtry: usize,
    min_leaf: usize,
    rng: &'a mut Xoshiro256,
    nodes: Vec<Node>,
    raw_importance: Vec<f64>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
    left_n: usize,
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, rows: Vec<usize>) -> usize {
        let (sum, sum2) = self.moments(&rows);
        let n = rows.len() as f64;
        let mean = sum / n;
        let ss = sum2 - sum * sum / n;

        if rows.len() < 2 * self.min_leaf || ss <= 0.0 {
            return self.leaf(mean);
        }
        match self.best_split(&rows, ss) {
            None => self.leaf(mean),
            Some(best) => {
                self.raw_importance[best.feature] += best.gain;
                let id = self.nodes.len();
                self.nodes.push(Node::Leaf { value: mean }); // placeholder
                let left = self.build(best.left_rows);
                let right = self.build(best.right_rows);
                self.nodes[id] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
                id
            }
        }
    }

    fn leaf(&mut self, value: f64) -> usize {
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    fn moments(&self, rows: &[usize]) -> (f64, f64) {
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for &r in rows {
            let y = self.table.target[r];
            sum += y;
            sum2 += y * y;
        }
        (sum, sum2)
    }

    /// Highest variance-reduction split over an mtry feature sample.
    /// Gain = SS_parent − SS_left − SS_right. Exact gain ties (common at
    /// small pure-splittable nodes) break on smaller left-child size,
    /// then smaller threshold: a value-based rule, so column order does
    /// not leak into the fitted trees.
    fn best_split(&mut self, rows: &[usize], parent_ss: f64) -> Option<BestSplit> {
        let features = self.rng.sample_distinct(self.table.n_features(), self.mtry);
        let mut best: Option<BestSplit> = None;

        for &f in &features {
            let mut order: Vec<usize> = rows.to_vec();
            order.sort_by(|&a, &b| {
                self.table.features[a][f]
                    .total_cmp(&self.table.features[b][f])
                    .then(a.cmp(&b))
            });
            let total_sum: f64 = order.iter().map(|&r| self.table.target[r]).sum();
            let total_sum2: f64 = order
                .iter()
                .map(|&r| self.table.target[r] * self.table.target[r])
                .sum();
            let n = order.len();
            let mut left_sum = 0.0;
            let mut left_sum2 = 0.0;
            for i in 0..n - 1 {
                let y = self.table.target[order[i]];
                left_sum += y;
                left_sum2 += y * y;
                let xl = self.table.features[order[i]][f];
                let xr = self.table.features[order[i + 1]][f];
                if xl == xr {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = (n - i - 1) as f64;
                if (i + 1) < self.min_leaf || (n - i - 1) < self.min_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let right_sum2 = total_sum2 - left_sum2;
                let ss_l = left_sum2 - left_sum * left_sum / nl;
                let ss_r = right_sum2 - right_sum * right_sum / nr;
                let gain = parent_ss - ss_l - ss_r;
                let threshold = xl + (xr - xl) / 2.0;
                let candidate_wins = match best.as_ref() {
                    None => gain > 0.0,
                    Some(b) => {
                        gain > b.gain
                            || (gain == b.gain
                                && (i + 1 < b.left_n
                                    || (i + 1 == b.left_n && threshold < b.threshold)))
                    }
                };
                if candidate_wins {
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        gain,
                        left_n: i + 1,
                        left_rows: Vec::new(),
                        right_rows: Vec::new(),
                    });
                }
            }
        }

        best.map(|mut b| {
            for &r in rows {
                if self.table.features[r][b.feature] <= b.threshold {
                    b.left_rows.push(r);
                } else {
                    b.right_rows.push(r);
                }
            }
            b
        })
    }
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, table: &FeatureTable) -> Vec<f64> {
        table
            .features
            .iter()
            .map(|row| self.predict_row(row))
            .collect()
    }

    /// Mean over trees of per-tree-normalized impurity decreases;
    /// non-negative and summing to 1.
    pub fn gini_importance(&self) -> Vec<f64> {
        let mut acc = vec![0.0f64; self.n_features];
        for tree in &self.trees {
            for (a, v) in acc.iter_mut().zip(&tree.importances) {
                *a += v;
            }
        }
        let total: f64 = acc.iter().sum();
        if total > 0.0 {
            for a in &mut acc {
                *a /= total;
            }
        }
        acc
    }

    /// Out-of-bag predictions evaluated against the training table
    /// (`None` for rows that were in-bag in every tree).
    pub fn oob_predictions_on(&self, table: &FeatureTable) -> Result<Vec<Option<f64>>> {
        if table.n_rows() != self.n_train_rows {
            return Err(Error::Regression(
                "OOB evaluation needs the original training table".into(),
            ));
        }
        let mut sums = vec![0.0f64; self.n_train_rows];
        let mut counts = vec![0usize; self.n_train_rows];
        for tree in &self.trees {
            for &r in &tree.oob_rows {
                sums[r] += tree.predict(&table.features[r]);
                counts[r] += 1;
            }
        }
        Ok(sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
            .collect())
    }
}

/// Mean R² drop over `n_repeats` random shuffles of each feature column,
/// evaluated on held-out data.
pub fn permutation_importance(
    model: &ForestModel,
    held_out: &FeatureTable,
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if held_out.n_rows() < 10 {
        return Err(Error::Regression(format!(
            "need at least 10 held-out rows, got {}",
            held_out.n_rows()
        )));
    }
    if n_repeats < 5 {
        return Err(Error::Regression(format!(
            "need at least 5 shuffle repeats, got {n_repeats}"
        )));
    }
    if held_out.n_features() != model.n_features {
        return Err(Error::Regression(
            "held-out table feature count does not match the model".into(),
        ));
    }
    let baseline = super::r2_score(&held_out.target, &model.predict(held_out))?;
    let n = held_out.n_rows();
    let mut out = Vec::with_capacity(model.n_features);
    for f in 0..model.n_features {
        let mut rng = Xoshiro256::seed_from(seed ^ (f as u64).wrapping_mul(0x517cc1b727220a95));
        let mut drop_sum = 0.0;
        for _ in 0..n_repeats {
            let mut perm: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut perm);
            let preds: Vec<f64> = (0..n)
                .map(|r| {
                    let mut x = held_out.features[r].clone();
                    x[f] = held_out.features[perm[r]][f];
                    model.predict_row(&x)
                })
                .collect();
            drop_sum += baseline - super::r2_score(&held_out.target, &preds)?;
        }
        out.push(drop_sum / n_repeats as f64);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mlkit::{r2_score, FeatureTable};

    /// y = 2x₁ − x₂ + ε(σ), plus `n_noise` pure-noise features
    pub(crate) fn synthetic_table(
        n_rows: usize,
        n_noise: usize,
        sigma: f64,
        seed: u64,
    ) -> FeatureTable {
        let mut rng = Xoshiro256::seed_from(seed);
        let mut features = Vec::with_capacity(n_rows);
        let mut target = Vec::with_capacity(n_rows);
        for _ in 0..n_rows {
            let mut row = vec![rng.next_f64(), rng.next_f64()];
            for _ in 0..n_noise {
                row.push(rng.next_f64());
            }
            // Box–Muller
            let u1 = rng.next_f64().max(1e-12);
            let u2 = rng.next_f64();
            let eps = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            target.push(2.0 * row[0] - row[1] + sigma * eps);
            features.push(row);
        }
        let mut names = vec!["x1".to_string(), "x2".to_string()];
        for i in 0..n_noise {
            names.push(format!("noise{i}"));
        }
        FeatureTable {
            names: (0..n_rows).map(|i| format!("row{i}")).collect(),
            feature_names: names,
            features,
            target,
        }
    }

    #[test]
    fn constant_target_is_rejected() {
        let mut t = synthetic_table(30, 1, 0.0, 1);
        t.target = vec![3.0; 30];
        assert!(matches!(
            fit_forest(&t, &ForestConfig::default()),
            Err(Error::Regression(_))
        ));
    }

    #[test]
    fn too_few_rows_is_rejected() {
        let t = synthetic_table(10, 1, 0.0, 1);
        assert!(fit_forest(&t, &ForestConfig::default()).is_err());
    }

    // memorization sanity oracle: deep trees reproduce y = x₁ on train
    #[test]
    fn deep_trees_memorize_exact_signal() {
        let mut t = synthetic_table(200, 0, 0.0, 2);
        for r in 0..200 {
            t.target[r] = t.features[r][0];
        }
        let model = fit_forest(
            &t,
            &ForestConfig {
                n_trees: 50,
                mtry: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        let r2 = r2_score(&t.target, &model.predict(&t)).unwrap();
        assert!(r2 > 0.99, "train R² = {r2}");
    }

    #[test]
    fn held_out_r2_beats_0_9_on_linear_signal() {
        let train = synthetic_table(1000, 3, 0.1, 3);
        let test = synthetic_table(300, 3, 0.1, 4);
        let model = fit_forest(&train, &ForestConfig::default()).unwrap();
        let r2 = r2_score(&test.target, &model.predict(&test)).unwrap();
        assert!(r2 > 0.9, "held-out R² = {r2}");

        // independent nearest-neighbor baseline confirms the data itself
        // supports R² > 0.9
        let nn_preds: Vec<f64> = test
            .features
            .iter()
            .map(|x| {
                let mut best = (f64::INFINITY, 0.0);
                for (row, &y) in train.features.iter().zip(&train.target) {
                    let d: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best.0 {
                        best = (d, y);
                    }
                }
                best.1
            })
            .collect();
        let nn_r2 = r2_score(&test.target, &nn_preds).unwrap();
        assert!(nn_r2 > 0.5, "nearest-neighbor sanity R² = {nn_r2}");
    }

    #[test]
    fn single_feature_gets_all_importance() {
        let mut t = synthetic_table(100, 0, 0.0, 5);
        t.feature_names = vec!["x".into()];
        for r in 0..100 {
            t.features[r] = vec![t.features[r][0]];
            t.target[r] = 3.0 * t.features[r][0] + 1.0;
        }
        let model = fit_forest(
            &t,
            &ForestConfig {
                n_trees: 10,
                mtry: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let gi = model.gini_importance();
        assert_eq!(gi, vec![1.0]);
    }

    #[test]
    fn importance_ranks_signal_over_noise() {
        let t = synthetic_table(600, 3, 0.1, 6);
        let model = fit_forest(&t, &ForestConfig::default()).unwrap();
        let gi = model.gini_importance();
        assert!((gi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(gi[0] > gi[1], "x1 {} vs x2 {}", gi[0], gi[1]);
        for k in 2..5 {
            assert!(gi[1] > gi[k], "x2 {} vs noise{k} {}", gi[1], gi[k]);
        }

        let held = synthetic_table(200, 3, 0.1, 7);
        let pfi = permutation_importance(&model, &held, 10, 11).unwrap();
        assert!(pfi[0] > pfi[1]);
        for k in 2..5 {
            assert!(pfi[1] > pfi[k], "PFI x2 {} vs noise{k} {}", pfi[1], pfi[k]);
        }
    }

    #[test]
    fn ignored_feature_has_near_zero_pfi() {
        // feature 2 is constant → never split on → permuting it is a no-op
        let mut t = synthetic_table(300, 1, 0.05, 8);
        for r in 0..300 {
            t.features[r][2] = 0.5;
        }
        let model = fit_forest(&t, &ForestConfig::default()).unwrap();
        let mut held = synthetic_table(100, 1, 0.05, 9);
        for r in 0..100 {
            held.features[r][2] = 0.5;
        }
        let pfi = permutation_importance(&model, &held, 10, 13).unwrap();
        assert!(pfi[2].abs() < 1e-12, "constant feature PFI = {}", pfi[2]);
    }

    #[test]
    fn fits_are_bit_reproducible() {
        let t = synthetic_table(100, 2, 0.1, 10);
        let cfg = ForestConfig {
            n_trees: 20,
            seed: 99,
            ..Default::default()
        };
        let a = fit_forest(&t, &cfg).unwrap();
        let b = fit_forest(&t, &cfg).unwrap();
        let pa = a.predict(&t);
        let pb = b.predict(&t);
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn duplicated_feature_splits_importance() {
        let base = synthetic_table(400, 0, 0.05, 12);
        let model_base = fit_forest(&base, &ForestConfig { mtry: Some(2), ..Default::default() })
            .unwrap();
        let gi_base = model_base.gini_importance();

        let mut dup = base.clone();
        dup.feature_names.push("x1_copy".into());
        for r in 0..dup.n_rows() {
            let v = dup.features[r][0];
            dup.features[r].push(v);
        }
        let model_dup = fit_forest(&dup, &ForestConfig { mtry: Some(3), ..Default::default() })
            .unwrap();
        let gi_dup = model_dup.gini_importance();
        let combined = gi_dup[0] + gi_dup[2];
        assert!(
            (combined - gi_base[0]).abs() < 0.1,
            "duplicate splits importance: {} + {} vs {}",
            gi_dup[0],
            gi_dup[2],
            gi_base[0]
        );
    }

    // with mtry = p there is no random feature choice, so reordering the
    // feature columns (same seed) must leave predictions bit-identical
    #[test]
    fn column_permutation_equivariance_with_full_mtry() {
        let t = synthetic_table(150, 2, 0.1, 13);
        let p = t.n_features();
        let perm = [3usize, 0, 2, 1];
        let permuted = FeatureTable {
            names: t.names.clone(),
            feature_names: perm.iter().map(|&c| t.feature_names[c].clone()).collect(),
            features: t
                .features
                .iter()
                .map(|row| perm.iter().map(|&c| row[c]).collect())
                .collect(),
            target: t.target.clone(),
        };
        let cfg = ForestConfig {
            n_trees: 15,
            mtry: Some(p),
            seed: 31,
            ..Default::default()
        };
        let a = fit_forest(&t, &cfg).unwrap();
        let b = fit_forest(&permuted, &cfg).unwrap();
        for (row, prow) in t.features.iter().zip(&permuted.features) {
            assert_eq!(
                a.predict_row(row).to_bits(),
                b.predict_row(prow).to_bits()
            );
        }
    }

    #[test]
    fn oob_predictions_cover_most_rows() {
        let t = synthetic_table(200, 1, 0.1, 14);
        let model = fit_forest(&t, &ForestConfig::default()).unwrap();
        let oob = model.oob_predictions_on(&t).unwrap();
        let covered = oob.iter().filter(|p| p.is_some()).count();
        assert!(covered > 190, "OOB coverage {covered}/200");
    }
}
