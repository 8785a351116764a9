//! Extremely randomized trees with multi-output leaves.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BatchError;
use crate::rng::{stream, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Non-constant features tried per split; `None` means `round(sqrt(d))`.
    pub k_features: Option<usize>,
    /// Nodes with fewer samples become leaves.
    pub n_min: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            k_features: None,
            n_min: 5,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), BatchError> {
        if self.n_trees == 0 {
            return Err(BatchError::InvalidConfig("n_trees must be positive".into()));
        }
        if self.k_features == Some(0) {
            return Err(BatchError::InvalidConfig(
                "k_features must be positive".into(),
            ));
        }
        Ok(())
    }

    fn k_for(&self, d: usize) -> usize {
        self.k_features
            .unwrap_or_else(|| ((d as f64).sqrt().round() as usize).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        offset: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
    leaf_values: Vec<f64>,
}

impl Tree {
    fn leaf(&self, row: &[f64]) -> &[f64] {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature as usize] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
                Node::Leaf { offset } => return &self.leaf_values[offset as usize..],
            }
        }
    }
}

/// Training data with features stored column by column.
struct Data<'a> {
    cols: Vec<f64>,
    n: usize,
    d: usize,
    y: &'a [f64],
    m: usize,
}

impl<'a> Data<'a> {
    fn new(x: &[f64], n: usize, d: usize, y: &'a [f64], m: usize) -> Self {
        let mut cols = vec![0.0; n * d];
        for i in 0..n {
            for f in 0..d {
                cols[f * n + i] = x[i * d + f];
            }
        }
        Data { cols, n, d, y, m }
    }

    fn col(&self, f: usize) -> &[f64] {
        &self.cols[f * self.n..(f + 1) * self.n]
    }

    fn y(&self, i: usize) -> &[f64] {
        &self.y[i * self.m..(i + 1) * self.m]
    }
}

/// Sum of squared deviations per output, summed over outputs.
fn sse(sum: &[f64], sumsq: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    sum.iter()
        .zip(sumsq)
        .map(|(s, q)| q - s * s / n as f64)
        .sum()
}

/// Features are drawn without replacement until `k` non-constant ones have
/// been tried; each gets one uniform threshold in `[min, max)`.
fn choose_split(
    data: &Data,
    rows: &[usize],
    k: usize,
    rng: &mut RandomStream,
    scratch: &mut Scratch,
) -> Option<(usize, f64)> {
    let count = rows.len();
    let Scratch {
        sum,
        sumsq,
        lsum,
        lsumsq,
        pool,
    } = scratch;
    sum.iter_mut().for_each(|v| *v = 0.0);
    sumsq.iter_mut().for_each(|v| *v = 0.0);
    for &i in rows {
        for (o, &v) in data.y(i).iter().enumerate() {
            sum[o] += v;
            sumsq[o] += v * v;
        }
    }
    let total = sse(sum, sumsq, count);

    pool.clear();
    pool.extend(0..data.d);
    let mut left_in_pool = data.d;
    let mut tried = 0;
    let mut best: Option<(f64, usize, f64)> = None;
    while tried < k && left_in_pool > 0 {
        let j = rng.gen_range(0..left_in_pool);
        let f = pool[j];
        pool.swap(j, left_in_pool - 1);
        left_in_pool -= 1;

        let col = data.col(f);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in rows {
            lo = lo.min(col[i]);
            hi = hi.max(col[i]);
        }
        if lo >= hi {
            continue;
        }
        tried += 1;
        let t = rng.gen_range(lo..hi);
        lsum.iter_mut().for_each(|v| *v = 0.0);
        lsumsq.iter_mut().for_each(|v| *v = 0.0);
        let mut nl = 0;
        for &i in rows {
            if col[i] < t {
                nl += 1;
                for (o, &v) in data.y(i).iter().enumerate() {
                    lsum[o] += v;
                    lsumsq[o] += v * v;
                }
            }
        }
        if nl == 0 || nl == count {
            continue;
        }
        let mut right = 0.0;
        for o in 0..data.m {
            let (s, q) = (sum[o] - lsum[o], sumsq[o] - lsumsq[o]);
            right += q - s * s / (count - nl) as f64;
        }
        let score = total - sse(lsum, lsumsq, nl) - right;
        if best.is_none_or(|(s, _, _)| score > s) {
            best = Some((score, f, t));
        }
    }
    best.map(|(_, f, t)| (f, t))
}

struct Scratch {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    lsum: Vec<f64>,
    lsumsq: Vec<f64>,
    pool: Vec<usize>,
}

fn build_tree(data: &Data, cfg: &ForestConfig, rng: &mut RandomStream) -> Tree {
    let k = cfg.k_for(data.d);
    let n_min = cfg.n_min.max(2);
    let mut idx: Vec<usize> = (0..data.n).collect();
    let mut tree = Tree {
        nodes: vec![Node::Leaf { offset: 0 }],
        leaf_values: Vec::new(),
    };
    let mut work = vec![(0usize, data.n, 0usize)];
    let mut scratch = Scratch {
        sum: vec![0.0; data.m],
        sumsq: vec![0.0; data.m],
        lsum: vec![0.0; data.m],
        lsumsq: vec![0.0; data.m],
        pool: Vec::with_capacity(data.d),
    };

    while let Some((start, end, node)) = work.pop() {
        let rows = &idx[start..end];
        let count = rows.len();
        let first = data.y(rows[0]);
        let constant_y = rows.iter().all(|&i| data.y(i) == first);
        let split = if count >= n_min && !constant_y {
            choose_split(data, rows, k, rng, &mut scratch)
        } else {
            None
        };

        match split {
            Some((f, t)) => {
                let col = data.col(f);
                let rows = &mut idx[start..end];
                let mut mid = 0;
                for j in 0..rows.len() {
                    if col[rows[j]] < t {
                        rows.swap(mid, j);
                        mid += 1;
                    }
                }
                let left = tree.nodes.len();
                tree.nodes.push(Node::Leaf { offset: 0 });
                tree.nodes.push(Node::Leaf { offset: 0 });
                tree.nodes[node] = Node::Split {
                    feature: f as u32,
                    threshold: t,
                    left: left as u32,
                    right: left as u32 + 1,
                };
                work.push((start + mid, end, left + 1));
                work.push((start, start + mid, left));
            }
            None => {
                let offset = tree.leaf_values.len();
                let mut mean = vec![0.0; data.m];
                for &i in rows {
                    for (o, &v) in data.y(i).iter().enumerate() {
                        mean[o] += v;
                    }
                }
                tree.leaf_values
                    .extend(mean.iter().map(|s| s / count as f64));
                tree.nodes[node] = Node::Leaf {
                    offset: offset as u32,
                };
            }
        }
    }
    tree
}

/// An ensemble of extremely randomized trees predicting `n_outputs` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraTrees {
    n_features: usize,
    n_outputs: usize,
    trees: Vec<Tree>,
}

impl ExtraTrees {
    /// Fits on row-major `x` (`n × n_features`) and `y` (`n × n_outputs`).
    pub fn fit(
        x: &[f64],
        n_features: usize,
        y: &[f64],
        n_outputs: usize,
        cfg: &ForestConfig,
    ) -> Result<Self, BatchError> {
        cfg.validate()?;
        if n_outputs == 0 {
            return Err(BatchError::InvalidConfig(
                "at least one output is required".into(),
            ));
        }
        if y.is_empty() {
            return Err(BatchError::EmptyTrainingSet);
        }
        let n = y.len() / n_outputs;
        if y.len() != n * n_outputs || x.len() != n * n_features {
            return Err(BatchError::FeatureArityMismatch {
                expected: n * n_features,
                got: x.len(),
            });
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(BatchError::NonFinite("training data".into()));
        }
        let data = Data::new(x, n, n_features, y, n_outputs);
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| build_tree(&data, cfg, &mut stream(cfg.seed, &[t as u64])))
            .collect();
        Ok(ExtraTrees {
            n_features,
            n_outputs,
            trees,
        })
    }

    /// Fits on one target per sample.
    pub fn fit_rows(
        rows: &[Vec<f64>],
        targets: &[f64],
        cfg: &ForestConfig,
    ) -> Result<Self, BatchError> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != targets.len() {
            return Err(BatchError::FeatureArityMismatch {
                expected: rows.len(),
                got: targets.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(BatchError::FeatureArityMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        let x: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::fit(&x, d, targets, 1, cfg)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn predict_into(&self, row: &[f64], out: &mut [f64]) {
        assert_eq!(row.len(), self.n_features, "feature arity");
        out.iter_mut().for_each(|v| *v = 0.0);
        for tree in &self.trees {
            for (o, v) in out.iter_mut().zip(tree.leaf(row)) {
                *o += v;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= n);
    }

    pub fn predict(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_outputs];
        self.predict_into(row, &mut out);
        out
    }

    /// First output; convenient for single-target regression.
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        self.predict(row)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_min: usize) -> ForestConfig {
        ForestConfig {
            n_trees: 50,
            k_features: None,
            n_min,
            seed: 3,
        }
    }

    #[test]
    fn single_sample_predicts_its_target_everywhere() {
        let f = ExtraTrees::fit_rows(&[vec![0.3, 0.7]], &[4.5], &cfg(2)).unwrap();
        assert_eq!(f.predict_one(&[0.3, 0.7]), 4.5);
        assert_eq!(f.predict_one(&[9.0, -1.0]), 4.5);
    }

    #[test]
    fn learns_identity_on_a_grid() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 49.0]).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let f = ExtraTrees::fit_rows(&rows, &ys, &ForestConfig::default()).unwrap();
        let mse: f64 = rows
            .iter()
            .zip(&ys)
            .map(|(r, y)| (f.predict_one(r) - y).powi(2))
            .sum::<f64>()
            / 50.0;
        assert!(mse <= 1e-2, "mse {mse}");
        // unseen points in between
        let mse_test: f64 = (0..100)
            .map(|i| {
                let x = (i as f64 + 0.5) / 100.0;
                (f.predict_one(&[x]) - x).powi(2)
            })
            .sum::<f64>()
            / 100.0;
        assert!(mse_test <= 1e-2, "mse {mse_test}");
    }

    #[test]
    fn duplicating_every_sample_changes_nothing() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i % 7) as f64, (i * 13 % 11) as f64 / 3.0])
            .collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 - r[1]).collect();
        let once = ExtraTrees::fit_rows(&rows, &ys, &cfg(2)).unwrap();
        let rows2: Vec<Vec<f64>> = rows.iter().flat_map(|r| [r.clone(), r.clone()]).collect();
        let ys2: Vec<f64> = ys.iter().flat_map(|&y| [y, y]).collect();
        let twice = ExtraTrees::fit_rows(&rows2, &ys2, &cfg(2)).unwrap();
        for r in &rows {
            assert!((once.predict_one(r) - twice.predict_one(r)).abs() < 1e-9);
        }
    }

    #[test]
    fn multi_output_leaves_and_constant_inputs() {
        // feature 1 is constant and must never be chosen
        let x = [0.0, 5.0, 1.0, 5.0, 2.0, 5.0, 3.0, 5.0];
        let y = [1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        let f = ExtraTrees::fit(
            &x,
            2,
            &y,
            2,
            &ForestConfig {
                n_trees: 20,
                k_features: Some(2),
                n_min: 2,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(f.predict(&[0.0, 5.0]), vec![1.0, 0.0]);
        assert_eq!(f.predict(&[3.0, 5.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn seeded_and_validated() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64, (i * 7 % 5) as f64])
            .collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let a = ExtraTrees::fit_rows(&rows, &ys, &cfg(5)).unwrap();
        let b = ExtraTrees::fit_rows(&rows, &ys, &cfg(5)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            ExtraTrees::fit_rows(&[], &[], &cfg(5)),
            Err(BatchError::EmptyTrainingSet)
        ));
        assert!(matches!(
            ExtraTrees::fit_rows(&[vec![1.0], vec![1.0, 2.0]], &[0.0, 1.0], &cfg(5)),
            Err(BatchError::FeatureArityMismatch { .. })
        ));
        assert!(ExtraTrees::fit_rows(&[vec![f64::NAN]], &[0.0], &cfg(5)).is_err());
    }
}
