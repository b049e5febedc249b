//! Entropy/information-gain decision trees for binary stable/unstable
//! classification, with stratified K-fold validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::Label;

/// Feature names the classifier operates over.
pub const FEATURE_NAMES: [&str; 6] = ["rms", "snr", "hurst", "fd", "lam", "tt"];

/// One feature vector with its label and provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: BTreeMap<String, f64>,
    pub label: Label,
    pub source_id: String,
    pub window_start: usize,
}

/// Class counts at a tree node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub stable: usize,
    pub unstable: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.stable + self.unstable
    }

    pub fn add(&mut self, label: Label) {
        match label {
            Label::Stable => self.stable += 1,
            Label::Unstable => self.unstable += 1,
        }
    }

    fn stable_fraction(&self) -> f64 {
        self.stable as f64 / self.total() as f64
    }

    /// Majority label; ties resolve to unstable (alarm-conservative).
    pub fn majority(&self) -> Label {
        if self.stable > self.unstable {
            Label::Stable
        } else {
            Label::Unstable
        }
    }

    pub fn purity(&self) -> f64 {
        self.stable.max(self.unstable) as f64 / self.total() as f64
    }
}

fn xlogb(x: f64, ln_base: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln() / ln_base
    }
}

/// Binary entropy of a class fraction, in units of the given log base.
pub fn entropy_base(p: f64, base: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("class fraction {p} outside [0, 1]")));
    }
    let ln_base = base.ln();
    Ok(-(xlogb(p, ln_base) + xlogb(1.0 - p, ln_base)))
}

/// Binary entropy in bits: `−(p log₂ p + (1−p) log₂(1−p))`.
pub fn entropy(p: f64) -> Result<f64> {
    entropy_base(p, 2.0)
}

fn node_entropy(counts: ClassCounts, base: f64) -> f64 {
    if counts.total() == 0 {
        0.0
    } else {
        entropy_base(counts.stable_fraction(), base).unwrap()
    }
}

/// Information gain of a split, in bits: parent entropy minus the
/// sample-count-weighted child entropies. Non-negative for every valid
/// split.
pub fn information_gain(parent: ClassCounts, left: ClassCounts, right: ClassCounts) -> Result<f64> {
    information_gain_base(parent, left, right, 2.0)
}

pub fn information_gain_base(
    parent: ClassCounts,
    left: ClassCounts,
    right: ClassCounts,
    base: f64,
) -> Result<f64> {
    if parent.total() == 0 {
        return Err(Error::Invalid("empty parent node".into()));
    }
    if left.stable + right.stable != parent.stable
        || left.unstable + right.unstable != parent.unstable
    {
        return Err(Error::Invalid(
            "child class counts do not sum to the parent's".into(),
        ));
    }
    let w = left.total() as f64 / parent.total() as f64;
    let ig = node_entropy(parent, base)
        - (w * node_entropy(left, base) + (1.0 - w) * node_entropy(right, base));
    Ok(ig.max(0.0))
}

/// A candidate split chosen by [`best_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub feature: String,
    pub threshold: f64,
    pub gain: f64,
}

/// Exhaustive midpoint search for the split maximizing information gain.
/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values of each feature; ties break toward the earlier feature in the
/// list, then the lower threshold. `None` when no candidate gains.
pub fn best_split(samples: &[&LabeledSample], features: &[&str]) -> Result<Option<Split>> {
    best_split_base(samples, features, 2.0)
}

pub fn best_split_base(
    samples: &[&LabeledSample],
    features: &[&str],
    base: f64,
) -> Result<Option<Split>> {
    if samples.len() < 2 {
        return Err(Error::Invalid("need at least 2 samples to split".into()));
    }
    if features.is_empty() {
        return Err(Error::Invalid("no features to split on".into()));
    }
    let mut parent = ClassCounts::default();
    for s in samples {
        parent.add(s.label);
    }

    let mut best: Option<Split> = None;
    for &feature in features {
        let mut values: Vec<(f64, Label)> = samples
            .iter()
            .map(|s| {
                s.features
                    .get(feature)
                    .map(|&v| (v, s.label))
                    .ok_or_else(|| Error::Invalid(format!("missing feature '{feature}'")))
            })
            .collect::<Result<_>>()?;
        values.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left = ClassCounts::default();
        for i in 0..values.len() - 1 {
            left.add(values[i].1);
            if values[i].0 == values[i + 1].0 {
                continue;
            }
            let threshold = (values[i].0 + values[i + 1].0) / 2.0;
            let right = ClassCounts {
                stable: parent.stable - left.stable,
                unstable: parent.unstable - left.unstable,
            };
            let gain = information_gain_base(parent, left, right, base)?;
            // Strict improvement keeps the earliest feature and lowest
            // threshold on ties.
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Split {
                    feature: feature.to_string(),
                    threshold,
                    gain,
                });
            }
        }
    }
    Ok(best.filter(|b| b.gain > 0.0))
}

/// Stopping rules and determinism seed for tree growth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// A node whose purity reaches this becomes a leaf.
    pub purity_stop: f64,
    /// Minimum information gain required to keep splitting.
    pub min_ig: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_depth: 8,
            min_samples_leaf: 5,
            purity_stop: 1.0,
            min_ig: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::Invalid("max_depth must be at least 1".into()));
        }
        if !(self.purity_stop > 0.5 && self.purity_stop <= 1.0) {
            return Err(Error::Invalid(format!(
                "purity_stop must be in (0.5, 1], got {}",
                self.purity_stop
            )));
        }
        Ok(())
    }
}

/// A tree node: internal test (`feature <= threshold` goes left) or leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature: String,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        label: Label,
        /// Majority fraction among the training samples at this leaf.
        purity: f64,
        count: usize,
    },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn collect_features<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let TreeNode::Internal {
            feature,
            left,
            right,
            ..
        } = self
        {
            if !out.contains(&feature.as_str()) {
                out.push(feature);
            }
            left.collect_features(out);
            right.collect_features(out);
        }
    }
}

/// Current serialization schema of [`DecisionTree`].
pub const TREE_SCHEMA_VERSION: u32 = 1;

/// Trained binary decision tree over named real features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub schema_version: u32,
    /// Feature list the tree was trained over.
    pub features: Vec<String>,
    pub root: TreeNode,
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Features actually referenced by internal nodes.
    pub fn used_features(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.root.collect_features(&mut out);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let tree: DecisionTree =
            serde_json::from_str(json).map_err(|e| Error::Parse(format!("bad tree JSON: {e}")))?;
        if tree.schema_version != TREE_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported tree schema version {}",
                tree.schema_version
            )));
        }
        Ok(tree)
    }
}

/// Grow a tree by recursive best-split search. A node becomes a leaf when
/// it is pure to `purity_stop`, the depth limit is reached, the best
/// split would starve a child below `min_samples_leaf`, or no split gains
/// at least `min_ig`. Single-class input yields a depth-0 leaf.
pub fn train(
    samples: &[LabeledSample],
    features: &[&str],
    config: &TrainConfig,
) -> Result<DecisionTree> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::Invalid("no training samples".into()));
    }
    let mut counts = ClassCounts::default();
    for s in samples {
        counts.add(s.label);
    }
    if counts.stable > 0 && counts.unstable > 0 && samples.len() < 2 * config.min_samples_leaf {
        return Err(Error::Invalid(format!(
            "need at least {} samples, got {}",
            2 * config.min_samples_leaf,
            samples.len()
        )));
    }
    let refs: Vec<&LabeledSample> = samples.iter().collect();
    let root = grow(&refs, features, config, 0)?;
    Ok(DecisionTree {
        schema_version: TREE_SCHEMA_VERSION,
        features: features.iter().map(|s| s.to_string()).collect(),
        root,
    })
}

fn grow(
    samples: &[&LabeledSample],
    features: &[&str],
    config: &TrainConfig,
    depth: usize,
) -> Result<TreeNode> {
    let mut counts = ClassCounts::default();
    for s in samples {
        counts.add(s.label);
    }
    let leaf = |counts: ClassCounts| TreeNode::Leaf {
        label: counts.majority(),
        purity: counts.purity(),
        count: counts.total(),
    };
    if counts.stable == 0 || counts.unstable == 0 {
        return Ok(leaf(counts));
    }
    if counts.purity() >= config.purity_stop || depth >= config.max_depth {
        return Ok(leaf(counts));
    }
    let Some(split) = best_split(samples, features)? else {
        return Ok(leaf(counts));
    };
    if split.gain < config.min_ig {
        return Ok(leaf(counts));
    }
    let (left, right): (Vec<&LabeledSample>, Vec<&LabeledSample>) = samples
        .iter()
        .partition(|s| s.features[&split.feature] <= split.threshold);
    if left.len() < config.min_samples_leaf || right.len() < config.min_samples_leaf {
        return Ok(leaf(counts));
    }
    Ok(TreeNode::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(&left, features, config, depth + 1)?),
        right: Box::new(grow(&right, features, config, depth + 1)?),
    })
}

/// Descend the tree for one feature vector.
pub fn predict(tree: &DecisionTree, features: &BTreeMap<String, f64>) -> Result<Label> {
    let mut node = &tree.root;
    loop {
        match node {
            TreeNode::Leaf { label, .. } => return Ok(*label),
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                let v = features.get(feature).ok_or_else(|| {
                    Error::Invalid(format!("sample missing feature '{feature}'"))
                })?;
                node = if *v <= *threshold { left } else { right };
            }
        }
    }
}

/// Confusion counts with stable as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::Stable, Label::Stable) => self.tp += 1,
            (Label::Unstable, Label::Unstable) => self.tn += 1,
            (Label::Stable, Label::Unstable) => self.fp += 1,
            (Label::Unstable, Label::Stable) => self.fn_ += 1,
        }
    }
}

/// Accuracy and confusion counts of a tree over a sample set.
pub fn evaluate(tree: &DecisionTree, samples: &[LabeledSample]) -> Result<(f64, Confusion)> {
    if samples.is_empty() {
        return Err(Error::Invalid("cannot evaluate on an empty set".into()));
    }
    let mut confusion = Confusion::default();
    for s in samples {
        confusion.record(predict(tree, &s.features)?, s.label);
    }
    Ok((confusion.accuracy(), confusion))
}

/// Per-fold and aggregate results of stratified K-fold validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub k: usize,
    /// Held-out accuracy of each fold.
    pub fold_accuracies: Vec<f64>,
    pub mean_train_accuracy: f64,
    /// Accuracy over all held-out predictions.
    pub test_accuracy: f64,
    /// Confusion over all held-out predictions.
    pub confusion: Confusion,
}

/// Stratified shuffled K-fold validation, deterministic for a fixed
/// `config.seed`. Every sample is held out exactly once; per-fold class
/// ratios deviate from the global ratio by at most one sample.
pub fn kfold_validate(
    samples: &[LabeledSample],
    features: &[&str],
    config: &TrainConfig,
    k: usize,
) -> Result<FoldReport> {
    if k < 2 {
        return Err(Error::Invalid("k must be at least 2".into()));
    }
    let assignments = stratified_fold_assignments(samples, k, config.seed)?;

    let mut fold_accuracies = Vec::with_capacity(k);
    let mut train_acc_sum = 0.0;
    let mut confusion = Confusion::default();
    for fold in 0..k {
        let mut test = Vec::new();
        let mut train_set = Vec::new();
        for (s, &f) in samples.iter().zip(&assignments) {
            if f == fold {
                test.push(s.clone());
            } else {
                train_set.push(s.clone());
            }
        }
        let tree = train(&train_set, features, config)?;
        let (train_acc, _) = evaluate(&tree, &train_set)?;
        train_acc_sum += train_acc;
        let mut fold_conf = Confusion::default();
        for s in &test {
            let p = predict(&tree, &s.features)?;
            fold_conf.record(p, s.label);
            confusion.record(p, s.label);
        }
        fold_accuracies.push(fold_conf.accuracy());
    }
    Ok(FoldReport {
        k,
        fold_accuracies,
        mean_train_accuracy: train_acc_sum / k as f64,
        test_accuracy: confusion.accuracy(),
        confusion,
    })
}

/// Fold index per sample: each class shuffled independently and dealt
/// round-robin.
pub fn stratified_fold_assignments(
    samples: &[LabeledSample],
    k: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; samples.len()];
    for class in [Label::Stable, Label::Unstable] {
        let mut idx: Vec<usize> = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == class)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < k {
            return Err(Error::Invalid(format!(
                "class {} has {} samples, fewer than k = {k}",
                class.as_str(),
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            assignments[i] = pos % k;
        }
    }
    Ok(assignments)
}

/// Predicted label over a lattice spanning `bounds` for a tree that uses
/// exactly the two named features. Row-major, `resolution x resolution`,
/// x varying fastest.
pub fn decision_boundary_grid(
    tree: &DecisionTree,
    feature_pair: (&str, &str),
    bounds: ((f64, f64), (f64, f64)),
    resolution: usize,
) -> Result<Vec<Label>> {
    if resolution < 2 {
        return Err(Error::Invalid("resolution must be at least 2".into()));
    }
    let used = tree.used_features();
    for f in &used {
        if *f != feature_pair.0 && *f != feature_pair.1 {
            return Err(Error::Invalid(format!(
                "tree references feature '{f}' outside the pair ({}, {})",
                feature_pair.0, feature_pair.1
            )));
        }
    }
    let ((x0, x1), (y0, y1)) = bounds;
    let mut grid = Vec::with_capacity(resolution * resolution);
    for iy in 0..resolution {
        let y = y0 + (y1 - y0) * iy as f64 / (resolution - 1) as f64;
        for ix in 0..resolution {
            let x = x0 + (x1 - x0) * ix as f64 / (resolution - 1) as f64;
            let features: BTreeMap<String, f64> = [
                (feature_pair.0.to_string(), x),
                (feature_pair.1.to_string(), y),
            ]
            .into_iter()
            .collect();
            grid.push(predict(tree, &features)?);
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(pairs: &[(&str, f64)], label: Label) -> LabeledSample {
        LabeledSample {
            features: pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            label,
            source_id: "test".into(),
            window_start: 0,
        }
    }

    fn one_d(values: &[(f64, Label)]) -> Vec<LabeledSample> {
        values
            .iter()
            .map(|&(v, l)| sample(&[("rms", v)], l))
            .collect()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert_eq!(entropy(1.0).unwrap(), 0.0);
        assert_eq!(entropy(0.5).unwrap(), 1.0);
        assert!((entropy(0.25).unwrap() - 0.8113).abs() < 1e-4);
        assert!(entropy(1.5).is_err());
    }

    #[test]
    fn ig_perfect_split() {
        let parent = ClassCounts {
            stable: 5,
            unstable: 5,
        };
        let left = ClassCounts {
            stable: 5,
            unstable: 0,
        };
        let right = ClassCounts {
            stable: 0,
            unstable: 5,
        };
        assert_eq!(information_gain(parent, left, right).unwrap(), 1.0);
    }

    #[test]
    fn ig_ratio_preserving_split_is_zero() {
        let parent = ClassCounts {
            stable: 6,
            unstable: 6,
        };
        let left = ClassCounts {
            stable: 3,
            unstable: 3,
        };
        let right = ClassCounts {
            stable: 3,
            unstable: 3,
        };
        assert!(information_gain(parent, left, right).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ig_direct_evaluation() {
        let parent = ClassCounts {
            stable: 8,
            unstable: 8,
        };
        let left = ClassCounts {
            stable: 6,
            unstable: 2,
        };
        let right = ClassCounts {
            stable: 2,
            unstable: 6,
        };
        let ig = information_gain(parent, left, right).unwrap();
        assert!((ig - 0.18872).abs() < 1e-4, "ig = {ig}");
    }

    #[test]
    fn best_split_midpoint() {
        let samples = one_d(&[
            (1.0, Label::Stable),
            (2.0, Label::Stable),
            (10.0, Label::Unstable),
            (11.0, Label::Unstable),
        ]);
        let refs: Vec<&LabeledSample> = samples.iter().collect();
        let split = best_split(&refs, &["rms"]).unwrap().unwrap();
        assert_eq!(split.threshold, 6.0);
        assert_eq!(split.gain, 1.0);
    }

    #[test]
    fn best_split_no_signal() {
        let samples = one_d(&[(3.0, Label::Stable), (3.0, Label::Unstable)]);
        let refs: Vec<&LabeledSample> = samples.iter().collect();
        assert!(best_split(&refs, &["rms"]).unwrap().is_none());
    }

    #[test]
    fn train_separable_is_perfect() {
        let mut samples = Vec::new();
        for i in 0..20 {
            samples.push(sample(
                &[("rms", i as f64), ("snr", 0.5)],
                if i < 10 { Label::Stable } else { Label::Unstable },
            ));
        }
        let cfg = TrainConfig {
            min_samples_leaf: 1,
            ..TrainConfig::default()
        };
        let tree = train(&samples, &["rms", "snr"], &cfg).unwrap();
        let (acc, _) = evaluate(&tree, &samples).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn depth_one_cannot_shatter_xor() {
        // XOR pattern: class differs on the diagonal.
        let mut samples = Vec::new();
        for (x, y, l) in [
            (0.0, 0.0, Label::Stable),
            (1.0, 1.0, Label::Stable),
            (0.0, 1.0, Label::Unstable),
            (1.0, 0.0, Label::Unstable),
        ] {
            for _ in 0..4 {
                samples.push(sample(&[("rms", x), ("snr", y)], l));
            }
        }
        let cfg = TrainConfig {
            max_depth: 1,
            min_samples_leaf: 1,
            ..TrainConfig::default()
        };
        let tree = train(&samples, &["rms", "snr"], &cfg).unwrap();
        let (acc, _) = evaluate(&tree, &samples).unwrap();
        assert!(acc <= 0.75, "acc = {acc}");
    }

    #[test]
    fn single_class_gives_depth_zero_leaf() {
        let samples = one_d(&[(1.0, Label::Stable), (2.0, Label::Stable)]);
        let tree = train(&samples, &["rms"], &TrainConfig::default()).unwrap();
        assert_eq!(tree.depth(), 0);
        assert!(matches!(
            tree.root,
            TreeNode::Leaf {
                label: Label::Stable,
                ..
            }
        ));
    }

    #[test]
    fn predict_stump() {
        let tree = DecisionTree {
            schema_version: TREE_SCHEMA_VERSION,
            features: vec!["rms".into()],
            root: TreeNode::Internal {
                feature: "rms".into(),
                threshold: 5.0,
                left: Box::new(TreeNode::Leaf {
                    label: Label::Stable,
                    purity: 1.0,
                    count: 1,
                }),
                right: Box::new(TreeNode::Leaf {
                    label: Label::Unstable,
                    purity: 1.0,
                    count: 1,
                }),
            },
        };
        let f: BTreeMap<String, f64> = [("rms".to_string(), 4.0)].into_iter().collect();
        assert_eq!(predict(&tree, &f).unwrap(), Label::Stable);
        let f: BTreeMap<String, f64> = [("rms".to_string(), 6.0)].into_iter().collect();
        assert_eq!(predict(&tree, &f).unwrap(), Label::Unstable);
        let empty: BTreeMap<String, f64> = BTreeMap::new();
        assert!(predict(&tree, &empty).is_err());
    }

    #[test]
    fn evaluate_constant_tree() {
        let tree = DecisionTree {
            schema_version: TREE_SCHEMA_VERSION,
            features: vec![],
            root: TreeNode::Leaf {
                label: Label::Unstable,
                purity: 1.0,
                count: 1,
            },
        };
        let all_unstable = one_d(&[(1.0, Label::Unstable), (2.0, Label::Unstable)]);
        assert_eq!(evaluate(&tree, &all_unstable).unwrap().0, 1.0);
        let all_stable = one_d(&[(1.0, Label::Stable), (2.0, Label::Stable)]);
        assert_eq!(evaluate(&tree, &all_stable).unwrap().0, 0.0);
    }

    #[test]
    fn kfold_partition_and_determinism() {
        let mut samples = Vec::new();
        for i in 0..100 {
            samples.push(sample(
                &[("rms", i as f64)],
                if i % 2 == 0 { Label::Stable } else { Label::Unstable },
            ));
        }
        let cfg = TrainConfig {
            seed: 9,
            min_samples_leaf: 1,
            ..TrainConfig::default()
        };
        let assignments = stratified_fold_assignments(&samples, 5, cfg.seed).unwrap();
        let mut fold_sizes = [0usize; 5];
        for &f in &assignments {
            fold_sizes[f] += 1;
        }
        assert_eq!(fold_sizes, [20; 5]);

        let a = kfold_validate(&samples, &["rms"], &cfg, 5).unwrap();
        let b = kfold_validate(&samples, &["rms"], &cfg, 5).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn kfold_separable_accurate() {
        let mut samples = Vec::new();
        for i in 0..50 {
            samples.push(sample(&[("rms", i as f64)], Label::Stable));
            samples.push(sample(&[("rms", 100.0 + i as f64)], Label::Unstable));
        }
        let cfg = TrainConfig {
            seed: 3,
            ..TrainConfig::default()
        };
        let report = kfold_validate(&samples, &["rms"], &cfg, 5).unwrap();
        for acc in &report.fold_accuracies {
            assert!(*acc >= 0.95, "fold acc {acc}");
        }
    }

    #[test]
    fn kfold_small_class_rejected() {
        let samples = one_d(&[
            (1.0, Label::Stable),
            (2.0, Label::Unstable),
            (3.0, Label::Unstable),
            (4.0, Label::Unstable),
            (5.0, Label::Unstable),
            (6.0, Label::Unstable),
        ]);
        assert!(kfold_validate(&samples, &["rms"], &TrainConfig::default(), 5).is_err());
    }

    #[test]
    fn boundary_grid_stump() {
        let tree = DecisionTree {
            schema_version: TREE_SCHEMA_VERSION,
            features: vec!["rms".into(), "snr".into()],
            root: TreeNode::Internal {
                feature: "rms".into(),
                threshold: 0.5,
                left: Box::new(TreeNode::Leaf {
                    label: Label::Stable,
                    purity: 1.0,
                    count: 1,
                }),
                right: Box::new(TreeNode::Leaf {
                    label: Label::Unstable,
                    purity: 1.0,
                    count: 1,
                }),
            },
        };
        let grid =
            decision_boundary_grid(&tree, ("rms", "snr"), ((0.0, 1.0), (0.0, 1.0)), 2).unwrap();
        assert_eq!(
            grid,
            vec![Label::Stable, Label::Unstable, Label::Stable, Label::Unstable]
        );
    }

    #[test]
    fn boundary_grid_foreign_feature_rejected() {
        let tree = DecisionTree {
            schema_version: TREE_SCHEMA_VERSION,
            features: vec!["lam".into()],
            root: TreeNode::Internal {
                feature: "lam".into(),
                threshold: 0.5,
                left: Box::new(TreeNode::Leaf {
                    label: Label::Stable,
                    purity: 1.0,
                    count: 1,
                }),
                right: Box::new(TreeNode::Leaf {
                    label: Label::Unstable,
                    purity: 1.0,
                    count: 1,
                }),
            },
        };
        assert!(
            decision_boundary_grid(&tree, ("rms", "snr"), ((0.0, 1.0), (0.0, 1.0)), 4).is_err()
        );
    }

    #[test]
    fn tree_json_roundtrip() {
        let samples = one_d(&[
            (1.0, Label::Stable),
            (2.0, Label::Stable),
            (10.0, Label::Unstable),
            (11.0, Label::Unstable),
        ]);
        let cfg = TrainConfig {
            min_samples_leaf: 1,
            ..TrainConfig::default()
        };
        let tree = train(&samples, &["rms"], &cfg).unwrap();
        let back = DecisionTree::from_json(&tree.to_json()).unwrap();
        assert_eq!(tree, back);
    }
}
