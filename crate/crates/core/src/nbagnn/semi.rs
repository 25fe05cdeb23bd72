//! Semi-supervised node classification with label reuse.
//!
//! A fraction of the nodes is labeled. Every epoch the labeled set is split
//! at random: one half shows its label as an input feature, the other half
//! enters the loss. At prediction time all labeled nodes show their labels.
//! Without such features a permutation-equivariant model cannot tell two
//! statistically identical communities apart.

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::Serialize;

use super::train::{backward, cross_entropy, record};
use super::{forward_with, ArcOperators, ModelShape, NbaGcnModel};
use crate::error::{Error, Result};
use crate::graph::{ArcIndex, Graph};
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeClassificationConfig {
    /// Share of all nodes whose label is known.
    pub labeled_fraction: f64,
    pub hidden: usize,
    pub layers: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub begrudging: bool,
    pub seed: u64,
}

impl Default for NodeClassificationConfig {
    fn default() -> Self {
        NodeClassificationConfig {
            labeled_fraction: 0.1,
            hidden: 8,
            layers: 2,
            learning_rate: 0.2,
            epochs: 1000,
            begrudging: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeClassificationOutcome {
    /// Trained on the graph without its isolated nodes; node `k` of that
    /// graph is `kept[k]` of the input.
    pub model: NbaGcnModel,
    pub kept: Vec<usize>,
    pub history: Vec<f64>,
    /// Input node ids.
    pub labeled: Vec<usize>,
    pub test: Vec<usize>,
    /// Predicted class per input node; `None` for isolated nodes.
    pub predictions: Vec<Option<usize>>,
    pub test_accuracy: f64,
}

/// Constant channel plus centered one-hot label channels; rows of unrevealed
/// nodes carry only the constant.
pub fn label_features(labels: &[usize], num_classes: usize, revealed: &[usize]) -> Array2<f64> {
    let mut x = Array2::zeros((labels.len(), 1 + num_classes));
    x.column_mut(0).fill(1.0);
    let off = 1.0 / num_classes as f64;
    for &v in revealed {
        for c in 0..num_classes {
            x[[v, 1 + c]] = if labels[v] == c { 1.0 - off } else { -off };
        }
    }
    x
}

pub fn train_node_classifier(
    g: &Graph,
    labels: &[usize],
    num_classes: usize,
    cfg: &NodeClassificationConfig,
) -> Result<NodeClassificationOutcome> {
    if labels.len() != g.n() {
        return Err(Error::ShapeError(format!("{} labels for {} nodes", labels.len(), g.n())));
    }
    if num_classes < 2 || labels.iter().any(|&l| l >= num_classes) {
        return Err(Error::InvalidArgument(format!(
            "labels must lie in 0..{num_classes} with at least two classes"
        )));
    }
    if !(cfg.labeled_fraction > 0.0 && cfg.labeled_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "labeled fraction must lie in (0, 1), got {}",
            cfg.labeled_fraction
        )));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }

    let kept: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > 0).collect();
    let mut index = vec![usize::MAX; g.n()];
    for (k, &v) in kept.iter().enumerate() {
        index[v] = k;
    }
    let sub = Graph::from_edges(kept.len(), g.edges().iter().map(|&(u, v)| (index[u], index[v])))?;
    let sub_labels: Vec<usize> = kept.iter().map(|&v| labels[v]).collect();

    let budget = (cfg.labeled_fraction * g.n() as f64).round() as usize;
    let mut rng = stream_rng(cfg.seed, streams::LABEL_SPLIT);
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.shuffle(&mut rng);
    if budget < 2 || budget >= order.len() {
        return Err(Error::InvalidArgument(format!(
            "{budget} labeled nodes out of {} usable ones leave nothing to train or test on",
            order.len()
        )));
    }
    let mut labeled = order[..budget].to_vec();
    let mut test = order[budget..].to_vec();

    let ai = ArcIndex::build(&sub)?;
    let shape = ModelShape {
        f_in: 1 + num_classes,
        f_edge: 0,
        hidden: cfg.hidden,
        f_out: num_classes,
        layers: cfg.layers,
    };
    let mut model = NbaGcnModel::init(shape, cfg.begrudging, cfg.seed)?;
    let ops = ArcOperators::new(&sub, &ai, cfg.begrudging);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        labeled.shuffle(&mut rng);
        let (shown, target) = labeled.split_at(budget / 2);
        let x = label_features(&sub_labels, num_classes, shown);
        let tape = record(&ops, &ai, &x, None, &model);
        let (loss, d_out) = cross_entropy(&tape.outputs, &sub_labels, target);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.push(loss);
        let grads = backward(&ops, &ai, sub.n(), &model, &tape, &d_out);
        model.params.scaled_add(-cfg.learning_rate, &grads.params);
        if !model.params.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }

    let x = label_features(&sub_labels, num_classes, &labeled);
    let outputs = forward_with(&ops, &ai, &x, None, &model);
    let sub_pred = super::predict(&outputs);
    let test_accuracy = super::accuracy(&outputs, &sub_labels, &test);
    let mut predictions = vec![None; g.n()];
    for (k, &v) in kept.iter().enumerate() {
        predictions[v] = Some(sub_pred[k]);
    }
    labeled.sort_unstable();
    test.sort_unstable();
    Ok(NodeClassificationOutcome {
        model,
        history,
        labeled: labeled.iter().map(|&k| kept[k]).collect(),
        test: test.iter().map(|&k| kept[k]).collect(),
        kept,
        predictions,
        test_accuracy,
    })
}
