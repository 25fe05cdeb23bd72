//! Cross-entropy loss, reverse-mode gradients and full-batch training.

use ndarray::{s, Array2, Axis};

use super::{affine, arc_inputs, check_inputs, check_no_isolated, layer_step, readout};
use super::{ArcOperators, NbaGcnModel, NbaGcnParams};
use crate::error::{Error, Result};
use crate::graph::{ArcIndex, Graph};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Seed used to initialize the model that is being trained.
    pub seed: u64,
    /// Nodes whose labels enter the loss.
    pub mask: Vec<usize>,
}

impl TrainConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        check_mask(&self.mask, n)
    }
}

/// Gradients of the loss with respect to the parameters and node features.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub params: NbaGcnParams,
    /// `n x F_in`.
    pub inputs: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: NbaGcnModel,
    /// Loss before each update.
    pub history: Vec<f64>,
}

fn check_mask(mask: &[usize], n: usize) -> Result<()> {
    if mask.is_empty() {
        return Err(Error::InvalidArgument("training mask is empty".into()));
    }
    match mask.iter().find(|&&v| v >= n) {
        Some(&node) => Err(Error::NodeOutOfRange { node, n }),
        None => Ok(()),
    }
}

fn check_labels(labels: &[usize], mask: &[usize], n: usize, classes: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::ShapeError(format!("{} labels for {n} nodes", labels.len())));
    }
    check_mask(mask, n)?;
    match mask.iter().find(|&&v| labels[v] >= classes) {
        Some(&v) => Err(Error::InvalidArgument(format!(
            "label {} of node {v} exceeds the {classes} model outputs",
            labels[v]
        ))),
        None => Ok(()),
    }
}

pub(super) struct Tape {
    inputs: Array2<f64>,
    /// Arc states before each layer and after the last one.
    states: Vec<Array2<f64>>,
    /// Predecessor means fed into each layer.
    aggregates: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
    pub(super) outputs: Array2<f64>,
}

pub(super) fn record(
    ops: &ArcOperators,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    model: &NbaGcnModel,
) -> Tape {
    let p = &model.params;
    let inputs = arc_inputs(ai, x, e);
    let mut states = vec![affine(&inputs, &p.encoder_weight, &p.encoder_bias)];
    let mut aggregates = Vec::with_capacity(p.layers.len());
    let mut pre_activations = Vec::with_capacity(p.layers.len());
    for w in &p.layers {
        let h = states.last().unwrap();
        aggregates.push(ops.propagate.mul_dense(h));
        let (next, z) = layer_step(&ops.propagate, h, w);
        pre_activations.push(z);
        states.push(next);
    }
    let outputs = readout(ops, states.last().unwrap(), model);
    Tape {
        inputs,
        states,
        aggregates,
        pre_activations,
        outputs,
    }
}

/// Mean softmax cross-entropy over `mask` and its gradient with respect to
/// the outputs.
pub(super) fn cross_entropy(outputs: &Array2<f64>, labels: &[usize], mask: &[usize]) -> (f64, Array2<f64>) {
    let mut d_out = Array2::zeros(outputs.raw_dim());
    let scale = 1.0 / mask.len() as f64;
    let mut loss = 0.0;
    for &v in mask {
        let row = outputs.row(v);
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let exp = row.mapv(|x| (x - max).exp());
        let total = exp.sum();
        loss += total.ln() + max - row[labels[v]];
        let mut d = d_out.row_mut(v);
        d.assign(&(exp / total * scale));
        d[labels[v]] -= scale;
    }
    (loss * scale, d_out)
}

pub(super) fn backward(
    ops: &ArcOperators,
    ai: &ArcIndex,
    n: usize,
    model: &NbaGcnModel,
    tape: &Tape,
    d_out: &Array2<f64>,
) -> Gradients {
    let p = &model.params;
    let mut grads = p.zeros_like();
    let h_last = tape.states.last().unwrap();
    grads.head_in = d_out.t().dot(&ops.mean_in.mul_dense(h_last));
    grads.head_out = d_out.t().dot(&ops.mean_out.mul_dense(h_last));
    grads.head_bias = d_out.sum_axis(Axis(0));
    let mut d_h = ops.mean_in.transpose_mul_dense(&d_out.dot(&p.head_in))
        + ops.mean_out.transpose_mul_dense(&d_out.dot(&p.head_out));
    for t in (0..p.layers.len()).rev() {
        let mut d_z = d_h.clone();
        d_z.zip_mut_with(&tape.pre_activations[t], |d, &z| {
            if z <= 0.0 {
                *d = 0.0;
            }
        });
        grads.layers[t] = d_z.t().dot(&tape.aggregates[t]);
        d_h += &ops.propagate.transpose_mul_dense(&d_z.dot(&p.layers[t]));
    }
    grads.encoder_weight = d_h.t().dot(&tape.inputs);
    grads.encoder_bias = d_h.sum_axis(Axis(0));

    let d_in = d_h.dot(&p.encoder_weight);
    let f_in = model.f_in;
    let mut inputs = Array2::zeros((n, f_in));
    for (a, &(t, h)) in ai.arcs().iter().enumerate() {
        let row = d_in.row(a);
        let mut xt = inputs.row_mut(t);
        xt += &row.slice(s![..f_in]);
        let mut xh = inputs.row_mut(h);
        xh += &row.slice(s![f_in..2 * f_in]);
    }
    Gradients {
        params: grads,
        inputs,
    }
}

/// Loss over the masked nodes and its exact gradients. ReLU has derivative 0
/// at 0.
pub fn loss_and_grads(
    model: &NbaGcnModel,
    g: &Graph,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    labels: &[usize],
    mask: &[usize],
) -> Result<(f64, Gradients)> {
    check_inputs(g, ai, x, e, model)?;
    check_no_isolated(g)?;
    check_labels(labels, mask, g.n(), model.f_out())?;
    let ops = ArcOperators::new(g, ai, model.begrudging);
    let tape = record(&ops, ai, x, e, model);
    let (loss, d_out) = cross_entropy(&tape.outputs, labels, mask);
    Ok((loss, backward(&ops, ai, g.n(), model, &tape, &d_out)))
}

/// Full-batch gradient descent for `cfg.epochs` steps.
pub fn train(
    model: &NbaGcnModel,
    g: &Graph,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    check_inputs(g, ai, x, e, model)?;
    check_no_isolated(g)?;
    cfg.validate(g.n())?;
    check_labels(labels, &cfg.mask, g.n(), model.f_out())?;
    let ops = ArcOperators::new(g, ai, model.begrudging);
    let mut model = model.clone();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let tape = record(&ops, ai, x, e, &model);
        let (loss, d_out) = cross_entropy(&tape.outputs, labels, &cfg.mask);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.push(loss);
        let grads = backward(&ops, ai, g.n(), &model, &tape, &d_out);
        model.params.scaled_add(-cfg.learning_rate, &grads.params);
        if !model.params.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }
    Ok(TrainOutcome { model, history })
}

/// Index of the largest output per node (first one on ties).
pub fn predict(outputs: &Array2<f64>) -> Vec<usize> {
    outputs
        .rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                .0
        })
        .collect()
}

/// Fraction of `nodes` whose predicted class equals its label.
pub fn accuracy(outputs: &Array2<f64>, labels: &[usize], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return f64::NAN;
    }
    let pred = predict(outputs);
    nodes.iter().filter(|&&v| pred[v] == labels[v]).count() as f64 / nodes.len() as f64
}
