//! Non-backtracking GCN.
//!
//! Hidden states live on arcs. Arc `i -> j` starts from an encoding of
//! `[x_i | x_j | e_ij]`; each layer adds `ReLU(W * mean)` where the mean runs
//! over the arcs `k -> i` with `k != j`. Node outputs read the mean incoming
//! and mean outgoing arc states through two separate linear heads.

mod model;
mod semi;
mod train;

pub use model::{ModelShape, NbaGcnModel, NbaGcnParams};
pub use semi::{
    label_features, train_node_classifier, NodeClassificationConfig, NodeClassificationOutcome,
};
pub use train::{accuracy, loss_and_grads, predict, train, Gradients, TrainConfig, TrainOutcome};

use ndarray::{s, Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::graph::{nb_matrix, ArcIndex, Graph, SparseRealMatrix};

/// Hidden states, one row per arc id.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcFeatureMatrix {
    values: Array2<f64>,
}

impl ArcFeatureMatrix {
    pub fn new(values: Array2<f64>, ai: &ArcIndex) -> Result<Self> {
        if values.nrows() != ai.len() {
            return Err(Error::ShapeError(format!(
                "{} arc rows for {} arcs",
                values.nrows(),
                ai.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::ShapeError("arc features must be finite".into()));
        }
        Ok(ArcFeatureMatrix { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

/// Sparse operators shared by the forward and backward passes.
pub(crate) struct ArcOperators {
    /// `2m x 2m`: row = arc being updated, columns = its predecessors with
    /// weight `1 / #predecessors`.
    pub(crate) propagate: SparseRealMatrix,
    /// `n x 2m` means over incoming arcs.
    pub(crate) mean_in: SparseRealMatrix,
    /// `n x 2m` means over outgoing arcs.
    pub(crate) mean_out: SparseRealMatrix,
}

impl ArcOperators {
    pub(crate) fn new(g: &Graph, ai: &ArcIndex, begrudging: bool) -> Self {
        let propagate = predecessor_means(g, ai, begrudging);
        let mean = |outgoing: bool| {
            let mut triplets = Vec::with_capacity(ai.len());
            for v in 0..g.n() {
                let arcs = if outgoing { ai.outgoing(v) } else { ai.incoming(v) };
                for &a in arcs {
                    triplets.push((v, a, 1.0 / arcs.len() as f64));
                }
            }
            SparseRealMatrix::from_triplets(g.n(), ai.len(), triplets).expect("arcs are unique")
        };
        ArcOperators {
            propagate,
            mean_in: mean(false),
            mean_out: mean(true),
        }
    }
}

fn predecessor_means(g: &Graph, ai: &ArcIndex, begrudging: bool) -> SparseRealMatrix {
    let preds = nb_matrix(g, ai, begrudging).transpose();
    let inv: Vec<f64> = preds
        .row_sums()
        .into_iter()
        .map(|s| if s > 0.0 { 1.0 / s } else { 0.0 })
        .collect();
    preds.scale(&inv, &vec![1.0; ai.len()])
}

fn check_inputs(
    g: &Graph,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    model: &NbaGcnModel,
) -> Result<()> {
    model.validate()?;
    if ai.num_nodes() != g.n() || ai.len() != 2 * g.m() {
        return Err(Error::ShapeError("arc index does not belong to this graph".into()));
    }
    if x.dim() != (g.n(), model.f_in) {
        return Err(Error::ShapeError(format!(
            "node features have shape {:?}, expected [{}, {}]",
            x.shape(),
            g.n(),
            model.f_in
        )));
    }
    match e {
        Some(e) if e.dim() != (g.m(), model.f_edge) => Err(Error::ShapeError(format!(
            "edge features have shape {:?}, expected [{}, {}]",
            e.shape(),
            g.m(),
            model.f_edge
        ))),
        None if model.f_edge > 0 => Err(Error::ShapeError(format!(
            "model expects {} edge features but none were given",
            model.f_edge
        ))),
        _ => Ok(()),
    }
}

/// Rows `[x_tail | x_head | e_edge]` for every arc.
pub(crate) fn arc_inputs(ai: &ArcIndex, x: &Array2<f64>, e: Option<&Array2<f64>>) -> Array2<f64> {
    let f_in = x.ncols();
    let f_edge = e.map_or(0, |e| e.ncols());
    let mut out = Array2::zeros((ai.len(), 2 * f_in + f_edge));
    for (a, &(t, h)) in ai.arcs().iter().enumerate() {
        let mut row = out.row_mut(a);
        row.slice_mut(s![..f_in]).assign(&x.row(t));
        row.slice_mut(s![f_in..2 * f_in]).assign(&x.row(h));
        if let Some(e) = e {
            row.slice_mut(s![2 * f_in..]).assign(&e.row(ai.edge_of(a)));
        }
    }
    out
}

pub(crate) fn affine(input: &Array2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    input.dot(&w.t()) + b.view().insert_axis(Axis(0))
}

/// Initial arc states from node features `x` and optional per-edge features
/// `e` (indexed like `g.edges()`).
pub fn init_messages(
    g: &Graph,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    model: &NbaGcnModel,
) -> Result<ArcFeatureMatrix> {
    check_inputs(g, ai, x, e, model)?;
    let p = &model.params;
    ArcFeatureMatrix::new(affine(&arc_inputs(ai, x, e), &p.encoder_weight, &p.encoder_bias), ai)
}

/// One residual non-backtracking layer.
pub fn nba_gcn_layer(
    h: &ArcFeatureMatrix,
    g: &Graph,
    ai: &ArcIndex,
    w: &Array2<f64>,
    begrudging: bool,
) -> Result<ArcFeatureMatrix> {
    let f = h.values.ncols();
    if w.dim() != (f, f) {
        return Err(Error::ShapeError(format!(
            "layer weight has shape {:?}, expected [{f}, {f}]",
            w.shape()
        )));
    }
    if h.values.nrows() != ai.len() || ai.len() != 2 * g.m() {
        return Err(Error::ShapeError("arc features do not match the graph".into()));
    }
    let p = predecessor_means(g, ai, begrudging);
    Ok(ArcFeatureMatrix {
        values: layer_step(&p, &h.values, w).0,
    })
}

/// Returns `(h', pre-activation)`.
pub(crate) fn layer_step(
    p: &SparseRealMatrix,
    h: &Array2<f64>,
    w: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>) {
    let z = p.mul_dense(h).dot(&w.t());
    (h + &z.mapv(|v| v.max(0.0)), z)
}

pub(crate) fn check_no_isolated(g: &Graph) -> Result<()> {
    match (0..g.n()).find(|&v| g.degree(v) == 0) {
        Some(v) => Err(Error::IsolatedNode(v)),
        None => Ok(()),
    }
}

/// Node outputs `head_in * mean_in + head_out * mean_out + head_bias`.
pub fn aggregate_nodes(
    h: &ArcFeatureMatrix,
    g: &Graph,
    ai: &ArcIndex,
    model: &NbaGcnModel,
) -> Result<Array2<f64>> {
    check_no_isolated(g)?;
    if h.values.dim() != (ai.len(), model.hidden()) {
        return Err(Error::ShapeError("arc features do not match the model".into()));
    }
    let ops = ArcOperators::new(g, ai, model.begrudging);
    Ok(readout(&ops, &h.values, model))
}

pub(crate) fn readout(ops: &ArcOperators, h: &Array2<f64>, model: &NbaGcnModel) -> Array2<f64> {
    let p = &model.params;
    ops.mean_in.mul_dense(h).dot(&p.head_in.t())
        + ops.mean_out.mul_dense(h).dot(&p.head_out.t())
        + p.head_bias.view().insert_axis(Axis(0))
}

/// Full forward pass, `n x F_out`.
pub fn forward(
    g: &Graph,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    model: &NbaGcnModel,
) -> Result<Array2<f64>> {
    check_inputs(g, ai, x, e, model)?;
    check_no_isolated(g)?;
    let ops = ArcOperators::new(g, ai, model.begrudging);
    Ok(forward_with(&ops, ai, x, e, model))
}

pub(crate) fn forward_with(
    ops: &ArcOperators,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    model: &NbaGcnModel,
) -> Array2<f64> {
    let p = &model.params;
    let mut h = affine(&arc_inputs(ai, x, e), &p.encoder_weight, &p.encoder_bias);
    for w in &p.layers {
        h = layer_step(&ops.propagate, &h, w).0;
    }
    readout(ops, &h, model)
}

/// Central-difference Jacobian `d out[target] / d x[source]`, `F_out x F_in`.
#[allow(clippy::too_many_arguments)]
pub fn jacobian_fd(
    g: &Graph,
    ai: &ArcIndex,
    x: &Array2<f64>,
    e: Option<&Array2<f64>>,
    model: &NbaGcnModel,
    source: usize,
    target: usize,
    eps: f64,
) -> Result<Array2<f64>> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    g.check_node(source)?;
    g.check_node(target)?;
    check_inputs(g, ai, x, e, model)?;
    check_no_isolated(g)?;
    let ops = ArcOperators::new(g, ai, model.begrudging);
    let mut jac = Array2::zeros((model.f_out(), model.f_in));
    let mut xp = x.clone();
    for k in 0..model.f_in {
        let orig = x[[source, k]];
        xp[[source, k]] = orig + eps;
        let plus = forward_with(&ops, ai, &xp, e, model);
        xp[[source, k]] = orig - eps;
        let minus = forward_with(&ops, ai, &xp, e, model);
        xp[[source, k]] = orig;
        let col = (&plus.row(target) - &minus.row(target)) / (2.0 * eps);
        jac.column_mut(k).assign(&col);
    }
    Ok(jac)
}
