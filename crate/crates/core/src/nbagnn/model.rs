//! Parameters, initialization and JSON checkpoints.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// Trainable weights. Matrices map row vectors as `y = x W^T`, so every weight
/// is stored as `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct NbaGcnParams {
    /// `F x (2 F_in + F_edge)`.
    pub encoder_weight: Array2<f64>,
    pub encoder_bias: Array1<f64>,
    /// One `F x F` matrix per layer.
    pub layers: Vec<Array2<f64>>,
    /// `F_out x F`, applied to the mean over incoming arcs.
    pub head_in: Array2<f64>,
    /// `F_out x F`, applied to the mean over outgoing arcs.
    pub head_out: Array2<f64>,
    pub head_bias: Array1<f64>,
}

impl NbaGcnParams {
    pub fn zeros_like(&self) -> Self {
        NbaGcnParams {
            encoder_weight: Array2::zeros(self.encoder_weight.raw_dim()),
            encoder_bias: Array1::zeros(self.encoder_bias.raw_dim()),
            layers: self.layers.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            head_in: Array2::zeros(self.head_in.raw_dim()),
            head_out: Array2::zeros(self.head_out.raw_dim()),
            head_bias: Array1::zeros(self.head_bias.raw_dim()),
        }
    }

    fn slices(&self) -> Vec<&[f64]> {
        let mut out = vec![
            self.encoder_weight.as_slice().unwrap(),
            self.encoder_bias.as_slice().unwrap(),
        ];
        out.extend(self.layers.iter().map(|w| w.as_slice().unwrap()));
        out.push(self.head_in.as_slice().unwrap());
        out.push(self.head_out.as_slice().unwrap());
        out.push(self.head_bias.as_slice().unwrap());
        out
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![
            self.encoder_weight.as_slice_mut().unwrap(),
            self.encoder_bias.as_slice_mut().unwrap(),
        ];
        out.extend(self.layers.iter_mut().map(|w| w.as_slice_mut().unwrap()));
        out.push(self.head_in.as_slice_mut().unwrap());
        out.push(self.head_out.as_slice_mut().unwrap());
        out.push(self.head_bias.as_slice_mut().unwrap());
        out
    }

    /// All parameters in a fixed order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().concat()
    }

    /// Overwrites the parameters from a vector produced by [`Self::to_flat`].
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.len() {
            return Err(Error::ShapeError(format!(
                "expected {} parameters, got {}",
                self.len(),
                flat.len()
            )));
        }
        let mut rest = flat;
        for s in self.slices_mut() {
            let (head, tail) = rest.split_at(s.len());
            s.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `self += alpha * other`.
    pub fn scaled_add(&mut self, alpha: f64, other: &NbaGcnParams) {
        for (a, b) in self.slices_mut().into_iter().zip(other.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|x| x.is_finite()))
    }
}

/// Non-backtracking GCN: arc encoder, residual non-backtracking layers and a
/// node readout over incoming and outgoing arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct NbaGcnModel {
    pub f_in: usize,
    pub f_edge: usize,
    pub params: NbaGcnParams,
    /// Leaf-tail arcs aggregate their reverse arc instead of nothing.
    pub begrudging: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub f_in: usize,
    pub f_edge: usize,
    pub hidden: usize,
    pub f_out: usize,
    pub layers: usize,
}

impl NbaGcnModel {
    /// Weights uniform in `[-s, s]` with `s = 1/sqrt(hidden)`, biases zero.
    pub fn init(shape: ModelShape, begrudging: bool, seed: u64) -> Result<Self> {
        if shape.f_in == 0 || shape.hidden == 0 || shape.f_out == 0 {
            return Err(Error::InvalidArgument(
                "feature, hidden and output widths must be positive".into(),
            ));
        }
        let mut rng = stream_rng(seed, streams::MODEL_INIT);
        let s = 1.0 / (shape.hidden as f64).sqrt();
        let mut uniform = |rows: usize, cols: usize| {
            Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-s..=s))
        };
        let encoder_weight = uniform(shape.hidden, 2 * shape.f_in + shape.f_edge);
        let layers = (0..shape.layers)
            .map(|_| uniform(shape.hidden, shape.hidden))
            .collect();
        let head_in = uniform(shape.f_out, shape.hidden);
        let head_out = uniform(shape.f_out, shape.hidden);
        Ok(NbaGcnModel {
            f_in: shape.f_in,
            f_edge: shape.f_edge,
            params: NbaGcnParams {
                encoder_weight,
                encoder_bias: Array1::zeros(shape.hidden),
                layers,
                head_in,
                head_out,
                head_bias: Array1::zeros(shape.f_out),
            },
            begrudging,
        })
    }

    pub fn shape(&self) -> ModelShape {
        ModelShape {
            f_in: self.f_in,
            f_edge: self.f_edge,
            hidden: self.hidden(),
            f_out: self.f_out(),
            layers: self.params.layers.len(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.params.encoder_weight.nrows()
    }

    pub fn f_out(&self) -> usize {
        self.params.head_in.nrows()
    }

    pub fn num_layers(&self) -> usize {
        self.params.layers.len()
    }

    /// Checks that every parameter shape agrees with `f_in`, `f_edge` and the
    /// encoder width.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let f = self.hidden();
        let fo = self.f_out();
        let shape_err = |what: &str, got: &[usize], want: &[usize]| {
            Err(Error::ShapeError(format!("{what} has shape {got:?}, expected {want:?}")))
        };
        let width = 2 * self.f_in + self.f_edge;
        if p.encoder_weight.dim() != (f, width) {
            return shape_err("encoder weight", p.encoder_weight.shape(), &[f, width]);
        }
        if p.encoder_bias.len() != f {
            return shape_err("encoder bias", p.encoder_bias.shape(), &[f]);
        }
        for w in &p.layers {
            if w.dim() != (f, f) {
                return shape_err("layer weight", w.shape(), &[f, f]);
            }
        }
        if p.head_out.dim() != (fo, f) || p.head_in.ncols() != f {
            return shape_err("output head", p.head_out.shape(), &[fo, f]);
        }
        if p.head_bias.len() != fo {
            return shape_err("head bias", p.head_bias.shape(), &[fo]);
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let ck = Checkpoint {
            f_in: self.f_in,
            f: self.hidden(),
            f_out: self.f_out(),
            layers: self.params.layers.iter().map(rows).collect(),
            encoder: LinearJson {
                weight: rows(&self.params.encoder_weight),
                bias: self.params.encoder_bias.to_vec(),
            },
            head_in: rows(&self.params.head_in),
            head_out: rows(&self.params.head_out),
            head_bias: self.params.head_bias.to_vec(),
            begrudging: self.begrudging,
        };
        serde_json::to_value(ck).expect("checkpoint is plain data")
    }

    /// Reads a checkpoint; the edge feature width is whatever the encoder
    /// accepts beyond the two node blocks.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_value(value.clone())
            .map_err(|e| Error::ShapeError(format!("invalid checkpoint: {e}")))?;
        let encoder_weight = matrix(&ck.encoder.weight, ck.f)?;
        let width = encoder_weight.ncols();
        if width < 2 * ck.f_in {
            return Err(Error::ShapeError(format!(
                "encoder width {width} is smaller than 2 * F_in = {}",
                2 * ck.f_in
            )));
        }
        let model = NbaGcnModel {
            f_in: ck.f_in,
            f_edge: width - 2 * ck.f_in,
            params: NbaGcnParams {
                encoder_weight,
                encoder_bias: Array1::from(ck.encoder.bias),
                layers: ck
                    .layers
                    .iter()
                    .map(|w| matrix(w, ck.f))
                    .collect::<Result<_>>()?,
                head_in: matrix(&ck.head_in, ck.f_out)?,
                head_out: matrix(&ck.head_out, ck.f_out)?,
                head_bias: Array1::from(ck.head_bias),
            },
            begrudging: ck.begrudging,
        };
        model.validate()?;
        if !model.params.is_finite() {
            return Err(Error::ShapeError("checkpoint contains non-finite weights".into()));
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct LinearJson {
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    #[serde(rename = "F_in")]
    f_in: usize,
    #[serde(rename = "F")]
    f: usize,
    #[serde(rename = "F_out")]
    f_out: usize,
    layers: Vec<Vec<Vec<f64>>>,
    encoder: LinearJson,
    head_in: Vec<Vec<f64>>,
    head_out: Vec<Vec<f64>>,
    head_bias: Vec<f64>,
    begrudging: bool,
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(rows: &[Vec<f64>], nrows: usize) -> Result<Array2<f64>> {
    if rows.len() != nrows {
        return Err(Error::ShapeError(format!("expected {nrows} rows, got {}", rows.len())));
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ShapeError("ragged weight matrix".into()));
    }
    Ok(Array2::from_shape_fn((nrows, ncols), |(i, j)| rows[i][j]))
}
