//! Bias-free feed-forward networks with `|z|^p` activations.
//!
//! A network of type `(n_1, ..., n_N; p_1, ..., p_N)` on `R^d` computes
//!
//! ```text
//! h_0 = x,   h_l = |W_l h_{l-1}|^{p_l} (componentwise),   f(x) = sum_i (h_N)_i
//! ```
//!
//! There are no biases, so `f` is even and positively homogeneous of degree
//! `P = p_1 * ... * p_N`. Both properties are what make the level set
//! `f(x) = 1` a centrally symmetric star-shaped body.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::NetError;

/// Lower bound on `|z|` inside the activation derivative when `p < 1`.
pub const DERIV_CLAMP: f64 = 1e-8;

/// Architecture descriptor: input dimension, hidden widths and per-layer powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    #[serde(rename = "d")]
    input_dim: usize,
    widths: Vec<usize>,
    powers: Vec<f64>,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, widths: Vec<usize>, powers: Vec<f64>) -> Result<Self, NetError> {
        let spec = Self {
            input_dim,
            widths,
            powers,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single hidden layer of `width` units, type `(width; power)`.
    pub fn single(input_dim: usize, width: usize, power: f64) -> Result<Self, NetError> {
        Self::new(input_dim, vec![width], vec![power])
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.input_dim < 2 {
            return Err(NetError::InvalidSpec(format!(
                "input dimension must be at least 2, got {}",
                self.input_dim
            )));
        }
        if self.widths.is_empty() {
            return Err(NetError::InvalidSpec("at least one hidden layer is required".into()));
        }
        if self.widths.len() != self.powers.len() {
            return Err(NetError::InvalidSpec(format!(
                "{} widths but {} powers",
                self.widths.len(),
                self.powers.len()
            )));
        }
        if let Some(w) = self.widths.iter().find(|&&w| w == 0) {
            return Err(NetError::InvalidSpec(format!("layer width {w} is not positive")));
        }
        if let Some(p) = self.powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(NetError::InvalidSpec(format!("power {p} is not a positive finite number")));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    /// `(rows, cols)` of every weight matrix, first layer first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut fan_in = self.input_dim;
        self.widths
            .iter()
            .map(|&w| {
                let shape = (w, fan_in);
                fan_in = w;
                shape
            })
            .collect()
    }

    /// Degree `P` of positive homogeneity: the product of all layer powers.
    pub fn homogeneity_degree(&self) -> f64 {
        self.powers.iter().product()
    }

    /// The conventional type label, e.g. `(4,2;1)` or `(3;1.5)`.
    pub fn type_label(&self) -> String {
        let widths: Vec<String> = self.widths.iter().map(|w| w.to_string()).collect();
        let uniform = self.powers.windows(2).all(|w| w[0] == w[1]);
        let powers: Vec<String> = if uniform {
            vec![format_power(self.powers[0])]
        } else {
            self.powers.iter().map(|&p| format_power(p)).collect()
        };
        format!("({};{})", widths.join(","), powers.join(","))
    }
}

fn format_power(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{p:.0}")
    } else {
        format!("{p}")
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NetError> {
        if data.len() != rows * cols {
            return Err(NetError::ShapeMismatch {
                expected: (rows, cols),
                got: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NetError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(NetError::ShapeMismatch {
                expected: (rows.len(), cols),
                got: (rows.len(), bad.len()),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, NetError> {
        if self.cols != other.rows {
            return Err(NetError::ShapeMismatch {
                expected: (self.cols, other.cols),
                got: other.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (row, o) in self.data.chunks_exact(self.cols).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(w, v)| w * v).sum();
        }
    }
}

#[inline]
pub(crate) fn activate(z: f64, p: f64) -> f64 {
    if p == 1.0 {
        z.abs()
    } else if p == 2.0 {
        z * z
    } else {
        z.abs().powf(p)
    }
}

/// `d/dz |z|^p`, with subgradient 0 at `z = 0`.
#[inline]
pub(crate) fn activate_deriv(z: f64, p: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let sign = if z > 0.0 { 1.0 } else { -1.0 };
    if p == 1.0 {
        sign
    } else if p == 2.0 {
        2.0 * z
    } else {
        let mag = if p < 1.0 { z.abs().max(DERIV_CLAMP) } else { z.abs() };
        p * mag.powf(p - 1.0) * sign
    }
}

/// Per-evaluation buffers so the hot path never allocates.
#[derive(Debug, Clone)]
pub struct Workspace {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
    input_delta: Vec<f64>,
}

impl Workspace {
    pub fn new(spec: &NetworkSpec) -> Self {
        let pre: Vec<Vec<f64>> = spec.widths.iter().map(|&w| vec![0.0; w]).collect();
        Self {
            post: pre.clone(),
            delta: pre.clone(),
            pre,
            input_delta: vec![0.0; spec.input_dim],
        }
    }

    /// Smallest `|z|` over all pre-activations of the last evaluation.
    /// Zero means the point sits on a crease of `f`.
    pub fn min_abs_preactivation(&self) -> f64 {
        self.pre
            .iter()
            .flatten()
            .map(|z| z.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Weight gradients of the mean squared loss, shaped like the network's weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub grads: Vec<Matrix>,
    pub loss: f64,
}

impl GradientBundle {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self {
            grads: spec
                .layer_shapes()
                .into_iter()
                .map(|(r, c)| Matrix::zeros(r, c))
                .collect(),
            loss: 0.0,
        }
    }

    pub(crate) fn clear(&mut self) {
        for g in &mut self.grads {
            g.data.iter_mut().for_each(|v| *v = 0.0);
        }
        self.loss = 0.0;
    }
}

/// A [`NetworkSpec`] together with its weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    weights: Vec<Matrix>,
}

impl Network {
    pub fn new(spec: NetworkSpec, weights: Vec<Matrix>) -> Result<Self, NetError> {
        spec.validate()?;
        let shapes = spec.layer_shapes();
        if shapes.len() != weights.len() {
            return Err(NetError::InvalidSpec(format!(
                "spec has {} layers but {} weight matrices were given",
                shapes.len(),
                weights.len()
            )));
        }
        for (expected, w) in shapes.into_iter().zip(&weights) {
            if w.shape() != expected {
                return Err(NetError::ShapeMismatch {
                    expected,
                    got: w.shape(),
                });
            }
            if w.data.iter().any(|v| !v.is_finite()) {
                return Err(NetError::NonFiniteWeight);
            }
        }
        Ok(Self { spec, weights })
    }

    /// Gaussian weights with standard deviation `1/sqrt(fan_in)`.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self, NetError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = spec
            .layer_shapes()
            .into_iter()
            .map(|(rows, cols)| {
                let normal = Normal::new(0.0, 1.0 / (cols as f64).sqrt())
                    .expect("fan-in is positive");
                let data = (0..rows * cols).map(|_| normal.sample(&mut rng)).collect();
                Matrix { rows, cols, data }
            })
            .collect();
        Ok(Self { spec, weights })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn homogeneity_degree(&self) -> f64 {
        self.spec.homogeneity_degree()
    }

    pub fn workspace(&self) -> Workspace {
        Workspace::new(&self.spec)
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NetError> {
        if x.len() != self.spec.input_dim {
            return Err(NetError::InputLength {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Forward pass writing intermediate values into `ws`. Panics on a
    /// wrong-length input; callers validate first.
    pub fn forward_with(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        debug_assert_eq!(x.len(), self.spec.input_dim);
        for (l, (w, &p)) in self.weights.iter().zip(&self.spec.powers).enumerate() {
            let (before, after) = ws.post.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &before[l - 1] };
            w.mul_vec_into(input, &mut ws.pre[l]);
            for (h, &z) in after[0].iter_mut().zip(&ws.pre[l]) {
                *h = activate(z, p);
            }
        }
        ws.post[self.weights.len() - 1].iter().sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64, NetError> {
        self.check_input(x)?;
        Ok(self.forward_with(x, &mut self.workspace()))
    }

    pub fn forward_batch<V: AsRef<[f64]>>(&self, xs: &[V]) -> Result<Vec<f64>, NetError> {
        let mut ws = self.workspace();
        xs.iter()
            .map(|x| {
                let x = x.as_ref();
                self.check_input(x)?;
                Ok(self.forward_with(x, &mut ws))
            })
            .collect()
    }

    /// Backpropagates `seed = d(out)/df` through the activations stored in
    /// `ws` by the preceding [`forward_with`](Self::forward_with). Fills
    /// `ws.delta[l]` with `d(out)/dz_l` and `ws.input_delta` with `d(out)/dx`.
    fn backward(&self, seed: f64, ws: &mut Workspace) {
        let last = self.weights.len() - 1;
        for (d, &z) in ws.delta[last].iter_mut().zip(&ws.pre[last]) {
            *d = seed * activate_deriv(z, self.spec.powers[last]);
        }
        for l in (0..last).rev() {
            let (lower, upper) = ws.delta.split_at_mut(l + 1);
            let w_next = &self.weights[l + 1];
            let p = self.spec.powers[l];
            let upstream = &upper[0];
            for (j, d) in lower[l].iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, u) in upstream.iter().enumerate() {
                    acc += w_next.get(i, j) * u;
                }
                *d = acc * activate_deriv(ws.pre[l][j], p);
            }
        }
        let w0 = &self.weights[0];
        for (j, g) in ws.input_delta.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, d) in ws.delta[0].iter().enumerate() {
                acc += w0.get(i, j) * d;
            }
            *g = acc;
        }
    }

    /// Gradient of `f` with respect to its input.
    pub fn grad_input(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(x)?;
        let mut ws = self.workspace();
        Ok(self.grad_input_with(x, &mut ws).to_vec())
    }

    pub fn grad_input_with<'a>(&self, x: &[f64], ws: &'a mut Workspace) -> &'a [f64] {
        self.forward_with(x, ws);
        self.backward(1.0, ws);
        &ws.input_delta
    }

    /// Adds the contribution of one sample to `grads`, scaled by `1/batch_len`,
    /// and returns its squared error.
    pub(crate) fn accumulate_sample(
        &self,
        x: &[f64],
        target: f64,
        batch_len: usize,
        ws: &mut Workspace,
        grads: &mut GradientBundle,
    ) -> f64 {
        let residual = self.forward_with(x, ws) - target;
        self.backward(2.0 * residual / batch_len as f64, ws);
        for (l, g) in grads.grads.iter_mut().enumerate() {
            let input: &[f64] = if l == 0 { x } else { &ws.post[l - 1] };
            let cols = g.cols;
            for (row, &d) in g.data.chunks_exact_mut(cols).zip(&ws.delta[l]) {
                if d == 0.0 {
                    continue;
                }
                for (gij, &v) in row.iter_mut().zip(input) {
                    *gij += d * v;
                }
            }
        }
        residual * residual
    }

    /// Gradient of the mean squared error `mean((f(x) - target)^2)` over `batch`
    /// with respect to every weight.
    pub fn grad_weights<V: AsRef<[f64]>>(
        &self,
        batch: &[(V, f64)],
    ) -> Result<GradientBundle, NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let mut ws = self.workspace();
        let mut bundle = GradientBundle::zeros(&self.spec);
        let mut sq = 0.0;
        for (x, target) in batch {
            let x = x.as_ref();
            self.check_input(x)?;
            sq += self.accumulate_sample(x, *target, batch.len(), &mut ws, &mut bundle);
        }
        bundle.loss = sq / batch.len() as f64;
        Ok(bundle)
    }

    /// Mean squared error against `target` over `xs`.
    pub fn mse<V: AsRef<[f64]>>(&self, xs: &[V], target: f64) -> Result<f64, NetError> {
        if xs.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let values = self.forward_batch(xs)?;
        Ok(values.iter().map(|v| (v - target).powi(2)).sum::<f64>() / xs.len() as f64)
    }

    /// The network `x -> f(T x)`: first-layer weights replaced by `W_1 T`.
    /// `t` is `d x d`.
    pub fn compose_input(&self, t: &Matrix) -> Result<Network, NetError> {
        let d = self.spec.input_dim;
        if t.shape() != (d, d) {
            return Err(NetError::ShapeMismatch {
                expected: (d, d),
                got: t.shape(),
            });
        }
        let mut weights = self.weights.clone();
        weights[0] = self.weights[0].matmul(t)?;
        Network::new(self.spec.clone(), weights)
    }
}
