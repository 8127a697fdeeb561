//! Fully connected networks with ReLU hidden layers, their Adam optimizer
//! state, and the JSON checkpoint format.
//!
//! Both the transport map and the potential are plain MLPs: every hidden
//! layer is affine followed by ReLU, the output layer is affine. Parameters
//! live outside any tape; a forward pass either runs directly on arrays
//! (evaluation) or records onto a [`Tape`] (training).

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Gradients, Tape, TensorRef};
use crate::{Error, Result};

/// Weights and biases of an MLP with fixed ReLU hidden activations.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layer_dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl MlpParams {
    /// Zero-initialized network.
    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        check_dims(layer_dims)?;
        let weights = layer_pairs(layer_dims)
            .map(|(i, o)| Array2::zeros((i, o)))
            .collect();
        let biases = layer_pairs(layer_dims)
            .map(|(_, o)| Array1::zeros(o))
            .collect();
        Ok(MlpParams {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        })
    }

    /// Random initialization: weights uniform in `[-a, a]` with
    /// `a = sqrt(1/fan_in)` per layer, biases zero.
    pub fn init<R: Rng>(layer_dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_dims)?;
        for w in &mut net.weights {
            let a = (1.0 / w.nrows() as f64).sqrt();
            w.mapv_inplace(|_| (rng.gen::<f64>() * 2.0 - 1.0) * a);
        }
        Ok(net)
    }

    /// Build from explicit per-layer matrices; shapes must match `layer_dims`.
    pub fn from_parts(
        layer_dims: Vec<usize>,
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
    ) -> Result<Self> {
        check_dims(&layer_dims)?;
        let n_layers = layer_dims.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::Shape(format!(
                "expected {n_layers} weight/bias pairs, got {}/{}",
                weights.len(),
                biases.len()
            )));
        }
        for (l, (i, o)) in layer_pairs(&layer_dims).enumerate() {
            if weights[l].dim() != (i, o) {
                return Err(Error::Shape(format!(
                    "layer {l}: weight shape {:?}, expected ({i}, {o})",
                    weights[l].dim()
                )));
            }
            if biases[l].len() != o {
                return Err(Error::Shape(format!(
                    "layer {l}: bias length {}, expected {o}",
                    biases[l].len()
                )));
            }
        }
        let net = MlpParams {
            layer_dims,
            weights,
            biases,
        };
        net.check_finite()?;
        Ok(net)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn check_finite(&self) -> Result<()> {
        for (l, w) in self.weights.iter().enumerate() {
            if !w.iter().all(|v| v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite value in weights[{l}]")));
            }
        }
        for (l, b) in self.biases.iter().enumerate() {
            if !b.iter().all(|v| v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite value in biases[{l}]")));
            }
        }
        Ok(())
    }

    /// Plain forward pass; no recording.
    pub fn forward(&self, input: &Array2<f64>) -> Result<Array2<f64>> {
        if input.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                input.ncols(),
                self.input_dim()
            )));
        }
        let mut h = input.dot(&self.weights[0]) + &self.biases[0];
        for l in 1..self.n_layers() {
            h.mapv_inplace(|v| v.max(0.0));
            h = h.dot(&self.weights[l]) + &self.biases[l];
        }
        Ok(h)
    }

    /// Push this network's parameters onto a tape.
    ///
    /// `trainable` decides whether gradients will be computed for them.
    pub fn push_params(&self, tape: &mut Tape, trainable: bool) -> MlpTapeVars {
        let mut vars = MlpTapeVars {
            weights: Vec::with_capacity(self.n_layers()),
            biases: Vec::with_capacity(self.n_layers()),
        };
        for l in 0..self.n_layers() {
            let w = self.weights[l].clone();
            let b = self
                .biases[l]
                .clone()
                .insert_axis(Axis(0));
            if trainable {
                vars.weights.push(tape.leaf(w));
                vars.biases.push(tape.leaf(b));
            } else {
                vars.weights.push(tape.constant(w));
                vars.biases.push(tape.constant(b));
            }
        }
        vars
    }

    /// Recorded forward pass through previously pushed parameters.
    pub fn forward_with_vars(
        &self,
        tape: &mut Tape,
        vars: &MlpTapeVars,
        input: TensorRef,
    ) -> Result<TensorRef> {
        if tape.value(input).ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                tape.value(input).ncols(),
                self.input_dim()
            )));
        }
        let mut h = tape.matmul(input, vars.weights[0])?;
        h = tape.add_row(h, vars.biases[0])?;
        for l in 1..self.n_layers() {
            h = tape.relu(h)?;
            h = tape.matmul(h, vars.weights[l])?;
            h = tape.add_row(h, vars.biases[l])?;
        }
        Ok(h)
    }

    /// Convenience: push parameters and run one recorded forward pass.
    pub fn forward_on_tape(
        &self,
        tape: &mut Tape,
        input: TensorRef,
        trainable: bool,
    ) -> Result<(TensorRef, MlpTapeVars)> {
        let vars = self.push_params(tape, trainable);
        let out = self.forward_with_vars(tape, &vars, input)?;
        Ok((out, vars))
    }
}

fn check_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(Error::Config(
            "layer_dims needs at least input and output entries".to_string(),
        ));
    }
    if layer_dims.iter().any(|&d| d == 0) {
        return Err(Error::Config("layer dimensions must be positive".to_string()));
    }
    Ok(())
}

fn layer_pairs(dims: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    dims.windows(2).map(|w| (w[0], w[1]))
}

/// Tape handles for one network's parameters.
pub struct MlpTapeVars {
    pub weights: Vec<TensorRef>,
    pub biases: Vec<TensorRef>,
}

/// Per-layer gradients, same shapes as [`MlpParams`].
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl ParamGrads {
    /// Extract this network's gradients from a backward pass.
    /// Parameters the loss never touched come back as zeros.
    pub fn from_backward(grads: &Gradients, vars: &MlpTapeVars) -> Result<Self> {
        let mut weights = Vec::with_capacity(vars.weights.len());
        let mut biases = Vec::with_capacity(vars.biases.len());
        for &w in &vars.weights {
            weights.push(grads.get(w)?);
        }
        for &b in &vars.biases {
            biases.push(grads.get(b)?.remove_axis(Axis(0)));
        }
        Ok(ParamGrads { weights, biases })
    }

    fn check_shapes(&self, params: &MlpParams) -> Result<()> {
        if self.weights.len() != params.n_layers() || self.biases.len() != params.n_layers() {
            return Err(Error::Shape("gradient layer count mismatch".to_string()));
        }
        for l in 0..params.n_layers() {
            if self.weights[l].dim() != params.weights[l].dim()
                || self.biases[l].len() != params.biases[l].len()
            {
                return Err(Error::Shape(format!("gradient shape mismatch at layer {l}")));
            }
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        for (l, w) in self.weights.iter().enumerate() {
            if !w.iter().all(|v| v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite gradient in weights[{l}]"
                )));
            }
        }
        for (l, b) in self.biases.iter().enumerate() {
            if !b.iter().all(|v| v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite gradient in biases[{l}]")));
            }
        }
        Ok(())
    }
}

/// Adam moment estimates and step counter for one [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    step_count: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m_weights: Vec<Array2<f64>>,
    m_biases: Vec<Array1<f64>>,
    v_weights: Vec<Array2<f64>>,
    v_biases: Vec<Array1<f64>>,
}

impl AdamState {
    /// Fresh state with the conventional defaults (0.9, 0.999, 1e-8).
    pub fn new(params: &MlpParams) -> Self {
        Self::with_hyperparams(params, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyperparams(params: &MlpParams, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        AdamState {
            step_count: 0,
            beta1,
            beta2,
            epsilon,
            m_weights: params.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            m_biases: params.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_weights: params.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            v_biases: params.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

/// One Adam update with bias correction; increments the step counter.
pub fn adam_step(
    params: &mut MlpParams,
    grads: &ParamGrads,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(Error::Config(format!("lr must be positive and finite, got {lr}")));
    }
    grads.check_shapes(params)?;
    grads.check_finite()?;

    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);

    for l in 0..params.n_layers() {
        update_tensor(
            params.weights[l].as_slice_mut().unwrap(),
            grads.weights[l].as_slice().unwrap(),
            state.m_weights[l].as_slice_mut().unwrap(),
            state.v_weights[l].as_slice_mut().unwrap(),
            b1, b2, eps, bc1, bc2, lr,
        );
        update_tensor(
            params.biases[l].as_slice_mut().unwrap(),
            grads.biases[l].as_slice().unwrap(),
            state.m_biases[l].as_slice_mut().unwrap(),
            state.v_biases[l].as_slice_mut().unwrap(),
            b1, b2, eps, bc1, bc2, lr,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update_tensor(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    b1: f64,
    b2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
    lr: f64,
) {
    for i in 0..p.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

// --- checkpoint serialization -------------------------------------------------

/// JSON document for one network plus its optimizer state.
///
/// Arrays are row-major, written with shortest round-trip decimals, so a
/// checkpoint restores bit-identical `f64` values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkCheckpoint {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub adam: AdamCheckpoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamCheckpoint {
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub first_moment: MomentCheckpoint,
    pub second_moment: MomentCheckpoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentCheckpoint {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

fn mats_to_rows(mats: &[Array2<f64>]) -> Vec<Vec<f64>> {
    mats.iter().map(|m| m.iter().copied().collect()).collect()
}

fn vecs_to_rows(vecs: &[Array1<f64>]) -> Vec<Vec<f64>> {
    vecs.iter().map(|v| v.to_vec()).collect()
}

impl NetworkCheckpoint {
    pub fn from_state(params: &MlpParams, adam: &AdamState) -> Self {
        NetworkCheckpoint {
            layer_dims: params.layer_dims.clone(),
            weights: mats_to_rows(&params.weights),
            biases: vecs_to_rows(&params.biases),
            adam: AdamCheckpoint {
                step_count: adam.step_count,
                beta1: adam.beta1,
                beta2: adam.beta2,
                epsilon: adam.epsilon,
                first_moment: MomentCheckpoint {
                    weights: mats_to_rows(&adam.m_weights),
                    biases: vecs_to_rows(&adam.m_biases),
                },
                second_moment: MomentCheckpoint {
                    weights: mats_to_rows(&adam.v_weights),
                    biases: vecs_to_rows(&adam.v_biases),
                },
            },
        }
    }

    pub fn into_state(self) -> Result<(MlpParams, AdamState)> {
        let params = restore_params(&self.layer_dims, &self.weights, &self.biases)?;
        let m = restore_params(
            &self.layer_dims,
            &self.adam.first_moment.weights,
            &self.adam.first_moment.biases,
        )?;
        let v = restore_params(
            &self.layer_dims,
            &self.adam.second_moment.weights,
            &self.adam.second_moment.biases,
        )?;
        let adam = AdamState {
            step_count: self.adam.step_count,
            beta1: self.adam.beta1,
            beta2: self.adam.beta2,
            epsilon: self.adam.epsilon,
            m_weights: m.weights,
            m_biases: m.biases,
            v_weights: v.weights,
            v_biases: v.biases,
        };
        Ok((params, adam))
    }
}

fn restore_params(dims: &[usize], weights: &[Vec<f64>], biases: &[Vec<f64>]) -> Result<MlpParams> {
    check_dims(dims)?;
    let n_layers = dims.len() - 1;
    if weights.len() != n_layers || biases.len() != n_layers {
        return Err(Error::Config(format!(
            "checkpoint has {} weight / {} bias layers, dims imply {n_layers}",
            weights.len(),
            biases.len()
        )));
    }
    let mut ws = Vec::with_capacity(n_layers);
    let mut bs = Vec::with_capacity(n_layers);
    for (l, (i, o)) in layer_pairs(dims).enumerate() {
        if weights[l].len() != i * o {
            return Err(Error::Config(format!(
                "checkpoint layer {l}: {} weight values, expected {}",
                weights[l].len(),
                i * o
            )));
        }
        if biases[l].len() != o {
            return Err(Error::Config(format!(
                "checkpoint layer {l}: {} bias values, expected {o}",
                biases[l].len()
            )));
        }
        ws.push(Array2::from_shape_vec((i, o), weights[l].clone()).expect("shape checked"));
        bs.push(Array1::from_vec(biases[l].clone()));
    }
    Ok(MlpParams {
        layer_dims: dims.to_vec(),
        weights: ws,
        biases: bs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_maps_everything_to_zero() {
        let net = MlpParams::zeros(&[3, 5, 2]).unwrap();
        let x = array![[1.0, -2.0, 0.5], [0.0, 0.0, 0.0]];
        let y = net.forward(&x).unwrap();
        assert_eq!(y.dim(), (2, 2));
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_identity_layer_is_the_identity() {
        let net = MlpParams::from_parts(
            vec![2, 2],
            vec![array![[1.0, 0.0], [0.0, 1.0]]],
            vec![Array1::zeros(2)],
        )
        .unwrap();
        let x = array![[3.0, -4.0], [0.25, 7.0]];
        let y = net.forward(&x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn forward_matches_straight_line_evaluation() {
        // Independent oracle: hand-rolled matrix-multiply/ReLU evaluation of
        // the same 2->3->1 weights.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let net = MlpParams::init(&[2, 3, 1], &mut rng).unwrap();
        let x = array![[0.3, -1.2], [2.0, 0.7], [-0.5, -0.1]];

        let w0 = net.weights()[0].clone();
        let b0 = net.biases()[0].clone();
        let w1 = net.weights()[1].clone();
        let b1 = net.biases()[1].clone();
        for r in 0..x.nrows() {
            let mut h = [0.0; 3];
            for j in 0..3 {
                let pre = x[[r, 0]] * w0[[0, j]] + x[[r, 1]] * w0[[1, j]] + b0[j];
                h[j] = pre.max(0.0);
            }
            let mut out = b1[0];
            for j in 0..3 {
                out += h[j] * w1[[j, 0]];
            }
            let y = net.forward(&x).unwrap();
            assert!((y[[r, 0]] - out).abs() < 1e-12, "{} vs {}", y[[r, 0]], out);
        }
    }

    #[test]
    fn taped_forward_equals_plain_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = MlpParams::init(&[4, 10, 10, 2], &mut rng).unwrap();
        let x = Array2::from_shape_fn((7, 4), |_| rng.gen::<f64>() - 0.5);
        let plain = net.forward(&x).unwrap();
        let mut tape = Tape::new();
        let input = tape.constant(x);
        let (out, _) = net.forward_on_tape(&mut tape, input, true).unwrap();
        assert_eq!(tape.value(out), &plain);
    }

    #[test]
    fn full_mlp_gradients_match_finite_differences() {
        // 2 -> 100 -> 100 -> 100 -> 1 network probed on a handful of entries
        // per tensor (a full sweep is done at smaller sizes in the
        // acceptance suite).
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let net = MlpParams::init(&[2, 100, 100, 100, 1], &mut rng).unwrap();
        let x = Array2::from_shape_fn((5, 2), |_| rng.gen::<f64>() * 2.0 - 1.0);

        let loss_of = |net: &MlpParams| {
            let y = net.forward(&x).unwrap();
            y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64
        };

        let mut tape = Tape::new();
        let input = tape.constant(x.clone());
        let (out, vars) = net.forward_on_tape(&mut tape, input, true).unwrap();
        let sq = tape.square(out).unwrap();
        let loss = tape.mean(sq).unwrap();
        let grads = ParamGrads::from_backward(&tape.backward(loss).unwrap(), &vars).unwrap();

        let h = 1e-5;
        for l in 0..net.n_layers() {
            for &(r, c) in &[(0usize, 0usize), (1, 0)] {
                if r >= net.weights()[l].nrows() || c >= net.weights()[l].ncols() {
                    continue;
                }
                let mut plus = net.clone();
                plus.weights[l][[r, c]] += h;
                let mut minus = net.clone();
                minus.weights[l][[r, c]] -= h;
                let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let an = grads.weights[l][[r, c]];
                let denom = fd.abs().max(an.abs()).max(1e-8);
                assert!(
                    (fd - an).abs() / denom < 1e-4,
                    "layer {l} weight ({r},{c}): fd {fd} vs autodiff {an}"
                );
            }
            let mut plus = net.clone();
            plus.biases[l][0] += h;
            let mut minus = net.clone();
            minus.biases[l][0] -= h;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let an = grads.biases[l][0];
            let denom = fd.abs().max(an.abs()).max(1e-8);
            assert!(
                (fd - an).abs() / denom < 1e-4,
                "layer {l} bias: fd {fd} vs autodiff {an}"
            );
        }
    }

    #[test]
    fn adam_zero_gradient_keeps_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = MlpParams::init(&[2, 4, 1], &mut rng).unwrap();
        let before = net.clone();
        let mut state = AdamState::new(&net);
        let grads = ParamGrads {
            weights: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: net.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        };
        adam_step(&mut net, &grads, &mut state, 0.1).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn adam_first_step_moves_by_almost_lr() {
        // Scalar parameter p=0, gradient 1, lr=0.1: bias-corrected moments
        // give a unit-magnitude direction up to epsilon.
        let mut net = MlpParams::zeros(&[1, 1]).unwrap();
        let mut state = AdamState::new(&net);
        let grads = ParamGrads {
            weights: vec![array![[1.0]]],
            biases: vec![Array1::zeros(1)],
        };
        adam_step(&mut net, &grads, &mut state, 0.1).unwrap();
        let p = net.weights()[0][[0, 0]];
        let expected = -0.1 / (1.0 + 1e-8);
        assert!((p - expected).abs() < 1e-15, "{p} vs {expected}");
    }

    #[test]
    fn adam_second_step_is_no_larger_than_first() {
        let mut net = MlpParams::zeros(&[1, 1]).unwrap();
        let mut state = AdamState::new(&net);
        let grads = ParamGrads {
            weights: vec![array![[1.0]]],
            biases: vec![Array1::zeros(1)],
        };
        adam_step(&mut net, &grads, &mut state, 0.1).unwrap();
        let p1 = net.weights()[0][[0, 0]];
        adam_step(&mut net, &grads, &mut state, 0.1).unwrap();
        let p2 = net.weights()[0][[0, 0]];
        let (d1, d2) = (p1.abs(), (p2 - p1).abs());
        assert!(d2 <= d1 + 1e-12, "second step {d2} exceeds first {d1}");
        assert_eq!(state.step_count(), 2);
    }

    #[test]
    fn adam_rejects_non_finite_gradients() {
        let mut net = MlpParams::zeros(&[2, 2]).unwrap();
        let mut state = AdamState::new(&net);
        let grads = ParamGrads {
            weights: vec![array![[f64::NAN, 0.0], [0.0, 0.0]]],
            biases: vec![Array1::zeros(2)],
        };
        let err = adam_step(&mut net, &grads, &mut state, 0.1).unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("weights[0]"), "{msg}"),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn checkpoint_roundtrip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut net = MlpParams::init(&[3, 8, 2], &mut rng).unwrap();
        let mut state = AdamState::new(&net);
        let grads = ParamGrads {
            weights: net
                .weights
                .iter()
                .map(|w| Array2::from_shape_fn(w.raw_dim(), |_| rng.gen::<f64>() - 0.5))
                .collect(),
            biases: net
                .biases
                .iter()
                .map(|b| Array1::from_shape_fn(b.len(), |_| rng.gen::<f64>() - 0.5))
                .collect(),
        };
        adam_step(&mut net, &grads, &mut state, 1e-3).unwrap();

        let doc = NetworkCheckpoint::from_state(&net, &state);
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: NetworkCheckpoint = serde_json::from_str(&json).unwrap();
        let (net2, state2) = parsed.into_state().unwrap();
        assert_eq!(net, net2);
        assert_eq!(state, state2);
        // Serializing again gives the identical document.
        let json2 = serde_json::to_string(&NetworkCheckpoint::from_state(&net2, &state2)).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn dimension_validation() {
        assert!(MlpParams::zeros(&[3]).is_err());
        assert!(MlpParams::zeros(&[3, 0, 1]).is_err());
        let net = MlpParams::zeros(&[3, 2]).unwrap();
        assert!(net.forward(&Array2::zeros((1, 4))).is_err());
    }
}
