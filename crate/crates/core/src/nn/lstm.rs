use rand::Rng;

use super::{axpy, dot, Parameterized, Scalar};
use crate::error::{Error, Result};

/// Weights of a single LSTM layer.
///
/// Gate rows are stacked in the order input, forget, cell candidate, output,
/// giving `4H` rows. Weight matrices are stored column-major: the `4H` gate
/// weights fed by input channel `k` are contiguous at `k * 4H .. (k + 1) * 4H`.
/// The same layout is used on disk by checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<T> {
    hidden_size: usize,
    input_size: usize,
    pub input_weights: Vec<T>,
    pub recurrent_weights: Vec<T>,
    pub biases: Vec<T>,
}

/// Recurrent state carried between time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState<T> {
    pub hidden: Vec<T>,
    pub cell: Vec<T>,
}

/// Affine output map `y = w . h + b` from the hidden vector to one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams<T> {
    pub weights: Vec<T>,
    pub bias: T,
}

/// LSTM layer plus its output head; the complete trainable amp model.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel<T> {
    pub lstm: LstmParams<T>,
    pub head: DenseParams<T>,
}

impl<T: Scalar> LstmState<T> {
    pub fn zeros(hidden_size: usize) -> Self {
        LstmState {
            hidden: vec![T::zero(); hidden_size],
            cell: vec![T::zero(); hidden_size],
        }
    }

    pub fn reset(&mut self) {
        self.hidden.fill(T::zero());
        self.cell.fill(T::zero());
    }
}

impl<T: Scalar> LstmParams<T> {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        let rows = 4 * hidden_size;
        LstmParams {
            hidden_size,
            input_size,
            input_weights: vec![T::zero(); rows * input_size],
            recurrent_weights: vec![T::zero(); rows * hidden_size],
            biases: vec![T::zero(); rows],
        }
    }

    /// Weights uniform in `±1/sqrt(H)`, biases zero.
    pub fn init<R: Rng + ?Sized>(hidden_size: usize, input_size: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(hidden_size, input_size);
        let bound = 1.0 / (hidden_size as f64).sqrt();
        for w in p.input_weights.iter_mut().chain(p.recurrent_weights.iter_mut()) {
            *w = T::from_f64(rng.gen_range(-bound..bound));
        }
        p
    }

    pub fn from_parts(
        hidden_size: usize,
        input_size: usize,
        input_weights: Vec<T>,
        recurrent_weights: Vec<T>,
        biases: Vec<T>,
    ) -> Result<Self> {
        if hidden_size == 0 || input_size == 0 {
            return Err(Error::InvalidArgument(
                "LSTM sizes must be positive".into(),
            ));
        }
        let rows = 4 * hidden_size;
        if input_weights.len() != rows * input_size {
            return Err(Error::shape("input weights", rows * input_size, input_weights.len()));
        }
        if recurrent_weights.len() != rows * hidden_size {
            return Err(Error::shape(
                "recurrent weights",
                rows * hidden_size,
                recurrent_weights.len(),
            ));
        }
        if biases.len() != rows {
            return Err(Error::shape("biases", rows, biases.len()));
        }
        Ok(LstmParams {
            hidden_size,
            input_size,
            input_weights,
            recurrent_weights,
            biases,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    /// Weight from input channel `col` into gate row `row`.
    pub fn input_weight(&self, row: usize, col: usize) -> T {
        self.input_weights[col * 4 * self.hidden_size + row]
    }

    pub fn recurrent_weight(&self, row: usize, col: usize) -> T {
        self.recurrent_weights[col * 4 * self.hidden_size + row]
    }

    fn check_state(&self, state: &LstmState<T>) -> Result<()> {
        if state.hidden.len() != self.hidden_size {
            return Err(Error::shape("hidden state", self.hidden_size, state.hidden.len()));
        }
        if state.cell.len() != self.hidden_size {
            return Err(Error::shape("cell state", self.hidden_size, state.cell.len()));
        }
        Ok(())
    }

    /// One time step, updating `hidden`/`cell` in place.
    ///
    /// `scratch` (length `5H`) receives the activated gate values
    /// `[i, f, g, o]` followed by `tanh(cell)`. This is the only forward
    /// kernel; streaming inference and the training tape both go through it,
    /// so they agree bit for bit.
    #[inline]
    pub fn advance(&self, input: &[T], hidden: &mut [T], cell: &mut [T], scratch: &mut [T]) {
        let h = self.hidden_size;
        let rows = 4 * h;
        debug_assert_eq!(input.len(), self.input_size);
        debug_assert_eq!(scratch.len(), 5 * h);

        let (gates, tanh_c) = scratch.split_at_mut(rows);
        gates.copy_from_slice(&self.biases);
        for (k, &x) in input.iter().enumerate() {
            axpy(gates, x, &self.input_weights[k * rows..(k + 1) * rows]);
        }
        for (k, &hk) in hidden.iter().enumerate() {
            axpy(gates, hk, &self.recurrent_weights[k * rows..(k + 1) * rows]);
        }

        T::sigmoid_in_place(&mut gates[..2 * h]);
        T::tanh_in_place(&mut gates[2 * h..3 * h]);
        T::sigmoid_in_place(&mut gates[3 * h..]);
        let (ifg, o) = gates.split_at(3 * h);
        let (i, fg) = ifg.split_at(h);
        let (f, g) = fg.split_at(h);
        for j in 0..h {
            let c = f[j] * cell[j] + i[j] * g[j];
            cell[j] = c;
            tanh_c[j] = c;
        }
        T::tanh_in_place(tanh_c);
        for j in 0..h {
            hidden[j] = o[j] * tanh_c[j];
        }
    }

    /// Allocating single step: returns the next state and its hidden vector.
    pub fn step(&self, state: &LstmState<T>, input: &[T]) -> Result<(LstmState<T>, Vec<T>)> {
        if input.len() != self.input_size {
            return Err(Error::shape("LSTM input", self.input_size, input.len()));
        }
        self.check_state(state)?;
        let mut next = state.clone();
        let mut gates = vec![T::zero(); 5 * self.hidden_size];
        self.advance(input, &mut next.hidden, &mut next.cell, &mut gates);
        let hidden = next.hidden.clone();
        Ok((next, hidden))
    }
}

impl<T: Scalar> DenseParams<T> {
    pub fn zeros(hidden_size: usize) -> Self {
        DenseParams {
            weights: vec![T::zero(); hidden_size],
            bias: T::zero(),
        }
    }

    /// Weights uniform in `±scale/sqrt(H)`, zero bias.
    pub fn init<R: Rng + ?Sized>(hidden_size: usize, scale: f64, rng: &mut R) -> Self {
        let bound = scale / (hidden_size as f64).sqrt();
        DenseParams {
            weights: (0..hidden_size)
                .map(|_| T::from_f64(rng.gen_range(-bound..bound)))
                .collect(),
            bias: T::zero(),
        }
    }

    #[inline]
    pub fn apply(&self, hidden: &[T]) -> T {
        dot(&self.weights, hidden) + self.bias
    }
}

/// Activations recorded by a forward pass, consumed by [`LstmModel::backward`].
///
/// Buffers are reused across calls; the tape only grows.
#[derive(Debug, Clone, Default)]
pub struct LstmTape<T> {
    steps: usize,
    inputs: Vec<T>,
    /// `steps + 1` rows of `H`; row 0 is the initial state.
    hidden: Vec<T>,
    cell: Vec<T>,
    /// `steps` rows of `5H`: activated gates then `tanh(cell)`.
    gates: Vec<T>,
    outputs: Vec<T>,
    d_hidden: Vec<T>,
    d_cell: Vec<T>,
    d_gates: Vec<T>,
}

impl<T: Scalar> LstmTape<T> {
    pub fn new() -> Self {
        LstmTape {
            steps: 0,
            inputs: Vec::new(),
            hidden: Vec::new(),
            cell: Vec::new(),
            gates: Vec::new(),
            outputs: Vec::new(),
            d_hidden: Vec::new(),
            d_cell: Vec::new(),
            d_gates: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }

    pub fn outputs(&self) -> &[T] {
        &self.outputs[..self.steps]
    }

    /// State after the last recorded step.
    pub fn final_state(&self) -> LstmState<T> {
        let h = self.d_hidden.len();
        LstmState {
            hidden: self.hidden[self.steps * h..(self.steps + 1) * h].to_vec(),
            cell: self.cell[self.steps * h..(self.steps + 1) * h].to_vec(),
        }
    }

    fn prepare(&mut self, steps: usize, hidden_size: usize, input_size: usize) {
        fn fit<T: Scalar>(v: &mut Vec<T>, n: usize) {
            if v.len() < n {
                v.resize(n, T::zero());
            }
        }
        self.steps = steps;
        fit(&mut self.inputs, steps * input_size);
        fit(&mut self.hidden, (steps + 1) * hidden_size);
        fit(&mut self.cell, (steps + 1) * hidden_size);
        fit(&mut self.gates, steps * 5 * hidden_size);
        fit(&mut self.outputs, steps);
        self.d_hidden.resize(hidden_size, T::zero());
        self.d_cell.resize(hidden_size, T::zero());
        self.d_gates.resize(4 * hidden_size, T::zero());
    }
}

impl<T: Scalar> LstmModel<T> {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        LstmModel {
            lstm: LstmParams::zeros(hidden_size, input_size),
            head: DenseParams::zeros(hidden_size),
        }
    }

    pub fn init<R: Rng + ?Sized>(
        hidden_size: usize,
        input_size: usize,
        head_scale: f64,
        rng: &mut R,
    ) -> Self {
        LstmModel {
            lstm: LstmParams::init(hidden_size, input_size, rng),
            head: DenseParams::init(hidden_size, head_scale, rng),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.lstm.hidden_size
    }

    pub fn input_size(&self) -> usize {
        self.lstm.input_size
    }

    fn check_inputs(&self, inputs: &[T], initial: &LstmState<T>) -> Result<usize> {
        let d = self.lstm.input_size;
        if inputs.len() % d != 0 {
            return Err(Error::shape(
                "input frames",
                inputs.len().next_multiple_of(d),
                inputs.len(),
            ));
        }
        if self.head.weights.len() != self.lstm.hidden_size {
            return Err(Error::shape(
                "head weights",
                self.lstm.hidden_size,
                self.head.weights.len(),
            ));
        }
        self.lstm.check_state(initial)?;
        Ok(inputs.len() / d)
    }

    /// Runs the model over `inputs` (flat frames of `D` values).
    ///
    /// Returns one output sample per frame and the final state, so a long
    /// signal can be processed in consecutive chunks.
    pub fn forward(&self, inputs: &[T], initial: &LstmState<T>) -> Result<(Vec<T>, LstmState<T>)> {
        let steps = self.check_inputs(inputs, initial)?;
        let mut state = initial.clone();
        let mut gates = vec![T::zero(); 5 * self.lstm.hidden_size];
        let mut out = Vec::with_capacity(steps);
        for frame in inputs.chunks_exact(self.lstm.input_size) {
            self.lstm
                .advance(frame, &mut state.hidden, &mut state.cell, &mut gates);
            out.push(self.head.apply(&state.hidden));
        }
        Ok((out, state))
    }

    /// Advances `state` over `inputs` without recording anything or
    /// producing outputs. Used to run warm-up regions.
    pub fn run_state(&self, inputs: &[T], state: &mut LstmState<T>, gates: &mut Vec<T>) {
        gates.resize(5 * self.lstm.hidden_size, T::zero());
        for frame in inputs.chunks_exact(self.lstm.input_size) {
            self.lstm
                .advance(frame, &mut state.hidden, &mut state.cell, gates);
        }
    }

    /// Forward pass that records everything needed by [`Self::backward`].
    pub fn forward_tape(
        &self,
        inputs: &[T],
        initial: &LstmState<T>,
        tape: &mut LstmTape<T>,
    ) -> Result<()> {
        let steps = self.check_inputs(inputs, initial)?;
        let h = self.lstm.hidden_size;
        let d = self.lstm.input_size;
        tape.prepare(steps, h, d);
        tape.inputs[..steps * d].copy_from_slice(inputs);
        tape.hidden[..h].copy_from_slice(&initial.hidden);
        tape.cell[..h].copy_from_slice(&initial.cell);
        for t in 0..steps {
            let (prev_h, next_h) = tape.hidden.split_at_mut((t + 1) * h);
            let (prev_c, next_c) = tape.cell.split_at_mut((t + 1) * h);
            let hid = &mut next_h[..h];
            let cel = &mut next_c[..h];
            hid.copy_from_slice(&prev_h[t * h..]);
            cel.copy_from_slice(&prev_c[t * h..]);
            self.lstm.advance(
                &inputs[t * d..(t + 1) * d],
                hid,
                cel,
                &mut tape.gates[t * 5 * h..(t + 1) * 5 * h],
            );
            tape.outputs[t] = self.head.apply(hid);
        }
        Ok(())
    }

    /// Backpropagation through time over the whole recorded tape.
    ///
    /// `output_grads[t]` is dLoss/dOutput[t]. Gradients are *added* into
    /// `grads`, which must have this model's shape.
    pub fn backward(&self, tape: &mut LstmTape<T>, output_grads: &[T], grads: &mut LstmModel<T>) -> Result<()> {
        let steps = tape.steps;
        if output_grads.len() != steps {
            return Err(Error::shape("output gradients", steps, output_grads.len()));
        }
        let h = self.lstm.hidden_size;
        let d = self.lstm.input_size;
        let rows = 4 * h;
        let one = T::one();

        let LstmTape {
            inputs,
            hidden,
            cell,
            gates,
            d_hidden,
            d_cell,
            d_gates,
            ..
        } = tape;
        d_hidden.fill(T::zero());
        d_cell.fill(T::zero());

        for t in (0..steps).rev() {
            let dy = output_grads[t];
            let h_t = &hidden[(t + 1) * h..(t + 2) * h];
            let h_prev = &hidden[t * h..(t + 1) * h];
            let c_prev = &cell[t * h..(t + 1) * h];
            let a = &gates[t * 5 * h..(t + 1) * 5 * h];
            let x = &inputs[t * d..(t + 1) * d];

            // Output head.
            axpy(&mut grads.head.weights, dy, h_t);
            grads.head.bias += dy;
            axpy(d_hidden, dy, &self.head.weights);

            for j in 0..h {
                let (i, f, g, o) = (a[j], a[h + j], a[2 * h + j], a[3 * h + j]);
                let tc = a[4 * h + j];
                let dh = d_hidden[j];
                let dc = d_cell[j] + dh * o * (one - tc * tc);
                d_gates[j] = dc * g * i * (one - i);
                d_gates[h + j] = dc * c_prev[j] * f * (one - f);
                d_gates[2 * h + j] = dc * i * (one - g * g);
                d_gates[3 * h + j] = dh * tc * o * (one - o);
                d_cell[j] = dc * f;
            }

            for (b, &dz) in grads.lstm.biases.iter_mut().zip(d_gates.iter()) {
                *b += dz;
            }
            for (k, &xk) in x.iter().enumerate() {
                axpy(&mut grads.lstm.input_weights[k * rows..(k + 1) * rows], xk, d_gates);
            }
            for (k, &hk) in h_prev.iter().enumerate() {
                axpy(
                    &mut grads.lstm.recurrent_weights[k * rows..(k + 1) * rows],
                    hk,
                    d_gates,
                );
                d_hidden[k] = dot(&self.lstm.recurrent_weights[k * rows..(k + 1) * rows], d_gates);
            }
        }
        Ok(())
    }

    /// Convenience wrapper: forward with a fresh tape, then backward.
    pub fn gradients(
        &self,
        inputs: &[T],
        initial: &LstmState<T>,
        output_grads: &[T],
    ) -> Result<LstmModel<T>> {
        let mut tape = LstmTape::new();
        self.forward_tape(inputs, initial, &mut tape)?;
        let mut grads = LstmModel::zeros(self.hidden_size(), self.input_size());
        self.backward(&mut tape, output_grads, &mut grads)?;
        Ok(grads)
    }

    pub fn cast<U: Scalar>(&self) -> LstmModel<U> {
        let c = |v: &[T]| v.iter().map(|x| U::from_f64(x.as_f64())).collect::<Vec<U>>();
        LstmModel {
            lstm: LstmParams {
                hidden_size: self.lstm.hidden_size,
                input_size: self.lstm.input_size,
                input_weights: c(&self.lstm.input_weights),
                recurrent_weights: c(&self.lstm.recurrent_weights),
                biases: c(&self.lstm.biases),
            },
            head: DenseParams {
                weights: c(&self.head.weights),
                bias: U::from_f64(self.head.bias.as_f64()),
            },
        }
    }
}

impl<T: Scalar> Parameterized<T> for LstmModel<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![
            &self.lstm.input_weights,
            &self.lstm.recurrent_weights,
            &self.lstm.biases,
            &self.head.weights,
            std::slice::from_ref(&self.head.bias),
        ]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![
            &mut self.lstm.input_weights,
            &mut self.lstm.recurrent_weights,
            &mut self.lstm.biases,
            &mut self.head.weights,
            std::slice::from_mut(&mut self.head.bias),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_inputs(steps: usize, d: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..steps * d).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zero_params_give_zero_state() {
        let p = LstmParams::<f64>::zeros(3, 2);
        let (s, h) = p.step(&LstmState::zeros(3), &[0.7, -2.0]).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(s.cell, vec![0.0; 3]);
    }

    #[test]
    fn saturated_gates_fix_the_cell_value() {
        // Biases (i, f, g, o) = (L, -L, L, L) with zero weights: i = o = 1,
        // f = 0, g = 1, so c = 1 and h = tanh(1) regardless of input.
        let big = 60.0;
        let p = LstmParams::from_parts(1, 1, vec![0.0; 4], vec![0.0; 4], vec![big, -big, big, big])
            .unwrap();
        let mut s = LstmState::zeros(1);
        for x in [0.3, -5.0, 2.0] {
            let (next, h) = p.step(&s, &[x]).unwrap();
            assert!((h[0] - 1.0f64.tanh()).abs() < 1e-12);
            s = next;
        }
        // Candidate bias 1 instead of L: g = tanh(1), c = tanh(1), h = tanh(tanh(1)).
        let p = LstmParams::from_parts(1, 1, vec![0.0; 4], vec![0.0; 4], vec![big, -big, 1.0, big])
            .unwrap();
        for x in [0.0, 4.0] {
            let (_, h) = p.step(&LstmState::zeros(1), &[x]).unwrap();
            assert!((h[0] - 1.0f64.tanh().tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn step_rejects_bad_shapes() {
        let p = LstmParams::<f32>::zeros(2, 3);
        assert!(matches!(
            p.step(&LstmState::zeros(2), &[0.0; 2]),
            Err(Error::Shape { .. })
        ));
        assert!(p.step(&LstmState::zeros(4), &[0.0; 3]).is_err());
    }

    #[test]
    fn zero_model_outputs_head_bias() {
        let mut m = LstmModel::<f32>::zeros(4, 2);
        m.head.bias = 0.25;
        let (out, state) = m.forward(&[0.5; 20], &LstmState::zeros(4)).unwrap();
        assert_eq!(out, vec![0.25; 10]);
        assert_eq!(state, LstmState::zeros(4));
    }

    #[test]
    fn empty_sequence_leaves_state_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = LstmModel::<f64>::init(3, 2, 1.0, &mut rng);
        let init = LstmState {
            hidden: vec![0.1, -0.2, 0.3],
            cell: vec![1.0, 0.0, -1.0],
        };
        let (out, state) = m.forward(&[], &init).unwrap();
        assert!(out.is_empty());
        assert_eq!(state, init);
    }

    #[test]
    fn forward_matches_stepwise_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = LstmModel::<f64>::init(5, 3, 1.0, &mut rng);
        let xs = random_inputs(25, 3, 12);
        let (out, fin) = m.forward(&xs, &LstmState::zeros(5)).unwrap();

        let mut s = LstmState::zeros(5);
        for (t, frame) in xs.chunks(3).enumerate() {
            let (next, h) = m.lstm.step(&s, frame).unwrap();
            let y: f64 = m.head.weights.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + m.head.bias;
            assert!((y - out[t]).abs() < 1e-12);
            s = next;
        }
        assert_eq!(s, fin);
    }

    #[test]
    fn chunked_forward_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = LstmModel::<f32>::init(8, 3, 1.0, &mut rng);
        let xs: Vec<f32> = random_inputs(64, 3, 6).into_iter().map(|v| v as f32).collect();
        let (whole, s_whole) = m.forward(&xs, &LstmState::zeros(8)).unwrap();
        let (a, s_mid) = m.forward(&xs[..96], &LstmState::zeros(8)).unwrap();
        let (b, s_end) = m.forward(&xs[96..], &s_mid).unwrap();
        assert_eq!([a, b].concat(), whole);
        assert_eq!(s_end, s_whole);
    }

    #[test]
    fn tape_forward_matches_plain_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = LstmModel::<f32>::init(6, 2, 1.0, &mut rng);
        let xs: Vec<f32> = random_inputs(30, 2, 10).into_iter().map(|v| v as f32).collect();
        let (out, fin) = m.forward(&xs, &LstmState::zeros(6)).unwrap();
        let mut tape = LstmTape::new();
        m.forward_tape(&xs, &LstmState::zeros(6), &mut tape).unwrap();
        assert_eq!(tape.outputs(), &out[..]);
        assert_eq!(tape.final_state(), fin);
    }

    #[test]
    fn hidden_stays_tanh_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = LstmModel::<f64>::init(4, 1, 1.0, &mut rng);
        m.lstm.scale_weights_for_test(20.0);
        let xs = random_inputs(200, 1, 2);
        let mut tape = LstmTape::new();
        m.forward_tape(&xs, &LstmState::zeros(4), &mut tape).unwrap();
        let s = tape.final_state();
        assert!(s.hidden.iter().all(|h| h.abs() < 1.0));
        assert!(s.cell.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn zero_weight_network_bias_gradient_is_mse_closed_form() {
        // With all weights zero the output is the head bias b at every step.
        // MSE against a zero target is b^2, so dL/db = 2b.
        let steps = 7;
        let mut m = LstmModel::<f64>::zeros(3, 2);
        m.head.bias = 0.4;
        let xs = random_inputs(steps, 2, 4);
        let (out, _) = m.forward(&xs, &LstmState::zeros(3)).unwrap();
        let dy: Vec<f64> = out.iter().map(|y| 2.0 * y / steps as f64).collect();
        let g = m.gradients(&xs, &LstmState::zeros(3), &dy).unwrap();
        assert!((g.head.bias - 2.0 * 0.4).abs() < 1e-12);
        assert!(g.lstm.input_weights.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_loss_has_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = LstmModel::<f64>::init(4, 3, 1.0, &mut rng);
        let xs = random_inputs(8, 3, 3);
        let g = m.gradients(&xs, &LstmState::zeros(4), &[0.0; 8]).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    impl<T: Scalar> LstmParams<T> {
        fn scale_weights_for_test(&mut self, k: f64) {
            for w in self.input_weights.iter_mut().chain(self.recurrent_weights.iter_mut()) {
                *w *= T::from_f64(k);
            }
        }
    }
}
