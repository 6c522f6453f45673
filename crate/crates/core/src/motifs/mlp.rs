//! One-hidden-layer softmax network over sparse inputs, trained with Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 64,
            epochs: 60,
            batch_size: 16,
            learning_rate: 0.01,
        }
    }
}

pub type SparseRow = [(usize, f64)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub input_dim: usize,
    pub hidden: usize,
    pub classes: usize,
    /// `input_dim x hidden`, row per input feature.
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// `hidden x classes`.
    w2: Vec<f64>,
    b2: Vec<f64>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64, t: i32) {
        let c1 = 1.0 - Self::BETA1.powi(t);
        let c2 = 1.0 - Self::BETA2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

impl Mlp {
    fn init(input_dim: usize, hidden: usize, classes: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut glorot = |fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect::<Vec<f64>>()
        };
        let w1 = glorot(input_dim, hidden);
        let w2 = glorot(hidden, classes);
        Self {
            input_dim,
            hidden,
            classes,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; classes],
        }
    }

    fn hidden_activations(&self, x: &SparseRow) -> Vec<f64> {
        let mut h = self.b1.clone();
        for &(i, v) in x {
            let row = &self.w1[i * self.hidden..(i + 1) * self.hidden];
            for (hj, w) in h.iter_mut().zip(row) {
                *hj += v * w;
            }
        }
        for hj in &mut h {
            *hj = hj.max(0.0);
        }
        h
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        let mut z = self.b2.clone();
        for (j, &hj) in h.iter().enumerate() {
            if hj == 0.0 {
                continue;
            }
            let row = &self.w2[j * self.classes..(j + 1) * self.classes];
            for (zk, w) in z.iter_mut().zip(row) {
                *zk += hj * w;
            }
        }
        softmax_in_place(&mut z);
        z
    }

    pub fn predict_proba(&self, x: &SparseRow) -> Vec<f64> {
        self.output(&self.hidden_activations(x))
    }

    /// Mini-batch cross-entropy training; sample order is reshuffled each
    /// epoch from the seeded stream.
    pub fn fit(
        x: &[Vec<(usize, f64)>],
        y: &[usize],
        input_dim: usize,
        classes: usize,
        params: MlpParams,
        seed: u64,
    ) -> Self {
        assert_eq!(x.len(), y.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Self::init(input_dim, params.hidden, classes, &mut rng);
        let (h, c) = (params.hidden, classes);
        let mut adam_w1 = Adam::new(net.w1.len());
        let mut adam_b1 = Adam::new(h);
        let mut adam_w2 = Adam::new(net.w2.len());
        let mut adam_b2 = Adam::new(c);
        let mut g_w1 = vec![0.0; net.w1.len()];
        let mut g_b1 = vec![0.0; h];
        let mut g_w2 = vec![0.0; net.w2.len()];
        let mut g_b2 = vec![0.0; c];
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut t = 0;
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(params.batch_size.max(1)) {
                g_w1.iter_mut().for_each(|g| *g = 0.0);
                g_b1.iter_mut().for_each(|g| *g = 0.0);
                g_w2.iter_mut().for_each(|g| *g = 0.0);
                g_b2.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / batch.len() as f64;
                for &s in batch {
                    let hid = net.hidden_activations(&x[s]);
                    let mut delta = net.output(&hid);
                    delta[y[s]] -= 1.0;
                    for k in 0..c {
                        g_b2[k] += delta[k] * scale;
                    }
                    let mut dh = vec![0.0; h];
                    for j in 0..h {
                        if hid[j] == 0.0 {
                            continue;
                        }
                        let row = j * c;
                        let mut acc = 0.0;
                        for k in 0..c {
                            g_w2[row + k] += hid[j] * delta[k] * scale;
                            acc += net.w2[row + k] * delta[k];
                        }
                        dh[j] = acc;
                    }
                    for j in 0..h {
                        g_b1[j] += dh[j] * scale;
                    }
                    for &(i, v) in &x[s] {
                        let row = i * h;
                        for j in 0..h {
                            g_w1[row + j] += v * dh[j] * scale;
                        }
                    }
                }
                t += 1;
                let lr = params.learning_rate;
                adam_w1.step(&mut net.w1, &g_w1, lr, t);
                adam_b1.step(&mut net.b1, &g_b1, lr, t);
                adam_w2.step(&mut net.w2, &g_w2, lr, t);
                adam_b2.step(&mut net.b2, &g_b2, lr, t);
            }
        }
        net
    }
}
