//! Small actor-critic MLP in double precision with hand-written backprop.
//!
//! Shared tanh trunk, a linear policy head producing one logit per action and
//! a linear value head. All parameters live in one flat vector so the
//! optimizer and checkpoints can treat them uniformly.

use rand::Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq)]
struct LayerSpan {
    w: usize,
    b: usize,
    inp: usize,
    out: usize,
}

impl LayerSpan {
    fn end(&self) -> usize {
        self.b + self.out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNetwork {
    obs_dim: usize,
    n_actions: usize,
    hidden: Vec<usize>,
    trunk: Vec<LayerSpan>,
    policy_head: LayerSpan,
    value_head: LayerSpan,
    params: Vec<f64>,
}

/// Activations retained from a forward pass for backprop.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `acts[0]` is the input, `acts[i]` the output of trunk layer `i`.
    acts: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub value: f64,
}

fn layout(obs_dim: usize, hidden: &[usize], n_actions: usize) -> (Vec<LayerSpan>, LayerSpan, LayerSpan, usize) {
    let mut offset = 0;
    let mut span = |inp: usize, out: usize| {
        let s = LayerSpan {
            w: offset,
            b: offset + inp * out,
            inp,
            out,
        };
        offset = s.end();
        s
    };
    let mut trunk = Vec::with_capacity(hidden.len());
    let mut inp = obs_dim;
    for &h in hidden {
        trunk.push(span(inp, h));
        inp = h;
    }
    let policy_head = span(inp, n_actions);
    let value_head = span(inp, 1);
    (trunk, policy_head, value_head, offset)
}

fn affine(params: &[f64], l: &LayerSpan, x: &[f64], out: &mut Vec<f64>) {
    out.clear();
    for o in 0..l.out {
        let row = &params[l.w + o * l.inp..l.w + (o + 1) * l.inp];
        let mut acc = params[l.b + o];
        for (w, xi) in row.iter().zip(x) {
            acc += w * xi;
        }
        out.push(acc);
    }
}

/// Accumulates parameter gradients of `y = Wx + b` and returns `dL/dx`.
fn affine_backward(params: &[f64], l: &LayerSpan, x: &[f64], dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
    let mut dx = vec![0.0; l.inp];
    for o in 0..l.out {
        let g = dy[o];
        if g == 0.0 {
            continue;
        }
        grad[l.b + o] += g;
        let base = l.w + o * l.inp;
        for i in 0..l.inp {
            grad[base + i] += g * x[i];
            dx[i] += g * params[base + i];
        }
    }
    dx
}

impl PolicyNetwork {
    /// Gaussian init scaled by `1/sqrt(fan_in)`; the policy head starts near
    /// zero so the initial policy is close to uniform.
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, hidden: &[usize], n_actions: usize, rng: &mut R) -> Self {
        let (trunk, policy_head, value_head, n) = layout(obs_dim, hidden, n_actions);
        let mut params = vec![0.0; n];
        let mut init = |l: &LayerSpan, gain: f64| {
            let std = gain / (l.inp as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("finite std");
            for p in &mut params[l.w..l.b] {
                *p = normal.sample(rng);
            }
        };
        for l in &trunk {
            init(l, 1.0);
        }
        init(&policy_head, 0.01);
        init(&value_head, 1.0);
        Self {
            obs_dim,
            n_actions,
            hidden: hidden.to_vec(),
            trunk,
            policy_head,
            value_head,
            params,
        }
    }

    pub fn from_params(obs_dim: usize, hidden: &[usize], n_actions: usize, params: Vec<f64>) -> Option<Self> {
        let (trunk, policy_head, value_head, n) = layout(obs_dim, hidden, n_actions);
        (params.len() == n).then(|| Self {
            obs_dim,
            n_actions,
            hidden: hidden.to_vec(),
            trunk,
            policy_head,
            value_head,
            params,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }
    pub fn n_actions(&self) -> usize {
        self.n_actions
    }
    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }
    pub fn n_params(&self) -> usize {
        self.params.len()
    }
    pub fn params(&self) -> &[f64] {
        &self.params
    }
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward_cached(&self, obs: &[f64]) -> ForwardCache {
        debug_assert_eq!(obs.len(), self.obs_dim);
        let mut acts = Vec::with_capacity(self.trunk.len() + 1);
        acts.push(obs.to_vec());
        for l in &self.trunk {
            let mut h = Vec::with_capacity(l.out);
            affine(&self.params, l, acts.last().unwrap(), &mut h);
            h.iter_mut().for_each(|v| *v = v.tanh());
            acts.push(h);
        }
        let feat = acts.last().unwrap();
        let mut logits = Vec::with_capacity(self.n_actions);
        affine(&self.params, &self.policy_head, feat, &mut logits);
        let mut v = Vec::with_capacity(1);
        affine(&self.params, &self.value_head, feat, &mut v);
        ForwardCache {
            acts,
            logits,
            value: v[0],
        }
    }

    pub fn forward(&self, obs: &[f64]) -> (Vec<f64>, f64) {
        let c = self.forward_cached(obs);
        (c.logits, c.value)
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        self.forward_cached(obs).value
    }

    /// Adds `dL/dparams` for upstream gradients on the logits and value.
    pub fn backward(&self, cache: &ForwardCache, dlogits: &[f64], dvalue: f64, grad: &mut [f64]) {
        let feat = cache.acts.last().unwrap();
        let mut dh = affine_backward(&self.params, &self.policy_head, feat, dlogits, grad);
        let dv = affine_backward(&self.params, &self.value_head, feat, &[dvalue], grad);
        for (a, b) in dh.iter_mut().zip(dv) {
            *a += b;
        }
        for (i, l) in self.trunk.iter().enumerate().rev() {
            let out = &cache.acts[i + 1];
            let dpre: Vec<f64> = dh.iter().zip(out).map(|(g, y)| g * (1.0 - y * y)).collect();
            dh = affine_backward(&self.params, l, &cache.acts[i], &dpre, grad);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = PolicyNetwork::new(9, &[64, 64], 7, &mut rng);
        assert_eq!(net.n_params(), 9 * 64 + 64 + 64 * 64 + 64 + 64 * 7 + 7 + 64 + 1);
        let (logits, v) = net.forward(&[0.1; 9]);
        assert_eq!(logits.len(), 7);
        assert!(v.is_finite());
        assert!(PolicyNetwork::from_params(9, &[64, 64], 7, vec![0.0; 10]).is_none());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = PolicyNetwork::new(4, &[5, 3], 3, &mut rng);
        let x = [0.3, -0.2, 0.9, 0.5];
        let upstream = [0.7, -1.1, 0.4];
        let dv = 0.6;
        let objective = |n: &PolicyNetwork| {
            let (l, v) = n.forward(&x);
            l.iter().zip(upstream).map(|(a, b)| a * b).sum::<f64>() + dv * v
        };
        let mut grad = vec![0.0; net.n_params()];
        let cache = net.forward_cached(&x);
        net.backward(&cache, &upstream, dv, &mut grad);
        let h = 1e-6;
        for i in 0..net.n_params() {
            let orig = net.params[i];
            net.params[i] = orig + h;
            let up = objective(&net);
            net.params[i] = orig - h;
            let down = objective(&net);
            net.params[i] = orig;
            let fd = (up - down) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-7, "param {i}: fd {fd} vs {}", grad[i]);
        }
    }
}
