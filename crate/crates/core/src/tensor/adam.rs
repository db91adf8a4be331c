//! Adam optimizer with bias correction.

use super::ParamStore;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// In-place Adam. Moment buffers are keyed by parameter id and persist
/// across steps; gradients are zeroed after each step.
pub struct Adam {
    cfg: AdamConfig,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(cfg: AdamConfig) -> Result<Self> {
        if cfg.lr < 0.0 || !cfg.lr.is_finite() {
            return Err(Error::Config(format!("learning rate must be >= 0, got {}", cfg.lr)));
        }
        if !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
            return Err(Error::Config("adam betas must lie in [0, 1)".into()));
        }
        Ok(Adam { cfg, t: 0, m: Vec::new(), v: Vec::new() })
    }

    pub fn with_lr(lr: f64) -> Result<Self> {
        Adam::new(AdamConfig { lr, ..AdamConfig::default() })
    }

    pub fn config(&self) -> AdamConfig {
        self.cfg
    }

    pub fn step(&mut self, store: &mut ParamStore) {
        self.t += 1;
        while self.m.len() < store.len() {
            let n = store.value(self.m.len()).numel();
            self.m.push(vec![0.0; n]);
            self.v.push(vec![0.0; n]);
        }
        let bc1 = 1.0 - self.cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.cfg.beta2.powi(self.t as i32);
        for pid in 0..store.len() {
            let grads = store.value(pid).grad().expect("parameters carry grads").to_vec();
            let m = &mut self.m[pid];
            let v = &mut self.v[pid];
            let mut new_data = store.value(pid).data().to_vec();
            for i in 0..grads.len() {
                let g = grads[i];
                m[i] = self.cfg.beta1 * m[i] + (1.0 - self.cfg.beta1) * g;
                v[i] = self.cfg.beta2 * v[i] + (1.0 - self.cfg.beta2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                new_data[i] -= self.cfg.lr * mhat / (vhat.sqrt() + self.cfg.eps);
            }
            store.set_value(pid, &new_data).expect("shape unchanged");
        }
        store.zero_grads();
    }
}
