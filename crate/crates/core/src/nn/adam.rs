//! Adam with the standard defaults (beta1 0.9, beta2 0.999, eps 1e-8).

use super::{GradStore, Graph};
use crate::Scalar;
use std::collections::BTreeMap;

pub struct Adam<F: Scalar> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    moments: BTreeMap<String, (Vec<F>, Vec<F>)>,
}

impl<F: Scalar> Adam<F> {
    pub fn new(learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            moments: BTreeMap::new(),
        }
    }

    /// Apply one update from averaged gradients. `trainable` filters by
    /// parameter name (backbone freezing keys off the `head.` prefix).
    pub fn step(
        &mut self,
        graph: &mut Graph<F>,
        grads: &GradStore<F>,
        trainable: &dyn Fn(&str) -> bool,
    ) {
        self.step += 1;
        let t = self.step;
        let b1 = self.beta1;
        let b2 = self.beta2;
        let correction1 = 1.0 - b1.powi(t as i32);
        let correction2 = 1.0 - b2.powi(t as i32);
        let lr = self.learning_rate;
        let eps = self.epsilon;

        let moments = &mut self.moments;
        graph.visit_params_mut(&mut |name, data| {
            if !trainable(name) {
                return;
            }
            let Some(grad) = grads.by_name.get(name) else {
                return;
            };
            let (m, v) = moments
                .entry(name.to_string())
                .or_insert_with(|| (vec![F::zero(); data.len()], vec![F::zero(); data.len()]));
            for i in 0..data.len() {
                let g = grad[i].as_f64();
                let mi = m[i].as_f64() * b1 + (1.0 - b1) * g;
                let vi = v[i].as_f64() * b2 + (1.0 - b2) * g * g;
                m[i] = F::cast(mi);
                v[i] = F::cast(vi);
                let m_hat = mi / correction1;
                let v_hat = vi / correction2;
                let update = lr * m_hat / (v_hat.sqrt() + eps);
                data[i] = F::cast(data[i].as_f64() - update);
            }
        });
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }
}
