use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerSpec {
    Sgd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerSpec {
    pub fn adam(lr: f64) -> Self {
        OptimizerSpec::Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerSpec::Sgd { lr } | OptimizerSpec::Adam { lr, .. } => lr,
        }
    }
}

/// Optimizer with its per-parameter state.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub spec: OptimizerSpec,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(spec: OptimizerSpec) -> Self {
        Optimizer { spec, t: 0, m: Vec::new(), v: Vec::new() }
    }

    /// One update of every tensor in `params` with the matching gradient.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&Tensor]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::ShapeMismatch { expected: vec![params.len()], got: vec![grads.len()] });
        }
        for (p, g) in params.iter().zip(grads) {
            g.check_shape(p.shape())?;
        }
        match self.spec {
            OptimizerSpec::Sgd { lr } => {
                for (p, g) in params.iter_mut().zip(grads) {
                    for (x, d) in p.data_mut().iter_mut().zip(g.data()) {
                        *x -= lr * d;
                    }
                }
            }
            OptimizerSpec::Adam { lr, beta1, beta2, eps } => {
                if self.m.is_empty() {
                    self.m = params.iter().map(|p| vec![0.0; p.len()]).collect();
                    self.v = self.m.clone();
                }
                if self.m.len() != params.len() || self.m.iter().zip(params.iter()).any(|(m, p)| m.len() != p.len()) {
                    return Err(Error::ShapeMismatch {
                        expected: self.m.iter().map(Vec::len).collect(),
                        got: params.iter().map(|p| p.len()).collect(),
                    });
                }
                self.t += 1;
                let c1 = 1.0 - beta1.powi(self.t as i32);
                let c2 = 1.0 - beta2.powi(self.t as i32);
                for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                    let (m, v) = (&mut self.m[k], &mut self.v[k]);
                    for (i, (x, &d)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
                        m[i] = beta1 * m[i] + (1.0 - beta1) * d;
                        v[i] = beta2 * v[i] + (1.0 - beta2) * d * d;
                        let mh = m[i] / c1;
                        let vh = v[i] / c2;
                        *x -= lr * mh / (vh.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Tensor {
        Tensor::from_vec(vec![v])
    }

    #[test]
    fn sgd_rule() {
        let mut opt = Optimizer::new(OptimizerSpec::Sgd { lr: 0.1 });
        let mut th = scalar(1.0);
        opt.step(&mut [&mut th], &[&scalar(1.0)]).unwrap();
        assert!((th.data()[0] - 0.9).abs() < 1e-15);
        opt.step(&mut [&mut th], &[&scalar(0.0)]).unwrap();
        assert!((th.data()[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn adam_fixed_point_and_shape_check() {
        let mut opt = Optimizer::new(OptimizerSpec::adam(0.01));
        let mut th = scalar(2.0);
        opt.step(&mut [&mut th], &[&scalar(0.0)]).unwrap();
        assert_eq!(th.data()[0], 2.0);
        // first adam step moves by lr in the gradient's sign direction
        opt = Optimizer::new(OptimizerSpec::adam(0.01));
        opt.step(&mut [&mut th], &[&scalar(5.0)]).unwrap();
        assert!((th.data()[0] - 1.99).abs() < 1e-9);
        assert!(opt.step(&mut [&mut th], &[&Tensor::from_vec(vec![1.0, 2.0])]).is_err());
    }

    #[test]
    fn sgd_converges_on_quadratic() {
        let mut opt = Optimizer::new(OptimizerSpec::Sgd { lr: 0.1 });
        let mut th = scalar(0.0);
        for _ in 0..200 {
            let g = scalar(2.0 * (th.data()[0] - 3.0));
            opt.step(&mut [&mut th], &[&g]).unwrap();
        }
        // closed form: theta_n = 3 (1 - 0.8^n)
        let oracle = 3.0 * (1.0 - 0.8f64.powi(200));
        assert!((th.data()[0] - oracle).abs() < 1e-12);
        assert!((th.data()[0] - 3.0).abs() < 1e-6);
    }
}
