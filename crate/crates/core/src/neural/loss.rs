use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LossSpec {
    Mse,
    Huber { delta: f64 },
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec::Huber { delta: 1.0 }
    }
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Huber { delta } if !(delta > 0.0 && delta.is_finite()) => {
                Err(Error::InvalidConfig(format!("huber delta must be positive, got {delta}")))
            }
            _ => Ok(()),
        }
    }

    /// Loss of a single residual `a = predicted - target`.
    pub fn elem(&self, a: f64) -> f64 {
        match *self {
            LossSpec::Mse => a * a,
            LossSpec::Huber { delta } => {
                if a.abs() <= delta {
                    0.5 * a * a
                } else {
                    delta * (a.abs() - 0.5 * delta)
                }
            }
        }
    }

    /// Derivative of [`LossSpec::elem`] with respect to the prediction.
    pub fn elem_grad(&self, a: f64) -> f64 {
        match *self {
            LossSpec::Mse => 2.0 * a,
            LossSpec::Huber { delta } => a.clamp(-delta, delta),
        }
    }

    /// Mean elementwise loss.
    pub fn loss(&self, predicted: &Tensor, target: &Tensor) -> Result<f64> {
        target.check_shape(predicted.shape())?;
        if predicted.is_empty() {
            return Ok(0.0);
        }
        let sum: f64 = predicted.data().iter().zip(target.data()).map(|(p, t)| self.elem(p - t)).sum();
        Ok(sum / predicted.len() as f64)
    }

    pub fn loss_grad(&self, predicted: &Tensor, target: &Tensor) -> Result<Tensor> {
        target.check_shape(predicted.shape())?;
        let n = predicted.len().max(1) as f64;
        let data = predicted.data().iter().zip(target.data()).map(|(p, t)| self.elem_grad(p - t) / n).collect();
        Tensor::new(predicted.shape().to_vec(), data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = Tensor::from_vec(vec![1.0, 2.0]);
        assert_eq!(LossSpec::Mse.loss(&a, &a).unwrap(), 0.0);
        let h = LossSpec::Huber { delta: 1.0 };
        assert_eq!(h.elem(0.5), 0.125);
        assert_eq!(h.elem(2.0), 1.5);
        assert_eq!(h.elem(-2.0), 1.5);
        let p = Tensor::from_vec(vec![3.0, 0.0]);
        let t = Tensor::from_vec(vec![1.0, 0.0]);
        assert_eq!(LossSpec::Mse.loss(&p, &t).unwrap(), 2.0);
        assert!(matches!(LossSpec::Mse.loss(&p, &Tensor::from_vec(vec![1.0])), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn delta_must_be_positive() {
        assert!(LossSpec::Huber { delta: 0.0 }.validate().is_err());
        assert!(LossSpec::Huber { delta: 0.5 }.validate().is_ok());
    }
}
