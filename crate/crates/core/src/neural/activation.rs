use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementwise activation functions. Softmax is a vector operation and lives
/// in [`softmax`] and the `Softmax` layer instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    TanH,
    Sigmoid,
    ReLU,
    LeakyReLU,
    /// `1` for `z > 0`, else `0`. Its gradient is taken as `0` everywhere.
    Binary,
}

impl Activation {
    pub const ALL: [Activation; 5] =
        [Activation::TanH, Activation::Sigmoid, Activation::ReLU, Activation::LeakyReLU, Activation::Binary];

    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::TanH => 2.0 / (1.0 + (-2.0 * z).exp()) - 1.0,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::ReLU => {
                if z < 0.0 {
                    0.0
                } else {
                    z
                }
            }
            Activation::LeakyReLU => {
                if z > 0.0 {
                    z
                } else {
                    0.01 * z
                }
            }
            Activation::Binary => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `df/dz` at `z`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::TanH => {
                let t = self.apply(z);
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = self.apply(z);
                s * (1.0 - s)
            }
            Activation::ReLU => {
                if z < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Activation::LeakyReLU => {
                if z > 0.0 {
                    1.0
                } else {
                    0.01
                }
            }
            Activation::Binary => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::TanH => "TanH",
            Activation::Sigmoid => "Sigmoid",
            Activation::ReLU => "ReLU",
            Activation::LeakyReLU => "LeakyReLU",
            Activation::Binary => "Binary",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownActivation(s.to_string()))
    }
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Apply a named activation to a vector. `Softmax` is accepted here.
pub fn activate(name: &str, z: &[f64]) -> Result<Vec<f64>> {
    if name.eq_ignore_ascii_case("softmax") {
        return Ok(softmax(z));
    }
    let a: Activation = name.parse()?;
    Ok(z.iter().map(|&v| a.apply(v)).collect())
}
