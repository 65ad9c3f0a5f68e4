use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::layer::{Layer, LayerSpec};
use super::optim::Optimizer;
use super::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Check that every layer accepts its predecessor's output; returns the output shape.
    pub fn output_shape(&self) -> Result<Vec<usize>> {
        let mut shape = self.input_shape.clone();
        for l in &self.layers {
            shape = l.output_shape(&shape)?;
        }
        Ok(shape)
    }

    pub fn param_count(&self) -> u64 {
        param_count(&self.layers)
    }

    /// `Dense(n -> hidden) - ReLU - Dense(hidden -> actions)` on a flattened input.
    pub fn mlp(input_shape: &[usize], hidden: usize, outputs: usize) -> Self {
        let n = input_shape.iter().product();
        NetworkSpec {
            input_shape: input_shape.to_vec(),
            layers: vec![
                LayerSpec::Dense { input: n, output: hidden },
                LayerSpec::Activation { function: super::Activation::ReLU },
                LayerSpec::Dense { input: hidden, output: outputs },
            ],
        }
    }
}

/// Parameter total of a layer stack, computed from the specs alone.
pub fn param_count(layers: &[LayerSpec]) -> u64 {
    layers.iter().map(LayerSpec::param_count).sum()
}

const MAGIC: &[u8; 4] = b"DANW";
const VERSION: u32 = 1;

/// Feed-forward network over single samples.
#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(spec: NetworkSpec, seed: u64) -> Result<Self> {
        let mut rng = Rng::new(seed);
        let mut shape = spec.input_shape.clone();
        let mut layers = Vec::with_capacity(spec.layers.len());
        for &l in &spec.layers {
            let layer = Layer::new(l, &shape, &mut rng)?;
            shape = layer.output_shape.clone();
            layers.push(layer);
        }
        Ok(Network { spec, layers })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> u64 {
        self.spec.param_count()
    }

    /// Forward pass that caches what [`Network::backward`] needs.
    pub fn forward(&mut self, input: &Tensor) -> Result<Tensor> {
        let mut x = input.clone();
        for l in &mut self.layers {
            x = l.forward(&x, true)?;
        }
        Ok(x)
    }

    /// Forward pass without caching.
    pub fn predict(&self, input: &Tensor) -> Result<Tensor> {
        if self.layers.is_empty() {
            return Ok(input.clone());
        }
        let mut x = self.layers[0].compute(input)?;
        for l in &self.layers[1..] {
            x = l.compute(&x)?;
        }
        Ok(x)
    }

    /// Accumulate parameter gradients for the last forward pass and return the input gradient.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let mut g = grad_out.clone();
        for l in self.layers.iter_mut().rev() {
            g = l.backward(&g)?;
        }
        Ok(g)
    }

    pub fn zero_grad(&mut self) {
        self.layers.iter_mut().for_each(Layer::zero_grad);
    }

    pub fn clear_cache(&mut self) {
        self.layers.iter_mut().for_each(Layer::clear_cache);
    }

    pub fn params(&self) -> impl Iterator<Item = &Tensor> {
        self.layers.iter().flat_map(|l| l.params.iter())
    }

    pub fn grads(&self) -> impl Iterator<Item = &Tensor> {
        self.layers.iter().flat_map(|l| l.grads.iter())
    }

    /// Apply the accumulated gradients.
    pub fn apply_gradients(&mut self, opt: &mut Optimizer) -> Result<()> {
        let mut params = Vec::new();
        let mut grads = Vec::new();
        for l in &mut self.layers {
            let (p, g) = (&mut l.params, &l.grads);
            params.extend(p.iter_mut());
            grads.extend(g.iter());
        }
        opt.step(&mut params, &grads)
    }

    /// Serialise the weights.
    ///
    /// Layout, all little-endian: `b"DANW"`, `u32` version, `u32` tensor count,
    /// then per tensor a `u32` rank, `rank` x `u64` dims and the `f64` values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        let tensors: Vec<&Tensor> = self.params().collect();
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for t in tensors {
            out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Restore weights written by [`Network::to_bytes`]; shapes must match this network.
    pub fn load_bytes(&mut self, bytes: &[u8]) -> Result<()> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Parse("not a weight blob".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported weight blob version {version}")));
        }
        let count = r.u32()? as usize;
        let mut loaded = Vec::with_capacity(count);
        for _ in 0..count {
            let rank = r.u32()? as usize;
            let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n: usize = shape.iter().product();
            let data = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            loaded.push(Tensor::new(shape, data)?);
        }
        if r.pos != bytes.len() {
            return Err(Error::Parse("trailing bytes after weight blob".into()));
        }
        let expected: Vec<Vec<usize>> = self.params().map(|t| t.shape().to_vec()).collect();
        let got: Vec<Vec<usize>> = loaded.iter().map(|t| t.shape().to_vec()).collect();
        if expected != got {
            return Err(Error::ShapeMismatch { expected: expected.concat(), got: got.concat() });
        }
        let mut it = loaded.into_iter();
        for l in &mut self.layers {
            for p in &mut l.params {
                *p = it.next().expect("counted above");
            }
        }
        Ok(())
    }

    /// Copy weights from a network with the same spec.
    pub fn copy_weights_from(&mut self, other: &Network) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::InvalidSpec("networks have different specs".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.params.clone_from(&b.params);
        }
        Ok(())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Parse("weight blob truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
