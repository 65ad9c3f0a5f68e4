//! Analytic gradients against central finite differences.

mod common;

use common::grad::*;
use deeparena_core::neural::*;
use deeparena_core::rng::Rng;

fn over_seeds(name: &str, make: impl Fn(u64) -> NetworkSpec) {
    for seed in 0..20 {
        let e = check_network(make(seed), seed);
        assert!(e < TOL, "{name} seed {seed}: relative error {e:e}");
    }
}

#[test]
fn dense_gradients() {
    over_seeds("dense", |s| single(&[3 + s as usize % 4], LayerSpec::Dense { input: 3 + s as usize % 4, output: 5 }));
}

#[test]
fn conv_gradients() {
    over_seeds("conv", |s| {
        let stride = 1 + s as usize % 2;
        single(&[7, 6, 2], LayerSpec::Conv2d { in_ch: 2, out_ch: 3, kernel: 3, stride })
    });
}

#[test]
fn pool_gradients() {
    over_seeds("maxpool", |s| single(&[6, 6, 2], LayerSpec::MaxPool { kernel: 2, stride: 1 + s as usize % 2 }));
    over_seeds("avgpool", |s| single(&[6, 5, 3], LayerSpec::AvgPool { kernel: 3, stride: 1 + s as usize % 2 }));
}

#[test]
fn activation_gradients() {
    for f in [Activation::TanH, Activation::Sigmoid, Activation::ReLU, Activation::LeakyReLU] {
        over_seeds(f.name(), |_| single(&[12], LayerSpec::Activation { function: f }));
    }
    over_seeds("softmax", |_| single(&[6], LayerSpec::Softmax));
}

#[test]
fn binary_has_zero_subgradient() {
    let mut net = Network::new(single(&[4], LayerSpec::Activation { function: Activation::Binary }), 0).unwrap();
    net.forward(&Tensor::from_vec(vec![-1.0, 0.0, 0.5, 2.0])).unwrap();
    let g = net.backward(&Tensor::from_vec(vec![1.0; 4])).unwrap();
    assert!(g.data().iter().all(|&v| v == 0.0));
}

#[test]
fn stacked_network_gradients() {
    over_seeds("stack", |_| NetworkSpec {
        input_shape: vec![8, 8, 1],
        layers: vec![
            LayerSpec::Conv2d { in_ch: 1, out_ch: 2, kernel: 3, stride: 1 },
            LayerSpec::Activation { function: Activation::TanH },
            LayerSpec::AvgPool { kernel: 2, stride: 2 },
            LayerSpec::Dense { input: 18, output: 4 },
            LayerSpec::Activation { function: Activation::Sigmoid },
            LayerSpec::Softmax,
        ],
    });
}

#[test]
fn loss_gradients() {
    for spec in [LossSpec::Mse, LossSpec::Huber { delta: 1.0 }, LossSpec::Huber { delta: 0.3 }] {
        for seed in 0..20 {
            let e = check_loss(spec, seed);
            assert!(e < 1e-6, "{spec:?} seed {seed}: {e:e}");
        }
    }
}

#[test]
fn softmax_is_a_distribution() {
    let mut rng = Rng::new(3);
    for _ in 0..100 {
        let z: Vec<f64> = (0..9).map(|_| rng.uniform(-50.0, 50.0)).collect();
        let s = softmax(&z);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.iter().all(|&v| v >= 0.0));
    }
}
