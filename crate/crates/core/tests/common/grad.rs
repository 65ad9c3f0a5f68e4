use deeparena_core::neural::*;
use deeparena_core::rng::Rng;

pub const H: f64 = 1e-6;
pub const TOL: f64 = 1e-4;

/// Relative error with a floor on the denominator so that two near-zero
/// gradients compare by absolute difference.
pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

pub fn random(rng: &mut Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap()
}

/// Scalar objective sum(c * net(x)); returns the worst relative error over
/// input and parameter gradients.
pub fn check_network(spec: NetworkSpec, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut net = Network::new(spec.clone(), seed).unwrap();
    let x = random(&mut rng, &spec.input_shape);
    let out_shape = spec.output_shape().unwrap();
    let c = random(&mut rng, &out_shape);
    let objective = |net: &Network, x: &Tensor| -> f64 {
        net.predict(x).unwrap().data().iter().zip(c.data()).map(|(a, b)| a * b).sum()
    };
    net.zero_grad();
    net.forward(&x).unwrap();
    let gx = net.backward(&c).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut xp = x.clone();
        xp.data_mut()[i] += H;
        let mut xm = x.clone();
        xm.data_mut()[i] -= H;
        let num = (objective(&net, &xp) - objective(&net, &xm)) / (2.0 * H);
        worst = worst.max(rel_err(gx.data()[i], num));
    }
    let grads: Vec<Tensor> = net.grads().cloned().collect();
    let mut k = 0;
    for li in 0..net.layers().len() {
        for pi in 0..net.layers()[li].params.len() {
            for j in 0..net.layers()[li].params[pi].len() {
                let orig = net.layers()[li].params[pi].data()[j];
                net.layers_mut()[li].params[pi].data_mut()[j] = orig + H;
                let fp = objective(&net, &x);
                net.layers_mut()[li].params[pi].data_mut()[j] = orig - H;
                let fm = objective(&net, &x);
                net.layers_mut()[li].params[pi].data_mut()[j] = orig;
                worst = worst.max(rel_err(grads[k].data()[j], (fp - fm) / (2.0 * H)));
            }
            k += 1;
        }
    }
    worst
}

pub fn single(input_shape: &[usize], layer: LayerSpec) -> NetworkSpec {
    NetworkSpec { input_shape: input_shape.to_vec(), layers: vec![layer] }
}

/// Worst relative error of a loss gradient against central differences.
pub fn check_loss(spec: LossSpec, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let p = Tensor::from_vec((0..7).map(|_| rng.uniform(-3.0, 3.0)).collect());
    let t = Tensor::from_vec((0..7).map(|_| rng.uniform(-3.0, 3.0)).collect());
    let g = spec.loss_grad(&p, &t).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let mut pp = p.clone();
        pp.data_mut()[i] += H;
        let mut pm = p.clone();
        pm.data_mut()[i] -= H;
        let num = (spec.loss(&pp, &t).unwrap() - spec.loss(&pm, &t).unwrap()) / (2.0 * H);
        worst = worst.max(rel_err(g.data()[i], num));
    }
    worst
}
