//! Setup shared by the criterion benches.

use deeparena_core::env::Environment;
use deeparena_core::harness::action_stream;
use deeparena_core::Registry;

/// A freshly reset registry scenario plus a random action stream for it.
pub fn scenario(id: &str, seed: u64) -> (Box<dyn Environment>, Vec<usize>) {
    let mut env = Registry::with_defaults().build(id).expect("registered scenario");
    env.restart(Some(seed)).expect("restart");
    let stream = action_stream(seed, 0, env.action_space().count(), 4096);
    (env, stream)
}

/// Advance through `stream` once, restarting on terminal.
pub fn run_stream(env: &mut dyn Environment, stream: &[usize], observe: bool) -> f64 {
    let mut total = 0.0;
    for &a in stream {
        let (reward, terminal) = if observe {
            let r = env.step(a).expect("step");
            (r.reward, r.terminal)
        } else {
            let r = env.advance(a).expect("advance");
            (r.reward, r.terminal)
        };
        total += reward;
        if terminal {
            env.restart(None).expect("restart");
        }
    }
    total
}
