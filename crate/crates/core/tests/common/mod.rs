#![allow(dead_code)]

use deeparena_core::mdp::TableMdp;

pub mod grad;

/// Two states; looping on s0 pays 1, moving on and exiting from s1 pays 10.
pub fn chain2() -> TableMdp {
    TableMdp::new(vec![vec![Some(1), Some(0)], vec![None, Some(0)]], vec![vec![0.0, 1.0], vec![10.0, 0.0]], 0).unwrap()
}

/// s0 branches to s1 or s2; both exit with different payoffs, s2 can also loop back.
pub fn branch3() -> TableMdp {
    TableMdp::new(
        vec![vec![Some(1), Some(2)], vec![None, None], vec![None, Some(0)]],
        vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![5.0, 0.0]],
        0,
    )
    .unwrap()
}

/// Ring of four states; action 1 exits paying the state index, closing the ring pays 1.
pub fn loop4() -> TableMdp {
    TableMdp::new(
        vec![vec![Some(1), None], vec![Some(2), None], vec![Some(3), None], vec![Some(0), None]],
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, 2.0], vec![1.0, 3.0]],
        0,
    )
    .unwrap()
}

/// Q* by value iteration to a fixed point.
pub fn value_iteration(m: &TableMdp, actions: usize, gamma: f64) -> Vec<Vec<f64>> {
    let n = m.states();
    let mut q = vec![vec![0.0; actions]; n];
    loop {
        let mut delta: f64 = 0.0;
        let v: Vec<f64> = q.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        for s in 0..n {
            for a in 0..actions {
                let cont = m.successor(s, a).map_or(0.0, |t| gamma * v[t]);
                let new = m.reward(s, a) + cont;
                delta = delta.max((new - q[s][a]).abs());
                q[s][a] = new;
            }
        }
        if delta < 1e-13 {
            return q;
        }
    }
}

pub fn oracle_policy(q: &[Vec<f64>]) -> Vec<usize> {
    q.iter()
        .map(|row| {
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}
