//! Reference implementations shared by the integration tests. They are kept
//! deliberately naive and independent of the library's own algorithms.
#![allow(dead_code)]

use fluxanneal_core::ising::IsingProblem;

/// `1/2 sum_{i != j} J_ij s_i s_j + sum_i h_i s_i`, summed over every ordered pair.
pub fn naive_energy(p: &IsingProblem<f64>, s: &[i8]) -> f64 {
    let n = p.n_sites();
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                e += 0.5 * p.coupling(i, j) * f64::from(s[i]) * f64::from(s[j]);
            }
        }
        e += p.fields()[i] * f64::from(s[i]);
    }
    e
}

/// Minimum energy over all `2^n` configurations, and the first minimizer in
/// counting order (bit `i` set means `s_i = -1`).
pub fn exhaustive_ground(p: &IsingProblem<f64>) -> (f64, Vec<i8>) {
    let n = p.n_sites();
    assert!(n <= 20, "oracle is exponential");
    let mut best = f64::INFINITY;
    let mut arg = vec![1; n];
    let mut s = vec![1i8; n];
    for mask in 0u32..(1 << n) {
        for (i, v) in s.iter_mut().enumerate() {
            *v = if mask >> i & 1 == 1 { -1 } else { 1 };
        }
        let e = naive_energy(p, &s);
        if e < best {
            best = e;
            arg.clone_from(&s);
        }
    }
    (best, arg)
}

/// Cut value of a `+-1` assignment computed edge by edge.
pub fn naive_cut(p: &IsingProblem<f64>, s: &[i8]) -> f64 {
    let n = p.n_sites();
    let mut c = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if s[i] != s[j] {
                c += p.coupling(i, j);
            }
        }
    }
    c
}
