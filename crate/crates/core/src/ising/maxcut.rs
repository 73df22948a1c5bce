use serde::{Deserialize, Serialize};

use super::problem::{IsingProblem, SpinConfig};
use crate::error::{contract, Result};
use crate::scalar::Scalar;

/// Symmetric edge-weight matrix of an undirected graph, zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn from_dense(n: usize, data: Vec<T>) -> Result<Self> {
        contract!(data.len() == n * n, "weight matrix has {} entries, expected {}", data.len(), n * n);
        for i in 0..n {
            contract!(data[i * n + i] == T::zero(), "weight diagonal ({i}, {i}) must be zero");
            for j in (i + 1)..n {
                contract!(
                    data[i * n + j] == data[j * n + i],
                    "weight matrix is not symmetric at ({i}, {j})"
                );
                contract!(data[i * n + j].is_finite(), "weight ({i}, {j}) is not finite");
            }
        }
        Ok(Self { n, data })
    }

    /// Fills the upper triangle from `upper` in `(i < j)` lexicographic order.
    pub(crate) fn from_upper(n: usize, upper: impl IntoIterator<Item = T>) -> Self {
        let mut data = vec![T::zero(); n * n];
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = it.next().expect("enough upper-triangle values");
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Upper-triangle weights in `(i < j)` lexicographic order.
    pub fn upper(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| self.data[i * self.n + j]))
    }
}

/// Result of evaluating a MAX-CUT configuration through its Ising form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutReport<T> {
    pub cut_value: T,
    pub offset: T,
    pub ising_energy: T,
}

/// Maps MAX-CUT weights to an Ising problem (`J = w`, `h = 0`) and the cut offset `C0`.
pub fn maxcut_to_ising<T: Scalar>(weights: &WeightMatrix<T>) -> Result<(IsingProblem<T>, T)> {
    let n = weights.n;
    let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter_map(|(i, j)| {
        let w = weights.get(i, j);
        (w != T::zero()).then_some((i, j, w))
    });
    let problem = IsingProblem::from_pairs(n, pairs, vec![T::zero(); n])?;
    let offset = maxcut_offset(&problem);
    Ok((problem, offset))
}

/// `C0 = 1/4 sum_{i != j} J_ij`, accumulated over `i < j` in lexicographic order
/// so that a problem and its mirror give offsets that cancel exactly.
pub fn maxcut_offset<T: Scalar>(problem: &IsingProblem<T>) -> T {
    let mut sum = T::zero();
    for (_, _, v) in problem.upper_pairs() {
        sum += v;
    }
    sum * T::of(0.5)
}

/// Cut value `C = -E/2 + C0` of `s`.
pub fn cut_value<T: Scalar>(problem: &IsingProblem<T>, offset: T, s: &SpinConfig) -> Result<CutReport<T>> {
    let ising_energy = problem.energy(s)?;
    Ok(CutReport {
        cut_value: cut_from_energy(ising_energy, offset),
        offset,
        ising_energy,
    })
}

pub fn cut_from_energy<T: Scalar>(energy: T, offset: T) -> T {
    -energy * T::of(0.5) + offset
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightMatrix<f64> {
        WeightMatrix::from_upper(3, [1.0, 1.0, 1.0])
    }

    #[test]
    fn triangle_offset_and_best_cut() {
        let (p, c0) = maxcut_to_ising(&triangle()).unwrap();
        assert_eq!(c0, 1.5);
        let mut best = f64::NEG_INFINITY;
        for bits in 0..8u32 {
            let s = SpinConfig::new((0..3).map(|k| if bits >> k & 1 == 0 { 1 } else { -1 }).collect()).unwrap();
            let r = cut_value(&p, c0, &s).unwrap();
            best = best.max(r.cut_value);
        }
        assert_eq!(best, 2.0);
        let up = cut_value(&p, c0, &SpinConfig::all_up(3)).unwrap();
        assert_eq!(up.cut_value, 0.0);
        let split = cut_value(&p, c0, &SpinConfig::new(vec![1, -1, -1]).unwrap()).unwrap();
        assert_eq!(split.cut_value, 2.0);
        assert_eq!(split.ising_energy, -1.0);
    }

    #[test]
    fn single_edge() {
        let w = WeightMatrix::from_upper(2, [1.0]);
        let (p, c0) = maxcut_to_ising(&w).unwrap();
        let r = cut_value(&p, c0, &SpinConfig::new(vec![1, -1]).unwrap()).unwrap();
        assert_eq!(r.cut_value, 1.0);
    }

    #[test]
    fn asymmetric_weights_are_rejected() {
        assert!(WeightMatrix::from_dense(2, vec![0.0, 1.0, -1.0, 0.0]).is_err());
        assert!(WeightMatrix::from_dense(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
    }
}
