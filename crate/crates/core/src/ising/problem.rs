use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::scalar::{dot, Scalar};

/// Problems up to this many sites are stored as a dense row-major matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Below this size the matrix-vector product stays on the calling thread.
const PAR_MIN_ROWS: usize = 512;

/// A configuration of Ising spins, each exactly `+1` or `-1`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Contract(format!(
                "spin {pos} is {}, expected +1 or -1",
                spins[pos]
            )));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Uniformly random spins.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    /// Signs of `values` with `sgn(0) = +1`.
    pub fn from_signs<T: Scalar>(values: &[T]) -> Self {
        Self(values.iter().map(|&v| sign_of(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        self.0.iter().copied()
    }

    pub(crate) fn to_scalars<T: Scalar>(&self) -> Vec<T> {
        self.0.iter().map(|&s| spin_value(s)).collect()
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Self {
        s.0
    }
}

impl fmt::Debug for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        f.write_str("]")
    }
}

#[inline]
pub(crate) fn sign_of<T: Scalar>(v: T) -> i8 {
    if v < T::zero() {
        -1
    } else {
        1
    }
}

#[inline]
pub(crate) fn spin_value<T: Scalar>(s: i8) -> T {
    if s > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Storage backing for the symmetric coupling matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Storage {
    Dense,
    Sparse,
}

impl Storage {
    pub fn for_size(n: usize) -> Self {
        if n <= DENSE_LIMIT {
            Storage::Dense
        } else {
            Storage::Sparse
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Couplings<T> {
    /// Full `n * n` row-major matrix, zero diagonal.
    Dense(Vec<T>),
    /// Compressed rows holding both `(i, j)` and `(j, i)` of every stored pair.
    Sparse {
        row_start: Vec<usize>,
        cols: Vec<u32>,
        vals: Vec<T>,
    },
}

/// Ising model `H(s) = 1/2 sum_{i != j} J_ij s_i s_j + sum_i h_i s_i`.
///
/// The coupling matrix is symmetric with zero diagonal and all entries finite.
/// Problems are immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingProblem<T> {
    n: usize,
    couplings: Couplings<T>,
    fields: Vec<T>,
}

impl<T: Scalar> IsingProblem<T> {
    /// Builds a problem from unordered coupling pairs. Each `(i, j, v)` sets
    /// both `J_ij` and `J_ji`; repeated pairs accumulate.
    pub fn from_pairs<I>(n: usize, pairs: I, fields: Vec<T>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        Self::from_pairs_with(n, pairs, fields, Storage::for_size(n))
    }

    pub fn from_pairs_with<I>(n: usize, pairs: I, fields: Vec<T>, storage: Storage) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        contract!(
            fields.len() == n,
            "field vector has length {}, expected {n}",
            fields.len()
        );
        check_finite(&fields, "field")?;
        let couplings = match storage {
            Storage::Dense => {
                let mut data = vec![T::zero(); n * n];
                for (i, j, v) in pairs {
                    check_pair(n, i, j, v)?;
                    data[i * n + j] += v;
                    data[j * n + i] += v;
                }
                Couplings::Dense(data)
            }
            Storage::Sparse => {
                let mut entries: Vec<(u32, u32, T)> = Vec::new();
                for (i, j, v) in pairs {
                    check_pair(n, i, j, v)?;
                    entries.push((i as u32, j as u32, v));
                    entries.push((j as u32, i as u32, v));
                }
                sparse_from_entries(n, entries)
            }
        };
        Ok(Self { n, couplings, fields })
    }

    /// Builds a problem from a full row-major matrix, checking symmetry and the zero diagonal.
    pub fn from_dense(n: usize, matrix: Vec<T>, fields: Vec<T>) -> Result<Self> {
        contract!(
            matrix.len() == n * n,
            "coupling matrix has {} entries, expected {}",
            matrix.len(),
            n * n
        );
        for i in 0..n {
            contract!(
                matrix[i * n + i] == T::zero(),
                "diagonal coupling J[{i}][{i}] must be zero"
            );
            for j in (i + 1)..n {
                let (a, b) = (matrix[i * n + j], matrix[j * n + i]);
                contract!(a == b, "coupling matrix is not symmetric at ({i}, {j})");
                contract!(a.is_finite(), "coupling J[{i}][{j}] is not finite");
            }
        }
        let pairs = upper_pairs_of_dense(n, &matrix);
        Self::from_pairs(n, pairs, fields)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[T] {
        &self.fields
    }

    pub fn storage(&self) -> Storage {
        match self.couplings {
            Couplings::Dense(_) => Storage::Dense,
            Couplings::Sparse { .. } => Storage::Sparse,
        }
    }

    /// Same problem re-stored in the requested layout.
    pub fn with_storage(&self, storage: Storage) -> Self {
        if storage == self.storage() {
            return self.clone();
        }
        Self::from_pairs_with(self.n, self.upper_pairs(), self.fields.clone(), storage)
            .expect("re-storing a valid problem")
    }

    pub fn coupling(&self, i: usize, j: usize) -> T {
        match &self.couplings {
            Couplings::Dense(d) => d[i * self.n + j],
            Couplings::Sparse {
                row_start,
                cols,
                vals,
            } => {
                let range = row_start[i]..row_start[i + 1];
                match cols[range.clone()].binary_search(&(j as u32)) {
                    Ok(k) => vals[range.start + k],
                    Err(_) => T::zero(),
                }
            }
        }
    }

    /// Calls `f(j, J_ij)` for every stored coupling in row `i`, ascending `j`.
    /// Dense rows skip explicit zeros.
    #[inline]
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, T)) {
        match &self.couplings {
            Couplings::Dense(d) => {
                let row = &d[i * self.n..(i + 1) * self.n];
                for (j, &v) in row.iter().enumerate() {
                    if v != T::zero() {
                        f(j, v);
                    }
                }
            }
            Couplings::Sparse {
                row_start,
                cols,
                vals,
            } => {
                for k in row_start[i]..row_start[i + 1] {
                    f(cols[k] as usize, vals[k]);
                }
            }
        }
    }

    /// Non-zero couplings `(i, j, J_ij)` with `i < j`, in lexicographic order.
    pub fn upper_pairs(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            self.for_each_in_row(i, |j, v| {
                if j > i {
                    out.push((i, j, v));
                }
            });
        }
        out
    }

    /// Number of stored non-zero pairs `i < j`.
    pub fn n_pairs(&self) -> usize {
        match &self.couplings {
            Couplings::Dense(d) => d.iter().filter(|v| **v != T::zero()).count() / 2,
            Couplings::Sparse { cols, .. } => cols.len() / 2,
        }
    }

    /// `out_i = sum_j J_ij x_j`. O(nnz) for sparse storage.
    pub fn couple(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        let n = self.n;
        if n == 0 {
            return;
        }
        let parallel = n >= PAR_MIN_ROWS && rayon::current_num_threads() > 1;
        match &self.couplings {
            Couplings::Dense(d) => {
                if parallel {
                    out.par_iter_mut()
                        .zip(d.par_chunks_exact(n))
                        .for_each(|(o, row)| *o = dot(row, x));
                } else {
                    for (o, row) in out.iter_mut().zip(d.chunks_exact(n)) {
                        *o = dot(row, x);
                    }
                }
            }
            Couplings::Sparse {
                row_start,
                cols,
                vals,
            } => {
                let row = |i: usize| {
                    let mut acc = T::zero();
                    for k in row_start[i]..row_start[i + 1] {
                        acc += vals[k] * x[cols[k] as usize];
                    }
                    acc
                };
                if parallel {
                    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = row(i));
                } else {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o = row(i);
                    }
                }
            }
        }
    }

    /// Local field `sum_j J_ij s_j + h_i` acting on every site.
    pub fn local_fields(&self, s: &SpinConfig) -> Vec<T> {
        let x = s.to_scalars::<T>();
        let mut out = vec![T::zero(); self.n];
        self.couple(&x, &mut out);
        for (o, h) in out.iter_mut().zip(&self.fields) {
            *o += *h;
        }
        out
    }

    /// Ising energy of `s`.
    pub fn energy(&self, s: &SpinConfig) -> Result<T> {
        contract!(
            s.len() == self.n,
            "spin configuration has length {}, problem has {} sites",
            s.len(),
            self.n
        );
        let half = T::of(0.5);
        let mut total = T::zero();
        for i in 0..self.n {
            let mut coupled = T::zero();
            self.for_each_in_row(i, |j, v| {
                if s.get(j) > 0 {
                    coupled += v;
                } else {
                    coupled -= v;
                }
            });
            let term = half * coupled + self.fields[i];
            if s.get(i) > 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        Ok(total)
    }

    /// Copy with every coupling negated and the fields untouched.
    pub fn mirror(&self) -> Self {
        let couplings = match &self.couplings {
            Couplings::Dense(d) => Couplings::Dense(d.iter().map(|&v| -v).collect()),
            Couplings::Sparse {
                row_start,
                cols,
                vals,
            } => Couplings::Sparse {
                row_start: row_start.clone(),
                cols: cols.clone(),
                vals: vals.iter().map(|&v| -v).collect(),
            },
        };
        Self {
            n: self.n,
            couplings,
            fields: self.fields.clone(),
        }
    }
}

/// Problem with all couplings negated; fields are kept.
pub fn mirror<T: Scalar>(problem: &IsingProblem<T>) -> IsingProblem<T> {
    problem.mirror()
}

fn check_pair<T: Scalar>(n: usize, i: usize, j: usize, v: T) -> Result<()> {
    contract!(i < n && j < n, "coupling ({i}, {j}) out of range for {n} sites");
    contract!(i != j, "diagonal coupling ({i}, {i}) is not allowed");
    contract!(v.is_finite(), "coupling ({i}, {j}) is not finite");
    Ok(())
}

fn check_finite<T: Scalar>(values: &[T], what: &str) -> Result<()> {
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Contract(format!("{what} {k} is not finite")));
    }
    Ok(())
}

fn upper_pairs_of_dense<T: Scalar>(n: usize, m: &[T]) -> Vec<(usize, usize, T)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m[i * n + j];
            if v != T::zero() {
                out.push((i, j, v));
            }
        }
    }
    out
}

fn sparse_from_entries<T: Scalar>(n: usize, mut entries: Vec<(u32, u32, T)>) -> Couplings<T> {
    entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let mut row_start = vec![0usize; n + 1];
    let mut cols: Vec<u32> = Vec::with_capacity(entries.len());
    let mut vals: Vec<T> = Vec::with_capacity(entries.len());
    let mut last: Option<(u32, u32)> = None;
    for (i, j, v) in entries {
        if last == Some((i, j)) {
            *vals.last_mut().expect("previous entry") += v;
            continue;
        }
        last = Some((i, j));
        row_start[i as usize + 1] += 1;
        cols.push(j);
        vals.push(v);
    }
    for i in 0..n {
        row_start[i + 1] += row_start[i];
    }
    Couplings::Sparse {
        row_start,
        cols,
        vals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ferro_pair() -> IsingProblem<f64> {
        IsingProblem::from_pairs(2, [(0, 1, -1.0)], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn single_ferromagnetic_bond() {
        let p = ferro_pair();
        let s = SpinConfig::new(vec![1, 1]).unwrap();
        assert_eq!(p.energy(&s).unwrap(), -1.0);
        assert_eq!(p.energy(&SpinConfig::new(vec![1, -1]).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = ferro_pair();
        let err = p.energy(&SpinConfig::all_up(3)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn invalid_spins_are_rejected() {
        assert!(SpinConfig::new(vec![1, 0]).is_err());
        assert!(SpinConfig::new(vec![2]).is_err());
    }

    #[test]
    fn from_dense_checks_symmetry_and_diagonal() {
        assert!(IsingProblem::from_dense(2, vec![0.0, 1.0, 2.0, 0.0], vec![0.0; 2]).is_err());
        assert!(IsingProblem::from_dense(2, vec![1.0, 1.0, 1.0, 0.0], vec![0.0; 2]).is_err());
        let p = IsingProblem::from_dense(2, vec![0.0, 0.5, 0.5, 0.0], vec![0.0; 2]).unwrap();
        assert_eq!(p.coupling(1, 0), 0.5);
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        assert!(IsingProblem::from_pairs(2, [(0, 1, f64::NAN)], vec![0.0; 2]).is_err());
        assert!(IsingProblem::<f64>::from_pairs(2, [], vec![0.0, f64::INFINITY]).is_err());
        assert!(IsingProblem::from_pairs(2, [(1, 1, 1.0)], vec![0.0; 2]).is_err());
    }

    #[test]
    fn dense_and_sparse_agree() {
        let pairs = vec![(0, 1, 0.5), (0, 3, -1.25), (1, 2, 2.0), (2, 3, 0.75)];
        let h = vec![0.1, -0.2, 0.3, 0.0];
        let d = IsingProblem::from_pairs_with(4, pairs.clone(), h.clone(), Storage::Dense).unwrap();
        let s = IsingProblem::from_pairs_with(4, pairs, h, Storage::Sparse).unwrap();
        assert_eq!(d.upper_pairs(), s.upper_pairs());
        assert_eq!(d.coupling(3, 0), s.coupling(3, 0));
        assert_eq!(s.coupling(1, 3), 0.0);
        let x = [0.3, -1.0, 2.0, 0.5];
        let (mut a, mut b) = ([0.0; 4], [0.0; 4]);
        d.couple(&x, &mut a);
        s.couple(&x, &mut b);
        assert_eq!(a, b);
        for bits in 0..16u32 {
            let spins = (0..4).map(|k| if bits >> k & 1 == 0 { 1 } else { -1 }).collect();
            let cfg = SpinConfig::new(spins).unwrap();
            assert_eq!(d.energy(&cfg).unwrap(), s.energy(&cfg).unwrap());
        }
        assert_eq!(d.with_storage(Storage::Sparse), s);
    }

    #[test]
    fn mirror_is_an_involution() {
        let p = IsingProblem::from_pairs(3, [(0, 1, 0.5), (1, 2, -2.0)], vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(p.mirror().mirror(), p);
        assert_eq!(p.mirror().coupling(2, 1), 2.0);
        assert_eq!(p.mirror().fields(), p.fields());
    }

    #[test]
    fn signs_map_zero_to_up() {
        let s = SpinConfig::from_signs(&[0.3, -0.2, 0.0, -0.0]);
        assert_eq!(s.as_slice(), &[1, -1, 1, 1]);
    }
}
