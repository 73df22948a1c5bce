//! Splits sites into ambivalent and frozen sets from the time-averaged flux and
//! builds the effective Ising problem over the ambivalent ones.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::ising::problem::{sign_of, spin_value};
use crate::ising::{IsingProblem, SpinConfig};
use crate::scalar::Scalar;

/// Sites ordered by ascending `|phibar|`; the first `n_ambivalent` are left
/// open, the rest are frozen to `sgn(phibar)` with `sgn(0) = +1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub order: Vec<usize>,
    pub n_ambivalent: usize,
    pub frozen_spins: BTreeMap<usize, i8>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRecord {
    n: usize,
    ambivalent: Vec<usize>,
    frozen: BTreeMap<usize, i8>,
}

impl Partition {
    pub fn n_sites(&self) -> usize {
        self.order.len()
    }

    pub fn ambivalent(&self) -> &[usize] {
        &self.order[..self.n_ambivalent]
    }

    /// Spins of `full` at the ambivalent sites, in subproblem order.
    pub fn restrict(&self, full: &SpinConfig) -> Result<SpinConfig> {
        contract!(
            full.len() == self.n_sites(),
            "configuration has length {}, partition covers {} sites",
            full.len(),
            self.n_sites()
        );
        SpinConfig::new(self.ambivalent().iter().map(|&i| full.get(i)).collect())
    }

    /// `{"n": .., "ambivalent": [..], "frozen": {"site": sign, ..}}`
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let rec = PartitionRecord {
            n: self.n_ambivalent,
            ambivalent: self.ambivalent().to_vec(),
            frozen: self.frozen_spins.clone(),
        };
        serde_json::to_writer_pretty(out, &rec)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }
}

/// Reduced problem over the ambivalent sites plus the frozen-part energy.
#[derive(Clone, Debug, PartialEq)]
pub struct SubProblem<T> {
    pub base: IsingProblem<T>,
    pub offset: T,
    /// `ambivalent_sites[k]` is the original site of subproblem spin `k`.
    pub ambivalent_sites: Vec<usize>,
}

/// Sorts sites by `|phibar|` (ties by ascending index) and freezes all but the `n` smallest.
///
/// With `tie_epsilon > 0` magnitudes are compared on a grid of that width, so
/// values falling in the same cell are ordered by index.
pub fn make_partition<T: Scalar>(phibar: &[T], n: usize, tie_epsilon: T) -> Result<Partition> {
    let total = phibar.len();
    contract!(n <= total, "cannot leave {n} of {total} sites ambivalent");
    contract!(
        phibar.iter().all(|v| v.is_finite()),
        "time-averaged flux contains non-finite values"
    );
    contract!(
        tie_epsilon >= T::zero() && tie_epsilon.is_finite(),
        "tie epsilon must be finite and non-negative"
    );
    let key = |i: usize| {
        let m = phibar[i].abs();
        if tie_epsilon > T::zero() {
            (m / tie_epsilon).floor()
        } else {
            m
        }
    };
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).expect("finite keys").then(a.cmp(&b)));
    let frozen_spins = order[n..].iter().map(|&i| (i, sign_of(phibar[i]))).collect();
    Ok(Partition {
        order,
        n_ambivalent: n,
        frozen_spins,
    })
}

/// Effective problem: `J_eff` restricted to ambivalent sites,
/// `h_eff_i = h_i + sum_{k frozen} J_ik s_k`, and the offset
/// `1/2 sum_{k != l frozen} J_kl s_k s_l + sum_{k frozen} h_k s_k`.
pub fn build_subproblem<T: Scalar>(full: &IsingProblem<T>, part: &Partition) -> Result<SubProblem<T>> {
    let n_full = full.n_sites();
    contract!(
        part.n_sites() == n_full,
        "partition covers {} sites, problem has {n_full}",
        part.n_sites()
    );
    let mut sub_index: Vec<Option<usize>> = vec![None; n_full];
    for (k, &site) in part.ambivalent().iter().enumerate() {
        sub_index[site] = Some(k);
    }
    let frozen = |site: usize| -> T { spin_value(part.frozen_spins[&site]) };

    let n = part.n_ambivalent;
    let mut pairs = Vec::new();
    let mut fields = Vec::with_capacity(n);
    for (k, &site) in part.ambivalent().iter().enumerate() {
        let mut h = full.fields()[site];
        full.for_each_in_row(site, |j, v| match sub_index[j] {
            Some(l) if l > k => pairs.push((k, l, v)),
            Some(_) => {}
            None => h += v * frozen(j),
        });
        fields.push(h);
    }

    let half = T::of(0.5);
    let mut offset = T::zero();
    for &site in &part.order[n..] {
        let s = frozen(site);
        let mut coupled = T::zero();
        full.for_each_in_row(site, |j, v| {
            if sub_index[j].is_none() {
                coupled += v * frozen(j);
            }
        });
        offset += s * (half * coupled + full.fields()[site]);
    }

    Ok(SubProblem {
        base: IsingProblem::from_pairs(n, pairs, fields)?,
        offset,
        ambivalent_sites: part.ambivalent().to_vec(),
    })
}

/// Full configuration from frozen signs plus subproblem spins.
pub fn reconstruct<T: Scalar>(part: &Partition, sub: &SubProblem<T>, s_prime: &SpinConfig) -> Result<SpinConfig> {
    contract!(
        s_prime.len() == sub.ambivalent_sites.len(),
        "subproblem configuration has length {}, expected {}",
        s_prime.len(),
        sub.ambivalent_sites.len()
    );
    let mut spins = vec![1i8; part.n_sites()];
    for (&site, &s) in &part.frozen_spins {
        spins[site] = s;
    }
    for (&site, s) in sub.ambivalent_sites.iter().zip(s_prime.iter()) {
        spins[site] = s;
    }
    SpinConfig::new(spins)
}

/// Sign projection of every flux, `sgn(0) = +1`.
pub fn project_all<T: Scalar>(phibar: &[T]) -> SpinConfig {
    SpinConfig::from_signs(phibar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{gen_uniform_spinglass, Interval};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_site_partition() {
        let p = make_partition(&[0.9, -0.01, -0.8], 1, 0.0).unwrap();
        assert_eq!(p.ambivalent(), &[1]);
        assert_eq!(p.frozen_spins, BTreeMap::from([(0, 1), (2, -1)]));
        assert_eq!(p.order, vec![1, 2, 0]);
    }

    #[test]
    fn too_many_ambivalent() {
        assert!(make_partition(&[0.1, 0.2], 3, 0.0).is_err());
        assert!(make_partition(&[0.1, f64::NAN], 1, 0.0).is_err());
    }

    #[test]
    fn ties_break_by_index() {
        let p = make_partition(&[0.5, -0.5, 0.5, 0.0], 2, 0.0).unwrap();
        assert_eq!(p.order, vec![3, 0, 1, 2]);
        let q = make_partition(&[0.50, 0.41, 0.44, 0.0], 4, 0.1).unwrap();
        assert_eq!(q.order, vec![3, 1, 2, 0]);
    }

    #[test]
    fn chain_with_frozen_ends() {
        let full = IsingProblem::from_pairs(3, [(0, 1, -1.0), (1, 2, -1.0)], vec![0.0; 3]).unwrap();
        let part = make_partition(&[1.0, 0.0, 1.0], 1, 0.0).unwrap();
        let sub = build_subproblem(&full, &part).unwrap();
        assert_eq!(sub.base.fields(), &[-2.0]);
        assert_eq!(sub.offset, 0.0);
        let up = SpinConfig::new(vec![1]).unwrap();
        let down = SpinConfig::new(vec![-1]).unwrap();
        assert!(sub.base.energy(&up).unwrap() < sub.base.energy(&down).unwrap());
        assert_eq!(reconstruct(&part, &sub, &up).unwrap(), SpinConfig::all_up(3));
    }

    #[test]
    fn all_frozen_is_pure_projection() {
        let full = gen_uniform_spinglass::<f64>(8, 2, Interval::new(-1.0, 1.0).unwrap(), Interval::new(-2.0, 2.0).unwrap())
            .unwrap();
        let phibar = [0.3, -0.2, 0.0, 1.0, -4.0, 0.1, -0.1, 2.0];
        let part = make_partition(&phibar, 0, 0.0).unwrap();
        let sub = build_subproblem(&full, &part).unwrap();
        assert_eq!(sub.base.n_sites(), 0);
        let projected = project_all(&phibar);
        let empty = SpinConfig::new(vec![]).unwrap();
        assert_eq!(reconstruct(&part, &sub, &empty).unwrap(), projected);
        let e = full.energy(&projected).unwrap();
        assert!((sub.offset - e).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn no_frozen_sites_passes_problem_through() {
        let full = gen_uniform_spinglass::<f64>(6, 5, Interval::new(-1.0, 1.0).unwrap(), Interval::new(-2.0, 2.0).unwrap())
            .unwrap();
        let phibar = [0.6, -0.1, 0.3, 0.2, -0.5, 0.4];
        let part = make_partition(&phibar, 6, 0.0).unwrap();
        let sub = build_subproblem(&full, &part).unwrap();
        assert_eq!(sub.offset, 0.0);
        for (k, &a) in sub.ambivalent_sites.iter().enumerate() {
            assert_eq!(sub.base.fields()[k], full.fields()[a]);
            for (l, &b) in sub.ambivalent_sites.iter().enumerate() {
                assert_eq!(sub.base.coupling(k, l), full.coupling(a, b));
            }
        }
        let s = SpinConfig::new(vec![1, -1, -1, 1, 1, -1]).unwrap();
        let full_s = reconstruct(&part, &sub, &s).unwrap();
        for (k, &site) in part.order.iter().enumerate() {
            assert_eq!(full_s.get(site), s.get(k));
        }
    }

    #[test]
    fn decomposition_identity_on_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..50 {
            let full = gen_uniform_spinglass::<f64>(
                20,
                case,
                Interval::new(-1.0, 1.0).unwrap(),
                Interval::new(-2.0, 2.0).unwrap(),
            )
            .unwrap();
            let phibar: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = rng.gen_range(0..=20);
            let part = make_partition(&phibar, n, 0.0).unwrap();
            let sub = build_subproblem(&full, &part).unwrap();
            let s_prime = SpinConfig::random(n, &mut rng);
            let full_s = reconstruct(&part, &sub, &s_prime).unwrap();
            let lhs = full.energy(&full_s).unwrap();
            let rhs = sub.base.energy(&s_prime).unwrap() + sub.offset;
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0), "case {case}: {lhs} vs {rhs}");
            assert_eq!(part.restrict(&full_s).unwrap(), s_prime);
        }
    }

    #[test]
    fn reconstruct_checks_length() {
        let full = IsingProblem::from_pairs(2, [(0, 1, 1.0)], vec![0.0; 2]).unwrap();
        let part = make_partition(&[0.1, 0.2], 1, 0.0).unwrap();
        let sub = build_subproblem(&full, &part).unwrap();
        assert!(reconstruct(&part, &sub, &SpinConfig::all_up(2)).is_err());
    }

    #[test]
    fn projection_tie_break() {
        assert_eq!(project_all(&[0.3, -0.2]).as_slice(), &[1, -1]);
        assert_eq!(project_all(&[0.0; 4]), SpinConfig::all_up(4));
    }

    #[test]
    fn json_export() {
        let p = make_partition(&[0.9, -0.01, -0.8], 1, 0.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json().unwrap()).unwrap();
        assert_eq!(v, serde_json::json!({"n": 1, "ambivalent": [1], "frozen": {"0": 1, "2": -1}}));
    }
}
