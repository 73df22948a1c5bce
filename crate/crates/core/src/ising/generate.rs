use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::maxcut::WeightMatrix;
use super::problem::IsingProblem;
use crate::error::{contract, Result};
use crate::scalar::Scalar;

/// Deterministic, platform-independent generator used for every seeded draw.
pub type InstanceRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closed interval `[lo, hi]` sampled as `lo + (hi - lo) * u` with `u` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        contract!(lo.is_finite() && hi.is_finite(), "interval [{lo}, {hi}] is not finite");
        contract!(lo <= hi, "interval [{lo}, {hi}] is empty");
        Ok(Self { lo, hi })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        self.lo + (self.hi - self.lo) * u
    }
}

pub const DEFAULT_J_RANGE: Interval = Interval { lo: -1.0, hi: 1.0 };
pub const DEFAULT_H_RANGE: Interval = Interval { lo: -2.0, hi: 2.0 };

/// Complete graph `K_n` with independent equiprobable `+1`/`-1` weights.
pub fn gen_bimodal_complete<T: Scalar>(n: usize, seed: u64) -> Result<WeightMatrix<T>> {
    contract!(n >= 2, "complete graph needs at least 2 vertices, got {n}");
    let mut rng = seeded_rng(seed);
    let count = n * (n - 1) / 2;
    let upper = (0..count).map(|_| if rng.gen::<bool>() { T::one() } else { -T::one() });
    Ok(WeightMatrix::from_upper(n, upper.collect::<Vec<_>>()))
}

/// Dense spin glass: `J_ij` uniform on `j_range` for every pair `i < j`
/// (drawn in lexicographic order), then `h_i` uniform on `h_range`.
pub fn gen_uniform_spinglass<T: Scalar>(
    n: usize,
    seed: u64,
    j_range: Interval,
    h_range: Interval,
) -> Result<IsingProblem<T>> {
    contract!(n >= 2, "spin glass needs at least 2 sites, got {n}");
    let j_range = Interval::new(j_range.lo, j_range.hi)?;
    let h_range = Interval::new(h_range.lo, h_range.hi)?;
    let mut rng = seeded_rng(seed);
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = T::of(j_range.sample(&mut rng));
            if v != T::zero() {
                pairs.push((i, j, v));
            }
        }
    }
    let fields = (0..n).map(|_| T::of(h_range.sample(&mut rng))).collect();
    IsingProblem::from_pairs(n, pairs, fields)
}
