use std::time::Instant;

use super::{check_warm_start, finish, SubsolverResult};
use crate::error::{Error, Result};
use crate::ising::{IsingProblem, SpinConfig};
use crate::scalar::Scalar;

pub const BRUTE_FORCE_MAX_SITES: usize = 26;

/// Incremental energies are re-derived from scratch this often.
const RESYNC_EVERY: u64 = 4096;

/// Exhaustive minimum over all `2^n` configurations.
///
/// Ties are resolved to the lexicographically first configuration with `+1`
/// ordered before `-1`. Enumeration follows a Gray code; every configuration
/// that comes within a small tolerance of the incumbent is re-evaluated exactly.
pub fn brute_force<T: Scalar>(problem: &IsingProblem<T>, warm_start: Option<&SpinConfig>) -> Result<SubsolverResult<T>> {
    let started = Instant::now();
    let n = problem.n_sites();
    if n > BRUTE_FORCE_MAX_SITES {
        return Err(Error::Capacity {
            what: "brute force",
            n,
            max: BRUTE_FORCE_MAX_SITES,
        });
    }
    check_warm_start(problem, warm_start)?;

    // bit i of `mask` set <=> site i is -1
    let to_config = |mask: u64| SpinConfig::new((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect());
    let lex_before = |a: u64, b: u64| {
        let d = a ^ b;
        d != 0 && a >> d.trailing_zeros() & 1 == 0
    };

    let mut s = SpinConfig::all_up(n);
    let mut local = problem.local_fields(&s);
    let mut running = problem.energy(&s)?;
    let mut best_mask = 0u64;
    let mut best_exact = running;
    let mut best_running = running;
    let two = T::of(2.0);

    let total: u64 = 1 << n;
    let mut mask = 0u64;
    for k in 1..total {
        let i = k.trailing_zeros() as usize;
        let si = if s.get(i) > 0 { T::one() } else { -T::one() };
        running -= two * si * local[i];
        super::flip_site(problem, &mut s, &mut local, i);
        mask ^= 1 << i;
        if k % RESYNC_EVERY == 0 {
            local = problem.local_fields(&s);
            running = problem.energy(&s)?;
        }
        let tol = T::of(1e-10) * (T::one() + best_running.abs());
        if running <= best_running + tol {
            let exact = problem.energy(&s)?;
            if exact < best_exact || (exact == best_exact && lex_before(mask, best_mask)) {
                best_exact = exact;
                best_mask = mask;
            }
            best_running = best_running.min(running);
        }
    }
    finish(problem, to_config(best_mask)?, warm_start, "brute", started, total - 1)
}
