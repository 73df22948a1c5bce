use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::scalar::Scalar;

/// Quadratic scheduling functions
///
/// `alpha(t) = alpha_f (t + rho1 (1 - t) + rho2 t (t - 1))` and
/// `beta(t) = beta_f (t + kappa1 (1 - t) + kappa2 t (t - 1))`
/// over normalized time `t` in `[0, 1]`. `alpha` stays positive on the whole interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    alpha_f: T,
    rho1: T,
    rho2: T,
    beta_f: T,
    kappa1: T,
    kappa2: T,
}

impl<T: Scalar> Schedule<T> {
    pub fn new(alpha_f: T, rho1: T, rho2: T, beta_f: T, kappa1: T, kappa2: T) -> Result<Self> {
        let all = [alpha_f, rho1, rho2, beta_f, kappa1, kappa2];
        contract!(all.iter().all(|v| v.is_finite()), "schedule coefficients must be finite");
        let s = Self {
            alpha_f,
            rho1,
            rho2,
            beta_f,
            kappa1,
            kappa2,
        };
        let min = s.alpha_min();
        contract!(min > T::zero(), "alpha(tau) must stay positive on [0, 1], minimum is {min}");
        Ok(s)
    }

    /// Coefficients `(alpha_f, rho1, rho2, beta_f, kappa1, kappa2) = (0.008, 4, 3, 0.12, 0.05, 1)`.
    pub fn reference() -> Self {
        Self::new(T::of(0.008), T::of(4.0), T::of(3.0), T::of(0.12), T::of(0.05), T::one())
            .expect("reference schedule is valid")
    }

    /// Schedule whose `alpha` and `beta` stay at `alpha0` and `beta0` for all `tau`.
    pub fn constant(alpha0: T, beta0: T) -> Result<Self> {
        Self::new(alpha0, T::one(), T::zero(), beta0, T::one(), T::zero())
    }

    /// Parses `a_f,r1,r2,b_f,k1,k2`.
    pub fn parse(text: &str) -> Result<Self> {
        let vals: Vec<f64> = text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Contract(format!("schedule `{text}`: {e}")))?;
        contract!(vals.len() == 6, "schedule needs 6 comma-separated values, got {}", vals.len());
        Self::new(
            T::of(vals[0]),
            T::of(vals[1]),
            T::of(vals[2]),
            T::of(vals[3]),
            T::of(vals[4]),
            T::of(vals[5]),
        )
    }

    pub fn with_kappa2(self, kappa2: T) -> Self {
        Self { kappa2, ..self }
    }

    pub fn coefficients(&self) -> [T; 6] {
        [self.alpha_f, self.rho1, self.rho2, self.beta_f, self.kappa1, self.kappa2]
    }

    #[inline]
    pub fn alpha(&self, tau: T) -> T {
        self.alpha_f * (tau + self.rho1 * (T::one() - tau) + self.rho2 * tau * (tau - T::one()))
    }

    #[inline]
    pub fn beta(&self, tau: T) -> T {
        self.beta_f * (tau + self.kappa1 * (T::one() - tau) + self.kappa2 * tau * (tau - T::one()))
    }

    fn alpha_min(&self) -> T {
        let mut min = self.alpha(T::zero()).min(self.alpha(T::one()));
        // alpha / alpha_f = rho2 t^2 + (1 - rho1 - rho2) t + rho1
        if self.rho2 > T::zero() {
            let vertex = -(T::one() - self.rho1 - self.rho2) / (T::of(2.0) * self.rho2);
            if vertex > T::zero() && vertex < T::one() {
                min = min.min(self.alpha(vertex));
            }
        }
        min
    }
}

/// `(alpha(tau), beta(tau))` for `tau` in `[0, 1]`.
pub fn schedule_eval<T: Scalar>(schedule: &Schedule<T>, tau: T) -> Result<(T, T)> {
    contract!(tau >= T::zero() && tau <= T::one(), "tau = {tau} is outside [0, 1]");
    Ok((schedule.alpha(tau), schedule.beta(tau)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_endpoints() {
        let s = Schedule::<f64>::reference();
        assert_eq!(schedule_eval(&s, 0.0).unwrap(), (0.032, 0.006));
        assert_eq!(schedule_eval(&s, 1.0).unwrap(), (0.008, 0.12));
    }

    #[test]
    fn reference_midpoint() {
        let (a, b) = schedule_eval(&Schedule::<f64>::reference(), 0.5).unwrap();
        assert!((a - 0.014).abs() < 1e-15);
        assert!((b - 0.033).abs() < 1e-15);
    }

    #[test]
    fn tau_out_of_range() {
        let s = Schedule::<f64>::reference();
        assert!(schedule_eval(&s, -0.01).is_err());
        assert!(schedule_eval(&s, 1.01).is_err());
    }

    #[test]
    fn alpha_must_stay_positive() {
        // vertex of rho2 t^2 + (1 - rho1 - rho2) t + rho1 dips below zero
        assert!(Schedule::new(1.0, 1.0, 10.0, 0.1, 0.05, 1.0).is_err());
        assert!(Schedule::new(-1.0, 4.0, 3.0, 0.1, 0.05, 1.0).is_err());
        assert!(Schedule::new(1.0, 0.0, 0.0, 0.1, 0.05, 1.0).is_err());
        assert!(Schedule::new(1.0, 4.0, 3.0, f64::NAN, 0.05, 1.0).is_err());
    }

    #[test]
    fn constant_schedule_is_flat() {
        let s = Schedule::<f64>::constant(0.032, 0.006).unwrap();
        for t in [0.0, 0.3, 0.77, 1.0] {
            assert_eq!(s.alpha(t), 0.032);
            assert_eq!(s.beta(t), 0.006);
        }
    }

    #[test]
    fn parse_round_trip() {
        let s = Schedule::<f64>::parse("0.008, 4, 3, 0.12, 0.05, 1").unwrap();
        assert_eq!(s, Schedule::reference());
        assert!(Schedule::<f64>::parse("1,2,3").is_err());
        assert!(Schedule::<f64>::parse("a,2,3,4,5,6").is_err());
    }

    #[test]
    fn endpoints_hold_for_any_kappa2() {
        for k2 in [-1.0, 0.0, 0.5, 1.0] {
            let s = Schedule::<f64>::reference().with_kappa2(k2);
            assert_eq!(s.beta(1.0), 0.12);
            assert_eq!(s.alpha(1.0), 0.008);
        }
    }
}
