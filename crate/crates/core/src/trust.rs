//! Beta-distribution trust function.
//!
//! A trust function is `Beta(s + 1, u + 1)` over the success probability `p`,
//! where `s`/`u` count successful and unsuccessful transactions. Counts may be
//! fractional: weighted aggregation (SOP) produces non-integer parameters, so
//! the factorial normaliser is evaluated through the log-gamma function.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Success / failure counts between two entities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub successes: f64,
    pub failures: f64,
}

impl OutcomeCounts {
    pub const ZERO: OutcomeCounts = OutcomeCounts {
        successes: 0.0,
        failures: 0.0,
    };

    /// Validating constructor: both counts finite and non-negative.
    pub fn new(successes: f64, failures: f64) -> Result<Self> {
        let c = OutcomeCounts { successes, failures };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.successes) && ok(self.failures) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "outcome counts must be finite and non-negative, got ({}, {})",
                self.successes, self.failures
            )))
        }
    }

    pub fn total(&self) -> f64 {
        self.successes + self.failures
    }

    /// Record one binary outcome.
    pub fn record(&mut self, success: bool) {
        if success {
            self.successes += 1.0;
        } else {
            self.failures += 1.0;
        }
    }

    pub fn scaled(&self, w: f64) -> OutcomeCounts {
        OutcomeCounts {
            successes: self.successes * w,
            failures: self.failures * w,
        }
    }

    /// Fraction of successful outcomes, `None` with no observations.
    pub fn success_fraction(&self) -> Option<f64> {
        let n = self.total();
        (n > 0.0).then(|| self.successes / n)
    }

    /// Swap successes and failures.
    pub fn mirrored(&self) -> OutcomeCounts {
        OutcomeCounts {
            successes: self.failures,
            failures: self.successes,
        }
    }
}

impl std::ops::Add for OutcomeCounts {
    type Output = OutcomeCounts;
    fn add(self, rhs: OutcomeCounts) -> OutcomeCounts {
        OutcomeCounts {
            successes: self.successes + rhs.successes,
            failures: self.failures + rhs.failures,
        }
    }
}

impl std::ops::AddAssign for OutcomeCounts {
    fn add_assign(&mut self, rhs: OutcomeCounts) {
        self.successes += rhs.successes;
        self.failures += rhs.failures;
    }
}

impl std::iter::Sum for OutcomeCounts {
    fn sum<I: Iterator<Item = OutcomeCounts>>(iter: I) -> Self {
        iter.fold(OutcomeCounts::ZERO, |a, b| a + b)
    }
}

/// A trust function together with its expected value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustEstimate {
    pub counts: OutcomeCounts,
    pub expected: f64,
}

impl TrustEstimate {
    pub fn from_counts(counts: OutcomeCounts) -> Self {
        TrustEstimate {
            counts,
            expected: expected_trust(counts),
        }
    }

    /// An estimate carrying only a point value (mixtures, feedback averages),
    /// with counts left at the uninformed prior.
    pub fn point(expected: f64) -> Self {
        TrustEstimate {
            counts: OutcomeCounts::ZERO,
            expected,
        }
    }

    pub fn density(&self, p: f64) -> Result<f64> {
        trust_density(self.counts, p)
    }
}

/// Weighted mixture of trust functions. A single component with weight one
/// is the plain trust function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaMixture {
    pub components: Vec<(f64, OutcomeCounts)>,
}

impl BetaMixture {
    pub fn single(counts: OutcomeCounts) -> Self {
        BetaMixture {
            components: vec![(1.0, counts)],
        }
    }

    /// `sum w_i * E(counts_i)`, accumulated in component order.
    pub fn expected(&self) -> f64 {
        self.components.iter().map(|&(w, c)| w * expected_trust(c)).sum()
    }

    pub fn density(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("trust rating {p} outside [0, 1]")));
        }
        let mut acc = 0.0;
        for &(w, c) in &self.components {
            if w != 0.0 {
                acc += w * trust_density(c, p)?;
            }
        }
        Ok(acc)
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }
}

/// Expected value of the trust function: `(s + 1) / (s + u + 2)`.
pub fn expected_trust(counts: OutcomeCounts) -> f64 {
    (counts.successes + 1.0) / (counts.successes + counts.failures + 2.0)
}

/// Density of `Beta(s + 1, u + 1)` at `p`.
pub fn trust_density(counts: OutcomeCounts, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("trust rating {p} outside [0, 1]")));
    }
    counts.validate()?;
    let (s, u) = (counts.successes, counts.failures);
    // Endpoints: the continuous extension. A zero exponent contributes 1.
    if (p == 0.0 && s > 0.0) || (p == 1.0 && u > 0.0) {
        return Ok(0.0);
    }
    if s.fract() == 0.0 && u.fract() == 0.0 && s + u < SMALL_INTEGER_COUNTS {
        let norm = integer_normaliser(s as u32, u as u32);
        return Ok(norm * p.powf(s) * (1.0 - p).powf(u));
    }
    let ln_norm = ln_gamma(s + u + 2.0) - ln_gamma(s + 1.0) - ln_gamma(u + 1.0);
    let ln_p = if s > 0.0 { s * p.ln() } else { 0.0 };
    let ln_q = if u > 0.0 { u * (1.0 - p).ln() } else { 0.0 };
    Ok((ln_norm + ln_p + ln_q).exp())
}

/// Below this many observations integer counts use the exact binomial form.
const SMALL_INTEGER_COUNTS: f64 = 60.0;

/// `(s + u + 1)! / (s! u!)` = `(s + u + 1) * C(s + u, s)`.
fn integer_normaliser(s: u32, u: u32) -> f64 {
    let (small, n) = (s.min(u), s + u);
    let mut binom = 1.0;
    for k in 1..=small {
        binom = binom * (n - small + k) as f64 / k as f64;
    }
    (n + 1) as f64 * binom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: f64, u: f64) -> OutcomeCounts {
        OutcomeCounts::new(s, u).unwrap()
    }

    // Independent oracle: composite trapezoid rule with n intervals.
    fn trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut acc = 0.5 * (f(0.0) + f(1.0));
        for i in 1..n {
            acc += f(i as f64 * h);
        }
        acc * h
    }

    // Independent oracle: (s+u+1)! / (s! u!) p^s (1-p)^u with exact integer factorials.
    fn factorial_density(s: u32, u: u32, p: f64) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        fact(s + u + 1) / (fact(s) * fact(u)) * p.powi(s as i32) * (1.0 - p).powi(u as i32)
    }

    #[test]
    fn uniform_prior_density() {
        assert_eq!(trust_density(c(0.0, 0.0), 0.3).unwrap(), 1.0);
    }

    #[test]
    fn one_success_density_is_linear() {
        let d = trust_density(c(1.0, 0.0), 0.5).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        let counts = c(10.0, 2.0);
        let integral = trapezoid(|p| trust_density(counts, p).unwrap(), 100_000);
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }

    #[test]
    fn large_counts_do_not_overflow() {
        let counts = c(1.0e6, 1.0e6);
        let d = trust_density(counts, 0.5).unwrap();
        assert!(d.is_finite() && d > 0.0);
    }

    #[test]
    fn endpoints_follow_continuous_extension() {
        assert_eq!(trust_density(c(0.0, 0.0), 0.0).unwrap(), 1.0);
        assert_eq!(trust_density(c(0.0, 0.0), 1.0).unwrap(), 1.0);
        assert_eq!(trust_density(c(3.0, 0.0), 0.0).unwrap(), 0.0);
        assert_eq!(trust_density(c(0.0, 3.0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_rating_is_a_domain_error() {
        assert!(trust_density(c(1.0, 1.0), 1.5).is_err());
        assert!(trust_density(c(1.0, 1.0), -0.1).is_err());
    }

    #[test]
    fn negative_counts_rejected() {
        assert!(OutcomeCounts::new(-1.0, 0.0).is_err());
        assert!(OutcomeCounts::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn expected_values() {
        assert_eq!(expected_trust(c(0.0, 0.0)), 0.5);
        assert!((expected_trust(c(8.0, 0.0)) - 0.9).abs() < 1e-15);
        assert_eq!(expected_trust(c(3.0, 3.0)), 0.5);
    }

    #[test]
    fn matches_factorial_form() {
        for s in 0..=20u32 {
            for u in 0..=(20 - s) {
                for &p in &[0.05, 0.3, 0.5, 0.77, 0.95] {
                    let want = factorial_density(s, u, p);
                    let got = trust_density(c(s as f64, u as f64), p).unwrap();
                    let rel = ((got - want) / want).abs();
                    assert!(rel < 1e-9, "s={s} u={u} p={p}: {got} vs {want}");
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn expected_is_monotone(s in 0.0f64..500.0, u in 0.0f64..500.0, d in 0.01f64..10.0) {
                let base = expected_trust(c(s, u));
                prop_assert!(expected_trust(c(s + d, u)) > base);
                prop_assert!(expected_trust(c(s, u + d)) < base);
                prop_assert!(base > 0.0 && base < 1.0);
            }

            #[test]
            fn density_normalised(s in 1.0f64..60.0, u in 1.0f64..60.0) {
                let integral = trapezoid(|p| trust_density(c(s, u), p).unwrap(), 20_000);
                prop_assert!((integral - 1.0).abs() < 1e-3, "integral {}", integral);
            }
        }
    }
}
