use std::fmt;
use std::ops::{Add, Sub};

use crate::error::{QbnError, Result};

/// Sufficient statistics of a beta distribution over a single conditional
/// probability.
///
/// `alpha` counts samples that fall into the cell (the node takes the cell's
/// value under the cell's parent instantiation) and `omega` counts samples
/// that match the parent instantiation but not the value. A prior `β(a, b)`
/// updated with `p` relevant samples, `y` of them successes, becomes
/// `β(a + y, b + p − y)`.
///
/// Both fields are reals: the network transformations redistribute counts
/// proportionally and produce fractional pseudo-counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BetaStat {
    pub alpha: f64,
    pub omega: f64,
}

/// Mean, variance and the `1/(α+ω+1)` variance bound of a beta statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    pub variance_bound: f64,
}

impl BetaStat {
    pub const ZERO: BetaStat = BetaStat { alpha: 0.0, omega: 0.0 };

    /// Validating constructor: both parameters must be finite and nonnegative.
    pub fn new(alpha: f64, omega: f64) -> Result<Self> {
        if !alpha.is_finite() || !omega.is_finite() || alpha < 0.0 || omega < 0.0 {
            return Err(QbnError::InvalidStat(format!(
                "beta({alpha}, {omega}) needs finite nonnegative parameters"
            )));
        }
        Ok(BetaStat { alpha, omega })
    }

    pub const fn raw(alpha: f64, omega: f64) -> Self {
        BetaStat { alpha, omega }
    }

    pub fn total(&self) -> f64 {
        self.alpha + self.omega
    }

    pub fn summarize(&self) -> Result<Summary> {
        summarize(*self)
    }

    pub fn approx_eq(&self, other: &BetaStat, tol: f64) -> bool {
        (self.alpha - other.alpha).abs() <= tol && (self.omega - other.omega).abs() <= tol
    }
}

/// Closed-form beta summary: `mean = α/(α+ω)`,
/// `var = αω / ((α+ω)²(α+ω+1))`, `bound = 1/(α+ω+1)`.
pub fn summarize(stat: BetaStat) -> Result<Summary> {
    let n = stat.alpha + stat.omega;
    if !(n > 0.0) {
        return Err(QbnError::UndefinedSummary {
            alpha: stat.alpha,
            omega: stat.omega,
        });
    }
    Ok(Summary {
        mean: stat.alpha / n,
        variance: stat.alpha * stat.omega / (n * n * (n + 1.0)),
        variance_bound: 1.0 / (n + 1.0),
    })
}

impl Add for BetaStat {
    type Output = BetaStat;
    fn add(self, rhs: BetaStat) -> BetaStat {
        BetaStat::raw(self.alpha + rhs.alpha, self.omega + rhs.omega)
    }
}

impl Sub for BetaStat {
    type Output = BetaStat;
    fn sub(self, rhs: BetaStat) -> BetaStat {
        BetaStat::raw(self.alpha - rhs.alpha, self.omega - rhs.omega)
    }
}

impl fmt::Display for BetaStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = f.precision().unwrap_or(4);
        write!(f, "beta({:.*}, {:.*})", p, self.alpha, p, self.omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_summary() {
        let s = summarize(BetaStat::raw(1.0, 1.0)).unwrap();
        assert_eq!(s.mean, 0.5);
        assert!((s.variance - 1.0 / 12.0).abs() < 1e-15);
        assert!((s.variance_bound - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn table_two_cell_summary() {
        let s = summarize(BetaStat::raw(34.0, 4.0)).unwrap();
        assert!((s.mean - 34.0 / 38.0).abs() < 1e-15);
        assert!((s.variance - 136.0 / (38.0 * 38.0 * 39.0)).abs() < 1e-15);
        assert!(s.variance < s.variance_bound);
    }

    #[test]
    fn mass_at_zero() {
        let s = summarize(BetaStat::raw(0.0, 5.0)).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn empty_stat_has_no_summary() {
        assert!(matches!(
            summarize(BetaStat::ZERO),
            Err(QbnError::UndefinedSummary { .. })
        ));
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(BetaStat::new(-1.0, 0.0).is_err());
        assert!(BetaStat::new(1.0, f64::NAN).is_err());
        assert!(BetaStat::new(f64::INFINITY, 1.0).is_err());
        assert!(BetaStat::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn display_uses_four_decimals() {
        assert_eq!(BetaStat::raw(34.0, 4.0).to_string(), "beta(34.0000, 4.0000)");
        assert_eq!(format!("{:.2}", BetaStat::raw(20.25, 1.34375)), "beta(20.25, 1.34)");
    }
}
