//! Probability distributions used by the statistical constraints.
//!
//! CDFs are built on the regularized incomplete gamma and beta functions.
//! Quantiles are found by bracketing and bisection on the CDF, so a
//! quantile is always consistent with the CDF that the propagators use.
//! The interval helpers at the bottom give monotone enclosures for use
//! inside propagation.

use crate::kernel::interval::Interval;
use statrs::function::{beta::beta_reg, erf::erfc, erf::erfc_inv, gamma::gamma_ur};
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),
}

/// A fully parameterised distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistSpec {
    Normal { mean: f64, sd: f64 },
    StudentT { df: f64 },
    ChiSquared { df: f64 },
    FisherF { df1: f64, df2: f64 },
    /// Hotelling's T² with dimension `dim` and `df` degrees of freedom.
    HotellingT2 { dim: u32, df: u32 },
    Poisson { rate: f64 },
}

impl DistSpec {
    pub fn normal(mean: f64, sd: f64) -> Result<Self, DistError> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(DistError::InvalidParameter(format!(
                "normal needs finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        Ok(DistSpec::Normal { mean, sd })
    }

    pub fn student_t(df: f64) -> Result<Self, DistError> {
        check_df("student t", df)?;
        Ok(DistSpec::StudentT { df })
    }

    pub fn chi_squared(df: f64) -> Result<Self, DistError> {
        check_df("chi-squared", df)?;
        Ok(DistSpec::ChiSquared { df })
    }

    pub fn fisher_f(df1: f64, df2: f64) -> Result<Self, DistError> {
        check_df("F numerator", df1)?;
        check_df("F denominator", df2)?;
        Ok(DistSpec::FisherF { df1, df2 })
    }

    pub fn hotelling_t2(dim: u32, df: u32) -> Result<Self, DistError> {
        if dim < 1 || df < dim {
            return Err(DistError::InvalidParameter(format!(
                "Hotelling T² needs df >= dim >= 1, got dim {dim}, df {df}"
            )));
        }
        Ok(DistSpec::HotellingT2 { dim, df })
    }

    pub fn poisson(rate: f64) -> Result<Self, DistError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(DistError::InvalidParameter(format!(
                "poisson rate must be positive, got {rate}"
            )));
        }
        Ok(DistSpec::Poisson { rate })
    }

    /// `P(X <= x)`. For the Poisson this is `P(X <= floor(x))`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistSpec::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            DistSpec::StudentT { df } => student_t_cdf(df, x),
            DistSpec::ChiSquared { df } => chi_squared_cdf(df, x),
            DistSpec::FisherF { df1, df2 } => fisher_f_cdf(df1, df2, x),
            DistSpec::HotellingT2 { dim, df } => {
                let (scale, d1, d2) = hotelling_to_f(dim, df);
                fisher_f_cdf(d1, d2, x / scale)
            }
            DistSpec::Poisson { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    poisson_below(x.floor() + 1.0, rate)
                }
            }
        }
    }

    /// `P(X < x)`; equal to `cdf` for continuous distributions.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            DistSpec::Poisson { rate } => poisson_below(x, rate),
            _ => self.cdf(x),
        }
    }

    /// Inverse CDF. For the Poisson, the smallest `k` with `cdf(k) >= p`.
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::InvalidProbability(p));
        }
        Ok(match *self {
            DistSpec::Poisson { rate } => {
                let mut k = 0.0;
                while self.cdf(k) < p {
                    k += 1.0;
                    if k > rate + 100.0 * (rate.sqrt() + 10.0) {
                        break;
                    }
                }
                k
            }
            DistSpec::HotellingT2 { dim, df } => {
                let (scale, d1, d2) = hotelling_to_f(dim, df);
                scale * DistSpec::FisherF { df1: d1, df2: d2 }.quantile(p)?
            }
            DistSpec::Normal { .. } | DistSpec::StudentT { .. } => {
                invert(|x| self.cdf(x), p, f64::NEG_INFINITY)
            }
            _ => invert(|x| self.cdf(x), p, 0.0),
        })
    }
}

fn check_df(what: &str, df: f64) -> Result<(), DistError> {
    if df >= 1.0 && df.is_finite() {
        Ok(())
    } else {
        Err(DistError::InvalidParameter(format!(
            "{what} degrees of freedom must be >= 1, got {df}"
        )))
    }
}

/// T²(p, m) = p·m/(m−p+1) · F(p, m−p+1).
fn hotelling_to_f(dim: u32, df: u32) -> (f64, f64, f64) {
    let p = dim as f64;
    let m = df as f64;
    (p * m / (m - p + 1.0), p, m - p + 1.0)
}

pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-z / SQRT_2)
}

/// Fast standard normal quantile; accurate to a few ulps in the centre.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -SQRT_2 * erfc_inv(2.0 * p)
}

fn student_t_cdf(df: f64, t: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let x = df / (df + t * t);
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, x);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn chi_squared_cdf(df: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    1.0 - gamma_ur(df / 2.0, x / 2.0)
}

fn fisher_f_cdf(df1: f64, df2: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let y = df1 * x / (df1 * x + df2);
    beta_reg(df1 / 2.0, df2 / 2.0, y)
}

/// `P(X < bound)` for `X ~ Poisson(rate)`.
pub fn poisson_below(bound: f64, rate: f64) -> f64 {
    if bound <= 0.0 {
        return 0.0;
    }
    if bound.is_infinite() || rate <= 0.0 {
        return 1.0;
    }
    gamma_ur(bound.ceil(), rate)
}

/// Bisection for `cdf(x) = p` on a monotone CDF whose support starts at `floor`.
fn invert(cdf: impl Fn(f64) -> f64, p: f64, floor: f64) -> f64 {
    let (mut lo, mut hi) = if floor.is_finite() {
        (floor, floor + 1.0)
    } else {
        (-1.0, 1.0)
    };
    while cdf(hi) < p {
        lo = hi;
        hi = if hi <= 0.0 { 1.0 } else { hi * 2.0 };
    }
    if !floor.is_finite() {
        while cdf(lo) > p {
            hi = lo;
            lo *= 2.0;
        }
    }
    for _ in 0..400 {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) / 2.0
}

// ---- interval extensions ----

const CDF_WIDEN: f64 = 1e-13;

fn widen_prob(lo: f64, hi: f64) -> Interval {
    let lo = (lo - lo * CDF_WIDEN - f64::MIN_POSITIVE).max(0.0);
    let hi = (hi + hi * CDF_WIDEN + f64::MIN_POSITIVE).min(1.0);
    Interval::new(lo.min(hi), hi)
}

/// Enclosure of `{Φ(x) : x ∈ arg}`.
pub fn std_normal_cdf_interval(arg: Interval) -> Interval {
    widen_prob(std_normal_cdf(arg.lo()), std_normal_cdf(arg.hi()))
}

/// Enclosure of `{x ∈ arg : Φ(x) ∈ prob}`; `None` when provably empty.
pub fn std_normal_cdf_preimage(prob: Interval, arg: Interval) -> Option<Interval> {
    let f = |x: f64| std_normal_cdf(x);
    let lo = if prob.lo() <= 0.0 {
        f64::NEG_INFINITY
    } else {
        // every x with widened Φ(x) >= prob.lo lies above `lo`
        let q = std_normal_quantile(prob.lo());
        step_below(q, |x| f(x) * (1.0 + 2.0 * CDF_WIDEN) + f64::MIN_POSITIVE < prob.lo())
    };
    let hi = if prob.hi() >= 1.0 {
        f64::INFINITY
    } else {
        let q = std_normal_quantile(prob.hi());
        step_above(q, |x| f(x) * (1.0 - 2.0 * CDF_WIDEN) - f64::MIN_POSITIVE > prob.hi())
    };
    Interval::checked(lo, hi)?.intersect(&arg)
}

/// Enclosure of `{P(X < bound | rate) : rate ∈ rates}`.
pub fn poisson_below_interval(bound: f64, rates: Interval) -> Interval {
    // decreasing in the rate
    let at_lo = poisson_below(bound, rates.lo());
    let at_hi = if rates.hi().is_infinite() {
        0.0
    } else {
        poisson_below(bound, rates.hi().max(0.0))
    };
    widen_prob(at_hi, at_lo)
}

/// Enclosure of `{rate ∈ rates : P(X < bound | rate) ∈ prob}`.
pub fn poisson_below_preimage(bound: f64, prob: Interval, rates: Interval) -> Option<Interval> {
    if bound <= 0.0 {
        return if prob.contains(0.0) { Some(rates) } else { None };
    }
    let (l, h) = (rates.lo().max(0.0), rates.hi());
    if !h.is_finite() {
        return Some(rates);
    }
    let f = |r: f64| poisson_below(bound, r);
    // lower bound: f(rate) <= prob.hi must hold, f decreasing
    let too_high = |r: f64| f(r) * (1.0 - 2.0 * CDF_WIDEN) - f64::MIN_POSITIVE > prob.hi();
    let too_low = |r: f64| f(r) * (1.0 + 2.0 * CDF_WIDEN) + f64::MIN_POSITIVE < prob.lo();
    if too_high(h) || too_low(l) {
        return None;
    }
    let new_lo = if too_high(l) { bisect_boundary(l, h, &too_high).0 } else { l };
    let new_hi = if too_low(h) {
        // too_low is false at l and true at h
        bisect_boundary(l, h, &|r| !too_low(r)).1
    } else {
        h
    };
    let lo = (new_lo - 1e-9 * new_lo.abs()).max(rates.lo());
    let hi = (new_hi + 1e-9 * new_hi.abs()).min(rates.hi());
    Interval::checked(lo, hi)
}

/// Given `pred(a)` true and `pred(b)` false, shrinks `[a, b]` around the
/// switch point while keeping `pred(a)` true and `pred(b)` false.
fn bisect_boundary(mut a: f64, mut b: f64, pred: &dyn Fn(f64) -> bool) -> (f64, f64) {
    for _ in 0..80 {
        let m = a + (b - a) / 2.0;
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    (a, b)
}

/// Moves below `q` until `excluded(x)` holds; gives up at −∞.
fn step_below(q: f64, excluded: impl Fn(f64) -> bool) -> f64 {
    if !q.is_finite() {
        return f64::NEG_INFINITY;
    }
    let mut delta = 1e-12 + 1e-10 * q.abs();
    for _ in 0..80 {
        let x = q - delta;
        if excluded(x) {
            return x;
        }
        delta *= 4.0;
    }
    f64::NEG_INFINITY
}

fn step_above(q: f64, excluded: impl Fn(f64) -> bool) -> f64 {
    if !q.is_finite() {
        return f64::INFINITY;
    }
    let mut delta = 1e-12 + 1e-10 * q.abs();
    for _ in 0..80 {
        let x = q + delta;
        if excluded(x) {
            return x;
        }
        delta *= 4.0;
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(DistSpec::normal(0.0, 0.0).is_err());
        assert!(DistSpec::student_t(0.5).is_err());
        assert!(DistSpec::hotelling_t2(3, 2).is_err());
        assert!(DistSpec::poisson(-1.0).is_err());
        let chi = DistSpec::chi_squared(2.0).unwrap();
        assert_eq!(chi.quantile(1.0), Err(DistError::InvalidProbability(1.0)));
        assert!(chi.quantile(0.0).is_err());
    }

    #[test]
    fn poisson_left_limit_and_quantile() {
        let d = DistSpec::poisson(5.0).unwrap();
        assert_eq!(d.cdf_left(0.0), 0.0);
        assert!((d.cdf_left(3.0) - d.cdf(2.0)).abs() < 1e-15);
        assert!((d.cdf_left(2.5) - d.cdf(2.0)).abs() < 1e-15);
        let k = d.quantile(0.5).unwrap();
        assert!(d.cdf(k) >= 0.5 && d.cdf(k - 1.0) < 0.5);
    }

    #[test]
    fn normal_preimage_is_consistent_with_forward() {
        let arg = Interval::new(-5.0, 5.0);
        let prob = Interval::new(0.2, 0.7);
        let pre = std_normal_cdf_preimage(prob, arg).unwrap();
        assert!(std_normal_cdf(pre.lo()) < 0.2 && std_normal_cdf(pre.hi()) > 0.7);
        assert!(pre.lo() > -0.85 && pre.hi() < 0.53);
        assert!(std_normal_cdf_preimage(Interval::new(0.99, 1.0), Interval::new(-1.0, 1.0)).is_none());
    }

    #[test]
    fn poisson_preimage_brackets_rate() {
        let rates = Interval::new(0.1, 30.0);
        let target = poisson_below(4.0, 5.0);
        let pre = poisson_below_preimage(4.0, Interval::point(target), rates).unwrap();
        assert!(pre.contains(5.0));
        assert!(pre.width() < 1e-6);
        assert!(poisson_below_preimage(4.0, Interval::new(0.999, 1.0), Interval::new(5.0, 6.0)).is_none());
    }
}
