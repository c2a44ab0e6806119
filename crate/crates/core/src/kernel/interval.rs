//! Closed intervals over the extended reals with outward rounding.
//!
//! Every arithmetic result encloses the exact real image of its operands.
//! Rounding is detected with error-free transformations, so exact results
//! (integer sums, products of dyadic rationals) stay exact and only inexact
//! results are widened by one ulp in the outward direction.

use std::fmt;

/// A nonempty closed interval `[lo, hi]` with `lo <= hi`.
///
/// Emptiness is never encoded inside the type; operations that can produce
/// an empty set return `Option<Interval>` and use `None` as the sentinel.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

// Directed rounding helpers. `*_down` returns a value <= the exact result,
// `*_up` a value >= the exact result.

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s == f64::INFINITY && a.is_finite() && b.is_finite() {
            f64::MAX
        } else if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        };
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
            -f64::MAX
        } else if s.is_nan() {
            f64::INFINITY
        } else {
            s
        };
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Product with the `0 * inf = 0` convention used for interval bounds.
fn mul_raw(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    let p = mul_raw(a, b);
    if p == 0.0 || !p.is_finite() {
        if p.is_infinite() && a.is_finite() && b.is_finite() && p > 0.0 {
            return f64::MAX;
        }
        if p == 0.0 && a != 0.0 && b != 0.0 {
            // underflow
            return if (a < 0.0) != (b < 0.0) { -f64::MIN_POSITIVE } else { 0.0 };
        }
        return p;
    }
    let err = a.mul_add(b, -p);
    if err < 0.0 {
        p.next_down()
    } else {
        p
    }
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    let p = mul_raw(a, b);
    if p == 0.0 || !p.is_finite() {
        if p.is_infinite() && a.is_finite() && b.is_finite() && p < 0.0 {
            return -f64::MAX;
        }
        if p == 0.0 && a != 0.0 && b != 0.0 {
            return if (a < 0.0) != (b < 0.0) { 0.0 } else { f64::MIN_POSITIVE };
        }
        return p;
    }
    let err = a.mul_add(b, -p);
    if err > 0.0 {
        p.next_up()
    } else {
        p
    }
}

pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q == 0.0 {
        if q == 0.0 && a != 0.0 && b.is_finite() {
            return if (a < 0.0) != (b < 0.0) { -f64::MIN_POSITIVE } else { 0.0 };
        }
        if q.is_infinite() && a.is_finite() && q > 0.0 {
            return f64::MAX;
        }
        return q;
    }
    // a - q*b has the sign of (exact - q) * sign(b)
    let r = (-q).mul_add(b, a);
    let exact_below = if b > 0.0 { r < 0.0 } else { r > 0.0 };
    if exact_below {
        q.next_down()
    } else {
        q
    }
}

pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q == 0.0 {
        if q == 0.0 && a != 0.0 && b.is_finite() {
            return if (a < 0.0) != (b < 0.0) { 0.0 } else { f64::MIN_POSITIVE };
        }
        if q.is_infinite() && a.is_finite() && q < 0.0 {
            return -f64::MAX;
        }
        return q;
    }
    let r = (-q).mul_add(b, a);
    let exact_above = if b > 0.0 { r > 0.0 } else { r < 0.0 };
    if exact_above {
        q.next_up()
    } else {
        q
    }
}

pub(crate) fn sqrt_down(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let r = a.sqrt();
    if !r.is_finite() {
        return r;
    }
    if r.mul_add(r, -a) > 0.0 {
        r.next_down()
    } else {
        r
    }
}

pub(crate) fn sqrt_up(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let r = a.sqrt();
    if !r.is_finite() {
        return r;
    }
    if r.mul_add(r, -a) < 0.0 {
        r.next_up()
    } else {
        r
    }
}

fn pow_down(a: f64, k: u32) -> f64 {
    // a >= 0 assumed
    let mut acc = 1.0;
    for _ in 0..k {
        acc = mul_down(acc, a);
    }
    acc
}

fn pow_up(a: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc = mul_up(acc, a);
    }
    acc
}

// Named methods rather than operator traits: rounding is outward and `div` is partial.
#[allow(clippy::should_implement_trait)]
impl Interval {
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const NONNEG: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    /// Builds `[lo, hi]`. Panics when the bounds are NaN or inverted.
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(
            !lo.is_nan() && !hi.is_nan() && lo <= hi,
            "invalid interval [{lo}, {hi}]"
        );
        Interval { lo, hi }
    }

    /// Builds `[lo, hi]`, returning `None` for an empty or NaN range.
    pub fn checked(lo: f64, hi: f64) -> Option<Interval> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            None
        } else {
            Some(Interval { lo, hi })
        }
    }

    pub fn point(x: f64) -> Interval {
        Interval::new(x, x)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        if self.lo == self.hi {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    /// Midpoint, finite whenever both bounds are finite.
    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let m = self.lo * 0.5 + self.hi * 0.5;
                m.clamp(self.lo, self.hi)
            }
            (false, true) => {
                if self.hi > 0.0 {
                    0.0
                } else {
                    -f64::MAX
                }
            }
            (true, false) => {
                if self.lo < 0.0 {
                    0.0
                } else {
                    f64::MAX
                }
            }
            (false, false) => 0.0,
        }
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::checked(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Splits at the midpoint into two halves sharing the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    /// Widens both bounds outward by `abs + rel * magnitude`.
    pub fn inflate(&self, abs: f64, rel: f64) -> Interval {
        let d = abs + rel * self.mag();
        Interval {
            lo: sub_down(self.lo, d),
            hi: add_up(self.hi, d),
        }
    }

    pub fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, o.lo),
            hi: add_up(self.hi, o.hi),
        }
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval {
            lo: sub_down(self.lo, o.hi),
            hi: sub_up(self.hi, o.lo),
        }
    }

    pub fn mul(self, o: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let lo = mul_down(a, c)
            .min(mul_down(a, d))
            .min(mul_down(b, c))
            .min(mul_down(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Interval { lo, hi }
    }

    pub fn scale(self, k: f64) -> Interval {
        self.mul(Interval::point(k))
    }

    /// Division. `None` only when dividing by the point zero; a divisor
    /// straddling zero yields the hull of the (possibly unbounded) image.
    pub fn div(self, o: Interval) -> Option<Interval> {
        if o.lo == 0.0 && o.hi == 0.0 {
            return None;
        }
        if o.lo > 0.0 || o.hi < 0.0 {
            let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
            let lo = div_down(a, c)
                .min(div_down(a, d))
                .min(div_down(b, c))
                .min(div_down(b, d));
            let hi = div_up(a, c)
                .max(div_up(a, d))
                .max(div_up(b, c))
                .max(div_up(b, d));
            return Some(Interval { lo, hi });
        }
        if self.lo == 0.0 && self.hi == 0.0 {
            return Some(Interval::ZERO);
        }
        if o.lo == 0.0 {
            // divisor in [0+, d]
            if self.lo >= 0.0 {
                return Some(Interval::new(div_down(self.lo, o.hi), f64::INFINITY));
            }
            if self.hi <= 0.0 {
                return Some(Interval::new(f64::NEG_INFINITY, div_up(self.hi, o.hi)));
            }
        } else if o.hi == 0.0 {
            // divisor in [c, 0-]
            if self.lo >= 0.0 {
                return Some(Interval::new(f64::NEG_INFINITY, div_up(self.lo, o.lo)));
            }
            if self.hi <= 0.0 {
                return Some(Interval::new(div_down(self.hi, o.lo), f64::INFINITY));
            }
        }
        Some(Interval::ENTIRE)
    }

    pub fn sqr(self) -> Interval {
        if self.lo >= 0.0 {
            Interval {
                lo: mul_down(self.lo, self.lo),
                hi: mul_up(self.hi, self.hi),
            }
        } else if self.hi <= 0.0 {
            Interval {
                lo: mul_down(self.hi, self.hi),
                hi: mul_up(self.lo, self.lo),
            }
        } else {
            let m = self.mag();
            Interval {
                lo: 0.0,
                hi: mul_up(m, m),
            }
        }
    }

    pub fn powi(self, k: u32) -> Interval {
        match k {
            0 => Interval::ONE,
            1 => self,
            2 => self.sqr(),
            _ if k.is_multiple_of(2) => {
                let a = Interval {
                    lo: if self.contains_zero() {
                        0.0
                    } else {
                        self.lo.abs().min(self.hi.abs())
                    },
                    hi: self.mag(),
                };
                Interval {
                    lo: pow_down(a.lo, k),
                    hi: pow_up(a.hi, k),
                }
            }
            _ => {
                // odd power is monotone increasing
                let lo = if self.lo >= 0.0 {
                    pow_down(self.lo, k)
                } else {
                    -pow_up(-self.lo, k)
                };
                let hi = if self.hi >= 0.0 {
                    pow_up(self.hi, k)
                } else {
                    -pow_down(-self.hi, k)
                };
                Interval { lo, hi }
            }
        }
    }

    /// Square root of the nonnegative part; `None` when entirely negative.
    pub fn sqrt(self) -> Option<Interval> {
        if self.hi < 0.0 {
            return None;
        }
        Some(Interval {
            lo: sqrt_down(self.lo.max(0.0)),
            hi: sqrt_up(self.hi),
        })
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval {
                lo: 0.0,
                hi: self.mag(),
            }
        }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}
