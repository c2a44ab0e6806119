//! Variable domains: finite integer sets and real intervals.

use super::interval::Interval;

/// A set of integers.
///
/// Sets whose span fits in 128 values are stored as a bit mask relative to
/// a base value; wider sets fall back to a sorted vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteSet {
    Mask { base: i64, bits: u128 },
    Sorted(Vec<i64>),
}

impl FiniteSet {
    /// `{lo, lo+1, ..., hi}`; empty when `lo > hi`.
    pub fn range(lo: i64, hi: i64) -> FiniteSet {
        if lo > hi {
            return FiniteSet::Mask { base: 0, bits: 0 };
        }
        let span = (hi as i128 - lo as i128 + 1) as u128;
        if span <= 128 {
            let bits = if span == 128 {
                u128::MAX
            } else {
                (1u128 << span) - 1
            };
            FiniteSet::Mask { base: lo, bits }
        } else {
            FiniteSet::Sorted((lo..=hi).collect())
        }
    }

    pub fn from_values(values: &[i64]) -> FiniteSet {
        let mut v = values.to_vec();
        v.sort_unstable();
        v.dedup();
        match (v.first(), v.last()) {
            (Some(&lo), Some(&hi)) if (hi as i128 - lo as i128) < 128 => {
                let mut bits = 0u128;
                for x in &v {
                    bits |= 1u128 << (x - lo);
                }
                FiniteSet::Mask { base: lo, bits }
            }
            (None, _) => FiniteSet::Mask { base: 0, bits: 0 },
            _ => FiniteSet::Sorted(v),
        }
    }

    pub fn singleton(v: i64) -> FiniteSet {
        FiniteSet::Mask { base: v, bits: 1 }
    }

    pub fn len(&self) -> usize {
        match self {
            FiniteSet::Mask { bits, .. } => bits.count_ones() as usize,
            FiniteSet::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min(&self) -> Option<i64> {
        match self {
            FiniteSet::Mask { base, bits } => {
                (*bits != 0).then(|| base + bits.trailing_zeros() as i64)
            }
            FiniteSet::Sorted(v) => v.first().copied(),
        }
    }

    pub fn max(&self) -> Option<i64> {
        match self {
            FiniteSet::Mask { base, bits } => {
                (*bits != 0).then(|| base + 127 - bits.leading_zeros() as i64)
            }
            FiniteSet::Sorted(v) => v.last().copied(),
        }
    }

    pub fn value(&self) -> Option<i64> {
        if self.len() == 1 {
            self.min()
        } else {
            None
        }
    }

    pub fn contains(&self, x: i64) -> bool {
        match self {
            FiniteSet::Mask { base, bits } => {
                let off = x as i128 - *base as i128;
                (0..128).contains(&off) && bits & (1u128 << off) != 0
            }
            FiniteSet::Sorted(v) => v.binary_search(&x).is_ok(),
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = i64> + '_> {
        match self {
            FiniteSet::Mask { base, bits } => {
                let base = *base;
                let mut rest = *bits;
                Box::new(std::iter::from_fn(move || {
                    if rest == 0 {
                        return None;
                    }
                    let tz = rest.trailing_zeros();
                    rest &= rest - 1;
                    Some(base + tz as i64)
                }))
            }
            FiniteSet::Sorted(v) => Box::new(v.iter().copied()),
        }
    }

    /// Removes `x`; returns whether the set changed.
    pub fn remove(&mut self, x: i64) -> bool {
        match self {
            FiniteSet::Mask { base, bits } => {
                let off = x as i128 - *base as i128;
                if (0..128).contains(&off) && *bits & (1u128 << off) != 0 {
                    *bits &= !(1u128 << off);
                    true
                } else {
                    false
                }
            }
            FiniteSet::Sorted(v) => match v.binary_search(&x) {
                Ok(i) => {
                    v.remove(i);
                    true
                }
                Err(_) => false,
            },
        }
    }

    /// Keeps only values in `[lo, hi]`; returns whether the set changed.
    pub fn restrict(&mut self, lo: i64, hi: i64) -> bool {
        match self {
            FiniteSet::Mask { base, bits } => {
                let before = *bits;
                let lo_off = lo as i128 - *base as i128;
                let hi_off = hi as i128 - *base as i128;
                if hi_off < 0 || lo_off > 127 || lo_off > hi_off {
                    *bits = 0;
                } else {
                    let l = lo_off.max(0) as u32;
                    let h = hi_off.min(127) as u32;
                    let width = h - l + 1;
                    let window = if width == 128 {
                        u128::MAX
                    } else {
                        ((1u128 << width) - 1) << l
                    };
                    *bits &= window;
                }
                *bits != before
            }
            FiniteSet::Sorted(v) => {
                let n = v.len();
                v.retain(|&x| lo <= x && x <= hi);
                v.len() != n
            }
        }
    }

    /// Reduces to `{x}` if present, otherwise empties; returns whether changed.
    pub fn assign(&mut self, x: i64) -> bool {
        let had = self.contains(x);
        let changed = !(had && self.len() == 1);
        *self = if had {
            FiniteSet::singleton(x)
        } else {
            FiniteSet::Mask { base: 0, bits: 0 }
        };
        changed
    }
}

/// The domain of one variable.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Finite(FiniteSet),
    Real(Interval),
}

impl Domain {
    /// Interval hull; `None` for an empty finite set.
    pub fn hull(&self) -> Option<Interval> {
        match self {
            Domain::Finite(s) => Some(Interval::new(s.min()? as f64, s.max()? as f64)),
            Domain::Real(iv) => Some(*iv),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Domain::Finite(_))
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Domain::Finite(s) => s.is_empty(),
            Domain::Real(_) => false,
        }
    }

    /// True when `other` is contained in `self`.
    pub fn contains_domain(&self, other: &Domain) -> bool {
        match (self, other) {
            (Domain::Finite(a), Domain::Finite(b)) => b.iter().all(|x| a.contains(x)),
            (Domain::Real(a), Domain::Real(b)) => b.subset_of(a),
            _ => false,
        }
    }
}
