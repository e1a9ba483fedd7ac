//! Exact rational angles on the circle `R/Z` and the d-tupling map.
//!
//! An [`Angle`] is a reduced fraction `num/den` with `0 <= num < den`,
//! stored in arbitrary precision. All circle combinatorics downstream
//! (laminations, gaps, chains) reduce to exact comparisons of these
//! fractions, so no floating point ever touches the circle.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Default cap on support enumeration size.
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AngleError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid angle literal `{0}`")]
    Parse(String),
    #[error("degenerate chord test: angles {0} and {1} coincide")]
    DegenerateChord(Angle, Angle),
    #[error("support for d={d} P={max_period} Q={max_preperiod} exceeds cap of {cap} angles")]
    SupportTooLarge {
        d: u32,
        max_period: u32,
        max_preperiod: u32,
        cap: usize,
    },
    #[error("degree must be at least 2, got {0}")]
    BadDegree(u32),
    #[error("period bound must be at least 1")]
    BadPeriodBound,
}

/// A rational point of `R/Z`, reduced with `0 <= num < den`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Angle {
    num: BigUint,
    den: BigUint,
}

impl Angle {
    /// Builds `num/den` reduced mod 1. Negative numerators wrap around.
    pub fn new(num: i64, den: u64) -> Result<Self, AngleError> {
        if den == 0 {
            return Err(AngleError::ZeroDenominator);
        }
        let d = BigUint::from(den);
        let n = if num >= 0 {
            BigUint::from(num as u64) % &d
        } else {
            // num mod den for negative num
            let m = BigUint::from(num.unsigned_abs()) % &d;
            if m.is_zero() {
                m
            } else {
                &d - m
            }
        };
        Ok(Self::reduced(n, d))
    }

    /// Builds from big integers; `den` must be nonzero.
    pub fn from_big(num: BigUint, den: BigUint) -> Result<Self, AngleError> {
        if den.is_zero() {
            return Err(AngleError::ZeroDenominator);
        }
        let n = num % &den;
        Ok(Self::reduced(n, den))
    }

    fn reduced(num: BigUint, den: BigUint) -> Self {
        let g = num.gcd(&den);
        if g.is_one() {
            Angle { num, den }
        } else {
            Angle {
                num: num / &g,
                den: den / g,
            }
        }
    }

    pub fn zero() -> Self {
        Angle {
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn denominator(&self) -> &BigUint {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The image `d·a mod 1` under the d-tupling map.
    pub fn sigma(&self, d: u32) -> Self {
        let n = &self.num * BigUint::from(d);
        Self::reduced(n % &self.den, self.den.clone())
    }

    /// Applies `sigma` `k` times.
    pub fn sigma_iter(&self, d: u32, k: u32) -> Self {
        let mut a = self.clone();
        for _ in 0..k {
            a = a.sigma(d);
        }
        a
    }

    /// Minimal preperiod and period under the d-tupling map, with the orbit
    /// listed in iteration order.
    ///
    /// The preperiod and period come from the arithmetic of the denominator:
    /// strip the part of `den` sharing factors with `d` (one division per
    /// step gives the preperiod), then the period is the multiplicative
    /// order of `d` modulo the coprime remainder.
    pub fn orbit_info(&self, d: u32) -> OrbitInfo {
        let big_d = BigUint::from(d);
        let mut t = self.den.clone();
        let mut preperiod = 0u32;
        loop {
            let g = t.gcd(&big_d);
            if g.is_one() {
                break;
            }
            t /= g;
            preperiod += 1;
        }
        let period = multiplicative_order(&big_d, &t);
        let mut orbit = Vec::with_capacity((preperiod + period) as usize);
        let mut a = self.clone();
        for _ in 0..preperiod + period {
            orbit.push(a.clone());
            a = a.sigma(d);
        }
        OrbitInfo {
            preperiod,
            period,
            orbit,
        }
    }

    /// The `d` preimages of this angle under the d-tupling map, sorted.
    pub fn preimages(&self, d: u32) -> Vec<Angle> {
        let den = &self.den * BigUint::from(d);
        (0..d)
            .map(|j| {
                let num = &self.num + &self.den * BigUint::from(j);
                Self::reduced(num, den.clone())
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    fn approx(&self) -> f64 {
        // Only used for Display-free diagnostics and float seeding; never
        // for circle combinatorics.
        ratio_to_f64(&self.num, &self.den)
    }

    /// Angle as `f64` in `[0, 1)`.
    pub fn to_f64(&self) -> f64 {
        self.approx()
    }
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    // Scale down to keep within f64 range for huge denominators.
    let bits = den.bits().max(num.bits());
    if bits <= 52 {
        let n: u64 = num.try_into().unwrap_or(u64::MAX);
        let d: u64 = den.try_into().unwrap_or(u64::MAX);
        n as f64 / d as f64
    } else {
        let shift = bits - 52;
        let n: u64 = (num >> shift).try_into().unwrap_or(u64::MAX);
        let d: u64 = (den >> shift).try_into().unwrap_or(u64::MAX);
        if d == 0 {
            0.0
        } else {
            n as f64 / d as f64
        }
    }
}

/// Multiplicative order of `a` modulo `m` for `gcd(a, m) = 1`; 1 when `m <= 1`.
fn multiplicative_order(a: &BigUint, m: &BigUint) -> u32 {
    if m <= &BigUint::one() {
        return 1;
    }
    let a = a % m;
    let mut acc = a.clone();
    let mut order = 1u32;
    while !acc.is_one() {
        acc = acc * &a % m;
        order += 1;
    }
    order
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Angle {
    type Err = AngleError;

    /// Parses `num/den`; a bare integer is taken mod 1 (so `"0"` is `0/1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || AngleError::Parse(String::from(s));
        match s.split_once('/') {
            Some((n, d)) => {
                let num = BigUint::from_str(n.trim()).map_err(|_| bad())?;
                let den = BigUint::from_str(d.trim()).map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(AngleError::ZeroDenominator);
                }
                Angle::from_big(num, den)
            }
            None => {
                let _num = BigUint::from_str(s).map_err(|_| bad())?;
                Ok(Angle::zero())
            }
        }
    }
}

/// Orbit data of an angle under d-tupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitInfo {
    pub preperiod: u32,
    pub period: u32,
    /// The `preperiod + period` distinct angles, in iteration order.
    pub orbit: Vec<Angle>,
}

/// Truncation of the rational circle: all angles whose d-tupling orbit has
/// period at most `max_period` and preperiod at most `max_preperiod`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportSpec {
    pub d: u32,
    pub max_period: u32,
    pub max_preperiod: u32,
}

impl SupportSpec {
    pub fn new(d: u32, max_period: u32, max_preperiod: u32) -> Result<Self, AngleError> {
        if d < 2 {
            return Err(AngleError::BadDegree(d));
        }
        if max_period < 1 {
            return Err(AngleError::BadPeriodBound);
        }
        Ok(SupportSpec {
            d,
            max_period,
            max_preperiod,
        })
    }

    /// Same truncation with the period bound raised by one.
    pub fn bump_period(&self) -> SupportSpec {
        SupportSpec {
            d: self.d,
            max_period: self.max_period + 1,
            max_preperiod: self.max_preperiod,
        }
    }

    pub fn contains(&self, a: &Angle) -> bool {
        let info = a.orbit_info(self.d);
        info.period <= self.max_period && info.preperiod <= self.max_preperiod
    }

    /// Enumerates the support, sorted and duplicate-free.
    ///
    /// Every angle with period `p` and preperiod `q` has denominator dividing
    /// `d^q (d^p - 1)`, and conversely every fraction with such a denominator
    /// obeys the bounds, so iterating `k / (d^Q (d^p - 1))` over `p <= P` is
    /// exhaustive.
    pub fn enumerate(&self) -> Result<Vec<Angle>, AngleError> {
        self.enumerate_capped(DEFAULT_SUPPORT_CAP)
    }

    pub fn enumerate_capped(&self, cap: usize) -> Result<Vec<Angle>, AngleError> {
        let too_large = AngleError::SupportTooLarge {
            d: self.d,
            max_period: self.max_period,
            max_preperiod: self.max_preperiod,
            cap,
        };
        let d = BigUint::from(self.d);
        let dq = d.pow(self.max_preperiod);
        let mut set: BTreeSet<Angle> = BTreeSet::new();
        let mut dp = BigUint::one();
        for _ in 0..self.max_period {
            dp *= &d;
            let den = &dq * (&dp - BigUint::one());
            // All of k/den, 0 <= k < den, are distinct angles, so a single
            // pass with den > cap already overflows.
            if den > BigUint::from(cap) {
                return Err(too_large);
            }
            let mut num = BigUint::zero();
            while num < den {
                set.insert(Angle::reduced(num.clone(), den.clone()));
                if set.len() > cap {
                    return Err(too_large);
                }
                num += BigUint::one();
            }
        }
        if set.is_empty() {
            set.insert(Angle::zero());
        }
        Ok(set.into_iter().collect())
    }
}

/// True iff the chords `{a, b}` and `{c, e}` cross inside the disk.
///
/// Exactly one of `c`, `e` must lie strictly inside the open cyclic arc
/// `(a, b)`. Shared endpoints are rejected.
pub fn chords_cross(a: &Angle, b: &Angle, c: &Angle, e: &Angle) -> Result<bool, AngleError> {
    if a == b {
        return Err(AngleError::DegenerateChord(a.clone(), b.clone()));
    }
    if c == e {
        return Err(AngleError::DegenerateChord(c.clone(), e.clone()));
    }
    for (x, y) in [(a, c), (a, e), (b, c), (b, e)] {
        if x == y {
            return Err(AngleError::DegenerateChord(x.clone(), y.clone()));
        }
    }
    Ok(in_open_arc(a, b, c) != in_open_arc(a, b, e))
}

/// True iff `x` lies strictly inside the arc swept counterclockwise from
/// `a` to `b`.
pub fn in_open_arc(a: &Angle, b: &Angle, x: &Angle) -> bool {
    if a < b {
        a < x && x < b
    } else {
        // arc wraps through 0
        x > a || x < b
    }
}

/// A fast membership index over a sorted support.
#[derive(Debug, Clone)]
pub struct SupportIndex {
    angles: Vec<Angle>,
    index: BTreeMap<Angle, u32>,
}

impl SupportIndex {
    pub fn new(angles: Vec<Angle>) -> Self {
        let index = angles
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as u32))
            .collect();
        SupportIndex { angles, index }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn angle(&self, id: u32) -> &Angle {
        &self.angles[id as usize]
    }

    pub fn position(&self, a: &Angle) -> Option<u32> {
        self.index.get(a).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;

    fn ang(n: i64, d: u64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    #[test]
    fn reduction_and_wraparound() {
        assert_eq!(ang(2, 6), ang(1, 3));
        assert_eq!(ang(7, 3), ang(1, 3));
        assert_eq!(ang(0, 5), Angle::zero());
        assert_eq!(ang(-1, 3), ang(2, 3));
        assert_eq!(Angle::new(1, 0), Err(AngleError::ZeroDenominator));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(ang(1, 3).sigma(2), ang(2, 3));
        assert_eq!(ang(2, 3).sigma(2), ang(1, 3));
        assert_eq!(ang(5, 8).sigma(3), ang(7, 8));
        assert_eq!(ang(1, 6).sigma(2), ang(1, 3));
    }

    #[test]
    fn orbit_examples() {
        let info = ang(1, 7).orbit_info(2);
        assert_eq!(info.preperiod, 0);
        assert_eq!(info.period, 3);
        assert_eq!(info.orbit, alloc::vec![ang(1, 7), ang(2, 7), ang(4, 7)]);

        let info = ang(1, 6).orbit_info(2);
        assert_eq!(info.preperiod, 1);
        assert_eq!(info.period, 2);
        assert_eq!(info.orbit, alloc::vec![ang(1, 6), ang(1, 3), ang(2, 3)]);

        let info = Angle::zero().orbit_info(2);
        assert_eq!((info.preperiod, info.period), (0, 1));
    }

    #[test]
    fn chord_crossing_examples() {
        let c = |a: (i64, u64), b: (i64, u64), x: (i64, u64), y: (i64, u64)| {
            chords_cross(&ang(a.0, a.1), &ang(b.0, b.1), &ang(x.0, x.1), &ang(y.0, y.1)).unwrap()
        };
        assert!(c((0, 1), (1, 2), (1, 4), (3, 4)));
        assert!(!c((0, 1), (1, 4), (1, 2), (3, 4)));
        assert!(!c((1, 7), (2, 7), (9, 14), (11, 14)));
        assert!(chords_cross(&ang(0, 1), &ang(1, 2), &ang(0, 1), &ang(3, 4)).is_err());
    }

    #[test]
    fn support_examples() {
        let sup = |d, p, q| {
            SupportSpec::new(d, p, q)
                .unwrap()
                .enumerate()
                .unwrap()
        };
        assert_eq!(sup(2, 1, 0), alloc::vec![Angle::zero()]);
        assert_eq!(sup(2, 2, 0), alloc::vec![Angle::zero(), ang(1, 3), ang(2, 3)]);
        assert_eq!(sup(3, 1, 0), alloc::vec![Angle::zero(), ang(1, 2)]);
    }

    #[test]
    fn support_is_sigma_closed_and_bounded() {
        for (d, p, q) in [(2u32, 5u32, 2u32), (3, 3, 1), (4, 2, 2)] {
            let spec = SupportSpec::new(d, p, q).unwrap();
            let support = spec.enumerate().unwrap();
            let idx = SupportIndex::new(support.clone());
            for a in &support {
                assert!(idx.position(&a.sigma(d)).is_some(), "sigma image escaped");
                let info = a.orbit_info(d);
                assert!(info.period <= p && info.preperiod <= q);
            }
            // sorted, duplicate-free
            for w in support.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn support_cap_rejects() {
        let spec = SupportSpec::new(2, 12, 4).unwrap();
        assert!(matches!(
            spec.enumerate_capped(1000),
            Err(AngleError::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn serialization_round_trip() {
        let a = ang(3, 7);
        assert_eq!(a.to_string(), "3/7");
        assert_eq!("3/7".parse::<Angle>().unwrap(), a);
        assert_eq!("0".parse::<Angle>().unwrap(), Angle::zero());
        assert_eq!("0/1".parse::<Angle>().unwrap(), Angle::zero());
        assert_eq!(format!("{}", Angle::zero()), "0/1");
        assert!("1/0".parse::<Angle>().is_err());
        assert!("x/3".parse::<Angle>().is_err());
    }

    #[test]
    fn preimages_are_exact() {
        let a = ang(1, 3);
        let pre = a.preimages(2);
        assert_eq!(pre, alloc::vec![ang(1, 6), ang(2, 3)]);
        for p in &pre {
            assert_eq!(p.sigma(2), a);
        }
    }
}
