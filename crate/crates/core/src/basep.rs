//! Base-p digit arithmetic.
//!
//! Everything downstream reduces to digit sums and carry counts: Legendre's
//! formula for `ν_p(k!)`, Kummer's theorem for binomial coefficients, and the
//! segment decompositions used by the maximum-pole algorithm.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A validated prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub const TWO: Prime = Prime(2);

    pub fn new(p: u64) -> Result<Prime> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `p - 1`, the modulus that governs digit-sum congruences.
    #[inline]
    pub fn pm1(self) -> u64 {
        self.0 - 1
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Prime> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A p-adic valuation; `Infinite` is the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// Equality against a signed integer bound; `Infinite` never matches.
    pub fn equals(self, v: i64) -> bool {
        match self {
            Valuation::Finite(x) => v >= 0 && x == v as u64,
            Valuation::Infinite => false,
        }
    }

    /// `self >= v` for a signed bound.
    pub fn at_least(self, v: i64) -> bool {
        match self {
            Valuation::Finite(x) => v < 0 || x >= v as u64,
            Valuation::Infinite => true,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => v.fmt(f),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_u64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Valuation::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(Valuation::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad valuation {s:?}"))),
        }
    }
}

/// An integer together with its little-endian base-p digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasePExpansion {
    p: Prime,
    value: BigUint,
    digits: Vec<u32>,
}

impl BasePExpansion {
    pub fn new(value: BigUint, p: Prime) -> Self {
        let digits = value
            .to_radix_le(p.get() as u32)
            .into_iter()
            .map(u32::from)
            .collect::<Vec<_>>();
        // to_radix_le yields [0] for zero
        let digits = if value.is_zero() { Vec::new() } else { digits };
        BasePExpansion { p, value, digits }
    }

    pub fn from_u64(n: u64, p: Prime) -> Self {
        BasePExpansion {
            p,
            value: BigUint::from(n),
            digits: digits_u64(n, p),
        }
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn digit(&self, i: usize) -> u32 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().map(|&d| d as u64).sum()
    }

    /// Index of the lowest nonzero digit; `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.digits.iter().position(|&d| d != 0)
    }
}

/// Expand `n` in base `p`. Fails if `p` is not prime.
pub fn expand(n: u64, p: u64) -> Result<BasePExpansion> {
    Ok(BasePExpansion::from_u64(n, Prime::new(p)?))
}

pub fn digits_u64(mut n: u64, p: Prime) -> Vec<u32> {
    let p = p.get();
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % p) as u32);
        n /= p;
    }
    out
}

/// σ_p(n).
pub fn digit_sum(mut n: u64, p: Prime) -> u64 {
    let p = p.get();
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

/// ν_p(n) with ν_p(0) = ∞.
pub fn int_valuation(n: u64, p: Prime) -> Valuation {
    if n == 0 {
        return Valuation::Infinite;
    }
    Valuation::Finite(nonzero_valuation(n, p))
}

pub(crate) fn nonzero_valuation(mut n: u64, p: Prime) -> u64 {
    debug_assert!(n > 0);
    let p = p.get();
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn big_valuation(n: &BigUint, p: Prime) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigUint::from(p.get());
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        n = q;
        v += 1;
    }
}

/// Number of carries when adding `a` and `b` in base `p`.
pub fn carries(mut a: u64, mut b: u64, p: Prime) -> u64 {
    let p = p.get();
    let mut carry = 0;
    let mut count = 0;
    while a > 0 || b > 0 || carry > 0 {
        let s = a % p + b % p + carry;
        carry = u64::from(s >= p);
        count += carry;
        a /= p;
        b /= p;
    }
    count
}

/// ν_p(C(m, j)). Rejects `j > m` so callers handle the vanishing binomial.
pub fn binom_valuation(m: u64, j: u64, p: Prime) -> Result<u64> {
    if j > m {
        return Err(Error::domain(format!("C({m}, {j}) with {j} > {m}")));
    }
    Ok(carries(j, m - j, p))
}

/// ν_p of the generalized binomial C(s, d) = s(s−1)…(s−d+1)/d!.
///
/// For negative `s`, C(s, d) = (−1)^d C(d−s−1, d). For `0 <= s < d` it is zero.
pub fn gen_binom_valuation(s: i64, d: u64, p: Prime) -> Valuation {
    if s < 0 {
        let t = (-s - 1) as u64;
        Valuation::Finite(carries(d, t, p))
    } else {
        let s = s as u64;
        if d > s {
            Valuation::Infinite
        } else {
            Valuation::Finite(carries(d, s - d, p))
        }
    }
}

/// ν_p(k!) = (k − σ_p(k))/(p − 1).
pub fn factorial_valuation(k: u64, p: Prime) -> u64 {
    (k - digit_sum(k, p)) / p.pm1()
}

/// The least bottom segment of `n` with digit sum `target`, consuming digits
/// from position ν_p(n) upward and taking a partial count of the topmost
/// digit when needed. `None` if σ_p(n) < target.
pub fn bottom_segment_with_sum(n: u64, p: Prime, target: u64) -> Option<u64> {
    let pp = p.get();
    let mut rest = n;
    let mut place = 1u64;
    let mut acc = 0u64;
    let mut need = target;
    if need == 0 {
        return Some(0);
    }
    while rest > 0 {
        let d = rest % pp;
        let take = d.min(need);
        acc += take * place;
        need -= take;
        if need == 0 {
            return Some(acc);
        }
        rest /= pp;
        place = place.saturating_mul(pp);
    }
    None
}

/// k' with k ≡ k' (mod m) and 1 ≤ k' ≤ m.
pub fn least_positive_residue(k: u64, m: u64) -> u64 {
    assert!(m >= 1, "modulus must be positive");
    match k % m {
        0 => m,
        r => r,
    }
}

/// [n]: the powers of two in the binary expansion of `n`.
pub fn two_power_set(n: u64) -> BTreeSet<u64> {
    (0..64)
        .filter(|&i| n >> i & 1 == 1)
        .map(|i| 1u64 << i)
        .collect()
}

/// Exponent of the highest nonzero digit; `None` for zero.
pub fn top_exponent(n: u64, p: Prime) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut e = 0;
    let mut m = n / p.get();
    while m > 0 {
        m /= p.get();
        e += 1;
    }
    Some(e)
}

/// `true` iff `b` is a bottom segment of `n`: `b ≤ n`, every p-power of `b`
/// is at most every p-power of `n − b`, and the one shared power (if any)
/// has coefficients summing without carry.
pub fn is_bottom_segment(n: u64, b: u64, p: Prime) -> bool {
    if b > n {
        return false;
    }
    let t = n - b;
    if b == 0 || t == 0 {
        return true;
    }
    if carries(b, t, p) != 0 {
        return false;
    }
    let top_b = top_exponent(b, p).unwrap() as u64;
    let low_t = nonzero_valuation(t, p);
    top_b <= low_t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Bottom,
    Top,
    General,
}

/// A subsum of a base-p expansion. Only bottom segments and their
/// complementary top segments are constructed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    parent: BasePExpansion,
    value: u64,
    kind: SegmentKind,
    closed: bool,
}

impl Segment {
    /// Build the bottom segment `value` of `parent`, if it is one.
    pub fn bottom(parent: &BasePExpansion, value: u64) -> Option<Segment> {
        let n = parent.value().to_u64()?;
        let p = parent.p();
        if !is_bottom_segment(n, value, p) {
            return None;
        }
        let closed = closed_bottom(n, value, p);
        Some(Segment {
            parent: parent.clone(),
            value,
            kind: SegmentKind::Bottom,
            closed,
        })
    }

    /// The complementary top segment `n − B`.
    pub fn complement(&self) -> Segment {
        let n = self.parent.value().to_u64().expect("constructed from u64");
        let kind = match self.kind {
            SegmentKind::Bottom => SegmentKind::Top,
            SegmentKind::Top => SegmentKind::Bottom,
            SegmentKind::General => SegmentKind::General,
        };
        Segment {
            parent: self.parent.clone(),
            value: n - self.value,
            kind,
            closed: self.closed,
        }
    }

    pub fn parent(&self) -> &BasePExpansion {
        &self.parent
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

fn closed_bottom(n: u64, b: u64, p: Prime) -> bool {
    let mut modulus = 1u64;
    loop {
        let low = n % modulus;
        if low == b {
            return true;
        }
        if low > b || modulus > n {
            return false;
        }
        modulus = modulus.saturating_mul(p.get());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn expansions() {
        let e = expand(0, 3).unwrap();
        assert!(e.digits().is_empty());
        assert_eq!(e.digit_sum(), 0);
        let e = expand(10, 3).unwrap();
        assert_eq!(e.digits(), &[1, 0, 1]);
        assert_eq!(e.digit_sum(), 2);
        let e = expand(17, 3).unwrap();
        assert_eq!(e.digits(), &[2, 2, 1]);
        assert_eq!(e.digit_sum(), 5);
        assert_eq!(expand(10, 4), Err(Error::NotPrime(4)));
        assert_eq!(expand(10, 1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn big_expansion_matches_u64() {
        for n in [0u64, 1, 2, 241, 4131, 28750, u64::MAX] {
            for q in [2, 3, 5, 7] {
                let a = BasePExpansion::new(BigUint::from(n), p(q));
                let b = BasePExpansion::from_u64(n, p(q));
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn digit_sums() {
        assert_eq!(digit_sum(7, p(2)), 3);
        assert_eq!(digit_sum(241, p(3)), 9);
        assert_eq!(digit_sum(622, p(5)), 14);
    }

    #[test]
    fn valuations() {
        assert_eq!(int_valuation(12, p(2)), Valuation::Finite(2));
        assert_eq!(int_valuation(0, p(5)), Valuation::Infinite);
        assert_eq!(int_valuation(322, p(2)), Valuation::Finite(1));
        assert_eq!(
            big_valuation(&BigUint::from(322u32), p(2)),
            Valuation::Finite(1)
        );
        assert!(Valuation::Finite(1_000_000) < Valuation::Infinite);
    }

    #[test]
    fn carry_counts() {
        assert_eq!(carries(2, 2, p(2)), 1);
        assert_eq!(carries(3, 3, p(3)), 0);
        assert_eq!(carries(30, 29, p(2)), 3);
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_valuation(59, 30, p(2)), Ok(3));
        assert_eq!(binom_valuation(17, 0, p(3)), Ok(0));
        assert_eq!(binom_valuation(9, 3, p(2)), Ok(2));
        assert!(binom_valuation(3, 4, p(2)).is_err());
    }

    #[test]
    fn generalized_binomials() {
        // C(-6, 2) = 21
        assert_eq!(gen_binom_valuation(-6, 2, p(3)), Valuation::Finite(1));
        assert_eq!(gen_binom_valuation(-6, 2, p(7)), Valuation::Finite(1));
        assert_eq!(gen_binom_valuation(3, 5, p(2)), Valuation::Infinite);
        assert_eq!(gen_binom_valuation(4, 2, p(2)), Valuation::Finite(1));
    }

    #[test]
    fn bottom_segments() {
        assert_eq!(bottom_segment_with_sum(4131, p(3), 1), Some(243));
        assert_eq!(bottom_segment_with_sum(28750, p(5), 2), Some(3750));
        assert_eq!(bottom_segment_with_sum(8, p(2), 2), None);
        assert!(is_bottom_segment(2900, 400, p(5)));
        assert!(!is_bottom_segment(2900, 500, p(5)));
        assert!(is_bottom_segment(4131, 243, p(3)));
    }

    #[test]
    fn segment_type() {
        let n = BasePExpansion::from_u64(4131, p(3));
        let b = Segment::bottom(&n, 243).unwrap();
        assert_eq!(b.kind(), SegmentKind::Bottom);
        assert!(!b.is_closed());
        let t = b.complement();
        assert_eq!(t.kind(), SegmentKind::Top);
        assert_eq!(t.value(), 4131 - 243);
        let b = Segment::bottom(&BasePExpansion::from_u64(2900, p(5)), 400).unwrap();
        assert!(b.is_closed());
        assert!(Segment::bottom(&n, 244).is_none());
    }

    #[test]
    fn residues() {
        assert_eq!(least_positive_residue(241, 2), 1);
        assert_eq!(least_positive_residue(622, 4), 2);
        assert_eq!(least_positive_residue(4, 4), 4);
    }

    #[test]
    fn two_powers() {
        assert!(two_power_set(0).is_empty());
        assert_eq!(two_power_set(6), BTreeSet::from([2, 4]));
        let i: BTreeSet<_> = two_power_set(12)
            .intersection(&two_power_set(10))
            .copied()
            .collect();
        assert_eq!(i, BTreeSet::from([8]));
    }

    #[test]
    fn valuation_serde() {
        let v = serde_json::to_string(&[Valuation::Finite(3), Valuation::Infinite]).unwrap();
        assert_eq!(v, r#"[3,"inf"]"#);
        let back: Vec<Valuation> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![Valuation::Finite(3), Valuation::Infinite]);
    }
}
