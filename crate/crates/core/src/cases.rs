//! The four lower estimates for `ν_p` of Stirling numbers and the criteria
//! deciding when each is sharp.
//!
//! With `N = n - k` and `r = N / (p - 1)`:
//!
//! | estimate | second kind                       | first kind                         |
//! |----------|-----------------------------------|------------------------------------|
//! | MZ       | (σ(k) − σ(n))/(p−1)               | (σ(k−1) − σ(n−1))/(p−1)            |
//! | SMZ      | (σ(k−1) − σ(n−1))/(p−1)           | (σ(k) − σ(n))/(p−1)                |
//! | AMZ      | ν(C(n,k)) − M,  M of B_N^{(−k)}   | ν(C(n−1,k−1)) − M,  M of B_N^{(n)}  |
//! | SAMZ     | ν(C(n−1,k−1)) − M', B_N^{(−k+1)}  | ν(C(n,k)) − M',  M' of B_N^{(n+1)}  |
//!
//! A "case" is an estimate that equals the true valuation.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::basep::{binom_valuation, carries, digit_sum, int_valuation, Prime, Valuation};
use crate::error::{Error, Result};
use crate::poles::max_pole;
use crate::stirling::{stirling_valuation, StirlingKind};

/// An exact fraction in lowest terms with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = num.unsigned_abs().gcd(&den).max(1);
        Fraction {
            num: num / g as i64,
            den: den / g,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn ceil(&self) -> i64 {
        Integer::div_ceil(&self.num, &(self.den as i64))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Outcome of a case criterion. `Inapplicable` means a hypothesis of the
/// criterion fails, which is different from the criterion failing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Holds,
    Fails,
    Inapplicable,
}

impl Criterion {
    fn from_bool(b: bool) -> Self {
        if b {
            Criterion::Holds
        } else {
            Criterion::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Criterion::Holds
    }

    /// `Some(bool)` when applicable.
    pub fn decided(self) -> Option<bool> {
        match self {
            Criterion::Holds => Some(true),
            Criterion::Fails => Some(false),
            Criterion::Inapplicable => None,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Holds => "holds",
            Criterion::Fails => "fails",
            Criterion::Inapplicable => "inapplicable",
        })
    }
}

/// The four lower bounds. `mz` and `smz` are ceilings of the exact
/// fractions kept in `mz_raw` and `smz_raw`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub mz: i64,
    pub smz: i64,
    pub amz: i64,
    pub samz: i64,
    pub mz_raw: Fraction,
    pub smz_raw: Fraction,
    /// Maximum pole behind `amz`.
    pub m: u64,
    /// Maximum pole behind `samz`.
    pub m_shifted: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFlags {
    pub mzc: bool,
    pub smzc: bool,
    pub amzc: bool,
    pub samzc: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionFlags {
    pub mzc: Criterion,
    pub smzc: Criterion,
    pub amzc: Criterion,
    pub samzc: Criterion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub n: u64,
    pub k: u64,
    pub p: Prime,
    pub kind: StirlingKind,
    pub r: Option<u64>,
    pub estimates: EstimateSet,
    pub actual: Valuation,
    /// Sharpness read off the oracle.
    pub flags: CaseFlags,
    /// Sharpness decided by the criteria alone.
    pub criteria: CriterionFlags,
    /// Every applicable criterion matches the oracle.
    pub agree: bool,
}

fn check_range(n: u64, k: u64) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::domain(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )))
    } else {
        Ok(())
    }
}

fn r_of(n: u64, k: u64, p: Prime) -> Option<u64> {
    let d = n - k;
    (d % p.pm1() == 0).then(|| d / p.pm1())
}

fn sigma_diff(a: u64, b: u64, p: Prime) -> Fraction {
    Fraction::new(digit_sum(a, p) as i64 - digit_sum(b, p) as i64, p.pm1())
}

fn bv(m: u64, j: u64, p: Prime) -> i64 {
    binom_valuation(m, j, p).expect("j <= m") as i64
}

/// ν_p(C(m, j)) with `Infinite` for a vanishing binomial (j < 0 or j > m).
fn bv_or_inf(m: u64, j: i64, p: Prime) -> Valuation {
    if j < 0 || j as u64 > m {
        Valuation::Infinite
    } else {
        Valuation::Finite(carries(j as u64, m - j as u64, p))
    }
}

pub fn estimates_second(n: u64, k: u64, p: Prime) -> Result<EstimateSet> {
    check_range(n, k)?;
    let big_n = n - k;
    let m = max_pole(big_n, -(k as i64), p);
    let m_shifted = max_pole(big_n, -(k as i64) + 1, p);
    let mz_raw = sigma_diff(k, n, p);
    let smz_raw = sigma_diff(k - 1, n - 1, p);
    Ok(EstimateSet {
        mz: mz_raw.ceil(),
        smz: smz_raw.ceil(),
        amz: bv(n, k, p) - m as i64,
        samz: bv(n - 1, k - 1, p) - m_shifted as i64,
        mz_raw,
        smz_raw,
        m,
        m_shifted,
    })
}

pub fn estimates_first(n: u64, k: u64, p: Prime) -> Result<EstimateSet> {
    check_range(n, k)?;
    let big_n = n - k;
    let m = max_pole(big_n, n as i64, p);
    let m_shifted = max_pole(big_n, n as i64 + 1, p);
    let mz_raw = sigma_diff(k - 1, n - 1, p);
    let smz_raw = sigma_diff(k, n, p);
    Ok(EstimateSet {
        mz: mz_raw.ceil(),
        smz: smz_raw.ceil(),
        amz: bv(n - 1, k - 1, p) - m as i64,
        samz: bv(n, k, p) - m_shifted as i64,
        mz_raw,
        smz_raw,
        m,
        m_shifted,
    })
}

pub fn estimates(n: u64, k: u64, p: Prime, kind: StirlingKind) -> Result<EstimateSet> {
    match kind {
        StirlingKind::First => estimates_first(n, k, p),
        StirlingKind::Second => estimates_second(n, k, p),
    }
}

/// S(n,k) is a minimum zero case: `p - 1 | n - k` and `p ∤ C(n + r, r)`.
pub fn is_mzc_second(n: u64, k: u64, p: Prime) -> bool {
    k <= n && r_of(n, k, p).is_some_and(|r| carries(r, n, p) == 0)
}

/// S(n,k) is a shifted minimum zero case: `p ∤ C(n - 1 + r, r)`.
pub fn is_smzc_second(n: u64, k: u64, p: Prime) -> bool {
    1 <= k && k <= n && r_of(n, k, p).is_some_and(|r| carries(r, n - 1, p) == 0)
}

fn nu_le(a: u64, b: u64, p: Prime) -> bool {
    int_valuation(a, p) <= int_valuation(b, p)
}

/// Almost minimum zero criterion for S(n, k). Needs `p - 1 | n - k` and
/// `ν_p(k) <= ν_p(n)`.
pub fn amzc_criterion_second(n: u64, k: u64, p: Prime) -> Criterion {
    if k == 0 || k > n {
        return Criterion::Inapplicable;
    }
    let Some(r) = r_of(n, k, p) else {
        return Criterion::Inapplicable;
    };
    if !nu_le(k, n, p) {
        return Criterion::Inapplicable;
    }
    let big_n = n - k;
    let m = max_pole(big_n, -(k as i64), p) as i64;
    Criterion::from_bool(canonical_test_second(n, big_n, r, m, p))
}

/// Shifted almost minimum zero criterion for S(n, k), tested on the weight
/// `n - k` partitions only.
pub fn samzc_criterion_second(n: u64, k: u64, p: Prime) -> Criterion {
    if k == 0 || k > n {
        return Criterion::Inapplicable;
    }
    let Some(r) = r_of(n, k, p) else {
        return Criterion::Inapplicable;
    };
    let big_n = n - k;
    let m = max_pole(big_n, -(k as i64) + 1, p) as i64;
    Criterion::from_bool(canonical_test_second(n - 1, big_n, r, m, p))
}

/// The canonical-partition test with top `t` (`n` or `n - 1`):
/// odd p: ν(C(t + r, r)) = σ(N)/(p−1) − M;
/// p = 2: exactly one of ν(C(t + N, t)) = σ(N) − M and
/// (N odd, ν(C(t + N − 2, t)) = σ(N) − M − 1).
fn canonical_test_second(t: u64, big_n: u64, r: u64, m: i64, p: Prime) -> bool {
    let sig = digit_sum(big_n, p) as i64;
    if p.get() == 2 {
        let a = bv(t + big_n, t, p) == sig - m;
        let b = big_n % 2 == 1 && big_n >= 2 && bv(t + big_n - 2, t, p) == sig - m - 1;
        a ^ b
    } else {
        bv(t + r, r, p) == sig / p.pm1() as i64 - m
    }
}

/// s(n,k) is a minimum zero case: `p ∤ C(k - 1, r)`.
pub fn is_mzc_first(n: u64, k: u64, p: Prime) -> bool {
    1 <= k
        && k <= n
        && r_of(n, k, p).is_some_and(|r| bv_or_inf(k - 1, r as i64, p) == Valuation::Finite(0))
}

/// s(n,k) is a shifted minimum zero case: `p ∤ C(k, r)`.
pub fn is_smzc_first(n: u64, k: u64, p: Prime) -> bool {
    1 <= k
        && k <= n
        && r_of(n, k, p).is_some_and(|r| bv_or_inf(k, r as i64, p) == Valuation::Finite(0))
}

/// Almost minimum zero criterion for s(n, k). For odd p it needs
/// `ν_p(n) <= ν_p(k)`; for p = 2 all three canonical partitions are tested.
pub fn amzc_criterion_first(n: u64, k: u64, p: Prime) -> Criterion {
    if k == 0 || k > n {
        return Criterion::Inapplicable;
    }
    let Some(r) = r_of(n, k, p) else {
        return Criterion::Inapplicable;
    };
    let big_n = n - k;
    let m = max_pole(big_n, n as i64, p) as i64;
    let sig = digit_sum(big_n, p) as i64;
    let eq = |j: i64, target: i64| bv_or_inf(k - 1, j, p).equals(target);
    if p.get() == 2 {
        let n = big_n as i64;
        let a = eq(n, sig - m);
        let b = eq(n - 1, sig - m - 1);
        let c = big_n % 2 == 1 && eq(n - 2, sig - m - 1);
        Criterion::from_bool(a as u8 + b as u8 + c as u8 == 1)
    } else {
        if !nu_le(n, k, p) {
            return Criterion::Inapplicable;
        }
        Criterion::from_bool(eq(r as i64, sig / p.pm1() as i64 - m))
    }
}

/// Shifted almost minimum zero criterion for s(n, k).
pub fn samzc_criterion_first(n: u64, k: u64, p: Prime) -> Criterion {
    if k == 0 || k > n {
        return Criterion::Inapplicable;
    }
    let Some(r) = r_of(n, k, p) else {
        return Criterion::Inapplicable;
    };
    let big_n = n - k;
    let m = max_pole(big_n, n as i64 + 1, p) as i64;
    let sig = digit_sum(big_n, p) as i64;
    let eq = |j: i64, target: i64| bv_or_inf(k, j, p).equals(target);
    if p.get() == 2 {
        let n = big_n as i64;
        let a = eq(n, sig - m);
        let b = big_n % 2 == 1 && eq(n - 2, sig - m - 1);
        Criterion::from_bool(a ^ b)
    } else {
        Criterion::from_bool(eq(r as i64, sig / p.pm1() as i64 - m))
    }
}

fn criteria(n: u64, k: u64, p: Prime, kind: StirlingKind) -> CriterionFlags {
    let divisible = r_of(n, k, p).is_some();
    let gate = |b: bool| {
        if divisible {
            Criterion::from_bool(b)
        } else {
            Criterion::Inapplicable
        }
    };
    match kind {
        StirlingKind::Second => CriterionFlags {
            mzc: gate(is_mzc_second(n, k, p)),
            smzc: gate(is_smzc_second(n, k, p)),
            amzc: amzc_criterion_second(n, k, p),
            samzc: samzc_criterion_second(n, k, p),
        },
        StirlingKind::First => CriterionFlags {
            mzc: gate(is_mzc_first(n, k, p)),
            smzc: gate(is_smzc_first(n, k, p)),
            amzc: amzc_criterion_first(n, k, p),
            samzc: samzc_criterion_first(n, k, p),
        },
    }
}

/// Build a report from a known valuation, skipping the oracle.
pub fn classify_with_actual(
    n: u64,
    k: u64,
    p: Prime,
    kind: StirlingKind,
    actual: Valuation,
) -> Result<CaseReport> {
    let est = estimates(n, k, p, kind)?;
    let r = r_of(n, k, p);
    let sharp = |e: i64| actual.equals(e);
    let flags = CaseFlags {
        mzc: r.is_some() && sharp(est.mz),
        smzc: r.is_some() && sharp(est.smz),
        amzc: sharp(est.amz),
        samzc: sharp(est.samz),
    };
    let crit = criteria(n, k, p, kind);
    let agree = [
        (crit.mzc, flags.mzc),
        (crit.smzc, flags.smzc),
        (crit.amzc, flags.amzc),
        (crit.samzc, flags.samzc),
    ]
    .iter()
    .all(|(c, f)| c.decided().is_none_or(|b| b == *f));
    Ok(CaseReport {
        n,
        k,
        p,
        kind,
        r,
        estimates: est,
        actual,
        flags,
        criteria: crit,
        agree,
    })
}

pub fn classify(n: u64, k: u64, p: Prime, kind: StirlingKind) -> Result<CaseReport> {
    check_range(n, k)?;
    let actual = stirling_valuation(n, k, p, kind)?;
    classify_with_actual(n, k, p, kind, actual)
}

/// Amdeberhan-type identity: ν_p(S(n+1,k+1)) = ν_p(S(n,k)) for the second
/// kind, ν_p(s(n,k)) = ν_p(s(n−1,k−1)) for the first.
pub fn amdeberhan_check(n: u64, k: u64, p: Prime, kind: StirlingKind) -> Result<bool> {
    let (a, b) = match kind {
        StirlingKind::Second => ((n + 1, k + 1), (n, k)),
        StirlingKind::First => {
            if n == 0 || k == 0 {
                return Err(Error::domain("first-kind shift needs n, k >= 1"));
            }
            ((n, k), (n - 1, k - 1))
        }
    };
    Ok(stirling_valuation(a.0, a.1, p, kind)? == stirling_valuation(b.0, b.1, p, kind)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn fractions() {
        let f = Fraction::new(-3, 2);
        assert_eq!(f.ceil(), -1);
        assert_eq!(Fraction::new(4, 2), Fraction { num: 2, den: 1 });
        assert_eq!(Fraction::new(5, 4).ceil(), 2);
        assert_eq!(Fraction::new(-4, 4).ceil(), -1);
        assert_eq!(Fraction::new(0, 4).to_string(), "0");
        assert_eq!(Fraction::new(6, 4).to_string(), "3/2");
    }

    #[test]
    fn estimate_examples() {
        let e = estimates_second(6, 2, p(2)).unwrap();
        assert_eq!(e.mz, -1);
        assert_eq!(e.amz, 0);
        for h in 1..6 {
            let n = 1u64 << h;
            for k in 1..=n {
                let e = estimates_second(n, k, p(2)).unwrap();
                assert_eq!(e.amz, digit_sum(k, p(2)) as i64 - 1);
                let e = estimates_first(n, k, p(2)).unwrap();
                if k % 2 == 0 && k < n {
                    assert_eq!(
                        e.samz,
                        h as i64 - int_valuation(k, p(2)).finite().unwrap() as i64 - 1
                    );
                }
                if k < n {
                    assert_eq!(e.amz, 0);
                }
            }
        }
        for kind in [StirlingKind::First, StirlingKind::Second] {
            let e = estimates(9, 9, p(3), kind).unwrap();
            assert_eq!((e.mz, e.smz, e.amz, e.samz), (0, 0, 0, 0));
        }
        assert!(estimates_second(3, 4, p(2)).is_err());
    }

    #[test]
    fn zero_criteria() {
        assert!(is_mzc_second(4, 2, p(2)));
        assert!(!is_mzc_second(6, 2, p(2)));
        assert!(is_smzc_second(5, 3, p(2)));
        assert!(is_smzc_second(7, 7, p(3)));
        assert!(!is_mzc_second(7, 2, p(3)));
        for n in 1..200 {
            for k in 1..=n {
                assert_eq!(
                    is_mzc_second(n, k, p(3)),
                    is_smzc_second(n + 1, k + 1, p(3))
                );
            }
        }
    }

    #[test]
    fn almost_criteria() {
        assert_eq!(amzc_criterion_second(4131, 241, p(3)), Criterion::Holds);
        assert_eq!(amzc_criterion_second(20, 18, p(3)), Criterion::Inapplicable);
        for c in 1..4 {
            for k in 1..=8 {
                assert_eq!(amzc_criterion_second(c * 8, k, p(2)), Criterion::Holds);
                assert_eq!(
                    samzc_criterion_second(c * 8 + 1, k + 1, p(2)),
                    Criterion::Holds
                );
            }
        }
    }

    #[test]
    fn classify_examples() {
        let r = classify(6, 2, p(2), StirlingKind::Second).unwrap();
        assert_eq!(r.actual, Valuation::Finite(0));
        assert!(r.flags.amzc && !r.flags.mzc);
        assert!(r.agree);
        let r = classify(2900, 348, p(5), StirlingKind::Second).unwrap();
        assert_eq!(r.actual, Valuation::Finite(2));
        assert!(r.flags.amzc);
        assert_eq!(r.criteria.amzc, Criterion::Holds);
        let r = classify(8, 6, p(2), StirlingKind::First).unwrap();
        assert_eq!(r.actual, Valuation::Finite(1));
        assert!(r.flags.samzc);
        assert!(r.agree);
        let r = classify(100, 45, p(3), StirlingKind::Second).unwrap();
        assert_eq!(r.actual, Valuation::Finite(2));
        assert!(r.flags.samzc && !r.flags.amzc);
    }

    #[test]
    fn amdeberhan() {
        for h in 1..6 {
            let n = 1u64 << h;
            for k in 1..=n {
                assert!(amdeberhan_check(n, k, p(2), StirlingKind::Second).unwrap());
            }
        }
        assert!(amdeberhan_check(5, 5, p(3), StirlingKind::Second).unwrap());
        assert!(amdeberhan_check(9, 8, p(2), StirlingKind::First).unwrap());
    }
}
