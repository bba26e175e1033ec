//! Closed-form valuation theorems with explicit applicability guards.
//!
//! Each registry entry maps a small set of integer parameters to one or more
//! [`Claim`]s about concrete Stirling numbers. A guard failure is not an
//! error: the prediction comes back with `applicable = false` and the reason
//! names the failed clause. Missing or overflowing parameters are errors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basep::{
    binom_valuation, bottom_segment_with_sum, carries, digit_sum, int_valuation, is_bottom_segment,
    least_positive_residue, Prime, Valuation,
};
use crate::cases::is_mzc_second;
use crate::error::{Error, Result};
use crate::stirling::StirlingKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Sdw,
    Tlc,
    UpperRange,
    Gc,
    Th26a,
    Th26b,
    PadicL,
    PadicL2,
    Snkp2,
    A22,
    Arnieplus,
    Arniex,
    Plus12,
    S1Mzc,
    #[serde(rename = "s1_2h")]
    S12h,
    Th321,
}

impl TheoremId {
    pub const ALL: [TheoremId; 16] = [
        TheoremId::Sdw,
        TheoremId::Tlc,
        TheoremId::UpperRange,
        TheoremId::Gc,
        TheoremId::Th26a,
        TheoremId::Th26b,
        TheoremId::PadicL,
        TheoremId::PadicL2,
        TheoremId::Snkp2,
        TheoremId::A22,
        TheoremId::Arnieplus,
        TheoremId::Arniex,
        TheoremId::Plus12,
        TheoremId::S1Mzc,
        TheoremId::S12h,
        TheoremId::Th321,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Sdw => "sdw",
            TheoremId::Tlc => "tlc",
            TheoremId::UpperRange => "upper_range",
            TheoremId::Gc => "gc",
            TheoremId::Th26a => "th26a",
            TheoremId::Th26b => "th26b",
            TheoremId::PadicL => "padic_l",
            TheoremId::PadicL2 => "padic_l2",
            TheoremId::Snkp2 => "snkp2",
            TheoremId::A22 => "a22",
            TheoremId::Arnieplus => "arnieplus",
            TheoremId::Arniex => "arniex",
            TheoremId::Plus12 => "plus12",
            TheoremId::S1Mzc => "s1_mzc",
            TheoremId::S12h => "s1_2h",
            TheoremId::Th321 => "th321",
        }
    }

    /// Parameter names the theorem reads, in CLI flag spelling.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            TheoremId::Sdw => &["h", "k"],
            TheoremId::Tlc => &["c", "h", "k"],
            TheoremId::UpperRange => &["c", "h", "a"],
            TheoremId::Gc | TheoremId::Plus12 => &["a", "b", "c", "h"],
            TheoremId::Th26a | TheoremId::Th26b => &["b", "c", "h"],
            TheoremId::PadicL => &["c", "h", "L"],
            TheoremId::PadicL2 => &["b", "c", "h", "L"],
            TheoremId::Snkp2 | TheoremId::A22 => &["c", "h", "k", "p"],
            TheoremId::Arnieplus | TheoremId::Arniex => &["n", "k", "b", "p"],
            TheoremId::S1Mzc => &["n", "k", "p"],
            TheoremId::S12h => &["h", "k"],
            TheoremId::Th321 => &["c", "h", "u"],
        }
    }

    /// Prime the theorem is stated for, if fixed.
    pub fn fixed_prime(self) -> Option<Prime> {
        match self {
            TheoremId::Snkp2 | TheoremId::A22 | TheoremId::Arnieplus | TheoremId::Arniex => None,
            TheoremId::S1Mzc => None,
            _ => Some(Prime::TWO),
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown theorem id '{s}'")))
    }
}

/// Parameters shared by all registry entries. `b` doubles as the bottom
/// segment `B` for `arnieplus` and `arniex`; `l` is the shift `L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub p: Option<u64>,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub c: Option<u64>,
    pub h: Option<u64>,
    pub l: Option<u64>,
    pub u: Option<u64>,
}

impl Params {
    /// Value of parameter `name`; a domain error if it is unset.
    pub fn get(&self, name: &str) -> Result<u64> {
        let v = match name {
            "n" => self.n,
            "k" => self.k,
            "p" => self.p,
            "a" => self.a,
            "b" => self.b,
            "c" => self.c,
            "h" => self.h,
            "L" => self.l,
            "u" => self.u,
            _ => unreachable!("unknown parameter {name}"),
        };
        v.ok_or_else(|| Error::domain(format!("missing parameter {name}")))
    }

    /// Set a parameter by its CLI name.
    pub fn set(&mut self, name: &str, v: u64) -> Result<()> {
        let slot = match name {
            "n" => &mut self.n,
            "k" => &mut self.k,
            "p" => &mut self.p,
            "a" => &mut self.a,
            "b" => &mut self.b,
            "c" => &mut self.c,
            "h" => &mut self.h,
            "L" | "l" => &mut self.l,
            "u" => &mut self.u,
            _ => return Err(Error::domain(format!("unknown parameter {name}"))),
        };
        *slot = Some(v);
        Ok(())
    }

    fn prime(&self) -> Result<Prime> {
        Prime::new(self.get("p")?)
    }
}

/// The Stirling number a claim is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Target {
    pub kind: StirlingKind,
    pub p: Prime,
    pub n: u64,
    pub k: u64,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            StirlingKind::First => "s",
            StirlingKind::Second => "S",
        };
        write!(f, "nu_{}({}({},{}))", self.p, name, self.n, self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Predicted {
    Exact {
        value: i64,
    },
    LowerBound {
        value: i64,
    },
    /// Limit value in `h`; `attained` is the theorem's effective bound.
    Limit {
        value: i64,
        attained: bool,
    },
    None,
}

impl Predicted {
    /// Outcome against a true valuation; `None` when nothing is claimed.
    pub fn check(&self, actual: Valuation) -> Option<bool> {
        match *self {
            Predicted::Exact { value }
            | Predicted::Limit {
                value,
                attained: true,
            } => Some(actual.equals(value)),
            Predicted::LowerBound { value } => Some(actual.at_least(value)),
            Predicted::Limit {
                attained: false, ..
            }
            | Predicted::None => None,
        }
    }

    pub fn value(&self) -> Option<i64> {
        match *self {
            Predicted::Exact { value }
            | Predicted::LowerBound { value }
            | Predicted::Limit { value, .. } => Some(value),
            Predicted::None => None,
        }
    }
}

impl fmt::Display for Predicted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicted::Exact { value } => write!(f, "{value}"),
            Predicted::LowerBound { value } => write!(f, ">= {value}"),
            Predicted::Limit {
                value,
                attained: true,
            } => write!(f, "{value} (limit, attained)"),
            Predicted::Limit {
                value,
                attained: false,
            } => write!(f, "{value} (limit only)"),
            Predicted::None => f.write_str("none"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub target: Target,
    pub predicted: Predicted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremPrediction {
    pub theorem: TheoremId,
    pub applicable: bool,
    /// "ok" or the failed guard clause.
    pub reason: String,
    /// Empty unless applicable. The first claim is the headline value.
    pub claims: Vec<Claim>,
    pub max_pole: Option<u64>,
    pub first_pole_degree: Option<u64>,
}

impl TheoremPrediction {
    fn inapplicable(theorem: TheoremId, reason: impl Into<String>) -> Self {
        TheoremPrediction {
            theorem,
            applicable: false,
            reason: reason.into(),
            claims: Vec::new(),
            max_pole: None,
            first_pole_degree: None,
        }
    }

    fn ok(theorem: TheoremId, claims: Vec<Claim>) -> Self {
        TheoremPrediction {
            theorem,
            applicable: true,
            reason: "ok".into(),
            claims,
            max_pole: None,
            first_pole_degree: None,
        }
    }

    /// Headline prediction.
    pub fn predicted(&self) -> Predicted {
        self.claims.first().map_or(Predicted::None, |c| c.predicted)
    }
}

fn second(p: Prime, n: u64, k: u64) -> Target {
    Target {
        kind: StirlingKind::Second,
        p,
        n,
        k,
    }
}

fn first(p: Prime, n: u64, k: u64) -> Target {
    Target {
        kind: StirlingKind::First,
        p,
        n,
        k,
    }
}

fn exact(target: Target, value: i64) -> Claim {
    Claim {
        target,
        predicted: Predicted::Exact { value },
    }
}

fn overflow() -> Error {
    Error::domain("parameters overflow 64-bit indices")
}

fn pow2(h: u64) -> Result<u64> {
    if h >= 63 {
        Err(overflow())
    } else {
        Ok(1 << h)
    }
}

fn mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or_else(overflow)
}

fn add(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).ok_or_else(overflow)
}

fn pow(p: Prime, h: u64) -> Result<u64> {
    u32::try_from(h)
        .ok()
        .and_then(|h| p.get().checked_pow(h))
        .ok_or_else(overflow)
}

/// 2^e >= v for integer e (possibly negative) and v >= 0.
pub fn pow2_ge(e: i64, v: u64) -> bool {
    if e < 0 {
        v == 0
    } else if e >= 63 {
        true
    } else {
        (1u64 << e) >= v
    }
}

/// 2^e > v, same conventions as [`pow2_ge`].
pub fn pow2_gt(e: i64, v: u64) -> bool {
    if e < 0 {
        v == 0
    } else if e >= 63 {
        true
    } else {
        (1u64 << e) > v
    }
}

fn s2(n: u64) -> i64 {
    digit_sum(n, Prime::TWO) as i64
}

fn v2(n: u64) -> u64 {
    int_valuation(n, Prime::TWO)
        .finite()
        .expect("nonzero argument")
}

fn bv2(m: u64, j: u64) -> u64 {
    binom_valuation(m, j, Prime::TWO).expect("j <= m")
}

/// f(b, c) = σ(b) − σ(c) + ν_2(C(2c − b − 1, c)), for b < c.
pub fn f_bc(b: u64, c: u64) -> i64 {
    assert!(b < c);
    s2(b) - s2(c) + bv2(2 * c - b - 1, c) as i64
}

/// The three equal forms of the exact 2-adic order behind `gc`:
/// σ(k) − σ(n) + ν(C(2n − k, n)), σ(a) + f(b, c), and for odd b
/// σ(a) + ν(c − b) + ν(C(2c − b, b)).
pub fn gc_forms(a: u64, b: u64, c: u64, h: u64) -> Result<(i64, i64, Option<i64>)> {
    let n = mul(c, pow2(h)?)?;
    let k = add(mul(b, pow2(h)?)?, a)?;
    if k >= n || k == 0 {
        return Err(Error::domain("need 0 < k < n"));
    }
    let big = s2(k) - s2(n) + bv2(add(n, n - k)?, n) as i64;
    let short = s2(a) + f_bc(b, c);
    let odd = (b % 2 == 1).then(|| s2(a) + v2(c - b) as i64 + bv2(2 * c - b, b) as i64);
    Ok((big, short, odd))
}

/// Evaluate a registry entry.
pub fn predict(id: TheoremId, params: &Params) -> Result<TheoremPrediction> {
    let g = |name| params.get(name);
    let two = Prime::TWO;
    let t = id;
    macro_rules! guard {
        ($cond:expr, $why:expr) => {
            if !$cond {
                return Ok(TheoremPrediction::inapplicable(t, $why));
            }
        };
    }
    match id {
        TheoremId::Sdw => {
            let (h, k) = (g("h")?, g("k")?);
            let n = pow2(h)?;
            guard!(1 <= k && k <= n, "need 1 <= k <= 2^h");
            Ok(TheoremPrediction::ok(
                t,
                vec![exact(second(two, n, k), s2(k) - 1)],
            ))
        }
        TheoremId::Tlc => {
            let (c, h, k) = (g("c")?, g("h")?, g("k")?);
            let n = mul(c, pow2(h)?)?;
            guard!(c >= 1, "need c >= 1");
            guard!(1 <= k && k <= pow2(h)?, "need 1 <= k <= 2^h");
            Ok(TheoremPrediction::ok(
                t,
                vec![exact(second(two, n, k), s2(k) - 1)],
            ))
        }
        TheoremId::UpperRange => {
            let (c, h, a) = (g("c")?, g("h")?, g("a")?);
            guard!(c % 2 == 1, "need c odd");
            guard!(1 <= a && a <= pow2(h)?, "need 1 <= a <= 2^h");
            let n = mul(c, pow2(h)?)?;
            let k = (c - 1) * pow2(h)? + a;
            Ok(TheoremPrediction::ok(
                t,
                vec![exact(second(two, n, k), s2(a) - 1)],
            ))
        }
        TheoremId::Gc => {
            let (a, b, c, h) = (g("a")?, g("b")?, g("c")?, g("h")?);
            guard!(c > 1, "need c > 1");
            guard!(
                h >= 1 && 1 <= a && a <= pow2(h - 1)?,
                "need 1 <= a <= 2^(h-1)"
            );
            guard!(b < c, "need k = b*2^h + a < n = c*2^h");
            let bound = bv2(2 * c - b - 1, c);
            guard!(
                pow2_ge(h as i64 - 2, bound),
                "need 2^(h-2) >= nu_2(C(2c-b-1, c))"
            );
            let n = mul(c, pow2(h)?)?;
            let k = b * pow2(h)? + a;
            Ok(TheoremPrediction::ok(
                t,
                vec![exact(second(two, n, k), s2(a) + f_bc(b, c))],
            ))
        }
        TheoremId::Th26a | TheoremId::Th26b => {
            let (b, c, h) = (g("b")?, g("c")?, g("h")?);
            guard!(1 <= b && b <= c, "need 1 <= b <= c");
            let n = mul(c, pow2(h)?)?;
            let k = b * pow2(h)?;
            if b == c {
                let claim = Claim {
                    target: second(two, n, k),
                    predicted: Predicted::Limit {
                        value: 0,
                        attained: true,
                    },
                };
                return Ok(TheoremPrediction::ok(t, vec![claim]));
            }
            let (vb, vc, vd) = (v2(b), v2(c), v2(c - b));
            let in_b = b >> vd & 1 == 1;
            let (value, attained) = if id == TheoremId::Th26a {
                guard!(
                    vb < vc || (vb == vc && in_b),
                    "need nu_2(b) < nu_2(c), or equality with 2^nu_2(c-b) in [b]"
                );
                let nb = bv2(2 * c - b, c);
                (
                    s2(b) - s2(c) + nb as i64,
                    pow2_ge(h as i64 - 1 + vd as i64, nb),
                )
            } else {
                guard!(
                    vc < vb || (vb == vc && !in_b),
                    "need nu_2(c) < nu_2(b), or equality with 2^nu_2(c-b) in [c]"
                );
                let nb = bv2(2 * c - b - 1, c - 1);
                let e = h as i64 - 1 + vc as i64;
                let attained = if vc < vb {
                    pow2_ge(e, nb)
                } else {
                    pow2_gt(e, nb)
                };
                (s2(b - 1) - s2(c - 1) + nb as i64, attained)
            };
            let claim = Claim {
                target: second(two, n, k),
                predicted: Predicted::Limit { value, attained },
            };
            Ok(TheoremPrediction::ok(t, vec![claim]))
        }
        TheoremId::PadicL => {
            let (c, h, l) = (g("c")?, g("h")?, g("L")?);
            guard!(c % 2 == 1, "need c odd");
            guard!(l < pow2(h)?, "need 0 <= L < 2^h");
            let nb = bv2(mul(3, c)?, c);
            guard!(pow2_ge(h as i64 - 1, nb), "need 2^(h-1) >= nu_2(C(3c, c))");
            let n = add(mul(c, pow2(h + 1)?)?, l)?;
            let k = c * pow2(h)? + l;
            let value = 2 * s2(c) - s2(3 * c);
            Ok(TheoremPrediction::ok(
                t,
                vec![exact(second(two, n, k), value)],
            ))
        }
        TheoremId::PadicL2 => {
            let (b, c, h, l) = (g("b")?, g("c")?, g("h")?, g("L")?);
            guard!(1 <= b && b <= c, "need 1 <= b <= c");
            guard!(l < pow2(h)?, "need 0 <= L < 2^h");
            let n = add(mul(c, pow2(h)?)?, l)?;
            let k = b * pow2(h)? + l;
            let (value, attained) = if b == c {
                (0, true)
            } else {
                let (vb, vc, vd) = (v2(b), v2(c), v2(c - b));
                guard!(
                    vb < vc || (vb == vc && b >> vd & 1 == 1),
                    "need nu_2(b) < nu_2(c), or equality with 2^nu_2(c-b) in [b]"
                );
                let nb = bv2(2 * c - b, c);
                (
                    s2(b) - s2(c) + nb as i64,
                    pow2_ge(h as i64 - 1 + vd as i64, nb),
                )
            };
            let claim = Claim {
                target: second(two, n, k),
                predicted: Predicted::Limit { value, attained },
            };
            Ok(TheoremPrediction::ok(t, vec![claim]))
        }
        TheoremId::Snkp2 => {
            let (c, h, k, p) = (g("c")?, g("h")?, g("k")?, params.prime()?);
            let ph = pow(p, h)?;
            let n = mul(c, ph)?;
            let c0 = c % p.get();
            let kp = least_positive_residue(k, p.pm1());
            guard!(
                0 < k && k <= c0.min(kp) * ph,
                "need 0 < k <= min(c_0, k') * p^h"
            );
            guard!(digit_sum(n, p) >= kp, "need sigma_p(n) >= k'");
            let n1 = bottom_segment_with_sum(n, p, kp).expect("digit sum checked");
            let m = digit_sum(n1 - k, p) / p.pm1();
            let num = digit_sum(k, p) as i64 - kp as i64;
            let pm1 = p.pm1() as i64;
            let predicted = if (n - k) % p.pm1() == 0 {
                Predicted::Exact { value: num / pm1 }
            } else {
                Predicted::LowerBound {
                    value: num.div_euclid(pm1) + (num.rem_euclid(pm1) != 0) as i64,
                }
            };
            let mut pred = TheoremPrediction::ok(
                t,
                vec![Claim {
                    target: second(p, n, k),
                    predicted,
                }],
            );
            pred.max_pole = Some(m);
            Ok(pred)
        }
        TheoremId::A22 => {
            let (c, h, k, p) = (g("c")?, g("h")?, g("k")?, params.prime()?);
            guard!(1 <= c && c < p.get(), "need 1 <= c <= p - 1");
            let n = mul(c, pow(p, h)?)?;
            guard!(1 <= k && k <= n, "need 1 <= k <= n");
            guard!((n - k) % p.pm1() == 0, "need p - 1 | n - k");
            let value = (digit_sum(k, p) as i64 - c as i64) / p.pm1() as i64;
            Ok(TheoremPrediction::ok(
                t,
                vec![exact(second(p, n, k), value)],
            ))
        }
        TheoremId::Arnieplus => {
            let (n, k, bb, p) = (g("n")?, g("k")?, g("b")?, params.prime()?);
            guard!(is_bottom_segment(n, bb, p), "need B a bottom segment of n");
            guard!(0 < k && k <= bb, "need 0 < k <= B");
            guard!((bb - k) % p.pm1() == 0, "need p - 1 | B - k");
            let r = (bb - k) / p.pm1();
            guard!(
                carries(r, n, p) == 0,
                "need p not dividing C(n + (B-k)/(p-1), n)"
            );
            let num = digit_sum(k, p) as i64 - digit_sum(bb, p) as i64;
            let pm1 = p.pm1() as i64;
            let predicted = if (n - k) % p.pm1() == 0 {
                Predicted::Exact { value: num / pm1 }
            } else {
                Predicted::LowerBound {
                    value: num.div_euclid(pm1) + (num.rem_euclid(pm1) != 0) as i64,
                }
            };
            let mut pred = TheoremPrediction::ok(
                t,
                vec![Claim {
                    target: second(p, n, k),
                    predicted,
                }],
            );
            pred.max_pole = Some(digit_sum(bb - k, p) / p.pm1());
            pred.first_pole_degree = Some(n - bb);
            Ok(pred)
        }
        TheoremId::Arniex => {
            let (n, k, bb, p) = (g("n")?, g("k")?, g("b")?, params.prime()?);
            guard!(1 <= k && k <= bb && bb <= n, "need 1 <= k <= B <= n");
            guard!(is_mzc_second(bb, k, p), "need S(B, k) a minimum zero case");
            let tt = n - bb;
            guard!(tt % p.pm1() == 0, "need p - 1 | T");
            guard!(
                is_bottom_segment(n, bb, p),
                "need p-powers of T at least those of B and p not dividing C(T + B, B)"
            );
            let value = (digit_sum(k, p) as i64 - digit_sum(bb, p) as i64) / p.pm1() as i64;
            Ok(TheoremPrediction::ok(
                t,
                vec![exact(second(p, n, k), value)],
            ))
        }
        TheoremId::Plus12 => {
            let (a, b, c, h) = (g("a")?, g("b")?, g("c")?, g("h")?);
            guard!(c > b && b >= 1, "need c > b >= 1");
            guard!(h >= 1, "need h >= 1");
            let half = pow2(h - 1)?;
            let first_range = 1 <= a && a < half;
            let second_range = 3 <= a && a <= half;
            guard!(
                first_range || second_range,
                "need 1 <= a <= 2^(h-1) - 1 or 3 <= a <= 2^(h-1)"
            );
            let bound = bv2(2 * c - b - 1, c);
            guard!(
                pow2_ge(h as i64 - 2, bound),
                "need 2^(h-2) >= nu_2(C(2c-b-1, c))"
            );
            let base = s2(a) + f_bc(b, c);
            let n = mul(c, pow2(h)?)?;
            let k = b * pow2(h)? + a;
            let mut claims = Vec::new();
            if first_range {
                claims.push(exact(second(two, n + 1, k + 1), base));
                claims.push(exact(second(two, n, k), base));
            }
            if second_range {
                let predicted = if a % 4 == 3 {
                    Predicted::LowerBound { value: base }
                } else {
                    Predicted::Exact {
                        value: base + bv2(a + 1, 2) as i64 - 1,
                    }
                };
                claims.push(Claim {
                    target: second(two, n + 2, k),
                    predicted,
                });
            }
            Ok(TheoremPrediction::ok(t, claims))
        }
        TheoremId::S1Mzc => {
            let (n, k, p) = (g("n")?, g("k")?, params.prime()?);
            guard!(k >= 1, "need k >= 1");
            let h = int_valuation(k, p).finite().expect("k >= 1");
            let a = k / pow(p, h)?;
            guard!(a <= p.pm1(), "need k = a * p^h with 1 <= a <= p - 1");
            guard!(k <= n && n < mul(k, p.get())?, "need k <= n < k * p");
            guard!((n - a) % p.pm1() == 0, "need p - 1 | n - a");
            let value = (digit_sum(k - 1, p) as i64 - digit_sum(n - 1, p) as i64) / p.pm1() as i64;
            Ok(TheoremPrediction::ok(
                t,
                vec![
                    exact(first(p, n, k), value),
                    exact(first(p, n - 1, k - 1), value),
                ],
            ))
        }
        TheoremId::S12h => {
            let (h, k) = (g("h")?, g("k")?);
            guard!(h >= 1, "need h >= 1");
            let n = pow2(h)?;
            let half = n / 2;
            guard!(1 <= k && k <= n, "need 1 <= k <= 2^h");
            let value = if k % 2 == 0 && half <= k && k < n {
                h as i64 - 1 - v2(k) as i64
            } else if k == n - 1 || k + 1 == half {
                h as i64 - 1
            } else {
                return Ok(TheoremPrediction::inapplicable(
                    t,
                    "k outside the shifted almost minimum zero set",
                ));
            };
            Ok(TheoremPrediction::ok(
                t,
                vec![
                    exact(first(two, n, k), value),
                    exact(first(two, n + 1, k + 1), value),
                ],
            ))
        }
        TheoremId::Th321 => {
            let (c, h, u) = (g("c")?, g("h")?, g("u")?);
            guard!(c >= 1, "need c >= 1");
            let k = pow2(h)?;
            guard!(0 < u && u < k, "need 0 < u < 2^h");
            let n = add(mul(c, k)?, u)?;
            let value = h as i64 - 1 - v2(u) as i64;
            let sharp = (u % 2 == 0 && 2 * u <= k) || u == 1 || 2 * (u - 1) == k;
            let claims = if sharp {
                vec![
                    exact(second(two, n, k), value),
                    exact(second(two, n - 1, k - 1), value),
                ]
            } else {
                vec![Claim {
                    target: second(two, n, k),
                    predicted: Predicted::LowerBound { value },
                }]
            };
            Ok(TheoremPrediction::ok(t, claims))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, u64)]) -> Params {
        let mut ps = Params::default();
        for &(name, v) in pairs {
            ps.set(name, v).unwrap();
        }
        ps
    }

    fn headline(id: TheoremId, pairs: &[(&str, u64)]) -> Predicted {
        predict(id, &params(pairs)).unwrap().predicted()
    }

    fn ex(value: i64) -> Predicted {
        Predicted::Exact { value }
    }

    #[test]
    fn ids_round_trip() {
        for id in TheoremId::ALL {
            assert_eq!(id.as_str().parse::<TheoremId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
        }
        assert!("nope".parse::<TheoremId>().is_err());
    }

    #[test]
    fn pow2_bounds() {
        assert!(pow2_ge(-1, 0));
        assert!(!pow2_ge(-1, 1));
        assert!(pow2_ge(0, 1));
        assert!(!pow2_gt(0, 1));
        assert!(pow2_ge(70, u64::MAX));
    }

    #[test]
    fn small_examples() {
        use TheoremId::*;
        assert_eq!(headline(Sdw, &[("h", 2), ("k", 3)]), ex(1));
        assert_eq!(headline(Sdw, &[("h", 10), ("k", 1)]), ex(0));
        assert_eq!(headline(Sdw, &[("h", 5), ("k", 32)]), ex(0));
        assert!(
            !predict(Sdw, &params(&[("h", 2), ("k", 5)]))
                .unwrap()
                .applicable
        );
        assert_eq!(headline(Tlc, &[("c", 3), ("h", 2), ("k", 3)]), ex(1));
        assert_eq!(headline(Tlc, &[("c", 5), ("h", 1), ("k", 2)]), ex(0));
        assert_eq!(headline(UpperRange, &[("c", 3), ("h", 2), ("a", 1)]), ex(0));
        assert_eq!(headline(UpperRange, &[("c", 3), ("h", 2), ("a", 2)]), ex(0));
        assert_eq!(
            headline(Gc, &[("a", 1), ("b", 1), ("c", 3), ("h", 3)]),
            ex(2)
        );
        assert_eq!(
            headline(Th26a, &[("b", 1), ("c", 30), ("h", 3)]),
            Predicted::Limit {
                value: 0,
                attained: true
            }
        );
        assert_eq!(headline(PadicL, &[("c", 1), ("h", 1), ("L", 1)]), ex(0));
        for l in 0..4 {
            assert_eq!(headline(PadicL, &[("c", 3), ("h", 2), ("L", l)]), ex(2));
        }
        // 2^nu_2(c-b) = 2 lies in [3], so only the dual branch applies.
        assert!(
            !predict(PadicL2, &params(&[("b", 1), ("c", 3), ("h", 3), ("L", 2)]))
                .unwrap()
                .applicable
        );
        assert_eq!(
            headline(Th26b, &[("b", 1), ("c", 3), ("h", 3)]),
            Predicted::Limit {
                value: 0,
                attained: true
            }
        );
        assert_eq!(
            headline(PadicL2, &[("b", 1), ("c", 2), ("h", 3), ("L", 2)]),
            Predicted::Limit {
                value: 0,
                attained: true
            }
        );
        assert_eq!(
            headline(Snkp2, &[("c", 17), ("h", 5), ("k", 241), ("p", 3)]),
            ex(4)
        );
        assert_eq!(
            headline(Snkp2, &[("c", 46), ("h", 4), ("k", 622), ("p", 5)]),
            ex(3)
        );
        assert_eq!(
            headline(A22, &[("c", 2), ("h", 1), ("k", 2), ("p", 3)]),
            ex(0)
        );
        assert_eq!(
            headline(A22, &[("c", 1), ("h", 3), ("k", 5), ("p", 2)]),
            ex(1)
        );
        assert!(
            !predict(A22, &params(&[("c", 1), ("h", 2), ("k", 5), ("p", 2)]))
                .unwrap()
                .applicable
        );
        let pred = predict(
            Arnieplus,
            &params(&[("n", 2900), ("k", 348), ("b", 400), ("p", 5)]),
        )
        .unwrap();
        assert_eq!(pred.predicted(), ex(2));
        assert_eq!(pred.max_pole, Some(1));
        assert_eq!(pred.first_pole_degree, Some(2500));
        assert_eq!(
            headline(Arniex, &[("n", 2900), ("k", 348), ("b", 400), ("p", 5)]),
            ex(2)
        );
        let pred = predict(Plus12, &params(&[("a", 1), ("b", 1), ("c", 3), ("h", 3)])).unwrap();
        assert_eq!(pred.claims[0].target, second(Prime::TWO, 25, 10));
        assert_eq!(pred.predicted(), ex(2));
        let pred = predict(Plus12, &params(&[("a", 4), ("b", 1), ("c", 3), ("h", 4)])).unwrap();
        assert_eq!(pred.claims.last().unwrap().predicted, ex(2));
        assert_eq!(headline(S1Mzc, &[("n", 7), ("k", 4), ("p", 2)]), ex(0));
        assert!(
            !predict(S1Mzc, &params(&[("n", 5), ("k", 3), ("p", 2)]))
                .unwrap()
                .applicable
        );
        assert_eq!(headline(S12h, &[("h", 3), ("k", 6)]), ex(1));
        assert_eq!(headline(S12h, &[("h", 3), ("k", 7)]), ex(2));
        assert_eq!(headline(S12h, &[("h", 3), ("k", 3)]), ex(2));
        assert_eq!(headline(S12h, &[("h", 3), ("k", 5)]), Predicted::None);
        assert_eq!(headline(Th321, &[("c", 1), ("h", 3), ("u", 2)]), ex(1));
        assert_eq!(headline(Th321, &[("c", 1), ("h", 3), ("u", 1)]), ex(2));
    }

    #[test]
    fn missing_parameter_is_an_error() {
        assert!(predict(TheoremId::Gc, &params(&[("a", 1)])).is_err());
        assert!(predict(TheoremId::Sdw, &params(&[("h", 70), ("k", 1)])).is_err());
    }

    #[test]
    fn gc_identities() {
        for c in 2..=64u64 {
            for b in (1..c).step_by(2) {
                let (_, short, odd) = gc_forms(1, b, c, 12).unwrap();
                assert_eq!(Some(short), odd, "b = {b}, c = {c}");
            }
        }
        for c in 2..=9u64 {
            for b in 0..c {
                for h in 1..=7 {
                    for a in 1..=(1u64 << (h - 1)) {
                        let (big, short, _) = gc_forms(a, b, c, h).unwrap();
                        assert_eq!(big, short);
                    }
                }
            }
        }
    }

    #[test]
    fn guards_agree_on_overlaps() {
        // tlc and snkp2 at p = 2.
        for c in (1..=9u64).step_by(2) {
            for h in 0..=5 {
                for k in 1..=(1u64 << h) {
                    let a = headline(TheoremId::Tlc, &[("c", c), ("h", h), ("k", k)]);
                    let b = headline(TheoremId::Snkp2, &[("c", c), ("h", h), ("k", k), ("p", 2)]);
                    assert_eq!(a, b);
                }
            }
        }
        // gc at b = c - 1 and upper_range.
        for c in (3..=9u64).step_by(2) {
            for h in 1..=7 {
                for a in 1..=(1u64 << (h - 1)) {
                    let g = predict(
                        TheoremId::Gc,
                        &params(&[("a", a), ("b", c - 1), ("c", c), ("h", h)]),
                    )
                    .unwrap();
                    if g.applicable {
                        let u = headline(TheoremId::UpperRange, &[("c", c), ("h", h), ("a", a)]);
                        assert_eq!(g.predicted(), u);
                    }
                }
            }
        }
    }
}
