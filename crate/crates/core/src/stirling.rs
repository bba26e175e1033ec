//! Stirling numbers and their exact p-adic valuations.
//!
//! Three independent routes:
//!
//! * exact big-integer triangles for small `n`;
//! * the alternating sum `k! S(n,k) = Σ (-1)^i C(k,i) (k-i)^n` modulo
//!   `p^{ν_p(k!) + K0}` with `K0` doubling until the residue is nonzero;
//! * triangle recurrences modulo a fixed `p^K`, used for whole rows and for
//!   large `k`. Entries whose residue vanishes are recomputed at a higher
//!   precision.
//!
//! First-kind numbers are unsigned throughout.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::basep::{big_valuation, factorial_valuation, nonzero_valuation, Prime, Valuation};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`stirling_exact`].
pub const EXACT_CAP: u64 = 400;
/// Initial extra precision for the alternating sum.
pub const K0: u64 = 64;
/// Hard cap on the precision exponent of any lifting loop.
pub const PRECISION_CAP: u64 = 1 << 16;
/// `k` up to which single second-kind valuations use the alternating sum.
const ALTERNATING_MAX_K: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StirlingKind {
    /// Unsigned s(n, k).
    First,
    /// S(n, k).
    Second,
}

impl fmt::Display for StirlingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StirlingKind::First => "first",
            StirlingKind::Second => "second",
        })
    }
}

impl FromStr for StirlingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "first" => Ok(StirlingKind::First),
            "2" | "second" => Ok(StirlingKind::Second),
            _ => Err(Error::domain(format!("unknown Stirling kind {s:?}"))),
        }
    }
}

/// Rows `0..=nmax` of the exact triangle, each truncated to `k <= kmax`.
pub fn exact_triangle(nmax: u64, kmax: u64, kind: StirlingKind) -> Result<Vec<Vec<BigUint>>> {
    if nmax > EXACT_CAP {
        return Err(Error::resource(
            format!("exact Stirling row {nmax}"),
            EXACT_CAP,
        ));
    }
    let w = kmax as usize + 1;
    let mut rows = Vec::with_capacity(nmax as usize + 1);
    let mut row = vec![BigUint::zero(); w];
    row[0] = BigUint::one();
    rows.push(row.clone());
    for m in 1..=nmax {
        let mut next = vec![BigUint::zero(); w];
        for j in 1..w.min(m as usize + 1) {
            let mult = match kind {
                StirlingKind::Second => j as u64,
                StirlingKind::First => m - 1,
            };
            next[j] = &row[j - 1] + &row[j] * mult;
        }
        rows.push(next.clone());
        row = next;
    }
    Ok(rows)
}

/// Exact S(n, k) or unsigned s(n, k).
pub fn stirling_exact(n: u64, k: u64, kind: StirlingKind) -> Result<BigUint> {
    if k > n {
        return Ok(BigUint::zero());
    }
    let rows = exact_triangle(n, k, kind)?;
    Ok(rows[n as usize][k as usize].clone())
}

/// ν_p of S(n, k) (second kind) or s(n, k) (first kind).
pub fn stirling_valuation(n: u64, k: u64, p: Prime, kind: StirlingKind) -> Result<Valuation> {
    if let Some(v) = trivial_valuation(n, k) {
        return Ok(v);
    }
    if kind == StirlingKind::Second && k <= ALTERNATING_MAX_K {
        return alternating_valuation(n, k, p, K0);
    }
    let rows = row_valuations(kind, p, &[(n, k)])?;
    Ok(rows[&n][k as usize])
}

fn trivial_valuation(n: u64, k: u64) -> Option<Valuation> {
    if k > n || (k == 0 && n > 0) {
        Some(Valuation::Infinite)
    } else if k == n {
        Some(Valuation::Finite(0))
    } else {
        None
    }
}

/// ν_p(S(n, k)) from the alternating sum, starting with `k0` digits of
/// precision above ν_p(k!).
pub fn alternating_valuation(n: u64, k: u64, p: Prime, k0: u64) -> Result<Valuation> {
    if let Some(v) = trivial_valuation(n, k) {
        return Ok(v);
    }
    let vf = factorial_valuation(k, p);
    let mut extra = k0.max(1);
    loop {
        let prec = vf + extra;
        if prec > PRECISION_CAP {
            return Err(Error::resource("alternating-sum precision", PRECISION_CAP));
        }
        let modulus = BigUint::from(p.get()).pow(prec as u32);
        let a = alternating_sum_mod(n, k, &modulus);
        if !a.is_zero() {
            let v = big_valuation(&a, p).finite().expect("nonzero");
            debug_assert!(v >= vf);
            return Ok(Valuation::Finite(v - vf));
        }
        extra *= 2;
    }
}

/// Σ_{i=0}^{k} (-1)^i C(k, i) (k − i)^n mod `modulus`.
fn alternating_sum_mod(n: u64, k: u64, modulus: &BigUint) -> BigUint {
    let exp = BigUint::from(n);
    let mut pos = BigUint::zero();
    let mut neg = BigUint::zero();
    let mut c = BigUint::one();
    for i in 0..=k {
        let base = BigUint::from(k - i);
        let term = (&c % modulus) * base.modpow(&exp, modulus) % modulus;
        if i % 2 == 0 {
            pos += term;
        } else {
            neg += term;
        }
        c = c * (k - i) / (i + 1);
    }
    let pos = pos % modulus;
    let neg = neg % modulus;
    if pos >= neg {
        pos - neg
    } else {
        modulus - neg + pos
    }
}

/// Residues modulo `M^L` with `M = p^K`, stored as `L` base-`M` limbs per
/// entry (one `Vec<f64>` per limb), so the inner loops vectorize.
///
/// Every intermediate `a + mult * b + carry` stays below `M (max_mult + 1)`,
/// which the choice of `M` keeps below 2^52.
struct LimbRing {
    p: Prime,
    /// Exponent `K` of one limb.
    digits: u64,
    m: f64,
    inv: f64,
    limbs: usize,
}

const ROUND: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52

impl LimbRing {
    fn new(p: Prime, max_mult: u64, limbs: usize) -> Result<LimbRing> {
        let limit = (1u64 << 52) / (max_mult + 1);
        let (mut m, mut digits) = (1u64, 0u64);
        while m.checked_mul(p.get()).is_some_and(|x| x < limit) {
            m *= p.get();
            digits += 1;
        }
        if m <= max_mult {
            return Err(Error::resource("triangle multiplier", 1 << 26));
        }
        Ok(LimbRing {
            p,
            digits,
            m: m as f64,
            inv: 1.0 / m as f64,
            limbs,
        })
    }

    fn precision(&self) -> u64 {
        self.digits * self.limbs as u64
    }

    /// Valuation of entry `j`, `None` if every limb vanishes.
    fn valuation(&self, row: &[Vec<f64>], j: usize) -> Option<u64> {
        row.iter().enumerate().find_map(|(l, limb)| {
            let x = limb[j] as u64;
            (x != 0).then(|| l as u64 * self.digits + nonzero_valuation(x, self.p))
        })
    }
}

#[derive(Clone, Copy)]
enum Mult {
    /// Multiplier `j` (second kind).
    Index,
    /// Constant multiplier (first kind, `m - 1`).
    Const(f64),
}

/// One limb of `out[i] = lo[i] + mult_i hi[i] + carry[i]`. `CIN` adds the
/// incoming carry, `COUT` writes the outgoing carry back into `carry`.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn limb_step<const CIN: bool, const COUT: bool>(
    lo: &[f64],
    hi: &[f64],
    idx: &[f64],
    mult: Mult,
    carry: &mut [f64],
    out: &mut [f64],
    m: f64,
    inv: f64,
) {
    let n = out.len();
    let (lo, hi, carry) = (&lo[..n], &hi[..n], &mut carry[..n]);
    let idx = &idx[..n];
    for i in 0..n {
        let c = match mult {
            Mult::Index => idx[i],
            Mult::Const(c) => c,
        };
        let mut x = lo[i] + c * hi[i];
        if CIN {
            x += carry[i];
        }
        let (r, q) = reduce(x, m, inv);
        out[i] = r;
        if COUT {
            carry[i] = q;
        }
    }
}

/// `(x mod m, floor(x / m))` for an exact integer `x < 2^52`.
#[inline(always)]
fn reduce(x: f64, m: f64, inv: f64) -> (f64, f64) {
    let q = (x * inv + ROUND) - ROUND;
    let r = x - q * m;
    let (r, q) = if r < 0.0 { (r + m, q - 1.0) } else { (r, q) };
    if r >= m {
        (r - m, q + 1.0)
    } else {
        (r, q)
    }
}

#[allow(clippy::too_many_arguments)]
fn dispatch_step(
    avx2: bool,
    first: bool,
    last: bool,
    lo: &[f64],
    hi: &[f64],
    idx: &[f64],
    mult: Mult,
    carry: &mut [f64],
    out: &mut [f64],
    m: f64,
    inv: f64,
) {
    macro_rules! go {
        ($cin:literal, $cout:literal) => {{
            #[cfg(target_arch = "x86_64")]
            if avx2 {
                #[target_feature(enable = "avx2,fma")]
                #[allow(clippy::too_many_arguments)]
                unsafe fn wide(
                    lo: &[f64],
                    hi: &[f64],
                    idx: &[f64],
                    mult: Mult,
                    carry: &mut [f64],
                    out: &mut [f64],
                    m: f64,
                    inv: f64,
                ) {
                    limb_step::<$cin, $cout>(lo, hi, idx, mult, carry, out, m, inv)
                }
                // SAFETY: avx2 and fma were detected at runtime.
                unsafe { wide(lo, hi, idx, mult, carry, out, m, inv) };
                return;
            }
            limb_step::<$cin, $cout>(lo, hi, idx, mult, carry, out, m, inv)
        }};
    }
    match (first, last) {
        (true, true) => go!(false, false),
        (true, false) => go!(false, true),
        (false, false) => go!(true, true),
        (false, true) => go!(true, false),
    }
}

fn avx2_available() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

/// Column span `kmin..=kmax` wanted from one row.
type Span = (u64, u64);

/// Run the triangle up to the largest requested row and return residue
/// valuations (`None` for a vanishing residue) for the requested spans.
/// The entry at index `j` of a returned row is column `kmin + j`.
///
/// Only the dependency cone of the requests is computed: row `m` needs
/// columns up to the widest later request and, for a request `(n, k)`,
/// nothing below `k - (n - m)`.
fn run_triangle(
    ring: &LimbRing,
    kind: StirlingKind,
    requests: &BTreeMap<u64, Span>,
) -> BTreeMap<u64, Vec<Option<u64>>> {
    let nmax = *requests.keys().next_back().expect("nonempty");
    // suffix bounds over requests with n >= m: (n, widest column + 1, min of kmin - n)
    let mut bounds: Vec<(u64, usize, i64)> = Vec::new();
    let (mut widest, mut lowest) = (0usize, i64::MAX);
    for (&n, &(kmin, kmax)) in requests.iter().rev() {
        widest = widest.max(kmax as usize + 1);
        lowest = lowest.min(kmin as i64 - n as i64);
        bounds.push((n, widest, lowest));
    }
    bounds.reverse();
    let full = bounds[0].1;
    let limbs = ring.limbs;
    let mut prev = vec![vec![0.0; full]; limbs];
    let mut next = vec![vec![0.0; full]; limbs];
    let mut carry = vec![0.0; full];
    let idx: Vec<f64> = (0..full).map(|j| j as f64).collect();
    let avx2 = avx2_available();
    prev[0][0] = 1.0;

    let mut out = BTreeMap::new();
    let record = |row: &[Vec<f64>], n: u64, out: &mut BTreeMap<u64, Vec<Option<u64>>>| {
        let (kmin, kmax) = requests[&n];
        let vals = (kmin..=kmax)
            .map(|j| ring.valuation(row, j as usize))
            .collect();
        out.insert(n, vals);
    };
    if requests.contains_key(&0) {
        record(&prev, 0, &mut out);
    }
    let mut cursor = 0;
    for m in 1..=nmax {
        while bounds[cursor].0 < m {
            cursor += 1;
        }
        let width = bounds[cursor].1.min(m as usize + 1);
        let low = (bounds[cursor].2 + m as i64).max(1) as usize;
        let mult = match kind {
            StirlingKind::Second => Mult::Index,
            StirlingKind::First => Mult::Const(((m - 1) as f64) % ring.m),
        };
        if low < width {
            for l in 0..limbs {
                let (lo, hi) = (&prev[l][low - 1..width - 1], &prev[l][low..width]);
                let out = &mut next[l][low..width];
                let (idx, c) = (&idx[low..width], &mut carry[low..width]);
                let (first, last) = (l == 0, l + 1 == limbs);
                dispatch_step(
                    avx2, first, last, lo, hi, idx, mult, c, out, ring.m, ring.inv,
                );
                next[l][0] = 0.0;
            }
        }
        std::mem::swap(&mut prev, &mut next);
        if requests.contains_key(&m) {
            record(&prev, m, &mut out);
        }
    }
    out
}

fn max_multiplier(kind: StirlingKind, req: &BTreeMap<u64, Span>) -> u64 {
    match kind {
        StirlingKind::Second => req.values().map(|s| s.1).max().unwrap(),
        StirlingKind::First => *req.keys().next_back().unwrap(),
    }
}

/// Valuations of whole rows: for each `(n, kmax)` request, entries
/// `k = 0..=kmax` of row `n`. The triangle is run once for all rows.
///
/// Entries whose residue vanishes are recomputed with twice as many limbs,
/// restricted to the dependency cone of those entries.
pub fn row_valuations(
    kind: StirlingKind,
    p: Prime,
    requests: &[(u64, u64)],
) -> Result<BTreeMap<u64, Vec<Valuation>>> {
    let mut req: BTreeMap<u64, Span> = BTreeMap::new();
    for &(n, k) in requests {
        let e = req.entry(n).or_insert((0, 0));
        e.1 = e.1.max(k.min(n));
    }
    let mut out: BTreeMap<u64, Vec<Valuation>> = BTreeMap::new();
    if req.is_empty() {
        return Ok(out);
    }
    let mut ring = LimbRing::new(p, max_multiplier(kind, &req), 1)?;
    let mut pending: Vec<(u64, u64)> = Vec::new();
    for (n, vals) in run_triangle(&ring, kind, &req) {
        let row = vals
            .iter()
            .enumerate()
            .map(|(k, v)| match (trivial_valuation(n, k as u64), v) {
                (Some(t), _) => t,
                (None, Some(v)) => Valuation::Finite(*v),
                (None, None) => {
                    pending.push((n, k as u64));
                    Valuation::Infinite
                }
            })
            .collect();
        out.insert(n, row);
    }
    while !pending.is_empty() {
        let mut sub: BTreeMap<u64, Span> = BTreeMap::new();
        for &(n, k) in &pending {
            let e = sub.entry(n).or_insert((k, k));
            *e = (e.0.min(k), e.1.max(k));
        }
        ring = LimbRing::new(p, max_multiplier(kind, &sub), ring.limbs * 2)?;
        if ring.precision() > PRECISION_CAP {
            return Err(Error::resource("triangle precision", PRECISION_CAP));
        }
        let res = run_triangle(&ring, kind, &sub);
        pending.retain(|&(n, k)| match res[&n][(k - sub[&n].0) as usize] {
            Some(v) => {
                out.get_mut(&n).unwrap()[k as usize] = Valuation::Finite(v);
                false
            }
            None => true,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    fn stirling_u64(n: u64, k: u64, kind: StirlingKind) -> Option<u64> {
        stirling_exact(n, k, kind).ok()?.to_u64()
    }

    #[test]
    fn exact_values() {
        use StirlingKind::*;
        assert_eq!(stirling_u64(4, 3, Second), Some(6));
        assert_eq!(stirling_u64(5, 3, Second), Some(25));
        assert_eq!(stirling_u64(8, 6, First), Some(322));
        assert_eq!(stirling_u64(8, 7, First), Some(28));
        assert_eq!(stirling_u64(8, 3, First), Some(13132));
        assert_eq!(stirling_u64(3, 5, Second), Some(0));
        assert!(stirling_exact(401, 3, Second).is_err());
    }

    #[test]
    fn trivial_cases() {
        use StirlingKind::*;
        assert_eq!(
            stirling_valuation(3, 5, p(2), Second),
            Ok(Valuation::Infinite)
        );
        assert_eq!(
            stirling_valuation(5, 0, p(2), First),
            Ok(Valuation::Infinite)
        );
        assert_eq!(
            stirling_valuation(0, 0, p(2), First),
            Ok(Valuation::Finite(0))
        );
    }

    #[test]
    fn worked_examples() {
        use StirlingKind::*;
        assert_eq!(
            stirling_valuation(4131, 241, p(3), Second),
            Ok(Valuation::Finite(4))
        );
        assert_eq!(
            stirling_valuation(28750, 622, p(5), Second),
            Ok(Valuation::Finite(3))
        );
        assert_eq!(
            stirling_valuation(2900, 348, p(5), Second),
            Ok(Valuation::Finite(2))
        );
        assert_eq!(
            stirling_valuation(100, 45, p(3), Second),
            Ok(Valuation::Finite(2))
        );
    }

    #[test]
    fn routes_agree() {
        for q in [2, 3, 5, 7] {
            let q = p(q);
            let rows: Vec<(u64, u64)> = (0..=120).map(|n| (n, n)).collect();
            let tri = row_valuations(StirlingKind::Second, q, &rows).unwrap();
            for n in 1..=120u64 {
                for k in 1..=n {
                    let alt = alternating_valuation(n, k, q, 4).unwrap();
                    assert_eq!(tri[&n][k as usize], alt, "S({n},{k}) p={q}");
                }
            }
        }
    }

    #[test]
    fn rows_match_exact() {
        for kind in [StirlingKind::First, StirlingKind::Second] {
            let exact = exact_triangle(150, 150, kind).unwrap();
            for q in [2, 3, 5, 7] {
                let q = p(q);
                let rows: Vec<(u64, u64)> = (0..=150).map(|n| (n, n)).collect();
                let tri = row_valuations(kind, q, &rows).unwrap();
                for n in 0..=150usize {
                    for k in 0..=n {
                        assert_eq!(tri[&(n as u64)][k], big_valuation(&exact[n][k], q));
                    }
                }
            }
        }
    }

    #[test]
    fn lifting_recovers_high_valuations() {
        // valuations above the fixed precision force the fallback path
        let q = p(2);
        let n = 300;
        let exact = exact_triangle(n, n, StirlingKind::First).unwrap();
        let rows = row_valuations(StirlingKind::First, q, &[(n, n)]).unwrap();
        for k in 1..=n as usize {
            assert_eq!(
                rows[&n][k],
                big_valuation(&exact[n as usize][k], q),
                "k = {k}"
            );
        }
        // s(300, 2) has a valuation far above one limb of precision
        assert!(rows[&n][2].finite().unwrap() > 40);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("1".parse::<StirlingKind>(), Ok(StirlingKind::First));
        assert_eq!("second".parse::<StirlingKind>(), Ok(StirlingKind::Second));
        assert!("3".parse::<StirlingKind>().is_err());
    }
}
