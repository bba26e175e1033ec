//! Exact higher-order Bernoulli numbers via partition sums.
//!
//! With `s = l - n - 1`,
//!
//! ```text
//! B_n^{(l)}    = (-1)^n n! Σ_{w(u) <= n} t_u(s)
//! B_n^{(l)}(1) = (-1)^n n! Σ_{w(u)  = n} t_u(s)
//! t_u(s)       = C(s, d) · multinomial(d; u) / Λ^u,   Λ^u = Π (i+1)^{u_i}
//! ```
//!
//! The inner sums over partitions of fixed weight and part count do not
//! depend on `s`, so they are tabulated once per weight and shared.

use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::basep::{big_valuation, Prime, Valuation};
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest degree accepted by default. The partition count grows quickly.
pub const DEFAULT_CAP: u64 = 40;

/// A partition stored as multiplicities: `mults[i]` is `u_{i+1}`, the
/// number of parts equal to `i + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Partition {
    mults: Vec<u64>,
}

impl Partition {
    pub fn new(mut mults: Vec<u64>) -> Self {
        while mults.last() == Some(&0) {
            mults.pop();
        }
        Partition { mults }
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    /// `u_i` for `i >= 1`.
    pub fn mult(&self, i: usize) -> u64 {
        assert!(i >= 1, "parts are positive");
        self.mults.get(i - 1).copied().unwrap_or(0)
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.mults
    }

    /// w(u) = Σ i·u_i.
    pub fn weight(&self) -> u64 {
        self.mults
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as u64 + 1) * m)
            .sum()
    }

    /// d(u) = Σ u_i.
    pub fn parts(&self) -> u64 {
        self.mults.iter().sum()
    }

    /// Λ^u = Π (i+1)^{u_i}.
    pub fn lambda(&self) -> BigUint {
        self.mults
            .iter()
            .enumerate()
            .fold(BigUint::one(), |acc, (i, &m)| {
                acc * BigUint::from(i as u64 + 2).pow(m as u32)
            })
    }

    /// ν_p(Λ^u) = Σ u_i ν_p(i+1).
    pub fn lambda_valuation(&self, p: Prime) -> u64 {
        self.mults
            .iter()
            .enumerate()
            .map(|(i, &m)| m * crate::basep::nonzero_valuation(i as u64 + 2, p))
            .sum()
    }

    /// multinomial(d; u) = d! / Π u_i!.
    pub fn multinomial(&self) -> BigUint {
        let mut out = factorial(self.parts());
        for &m in &self.mults {
            out /= factorial(m);
        }
        out
    }
}

/// All partitions of `w`, parts listed largest first during generation.
pub fn partitions(w: u64) -> Vec<Partition> {
    fn rec(rest: u64, max: u64, mults: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition::new(mults.clone()));
            return;
        }
        for part in (1..=max.min(rest)).rev() {
            mults[part as usize - 1] += 1;
            rec(rest - part, part, mults, out);
            mults[part as usize - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    let mut mults = vec![0; w as usize];
    rec(w, w, &mut mults, &mut out);
    out
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Generalized binomial C(s, d) for any integer `s`.
pub fn gen_binomial(s: i64, d: u64) -> BigInt {
    if s < 0 {
        // C(s, d) = (-1)^d C(d - s - 1, d)
        let top = d + (-s) as u64 - 1;
        let v = BigInt::from(binomial(top, d));
        if d % 2 == 1 {
            -v
        } else {
            v
        }
    } else if d > s as u64 {
        BigInt::zero()
    } else {
        BigInt::from(binomial(s as u64, d))
    }
}

pub fn binomial(m: u64, j: u64) -> BigUint {
    if j > m {
        return BigUint::zero();
    }
    let j = j.min(m - j);
    let mut acc = BigUint::one();
    for i in 0..j {
        acc = acc * BigUint::from(m - i) / BigUint::from(i + 1);
    }
    acc
}

/// t_u(s) = C(s, d) multinomial(d; u) / Λ^u.
pub fn t_u(u: &Partition, s: i64) -> Rational {
    let num = gen_binomial(s, u.parts()) * BigInt::from(u.multinomial());
    Rational::new(num, BigInt::from(u.lambda()))
}

/// τ_u = (n)_w t_u, the falling factorial of length w(u) times t_u.
pub fn tau_u(u: &Partition, s: i64, n: u64) -> Result<Rational> {
    let w = u.weight();
    if w > n {
        return Err(Error::domain(format!(
            "partition weight {w} exceeds n = {n}"
        )));
    }
    let falling = ((n - w + 1)..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i));
    Ok(t_u(u, s) * Rational::from_integer(BigInt::from(falling)))
}

/// Row `w` of the table holds, for each part count `d`, the sum of
/// multinomial(d; u)/Λ^u over partitions u of weight w with d parts.
fn weight_table() -> &'static RwLock<Vec<Vec<Rational>>> {
    static TABLE: OnceLock<RwLock<Vec<Vec<Rational>>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Vec::new()))
}

fn weight_row(w: u64) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); w as usize + 1];
    for u in partitions(w) {
        let term = Rational::new(BigInt::from(u.multinomial()), BigInt::from(u.lambda()));
        row[u.parts() as usize] += term;
    }
    row
}

fn ensure_table(n: u64) {
    let table = weight_table();
    if table.read().expect("table lock").len() > n as usize {
        return;
    }
    let mut guard = table.write().expect("table lock");
    while guard.len() <= n as usize {
        let w = guard.len() as u64;
        guard.push(weight_row(w));
    }
}

fn check_cap(n: u64, cap: u64) -> Result<()> {
    if n > cap {
        Err(Error::resource(format!("Bernoulli degree {n}"), cap))
    } else {
        Ok(())
    }
}

fn signed_factorial(n: u64) -> Rational {
    let f = BigInt::from(factorial(n));
    Rational::from_integer(if n % 2 == 1 { -f } else { f })
}

/// B_n^{(l)} with the default degree cap.
pub fn hob_number(n: u64, l: i64) -> Result<Rational> {
    hob_number_with_cap(n, l, DEFAULT_CAP)
}

pub fn hob_number_with_cap(n: u64, l: i64, cap: u64) -> Result<Rational> {
    check_cap(n, cap)?;
    ensure_table(n);
    let s = l - n as i64 - 1;
    let table = weight_table().read().expect("table lock");
    let mut sum = Rational::zero();
    for d in 0..=n {
        let mut inner = Rational::zero();
        for row in table.iter().take(n as usize + 1).skip(d as usize) {
            inner += &row[d as usize];
        }
        if !inner.is_zero() {
            sum += inner * Rational::from_integer(gen_binomial(s, d));
        }
    }
    Ok(sum * signed_factorial(n))
}

/// B_n^{(l)}(1) with the default degree cap.
pub fn hob_at_one(n: u64, l: i64) -> Result<Rational> {
    hob_at_one_with_cap(n, l, DEFAULT_CAP)
}

pub fn hob_at_one_with_cap(n: u64, l: i64, cap: u64) -> Result<Rational> {
    check_cap(n, cap)?;
    ensure_table(n);
    let s = l - n as i64 - 1;
    let table = weight_table().read().expect("table lock");
    let mut sum = Rational::zero();
    for (d, g) in table[n as usize].iter().enumerate() {
        if !g.is_zero() {
            sum += g * Rational::from_integer(gen_binomial(s, d as u64));
        }
    }
    Ok(sum * signed_factorial(n))
}

/// p-adic valuation of a rational; `None` stands for the zero rational.
pub fn rational_valuation(x: &Rational, p: Prime) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let num = big_valuation(x.numer().abs().magnitude(), p);
    let den = big_valuation(x.denom().magnitude(), p);
    match (num, den) {
        (Valuation::Finite(a), Valuation::Finite(b)) => Some(a as i64 - b as i64),
        _ => unreachable!("nonzero rational"),
    }
}

/// Valuations of the coefficients of B_n^{(l)}(x).
///
/// `valuations[i]` belongs to the coefficient of `x^{n-i}`, which is
/// `C(n, i) B_i^{(l)}`. Zero coefficients are `None`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    pub n: u64,
    pub l: i64,
    pub p: Prime,
    pub valuations: Vec<Option<i64>>,
}

impl CoefficientProfile {
    /// Largest pole order among the coefficients, zero if none.
    pub fn max_pole(&self) -> u64 {
        self.valuations
            .iter()
            .flatten()
            .map(|&v| (-v).max(0) as u64)
            .max()
            .unwrap_or(0)
    }
}

pub fn coefficient_profile(n: u64, l: i64, p: Prime) -> Result<CoefficientProfile> {
    let values = (0..=n)
        .map(|i| hob_number(i, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(profile_from_numbers(n, l, p, &values))
}

/// Build a profile from precomputed B_0^{(l)}..B_n^{(l)}.
pub fn profile_from_numbers(n: u64, l: i64, p: Prime, numbers: &[Rational]) -> CoefficientProfile {
    assert!(numbers.len() > n as usize, "need B_0..B_n");
    let valuations = (0..=n)
        .map(|i| {
            let c = Rational::from_integer(BigInt::from(binomial(n, i))) * &numbers[i as usize];
            rational_valuation(&c, p)
        })
        .collect();
    CoefficientProfile {
        n,
        l,
        p,
        valuations,
    }
}

/// A lattice point of a Newton polygon: (degree offset, valuation).
pub type Vertex = (u64, i64);

/// Vertices of the lower convex hull of the finite points of `profile`.
pub fn newton_polygon(profile: &CoefficientProfile) -> Vec<Vertex> {
    let pts: Vec<Vertex> = profile
        .valuations
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i as u64, v)))
        .collect();
    lower_hull(&pts)
}

fn cross(o: Vertex, a: Vertex, b: Vertex) -> i128 {
    let (ox, oy) = (o.0 as i128, o.1 as i128);
    (a.0 as i128 - ox) * (b.1 as i128 - oy) - (a.1 as i128 - oy) * (b.0 as i128 - ox)
}

/// Lower hull of points sorted by x (monotone chain).
pub fn lower_hull(points: &[Vertex]) -> Vec<Vertex> {
    let mut hull: Vec<Vertex> = Vec::new();
    for &pt in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }
    hull
}

/// `true` iff `pt` lies on the boundary of the polygon with the given
/// vertices (as a function of x).
pub fn on_polygon(vertices: &[Vertex], pt: Vertex) -> bool {
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.0 <= pt.0 && pt.0 <= b.0 {
            return cross(a, b, pt) == 0;
        }
    }
    vertices.iter().any(|&v| v == pt)
}
