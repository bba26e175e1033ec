//! Maximum poles of higher-order Bernoulli polynomials without computing
//! coefficients.
//!
//! The Kimura function `N(n; p)` is the least segment of `n` whose digit sum
//! is `p - 1`. A chain repeatedly strips a bottom segment `S` and then a link
//! `N = N(R - S)` from the remainder `R`, accepting the link when
//! `p ∤ C(s, N/(p-1))`. The number of links is the maximum pole of
//! `B_n^{(l)}(x)`, and the partial sums of the links locate the vertices of
//! the descending part of its Newton polygon.

use serde::{Deserialize, Serialize};

use crate::basep::{
    bottom_segment_with_sum, digit_sum, gen_binom_valuation, two_power_set, Prime, Valuation,
};
use crate::bernoulli::Vertex;

/// N(n; p), or `None` when σ_p(n) < p − 1.
///
/// Every digit window with digit sum `p - 1` has value at least the bottom
/// segment that reaches that sum, so the minimum is always a bottom segment.
pub fn kimura_n(n: u64, p: Prime) -> Option<u64> {
    if n == 0 {
        return None;
    }
    bottom_segment_with_sum(n, p, p.pm1())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KimuraChain {
    pub p: Prime,
    pub n: u64,
    /// s = l − n − 1.
    pub s: i64,
    pub links: Vec<u64>,
    /// (Σ_{i<=j} N_i, −j) for j = 1..M.
    pub vertices: Vec<Vertex>,
}

impl KimuraChain {
    pub fn max_pole(&self) -> u64 {
        self.links.len() as u64
    }

    /// Degree at which the maximum pole first occurs.
    pub fn first_pole_degree(&self) -> u64 {
        self.n - self.links.iter().sum::<u64>()
    }
}

/// Closed bottom segments `R mod p^j`, smallest first.
fn closed_bottoms(r: u64, p: Prime) -> impl Iterator<Item = u64> {
    let pp = p.get();
    let mut modulus = Some(1u64);
    let mut last = None;
    std::iter::from_fn(move || loop {
        let m = modulus?;
        let seg = r % m;
        modulus = if m > r { None } else { m.checked_mul(pp) };
        if last != Some(seg) {
            last = Some(seg);
            return Some(seg);
        }
    })
}

pub fn kimura_chain(n: u64, l: i64, p: Prime) -> KimuraChain {
    let s = l - n as i64 - 1;
    let pm1 = p.pm1();
    let mut links = Vec::new();
    let mut rest = n;
    'outer: loop {
        for seg in closed_bottoms(rest, p) {
            let r = rest - seg;
            if digit_sum(r, p) < pm1 {
                break 'outer;
            }
            let link = kimura_n(r, p).expect("digit sum checked");
            if gen_binom_valuation(s, link / pm1, p) == Valuation::Finite(0) {
                links.push(link);
                rest = r - link;
                continue 'outer;
            }
        }
        break;
    }
    let mut acc = 0;
    let vertices = links
        .iter()
        .enumerate()
        .map(|(j, &nj)| {
            acc += nj;
            (acc, -(j as i64 + 1))
        })
        .collect();
    KimuraChain {
        p,
        n,
        s,
        links,
        vertices,
    }
}

/// Maximum pole order of B_n^{(l)}(x).
pub fn max_pole(n: u64, l: i64, p: Prime) -> u64 {
    kimura_chain(n, l, p).max_pole()
}

/// Vertices of the descending part of the Newton polygon, starting at (0, 0).
pub fn predicted_polygon(n: u64, l: i64, p: Prime) -> Vec<Vertex> {
    let chain = kimura_chain(n, l, p);
    std::iter::once((0, 0)).chain(chain.vertices).collect()
}

/// #([n−k] − [n]): maximum pole of B_{n−k}^{(−k)}(x) at p = 2.
pub fn max_pole_2_second_kind(n: u64, k: u64) -> u64 {
    assert!(k <= n);
    two_power_set(n - k).difference(&two_power_set(n)).count() as u64
}

/// #([n−k] − [n−1]): maximum pole of B_{n−k}^{(−k+1)}(x) at p = 2.
pub fn max_pole_2_second_kind_shifted(n: u64, k: u64) -> u64 {
    assert!(1 <= k && k <= n);
    two_power_set(n - k)
        .difference(&two_power_set(n - 1))
        .count() as u64
}

/// #([k−1] ∩ [n−k]): maximum pole of B_{n−k}^{(n)}(x) at p = 2.
pub fn max_pole_2_first_kind(n: u64, k: u64) -> u64 {
    assert!(1 <= k && k <= n);
    two_power_set(k - 1)
        .intersection(&two_power_set(n - k))
        .count() as u64
}

/// #([k] ∩ [n−k]): maximum pole of B_{n−k}^{(n+1)}(x) at p = 2.
pub fn max_pole_2_first_kind_shifted(n: u64, k: u64) -> u64 {
    assert!(k <= n);
    two_power_set(k).intersection(&two_power_set(n - k)).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    /// Least value over all digit windows with partial top digit.
    fn window_search(n: u64, q: Prime) -> Option<u64> {
        let digits = crate::basep::digits_u64(n, q);
        let pp = q.get();
        let mut best: Option<u64> = None;
        for lo in 0..digits.len() {
            let mut sum = 0u64;
            let mut val = 0u64;
            for hi in lo..digits.len() {
                let d = digits[hi] as u64;
                let place = pp.pow(hi as u32);
                let need = q.pm1() - sum;
                if d >= need && need > 0 {
                    let cand = val + need * place;
                    best = Some(best.map_or(cand, |b| b.min(cand)));
                    break;
                }
                sum += d;
                val += d * place;
            }
        }
        best
    }

    #[test]
    fn kimura_values() {
        assert_eq!(kimura_n(12, p(2)), Some(4));
        assert_eq!(kimura_n(10, p(3)), Some(10));
        assert_eq!(kimura_n(5, p(3)), Some(2));
        assert_eq!(kimura_n(9, p(3)), None);
        assert_eq!(kimura_n(0, p(5)), None);
    }

    #[test]
    fn kimura_is_least_window() {
        for q in [2, 3, 5, 7] {
            let q = p(q);
            for n in 1..3000 {
                assert_eq!(kimura_n(n, q), window_search(n, q), "n = {n}, p = {q}");
            }
        }
    }

    #[test]
    fn chain_examples() {
        assert_eq!(max_pole(3890, -241, p(3)), 1);
        assert_eq!(max_pole(2552, -348, p(5)), 1);
        let c = kimura_chain(0, 5, p(3));
        assert!(c.links.is_empty());
        assert_eq!(predicted_polygon(0, 5, p(3)), vec![(0, 0)]);
        assert_eq!(max_pole(4, -2, p(2)), 0);
    }

    #[test]
    fn chain_links_have_digit_sum() {
        for q in [2, 3, 5] {
            let q = p(q);
            for n in 0..200 {
                for l in [-40, -7, -1, n as i64 + 3] {
                    let c = kimura_chain(n, l, q);
                    assert!(c.links.iter().sum::<u64>() <= n);
                    for &nj in &c.links {
                        assert_eq!(digit_sum(nj, q), q.pm1());
                        assert_eq!(
                            gen_binom_valuation(c.s, nj / q.pm1(), q),
                            Valuation::Finite(0)
                        );
                    }
                    assert!(c.max_pole() <= digit_sum(n, q) / q.pm1());
                }
            }
        }
    }

    #[test]
    fn two_shortcuts() {
        assert_eq!(max_pole_2_second_kind(6, 2), 0);
        assert_eq!(max_pole_2_second_kind(9, 9), 0);
        assert_eq!(max_pole_2_first_kind(8, 6), 0);
        assert_eq!(max_pole_2_first_kind_shifted(8, 6), 1);
        for n in 1..=120u64 {
            for k in 1..=n {
                let d = n - k;
                let l = -(k as i64);
                assert_eq!(max_pole_2_second_kind(n, k), max_pole(d, l, Prime::TWO));
                assert_eq!(
                    max_pole_2_second_kind_shifted(n, k),
                    max_pole(d, l + 1, Prime::TWO)
                );
                assert_eq!(
                    max_pole_2_first_kind(n, k),
                    max_pole(d, n as i64, Prime::TWO)
                );
                assert_eq!(
                    max_pole_2_first_kind_shifted(n, k),
                    max_pole(d, n as i64 + 1, Prime::TWO)
                );
            }
        }
    }
}
