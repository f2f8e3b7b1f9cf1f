//! Rectified Legendre prime count.
//!
//! ```text
//! π(n) = π(⌊√n⌋) + Σ_{d} f(d)
//! ```
//!
//! where d runs over the square-free products of the primes `<= ⌊√n⌋`
//! (1 included) and f(1) = n - 1 rather than n. Products above n have a
//! zero quotient and drop out.

use serde::Serialize;

use crate::error::invalid;
use crate::recursion::MoebiusSeries;
use crate::sieve::FactorizationTable;
use crate::{isqrt, signed, Error, Result};

/// Prime sets larger than this are never enumerated without a bound.
pub const MAX_UNBOUNDED_PRIMES: usize = 20;

/// Square-free products of a base prime set, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SquarefreeDivisorSet {
    pub base_primes: Vec<u64>,
    /// `(product, number of prime factors)`, ascending by product.
    pub divisors: Vec<(u64, u32)>,
}

impl SquarefreeDivisorSet {
    pub fn values(&self) -> Vec<u64> {
        self.divisors.iter().map(|&(d, _)| d).collect()
    }
}

fn check_base(base_primes: &[u64], table: Option<&FactorizationTable>) -> Result<()> {
    if base_primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("base primes must be strictly increasing"));
    }
    for &p in base_primes {
        let prime = match table {
            Some(t) if p <= t.limit() => t.is_prime(p)?,
            _ => is_prime_trial(p),
        };
        if !prime {
            return Err(invalid(format!("{p} is not prime")));
        }
    }
    Ok(())
}

fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// All products of distinct `base_primes` (including 1), optionally only
/// those `<= bound`. Without a bound the set has 2^m members, so m is capped
/// at [`MAX_UNBOUNDED_PRIMES`].
pub fn enumerate_squarefree_products(
    base_primes: &[u64],
    bound: Option<u64>,
) -> Result<SquarefreeDivisorSet> {
    check_base(base_primes, None)?;
    enumerate_checked(base_primes, bound)
}

fn enumerate_checked(base_primes: &[u64], bound: Option<u64>) -> Result<SquarefreeDivisorSet> {
    if bound.is_none() && base_primes.len() > MAX_UNBOUNDED_PRIMES {
        return Err(Error::ResourceLimit {
            what: "unbounded square-free enumeration",
            requested: 1u64 << base_primes.len().min(63),
            budget: 1 << MAX_UNBOUNDED_PRIMES,
        });
    }
    let cap = bound.unwrap_or(u64::MAX);
    let mut divisors = Vec::new();
    let mut stack = vec![(1u64, 0usize, 0u32)];
    while let Some((d, next, count)) = stack.pop() {
        divisors.push((d, count));
        for (i, &p) in base_primes.iter().enumerate().skip(next) {
            match d.checked_mul(p) {
                Some(v) if v <= cap => stack.push((v, i + 1, count + 1)),
                Some(_) => break,
                None => {
                    if bound.is_none() {
                        return Err(Error::Overflow(format!(
                            "square-free product of {base_primes:?} exceeds u64"
                        )));
                    }
                    break;
                }
            }
        }
    }
    divisors.sort_unstable();
    Ok(SquarefreeDivisorSet {
        base_primes: base_primes.to_vec(),
        divisors,
    })
}

/// μ(d) for a square-free product with `count` prime factors: from the
/// series when it covers d, else (-1)^count.
pub fn divisor_mu(d: u64, count: u32, series: &MoebiusSeries) -> i8 {
    if series.covers(d) {
        series.mu(d).unwrap_or(0)
    } else if count % 2 == 0 {
        1
    } else {
        -1
    }
}

fn small_primes(n: u64, oracle: &FactorizationTable) -> Result<(u64, Vec<u64>)> {
    if n < 2 {
        return Err(invalid(format!("prime counting needs n >= 2, got {n}")));
    }
    let root = isqrt(n);
    if oracle.limit() < root {
        return Err(invalid(format!(
            "sieve covers {}, needs floor(sqrt({n})) = {root}",
            oracle.limit()
        )));
    }
    let primes = oracle
        .primes_up_to(root)?
        .iter()
        .map(|&p| p as u64)
        .collect();
    Ok((root, primes))
}

/// Σ f(d) over the square-free products d <= n of primes <= ⌊√n⌋.
///
/// With `rectified = false` the d = 1 term is n instead of n - 1.
pub fn legendre_sum(
    n: u64,
    oracle: &FactorizationTable,
    series: &MoebiusSeries,
    rectified: bool,
) -> Result<i64> {
    let (_, primes) = small_primes(n, oracle)?;
    let mut acc = if rectified { n as i64 - 1 } else { n as i64 };
    // Depth-first over products in increasing prime order; a product that
    // passes n prunes every extension of it.
    let mut stack: Vec<(u64, usize, u32)> = vec![(1, 0, 0)];
    while let Some((d, next, count)) = stack.pop() {
        for (i, &p) in primes.iter().enumerate().skip(next) {
            let v = d * p;
            if v > n {
                break;
            }
            let mu = divisor_mu(v, count + 1, series) as i64;
            acc += mu * (n / v) as i64;
            stack.push((v, i + 1, count + 1));
        }
    }
    Ok(acc)
}

/// π(n) via the rectified Legendre formula.
pub fn legendre_pi(n: u64, oracle: &FactorizationTable, series: &MoebiusSeries) -> Result<u64> {
    let sum = legendre_sum(n, oracle, series, true)?;
    let base = oracle.prime_count(isqrt(n))?;
    let pi = base as i64 + sum;
    if pi < 0 {
        return Err(Error::Consistency(format!(
            "negative prime count {pi} for n = {n}"
        )));
    }
    Ok(pi as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermRow {
    pub d: u64,
    pub mu: i8,
    pub quotient: u64,
    pub contribution: i64,
    pub prime_factors: u32,
}

/// The expanded Legendre sum for one n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermBreakdown {
    pub n: u64,
    pub root: u64,
    pub small_primes: Vec<u64>,
    pub rows: Vec<TermRow>,
    /// False when the prime set was too large to list the zero-quotient
    /// products beyond n.
    pub complete: bool,
}

impl TermBreakdown {
    pub fn sum(&self) -> i64 {
        self.rows.iter().map(|r| r.contribution).sum()
    }

    /// π(⌊√n⌋).
    pub fn small_prime_count(&self) -> u64 {
        self.small_primes.len() as u64
    }

    pub fn prime_count(&self) -> i64 {
        self.small_prime_count() as i64 + self.sum()
    }

    /// The signed quotients on three lines: d = 1 with the single primes,
    /// then the pairs, then every longer product. For n = 100 the first
    /// line is `+ 99 - 50 - 33 - 20 - 14`.
    pub fn expansion_lines(&self) -> Vec<String> {
        let group_of = |r: &TermRow| r.prime_factors.clamp(1, 3);
        let mut rows: Vec<&TermRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| (group_of(r), r.d));
        let mut lines: Vec<String> = Vec::new();
        let mut current = None;
        for r in rows {
            let group = group_of(r);
            let sign = if r.mu < 0 { "-" } else { "+" };
            let term = format!("{sign} {}", r.quotient);
            if current == Some(group) {
                let last = lines.last_mut().expect("group started");
                last.push(' ');
                last.push_str(&term);
            } else {
                lines.push(term);
                current = Some(group);
            }
        }
        lines
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "n = {}, small primes <= {}: {}\n",
            self.n,
            self.root,
            join(&self.small_primes)
        ));
        out.push_str(&format!(
            "{:>8} {:>6} {:>8} {:>6}\n",
            "d", "mu(d)", "[n/d]", "f(d)"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:>8} {:>6} {:>8} {:>6}\n",
                r.d,
                signed(r.mu as i64),
                r.quotient,
                signed(r.contribution)
            ));
        }
        out.push_str(&format!(
            "{:>8} {:>6} {:>8} {:>6}\n",
            "sum",
            "",
            "",
            self.sum()
        ));
        if !self.complete {
            out.push_str("(products above n omitted)\n");
        }
        for (i, line) in self.expansion_lines().iter().enumerate() {
            let lead = if i == 0 { "=" } else { " " };
            out.push_str(&format!("{lead} {line}\n"));
        }
        out.push_str(&format!("= {}\n", self.sum()));
        out.push_str(&format!(
            "pi({}) = {}\n",
            self.root,
            self.small_prime_count()
        ));
        out.push_str(&format!(
            "pi({}) = pi({}) + {} = {} + {} = {}\n",
            self.n,
            self.root,
            self.sum(),
            self.small_prime_count(),
            self.sum(),
            self.prime_count()
        ));
        out
    }
}

fn join(v: &[u64]) -> String {
    v.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// One row per square-free product of the small primes, including products
/// above n (quotient 0) whenever the prime set is small enough to list them.
pub fn term_breakdown(
    n: u64,
    oracle: &FactorizationTable,
    series: &MoebiusSeries,
) -> Result<TermBreakdown> {
    let (root, primes) = small_primes(n, oracle)?;
    let complete = primes.len() <= MAX_UNBOUNDED_PRIMES;
    let bound = if complete { None } else { Some(n) };
    let set = enumerate_checked(&primes, bound)?;
    let rows = set
        .divisors
        .iter()
        .map(|&(d, count)| {
            let mu = divisor_mu(d, count, series);
            let quotient = if d == 1 { n - 1 } else { n / d };
            TermRow {
                d,
                mu,
                quotient,
                contribution: mu as i64 * quotient as i64,
                prime_factors: count,
            }
        })
        .collect();
    Ok(TermBreakdown {
        n,
        root,
        small_primes: primes,
        rows,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursion::{moebius_series, Strategy};
    use crate::sieve::build_sieve;

    fn fixtures(n: u64) -> (FactorizationTable, MoebiusSeries) {
        (
            build_sieve(n).unwrap(),
            moebius_series(n, Strategy::Blocked).unwrap(),
        )
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            enumerate_squarefree_products(&[], None).unwrap().values(),
            vec![1]
        );
        assert_eq!(
            enumerate_squarefree_products(&[2, 3], None)
                .unwrap()
                .values(),
            vec![1, 2, 3, 6]
        );
        let set = enumerate_squarefree_products(&[2, 3, 5, 7], None).unwrap();
        assert_eq!(set.divisors.len(), 16);
        assert_eq!(*set.values().last().unwrap(), 210);
        let bounded = enumerate_squarefree_products(&[2, 3, 5, 7], Some(100)).unwrap();
        assert_eq!(
            bounded.values(),
            vec![1, 2, 3, 5, 6, 7, 10, 14, 15, 21, 30, 35, 42, 70]
        );
    }

    #[test]
    fn enumerate_rejects_bad_input() {
        assert!(enumerate_squarefree_products(&[3, 2], None).is_err());
        assert!(enumerate_squarefree_products(&[2, 2], None).is_err());
        assert!(enumerate_squarefree_products(&[2, 4], None).is_err());
        assert!(enumerate_squarefree_products(&[1], None).is_err());
    }

    #[test]
    fn worked_counts() {
        let (t, s) = fixtures(100);
        assert_eq!(legendre_pi(100, &t, &s).unwrap(), 25);
        assert_eq!(legendre_pi(20, &t, &s).unwrap(), 8);
        assert_eq!(legendre_pi(4, &t, &s).unwrap(), 2);
        assert_eq!(legendre_pi(2, &t, &s).unwrap(), 1);
        assert_eq!(legendre_pi(3, &t, &s).unwrap(), 2);
        assert_eq!(legendre_sum(20, &t, &s, false).unwrap(), 7);
        assert!(legendre_pi(1, &t, &s).is_err());
    }

    #[test]
    fn insufficient_sieve() {
        let t = build_sieve(9).unwrap();
        let s = MoebiusSeries::new();
        assert!(legendre_pi(100, &t, &s).is_err());
        // Falls back to (-1)^k for divisors the series does not cover.
        let t = build_sieve(10).unwrap();
        assert_eq!(legendre_pi(100, &t, &s).unwrap(), 25);
    }

    #[test]
    fn breakdown_for_hundred() {
        let (t, s) = fixtures(100);
        let b = term_breakdown(100, &t, &s).unwrap();
        assert_eq!(b.rows.len(), 16);
        assert!(b.complete);
        assert_eq!(
            b.rows[0],
            TermRow {
                d: 1,
                mu: 1,
                quotient: 99,
                contribution: 99,
                prime_factors: 0
            }
        );
        let r105 = b.rows.iter().find(|r| r.d == 105).unwrap();
        assert_eq!((r105.mu, r105.quotient, r105.contribution), (-1, 0, 0));
        assert_eq!(b.sum(), 21);
        assert_eq!(b.prime_count(), 25);
        assert_eq!(
            b.expansion_lines(),
            vec![
                "+ 99 - 50 - 33 - 20 - 14",
                "+ 16 + 10 + 7 + 6 + 4 + 2",
                "- 3 - 2 - 1 - 0 + 0"
            ]
        );
    }

    #[test]
    fn series_and_parity_agree() {
        let (_, s) = fixtures(5000);
        let set = enumerate_squarefree_products(&[2, 3, 5, 7, 11, 13, 17], Some(5000)).unwrap();
        let empty = MoebiusSeries::new();
        for &(d, count) in &set.divisors {
            assert_eq!(
                divisor_mu(d, count, &s),
                divisor_mu(d, count, &empty),
                "d = {d}"
            );
        }
    }

    #[test]
    fn zero_tail_and_unit_quotient() {
        let (t, s) = fixtures(2000);
        for n in [30u64, 97, 100, 360, 1000, 1999] {
            let b = term_breakdown(n, &t, &s).unwrap();
            for r in &b.rows {
                if r.d > n {
                    assert_eq!(r.contribution, 0);
                } else if 2 * r.d > n && r.d > 1 {
                    assert_eq!(r.contribution, r.mu as i64);
                }
            }
            assert_eq!(b.sum(), legendre_sum(n, &t, &s, true).unwrap());
        }
    }

    #[test]
    fn rectification_offset() {
        let (t, s) = fixtures(3000);
        for n in 2..=3000u64 {
            let root_pi = t.prime_count(isqrt(n)).unwrap() as i64;
            let un = legendre_sum(n, &t, &s, false).unwrap();
            let re = legendre_sum(n, &t, &s, true).unwrap();
            assert_eq!(un + root_pi - 1, re + root_pi);
        }
    }

    #[test]
    fn matches_sieve_count() {
        let (t, s) = fixtures(20_000);
        for n in 2..=20_000u64 {
            assert_eq!(
                legendre_pi(n, &t, &s).unwrap(),
                t.prime_count(n).unwrap(),
                "n = {n}"
            );
        }
    }
}
