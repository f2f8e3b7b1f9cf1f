//! Smallest-prime-factor sieve: the ground truth for μ, λ, π and degree.
//!
//! The table stores `spf[n]` for every `n <= limit` with the sentinel
//! `spf[1] = 1`. Construction runs in fixed-size segments over a base list
//! of primes up to `sqrt(limit)`; the result does not depend on the segment
//! length.

use serde::Serialize;

use crate::error::invalid;
use crate::{isqrt, Error, Result, DEFAULT_MAX_ENTRIES};

/// Default number of entries sieved per segment.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 22;

#[derive(Clone, Copy, Debug)]
pub struct SieveConfig {
    /// Hard cap on `limit + 1`.
    pub max_entries: u64,
    pub segment_len: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            max_entries: DEFAULT_MAX_ENTRIES,
            segment_len: DEFAULT_SEGMENT_LEN,
        }
    }
}

/// Prime factorization as `(prime, exponent)` pairs with strictly increasing
/// primes. The unit factors as the empty list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Number of distinct primes (ω).
    pub fn distinct(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Number of prime factors counted with multiplicity (Ω).
    pub fn total(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// Largest exponent; zero for the unit.
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).max().unwrap_or(0)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mu(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.distinct() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn liouville(&self) -> i8 {
        if self.total() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn value(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Immutable smallest-prime-factor table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

/// Builds the table for `1..=limit` with the default configuration.
pub fn build_sieve(limit: u64) -> Result<FactorizationTable> {
    build_sieve_with(limit, &SieveConfig::default())
}

pub fn build_sieve_with(limit: u64, config: &SieveConfig) -> Result<FactorizationTable> {
    if limit == 0 {
        return Err(invalid("sieve limit must be at least 1"));
    }
    if config.segment_len == 0 {
        return Err(invalid("segment length must be positive"));
    }
    let entries = limit.saturating_add(1);
    if entries > config.max_entries || limit > u32::MAX as u64 {
        return Err(Error::ResourceLimit {
            what: "factorization table",
            requested: entries,
            budget: config.max_entries.min(u32::MAX as u64),
        });
    }

    let len = entries as usize;
    let mut spf = vec![0u32; len];
    spf[1] = 1;
    let base = base_primes(isqrt(limit) as usize);

    let seg = config.segment_len;
    let mut lo = 2usize;
    while lo < len {
        let hi = (lo + seg).min(len);
        let window = &mut spf[lo..hi];
        for &p in &base {
            let p = p as usize;
            if p * p >= hi {
                break;
            }
            let first = (p * p).max(lo.div_ceil(p) * p);
            let mut m = first;
            while m < hi {
                let slot = &mut window[m - lo];
                if *slot == 0 {
                    *slot = p as u32;
                }
                m += p;
            }
        }
        for (i, slot) in window.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = (lo + i) as u32;
            }
        }
        lo = hi;
    }

    Ok(FactorizationTable::from_spf_unchecked(limit, spf))
}

fn base_primes(bound: usize) -> Vec<u32> {
    if bound < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; bound + 1];
    let mut primes = Vec::new();
    for i in 2..=bound {
        if composite[i] {
            continue;
        }
        primes.push(i as u32);
        let mut m = i * i;
        while m <= bound {
            composite[m] = true;
            m += i;
        }
    }
    primes
}

impl FactorizationTable {
    pub(crate) fn from_spf_unchecked(limit: u64, spf: Vec<u32>) -> Self {
        let primes = (2..spf.len())
            .filter(|&n| spf[n] as usize == n)
            .map(|n| n as u32)
            .collect();
        FactorizationTable { limit, spf, primes }
    }

    /// Rebuilds a table from raw `spf` values (index 0 ignored), checking
    /// every invariant. Used by the cache loader.
    pub fn from_spf(spf: Vec<u32>) -> Result<Self> {
        if spf.len() < 2 {
            return Err(Error::Consistency("spf array shorter than 2".into()));
        }
        if spf[1] != 1 {
            return Err(Error::Consistency(format!(
                "spf[1] = {}, expected 1",
                spf[1]
            )));
        }
        for n in 2..spf.len() {
            let p = spf[n] as usize;
            // p must be a prime divisor of n, and no smaller than the least
            // prime factor of n / p.
            let ok = p >= 2
                && p <= n
                && n % p == 0
                && spf[p] as usize == p
                && (n == p || spf[n / p] as usize >= p);
            if !ok {
                return Err(Error::Consistency(format!(
                    "spf[{n}] = {p} is not the least prime factor"
                )));
            }
        }
        // A composite wrongly marked prime passes the local test above; the
        // linear-sieve walk reaches every composite q·n with q = spf(q·n).
        let table = Self::from_spf_unchecked(spf.len() as u64 - 1, spf);
        let len = table.spf.len() as u64;
        for n in 2..len {
            let top = table.spf[n as usize];
            for &q in table.primes.iter().take_while(|&&q| q <= top) {
                let m = q as u64 * n;
                if m >= len {
                    break;
                }
                if table.spf[m as usize] != q {
                    return Err(Error::Consistency(format!(
                        "spf[{m}] = {}, expected {q}",
                        table.spf[m as usize]
                    )));
                }
            }
        }
        Ok(table)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Raw smallest-prime-factor array; `spf()[0]` is 0.
    pub fn spf(&self) -> &[u32] {
        &self.spf
    }

    /// All primes up to the limit, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `<= bound`.
    pub fn primes_up_to(&self, bound: u64) -> Result<&[u32]> {
        self.check_range(bound.max(1), "prime bound")?;
        let k = self.primes.partition_point(|&p| p as u64 <= bound);
        Ok(&self.primes[..k])
    }

    pub fn smallest_factor(&self, n: u64) -> Result<u64> {
        self.check_range(n, "n")?;
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        if n < 2 {
            self.check_range(n.max(1), "n")?;
            return Ok(false);
        }
        Ok(self.smallest_factor(n)? == n)
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check_range(n, "n")?;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as u64;
            m /= p as usize;
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        Ok(Factorization { factors })
    }

    /// Möbius function from the factorization.
    pub fn mu(&self, n: u64) -> Result<i8> {
        Ok(self.factorize(n)?.mu())
    }

    /// Liouville function λ(n) = (-1)^Ω(n).
    pub fn liouville(&self, n: u64) -> Result<i8> {
        Ok(self.factorize(n)?.liouville())
    }

    /// Maximum exponent in the factorization; 0 for n = 1.
    pub fn degree(&self, n: u64) -> Result<u32> {
        Ok(self.factorize(n)?.degree())
    }

    /// π(x): number of primes `p <= x`.
    pub fn prime_count(&self, x: u64) -> Result<u64> {
        if x > self.limit {
            return Err(invalid(format!(
                "x = {x} exceeds sieve limit {}",
                self.limit
            )));
        }
        Ok(self.primes.partition_point(|&p| p as u64 <= x) as u64)
    }

    /// μ(1..=limit) as a flat vector (index 0 holds 0), computed with the
    /// linear recurrence over `spf` rather than per-value factorization.
    pub fn mu_values(&self) -> Vec<i8> {
        let mut mu = vec![0i8; self.spf.len()];
        if mu.len() > 1 {
            mu[1] = 1;
        }
        for n in 2..self.spf.len() {
            let p = self.spf[n] as usize;
            let rest = n / p;
            mu[n] = if rest % p == 0 { 0 } else { -mu[rest] };
        }
        mu
    }

    /// λ(1..=limit), index 0 holds 0.
    pub fn liouville_values(&self) -> Vec<i8> {
        let mut lambda = vec![0i8; self.spf.len()];
        if lambda.len() > 1 {
            lambda[1] = 1;
        }
        for n in 2..self.spf.len() {
            lambda[n] = -lambda[n / self.spf[n] as usize];
        }
        lambda
    }

    fn check_range(&self, n: u64, name: &str) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(invalid(format!("{name} = {n} outside 1..={}", self.limit)));
        }
        Ok(())
    }
}

/// Free-function spellings of the oracle queries.
pub fn factorize(n: u64, table: &FactorizationTable) -> Result<Factorization> {
    table.factorize(n)
}

pub fn mu_oracle(n: u64, table: &FactorizationTable) -> Result<i8> {
    table.mu(n)
}

pub fn lambda_oracle(n: u64, table: &FactorizationTable) -> Result<i8> {
    table.liouville(n)
}

pub fn pi_oracle(x: u64, table: &FactorizationTable) -> Result<u64> {
    table.prime_count(x)
}

pub fn degree(n: u64, table: &FactorizationTable) -> Result<u32> {
    table.degree(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division_spf(n: u64) -> u64 {
        if n == 1 {
            return 1;
        }
        (2..=n).find(|d| n % d == 0).unwrap()
    }

    #[test]
    fn tiny_tables() {
        let t = build_sieve(1).unwrap();
        assert_eq!(t.spf(), &[0, 1]);
        assert_eq!(t.prime_count(1).unwrap(), 0);

        let t = build_sieve(10).unwrap();
        assert_eq!(&t.spf()[1..], &[1, 2, 3, 2, 5, 2, 7, 2, 3, 2]);
    }

    #[test]
    fn zero_limit_rejected() {
        assert!(matches!(build_sieve(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn budget_enforced() {
        let cfg = SieveConfig {
            max_entries: 100,
            ..Default::default()
        };
        let err = build_sieve_with(100, &cfg).unwrap_err();
        match err {
            Error::ResourceLimit {
                requested, budget, ..
            } => {
                assert_eq!(requested, 101);
                assert_eq!(budget, 100);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_sieve_with(99, &cfg).is_ok());
    }

    #[test]
    fn matches_trial_division() {
        let t = build_sieve(3000).unwrap();
        for n in 1..=3000u64 {
            assert_eq!(
                t.smallest_factor(n).unwrap(),
                trial_division_spf(n),
                "n = {n}"
            );
        }
    }

    #[test]
    fn segment_length_irrelevant() {
        let reference = build_sieve(20_000).unwrap();
        for seg in [1usize, 2, 3, 7, 64, 1000, 19_999, 1 << 20] {
            let cfg = SieveConfig {
                segment_len: seg,
                ..Default::default()
            };
            assert_eq!(
                build_sieve_with(20_000, &cfg).unwrap(),
                reference,
                "segment {seg}"
            );
        }
    }

    #[test]
    fn worked_values() {
        let t = build_sieve(1000).unwrap();
        assert_eq!(t.prime_count(100).unwrap(), 25);
        assert_eq!(t.prime_count(10).unwrap(), 4);
        assert_eq!(t.prime_count(20).unwrap(), 8);
        assert_eq!(t.factorize(1).unwrap().factors, vec![]);
        assert_eq!(t.factorize(45).unwrap().factors, vec![(3, 2), (5, 1)]);
        assert_eq!(
            t.factorize(210).unwrap().factors,
            vec![(2, 1), (3, 1), (5, 1), (7, 1)]
        );
        assert_eq!(t.mu(1).unwrap(), 1);
        assert_eq!(t.mu(4).unwrap(), 0);
        assert_eq!(t.mu(6).unwrap(), 1);
        assert_eq!(t.liouville(1).unwrap(), 1);
        assert_eq!(t.liouville(12).unwrap(), -1);
        assert_eq!(t.liouville(36).unwrap(), 1);
        assert_eq!(t.degree(1).unwrap(), 0);
        assert_eq!(t.degree(45).unwrap(), 2);
        assert_eq!(t.degree(216).unwrap(), 3);
    }

    #[test]
    fn out_of_range_queries() {
        let t = build_sieve(50).unwrap();
        assert!(t.factorize(0).is_err());
        assert!(t.factorize(51).is_err());
        assert!(t.mu(51).is_err());
        assert!(t.liouville(0).is_err());
        assert!(t.degree(99).is_err());
        assert!(t.prime_count(51).is_err());
        assert_eq!(t.prime_count(0).unwrap(), 0);
    }

    #[test]
    fn flat_vectors_agree_with_factorization() {
        let t = build_sieve(5000).unwrap();
        let mu = t.mu_values();
        let lambda = t.liouville_values();
        for n in 1..=5000u64 {
            assert_eq!(mu[n as usize], t.mu(n).unwrap());
            assert_eq!(lambda[n as usize], t.liouville(n).unwrap());
        }
    }

    #[test]
    fn divisor_sum_of_mu() {
        let t = build_sieve(3000).unwrap();
        let mu = t.mu_values();
        let mut sums = vec![0i64; 3001];
        for d in 1..=3000usize {
            for m in (d..=3000).step_by(d) {
                sums[m] += mu[d] as i64;
            }
        }
        assert_eq!(sums[1], 1);
        assert!(sums[2..].iter().all(|&s| s == 0));
    }

    #[test]
    fn pi_steps_by_one_at_primes() {
        let t = build_sieve(2000).unwrap();
        let mut prev = 0;
        for x in 1..=2000u64 {
            let cur = t.prime_count(x).unwrap();
            let step = if t.is_prime(x).unwrap() { 1 } else { 0 };
            assert_eq!(cur, prev + step);
            prev = cur;
        }
    }

    #[test]
    fn from_spf_rejects_tampering() {
        let t = build_sieve(100).unwrap();
        assert_eq!(FactorizationTable::from_spf(t.spf().to_vec()).unwrap(), t);
        let mut bad = t.spf().to_vec();
        bad[45] = 5; // divides 45 but 3 is smaller
        assert!(FactorizationTable::from_spf(bad).is_err());
        let mut bad = t.spf().to_vec();
        bad[49] = 49;
        assert!(FactorizationTable::from_spf(bad).is_err());
    }

    proptest! {
        #[test]
        fn factorization_invariants(n in 1u64..=20_000) {
            let t = table_20k();
            let f = t.factorize(n).unwrap();
            prop_assert_eq!(f.value(), n);
            prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.factors.iter().all(|&(p, e)| e >= 1 && t.is_prime(p).unwrap()));
            let mu = t.mu(n).unwrap();
            prop_assert_eq!(mu != 0, f.is_squarefree());
            if mu != 0 {
                prop_assert_eq!(mu, t.liouville(n).unwrap());
            }
        }

        #[test]
        fn multiplicative_on_coprime_pairs(a in 1u64..=140, b in 1u64..=140) {
            let t = table_20k();
            if gcd(a, b) == 1 {
                prop_assert_eq!(t.mu(a * b).unwrap(), t.mu(a).unwrap() * t.mu(b).unwrap());
                prop_assert_eq!(
                    t.liouville(a * b).unwrap(),
                    t.liouville(a).unwrap() * t.liouville(b).unwrap()
                );
            }
        }
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    fn table_20k() -> &'static FactorizationTable {
        use std::sync::OnceLock;
        static T: OnceLock<FactorizationTable> = OnceLock::new();
        T.get_or_init(|| build_sieve(20_000).unwrap())
    }
}
