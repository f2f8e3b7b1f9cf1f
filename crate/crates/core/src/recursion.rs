//! μ(n) from its own predecessors.
//!
//! With the d = 1 term rectified from ⌊n/1⌋ to ⌊(n-1)/1⌋,
//!
//! ```text
//! μ(n) = -( (n - 1) + Σ_{d=2}^{n-1} μ(d)·⌊n/d⌋ )
//! ```
//!
//! Each value is a negative feedback on the weighted sum of everything
//! before it, so the series has to be grown strictly in order of n. The
//! [`Strategy::Blocked`] route evaluates the same sum over runs of d that
//! share a quotient ⌊n/d⌋, using Mertens prefix sums, which takes each step
//! from O(n) to O(√n).

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::sieve::FactorizationTable;
use crate::{Error, Result, DEFAULT_MAX_ENTRIES};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Term-by-term sum over every d.
    Naive,
    /// Quotient blocks over Mertens prefix sums.
    #[default]
    Blocked,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "blocked" => Ok(Strategy::Blocked),
            other => Err(invalid(format!("unknown strategy {other:?}"))),
        }
    }
}

/// μ(1..=limit) together with the Mertens prefix sums M(n).
///
/// Index 0 of both arrays is a zero placeholder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoebiusSeries {
    mu: Vec<i8>,
    mertens: Vec<i64>,
    max_entries: u64,
}

impl Default for MoebiusSeries {
    fn default() -> Self {
        Self::new()
    }
}

impl MoebiusSeries {
    /// The seed series: μ(1) = +1.
    pub fn new() -> Self {
        MoebiusSeries {
            mu: vec![0, 1],
            mertens: vec![0, 1],
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }

    pub fn with_budget(mut self, max_entries: u64) -> Self {
        self.max_entries = max_entries;
        self
    }

    /// Series read off the sieve instead of the recursion.
    pub fn from_oracle(table: &FactorizationTable) -> Self {
        let mu = table.mu_values();
        Self::from_values_unchecked(mu)
    }

    /// Builds a series from explicit μ(1..=n) values (`values[0]` is μ(1)).
    pub fn from_mu_values(values: &[i8]) -> Result<Self> {
        if values.first() != Some(&1) {
            return Err(Error::Consistency(
                "series must start with mu(1) = +1".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !(-1..=1).contains(v)) {
            return Err(Error::Consistency(format!(
                "mu({}) = {} is outside {{-1, 0, +1}}",
                i + 1,
                values[i]
            )));
        }
        let mut mu = Vec::with_capacity(values.len() + 1);
        mu.push(0);
        mu.extend_from_slice(values);
        Ok(Self::from_values_unchecked(mu))
    }

    fn from_values_unchecked(mu: Vec<i8>) -> Self {
        let mut mertens = Vec::with_capacity(mu.len());
        let mut acc = 0i64;
        for &v in &mu {
            acc += v as i64;
            mertens.push(acc);
        }
        MoebiusSeries {
            mu,
            mertens,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }

    pub fn limit(&self) -> u64 {
        self.mu.len() as u64 - 1
    }

    pub fn covers(&self, n: u64) -> bool {
        n >= 1 && n <= self.limit()
    }

    pub fn mu(&self, n: u64) -> Result<i8> {
        self.require(n)?;
        Ok(self.mu[n as usize])
    }

    /// M(n) = Σ_{k<=n} μ(k); M(0) = 0.
    pub fn mertens(&self, n: u64) -> Result<i64> {
        if n > self.limit() {
            return Err(invalid(format!(
                "series covers 1..={}, asked for M({n})",
                self.limit()
            )));
        }
        Ok(self.mertens[n as usize])
    }

    /// μ(1..=limit), without the placeholder.
    pub fn mu_slice(&self) -> &[i8] {
        &self.mu[1..]
    }

    /// M(1..=limit), without the placeholder.
    pub fn mertens_slice(&self) -> &[i64] {
        &self.mertens[1..]
    }

    fn require(&self, n: u64) -> Result<()> {
        if !self.covers(n) {
            return Err(invalid(format!(
                "series covers 1..={}, needs {n}",
                self.limit()
            )));
        }
        Ok(())
    }

    /// Grows the series in place up to `new_limit`.
    pub fn extend_to(&mut self, new_limit: u64, strategy: Strategy) -> Result<()> {
        if new_limit <= self.limit() {
            return Ok(());
        }
        let entries = new_limit.saturating_add(1);
        if entries > self.max_entries {
            return Err(Error::ResourceLimit {
                what: "Moebius series",
                requested: entries,
                budget: self.max_entries,
            });
        }
        if new_limit > u32::MAX as u64 {
            return Err(Error::ResourceLimit {
                what: "Moebius series",
                requested: entries,
                budget: u32::MAX as u64,
            });
        }
        let extra = (new_limit - self.limit()) as usize;
        self.mu.reserve(extra);
        self.mertens.reserve(extra);
        for n in self.limit() + 1..=new_limit {
            let value = sb_mu_with(n, self, strategy)?;
            let m = self.mertens[n as usize - 1] + value as i64;
            self.mu.push(value);
            self.mertens.push(m);
        }
        Ok(())
    }
}

/// f(d) for a given n: μ(d)·⌊n/d⌋, except f(1) = μ(1)·⌊(n-1)/1⌋.
pub fn f_term(d: u64, n: u64, series: &MoebiusSeries) -> Result<i64> {
    if d == 0 || d > n {
        return Err(invalid(format!(
            "f_term needs 1 <= d <= n, got d = {d}, n = {n}"
        )));
    }
    let mu = series.mu(d)? as i64;
    let quotient = if d == 1 { n - 1 } else { n / d };
    Ok(mu * quotient as i64)
}

/// μ(n) via the term-by-term recursion over `prior`.
pub fn sb_mu(n: u64, prior: &MoebiusSeries) -> Result<i8> {
    sb_mu_with(n, prior, Strategy::Naive)
}

/// μ(n) via the recursion, choosing how the inner sum is evaluated.
///
/// The d = n term is excluded; the negated sum over d = 1..n-1 *is* μ(n).
pub fn sb_mu_with(n: u64, prior: &MoebiusSeries, strategy: Strategy) -> Result<i8> {
    if n < 2 {
        return Err(invalid(format!("recursion starts at n = 2, got {n}")));
    }
    if n > u32::MAX as u64 {
        return Err(invalid(format!(
            "recursion supports n <= {}, got {n}",
            u32::MAX
        )));
    }
    if prior.limit() < n - 1 {
        return Err(invalid(format!(
            "recursion for mu({n}) needs mu(1..={}), series stops at {}",
            n - 1,
            prior.limit()
        )));
    }
    let tail = match strategy {
        Strategy::Naive => naive_tail(n, prior),
        Strategy::Blocked => blocked_tail(n, prior),
    };
    let total = (n as i64 - 1) * prior.mu[1] as i64 + tail;
    let value = -total;
    if !(-1..=1).contains(&value) {
        return Err(Error::Consistency(format!(
            "recursion produced mu({n}) = {value}; the prior series is corrupt"
        )));
    }
    Ok(value as i8)
}

/// Σ_{d=2}^{n-1} μ(d)·⌊n/d⌋, one term at a time.
fn naive_tail(n: u64, s: &MoebiusSeries) -> i64 {
    let mut acc = 0i64;
    for d in 2..n {
        acc += s.mu[d as usize] as i64 * (n / d) as i64;
    }
    acc
}

/// Σ_{d=2}^{n-1} μ(d)·⌊n/d⌋ with d <= √n taken term by term and the rest
/// grouped into maximal blocks (⌊n/(q+1)⌋, ⌊n/q⌋] sharing the quotient q,
/// each contributing q·(M(hi) - M(lo - 1)).
fn blocked_tail(n: u64, s: &MoebiusSeries) -> i64 {
    // Series limits stay below 2^32, and 32-bit division is much cheaper.
    let root = crate::isqrt(n) as u32;
    let n = n as u32;
    let (mu, m) = (&s.mu, &s.mertens);
    let last = n - 1;
    let mut acc = 0i64;
    for d in 2..=root.min(last) {
        acc += mu[d as usize] as i64 * (n / d) as i64;
    }
    // Blocks for quotients q = 1, 2, ... while the block lies above root.
    let mut hi = last;
    let mut q = 1u32;
    while hi > root {
        let lo = (n / (q + 1)).max(root) + 1;
        if lo <= hi {
            acc += q as i64 * (m[hi as usize] - m[lo as usize - 1]);
        }
        hi = lo - 1;
        q += 1;
    }
    acc
}

/// Grows `series` to `new_limit`; extending to the current limit is a no-op.
pub fn extend_series(
    mut series: MoebiusSeries,
    new_limit: u64,
    strategy: Strategy,
) -> Result<MoebiusSeries> {
    if new_limit < series.limit() {
        return Err(invalid(format!(
            "new limit {new_limit} is below the current limit {}",
            series.limit()
        )));
    }
    series.extend_to(new_limit, strategy)?;
    Ok(series)
}

/// Convenience: μ(1..=limit) grown from μ(1) by the recursion.
pub fn moebius_series(limit: u64, strategy: Strategy) -> Result<MoebiusSeries> {
    if limit == 0 {
        return Err(invalid("series limit must be at least 1"));
    }
    extend_series(MoebiusSeries::new(), limit, strategy)
}

/// Σ_{d=1}^{n} μ(d)·⌊n/d⌋, which is 1 for every n; the rectified version
/// (d = 1 term taken as n - 1) is 0. Unlike [`sb_mu`], the d = n term is
/// included.
pub fn meissel_sum(n: u64, series: &MoebiusSeries, rectified: bool) -> Result<i64> {
    if n == 0 {
        return Err(invalid("meissel sum needs n >= 1"));
    }
    series.require(n)?;
    let mut acc = 0i64;
    for d in 1..=n {
        acc += f_term(d, n, series)?;
    }
    if !rectified {
        acc += series.mu[1] as i64;
    }
    Ok(acc)
}

/// One row of the full Meissel table for n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeisselRow {
    pub d: u64,
    pub mu: i8,
    pub quotient: u64,
    pub f: i64,
    /// d is a product of primes <= √n only (the "no large prime" divisors).
    pub small_prime_only: bool,
}

/// Every d in 1..=n with its f(d), flagging the divisors built from small
/// primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeisselTable {
    pub n: u64,
    pub rectified: bool,
    pub rows: Vec<MeisselRow>,
}

impl MeisselTable {
    /// Σ f(d) over all rows: 1 unrectified, 0 rectified.
    pub fn total(&self) -> i64 {
        self.rows.iter().map(|r| r.f).sum()
    }

    /// Σ f(d*) over the small-prime rows, the Legendre sum.
    pub fn small_prime_total(&self) -> i64 {
        self.rows
            .iter()
            .filter(|r| r.small_prime_only)
            .map(|r| r.f)
            .sum()
    }

    pub fn render_text(&self, small_prime_count: u64) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "n = {}{}\n",
            self.n,
            if self.rectified { " (rectified)" } else { "" }
        ));
        out.push_str("     d   f(d)\n");
        for r in self.rows.iter().filter(|r| r.f != 0) {
            let mark = if r.small_prime_only { "*" } else { " " };
            out.push_str(&format!("{:>6}{} {:>5}\n", r.d, mark, crate::signed(r.f)));
        }
        out.push_str(&format!("   sum {:>5}\n", crate::signed(self.total())));
        let star = self.small_prime_total();
        out.push_str(&format!("sum over d* = {star}\n"));
        if self.rectified {
            out.push_str(&format!(
                "{star} + pi(n^(1/2)) = {} = pi({})\n",
                star + small_prime_count as i64,
                self.n
            ));
        } else {
            out.push_str(&format!(
                "{star} - 1 + pi(n^(1/2)) = {} = pi({})\n",
                star - 1 + small_prime_count as i64,
                self.n
            ));
        }
        out.push_str("(* = d built from primes <= n^(1/2) only)\n");
        out
    }
}

/// Builds the Meissel table for n, marking the rows whose d has no prime
/// factor above ⌊√n⌋.
pub fn meissel_table(
    n: u64,
    series: &MoebiusSeries,
    table: &FactorizationTable,
    rectified: bool,
) -> Result<MeisselTable> {
    if n == 0 {
        return Err(invalid("meissel table needs n >= 1"));
    }
    series.require(n)?;
    if table.limit() < n {
        return Err(invalid(format!(
            "sieve covers {}, needs {n}",
            table.limit()
        )));
    }
    let root = crate::isqrt(n);
    let mut rows = Vec::with_capacity(n as usize);
    for d in 1..=n {
        let mu = series.mu(d)?;
        let quotient = if d == 1 && rectified { n - 1 } else { n / d };
        let largest = table.factorize(d)?.factors.last().map_or(1, |&(p, _)| p);
        rows.push(MeisselRow {
            d,
            mu,
            quotient,
            f: mu as i64 * quotient as i64,
            small_prime_only: largest <= root,
        });
    }
    Ok(MeisselTable { n, rectified, rows })
}
