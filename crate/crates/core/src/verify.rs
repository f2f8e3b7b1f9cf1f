//! Every cross-check in the library, runnable as one suite.
//!
//! Each check turns library errors into failures with a message rather than
//! aborting, so one bad check does not hide the others.

use std::time::Instant;

use serde::Serialize;

use crate::cascade::{build_cascade, doubling_trace, mu_from_penultimate, section_split, Variant};
use crate::combinatorics::{
    build_degree_collection, build_divisor_collection, degree_liouville_sum, pascal_column_report,
    squarefree_moebius_sum,
};
use crate::error::invalid;
use crate::growth::{
    compare_excursions, de_moivre_laplace_fraction, default_sample_points, random_walk_baseline,
    run_length_histogram, sample_growth, sign_balance, DEFAULT_EPSILON,
};
use crate::legendre::{legendre_pi, legendre_sum, term_breakdown};
use crate::recursion::{meissel_sum, moebius_series, sb_mu_with, MoebiusSeries, Strategy};
use crate::sieve::FactorizationTable;
use crate::{isqrt, Result};

pub const QUICK_LIMIT: u64 = 5_000;
pub const DEFAULT_LIMIT: u64 = 50_000;

const STRATEGY_CAP: u64 = 5_000;
const IDENTITY_CAP: u64 = 10_000;
const LEGENDRE_CAP: u64 = 100_000;
const BREAKDOWN_CAP: u64 = 1_000;
const TRIAL_DIVISION_CAP: u64 = 20_000;
const COLLECTION_PRIMES: usize = 16;
const BASELINE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub limit: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("verification at limit {}\n", self.limit);
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<34} {:>7.3}s  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.seconds,
                c.detail
            ));
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.checks.len(),
            failed
        ));
        out
    }
}

type CheckResult = std::result::Result<String, String>;

fn fail<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Runs the suite at `limit`; `table` and `series` must both cover it.
/// `series` is expected to come from the recursion (or its cache), since
/// one of the checks compares it against the sieve.
pub fn run_all(
    limit: u64,
    table: &FactorizationTable,
    series: &MoebiusSeries,
) -> Result<VerifyReport> {
    if limit < 2 {
        return Err(invalid(format!(
            "verification needs limit >= 2, got {limit}"
        )));
    }
    if table.limit() < limit || series.limit() < limit {
        return Err(invalid(format!(
            "limit {limit} exceeds sieve ({}) or series ({}) coverage",
            table.limit(),
            series.limit()
        )));
    }
    let oracle_mu = table.mu_values();
    let ctx = Ctx {
        limit,
        table,
        series,
        oracle_mu: &oracle_mu,
    };

    let suite: [(&'static str, fn(&Ctx) -> CheckResult); 21] = [
        ("sieve.trial_division", sieve_trial_division),
        ("sieve.squarefree_and_parity", sieve_squarefree_parity),
        ("sieve.multiplicativity", sieve_multiplicativity),
        ("sieve.divisor_sum", sieve_divisor_sum),
        ("sieve.prime_count_steps", sieve_prime_steps),
        ("recursion.oracle_equivalence", recursion_oracle),
        ("recursion.strategy_agreement", recursion_strategies),
        ("recursion.turnaround_range", recursion_turnaround),
        ("recursion.meissel_identities", recursion_meissel),
        ("legendre.oracle_equivalence", legendre_oracle),
        ("legendre.rectification", legendre_rectification),
        ("legendre.tail_and_unit_quotients", legendre_tail),
        ("cascade.totals_and_penultimate", cascade_totals),
        ("cascade.section_balance", cascade_sections),
        ("cascade.doubling_trace", cascade_doubling),
        (
            "combinatorics.squarefree_collections",
            combinatorics_squarefree,
        ),
        ("combinatorics.degree_collections", combinatorics_degree),
        ("combinatorics.pascal_columns", combinatorics_pascal),
        ("growth.prefix_sums", growth_prefix),
        ("growth.signs_and_runs", growth_runs),
        ("growth.baseline", growth_baseline),
    ];
    let checks = suite
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let outcome = check(&ctx);
            let seconds = start.elapsed().as_secs_f64();
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome {
                name,
                passed,
                detail,
                seconds,
            }
        })
        .collect();
    Ok(VerifyReport { limit, checks })
}

struct Ctx<'a> {
    limit: u64,
    table: &'a FactorizationTable,
    series: &'a MoebiusSeries,
    oracle_mu: &'a [i8],
}

impl Ctx<'_> {
    fn cap(&self, c: u64) -> u64 {
        self.limit.min(c)
    }
}

fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn sieve_trial_division(c: &Ctx) -> CheckResult {
    let top = c.cap(TRIAL_DIVISION_CAP);
    for n in 1..=top {
        let f = fail(c.table.factorize(n))?;
        if f.factors != trial_factor(n) {
            return Err(format!("factorization of {n} is {f}"));
        }
    }
    Ok(format!("n <= {top}"))
}

fn sieve_squarefree_parity(c: &Ctx) -> CheckResult {
    let lambda = c.table.liouville_values();
    for n in 1..=c.limit {
        let f = fail(c.table.factorize(n))?;
        let mu = c.oracle_mu[n as usize];
        if (mu != 0) != f.factors.iter().all(|&(_, e)| e == 1) {
            return Err(format!("mu({n}) = {mu} disagrees with {f}"));
        }
        if mu != 0 && mu != lambda[n as usize] {
            return Err(format!(
                "mu({n}) = {mu} but lambda = {}",
                lambda[n as usize]
            ));
        }
        if f.value() != n {
            return Err(format!("factorization of {n} multiplies to {}", f.value()));
        }
    }
    Ok(format!("n <= {}", c.limit))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sieve_multiplicativity(c: &Ctx) -> CheckResult {
    let lambda = c.table.liouville_values();
    let mut pairs = 0u64;
    for a in 2..=c.limit.min(200) {
        for b in a..=c.limit / a {
            if gcd(a, b) != 1 {
                continue;
            }
            let (ab, a, b) = ((a * b) as usize, a as usize, b as usize);
            if c.oracle_mu[ab] != c.oracle_mu[a] * c.oracle_mu[b]
                || lambda[ab] != lambda[a] * lambda[b]
            {
                return Err(format!("not multiplicative at {a} * {b}"));
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} coprime pairs"))
}

fn sieve_divisor_sum(c: &Ctx) -> CheckResult {
    let n = c.limit as usize;
    let mut acc = vec![0i64; n + 1];
    for d in 1..=n {
        let m = c.oracle_mu[d] as i64;
        if m != 0 {
            for k in (d..=n).step_by(d) {
                acc[k] += m;
            }
        }
    }
    if acc[1] != 1 {
        return Err(format!("divisor sum at 1 is {}", acc[1]));
    }
    match (2..=n).find(|&k| acc[k] != 0) {
        Some(k) => Err(format!("divisor sum at {k} is {}", acc[k])),
        None => Ok(format!("n <= {n}")),
    }
}

fn sieve_prime_steps(c: &Ctx) -> CheckResult {
    let mut prev = fail(c.table.prime_count(1))?;
    for x in 2..=c.limit {
        let now = fail(c.table.prime_count(x))?;
        let step = fail(c.table.is_prime(x))? as u64;
        if now != prev + step {
            return Err(format!("pi({x}) = {now} after pi({}) = {prev}", x - 1));
        }
        prev = now;
    }
    Ok(format!("pi({}) = {prev}", c.limit))
}

fn recursion_oracle(c: &Ctx) -> CheckResult {
    let (mu, mertens) = (c.series.mu_slice(), c.series.mertens_slice());
    let mut m = 0i64;
    for n in 1..=c.limit as usize {
        if mu[n - 1] != c.oracle_mu[n] {
            return Err(format!(
                "recursion mu({n}) = {}, sieve says {}",
                mu[n - 1],
                c.oracle_mu[n]
            ));
        }
        m += c.oracle_mu[n] as i64;
        if mertens[n - 1] != m {
            return Err(format!("M({n}) = {}, prefix sum is {m}", mertens[n - 1]));
        }
    }
    Ok(format!("n <= {}, M = {m}", c.limit))
}

fn recursion_strategies(c: &Ctx) -> CheckResult {
    let top = c.cap(STRATEGY_CAP);
    let naive = fail(moebius_series(top, Strategy::Naive))?;
    let blocked = fail(moebius_series(top, Strategy::Blocked))?;
    if naive != blocked {
        return Err("naive and blocked series differ".into());
    }
    if naive.mu_slice() != &c.series.mu_slice()[..top as usize] {
        return Err("fresh series differs from the supplied one".into());
    }
    Ok(format!("n <= {top}"))
}

fn recursion_turnaround(c: &Ctx) -> CheckResult {
    for n in 2..=c.limit {
        let v = fail(sb_mu_with(n, c.series, Strategy::Blocked))?;
        if v != c.oracle_mu[n as usize] {
            return Err(format!(
                "negated sum through d = {} is {v} for n = {n}",
                n - 1
            ));
        }
    }
    Ok(format!("n <= {}", c.limit))
}

fn recursion_meissel(c: &Ctx) -> CheckResult {
    let top = c.cap(IDENTITY_CAP);
    for n in 1..=top {
        let plain = fail(meissel_sum(n, c.series, false))?;
        if plain != 1 {
            return Err(format!("unrectified sum for {n} is {plain}"));
        }
        if n >= 2 {
            let rect = fail(meissel_sum(n, c.series, true))?;
            if rect != 0 {
                return Err(format!("rectified sum for {n} is {rect}"));
            }
        }
    }
    Ok(format!("n <= {top}"))
}

fn legendre_oracle(c: &Ctx) -> CheckResult {
    let top = c.cap(LEGENDRE_CAP);
    for n in 2..=top {
        let got = fail(legendre_pi(n, c.table, c.series))?;
        let want = fail(c.table.prime_count(n))?;
        if got != want {
            return Err(format!(
                "Legendre count for {n} is {got}, sieve says {want}"
            ));
        }
    }
    Ok(format!("n <= {top}"))
}

fn legendre_rectification(c: &Ctx) -> CheckResult {
    let top = c.cap(IDENTITY_CAP);
    for n in 2..=top {
        let plain = fail(legendre_sum(n, c.table, c.series, false))?;
        let rect = fail(legendre_sum(n, c.table, c.series, true))?;
        let root_pi = fail(c.table.prime_count(isqrt(n)))? as i64;
        if plain + root_pi - 1 != rect + root_pi {
            return Err(format!(
                "rectification offset fails at {n}: {plain} vs {rect}"
            ));
        }
    }
    Ok(format!("n <= {top}"))
}

fn legendre_tail(c: &Ctx) -> CheckResult {
    let top = c.cap(BREAKDOWN_CAP);
    let mut zero_rows = 0u64;
    for n in 2..=top {
        let b = fail(term_breakdown(n, c.table, c.series))?;
        for r in &b.rows {
            if r.d > n && r.contribution != 0 {
                return Err(format!(
                    "d = {} > n = {n} contributes {}",
                    r.d, r.contribution
                ));
            }
            if r.d > n {
                zero_rows += 1;
            }
            if 2 * r.d > n && r.d <= n && r.d > 1 && r.contribution != r.mu as i64 {
                return Err(format!(
                    "d = {} in the upper half of n = {n} contributes {}",
                    r.d, r.contribution
                ));
            }
        }
    }
    Ok(format!("n <= {top}, {zero_rows} zero-tail rows"))
}

fn cascade_totals(c: &Ctx) -> CheckResult {
    let top = c.cap(IDENTITY_CAP);
    for n in 2..=top {
        let mu = c.oracle_mu[n as usize];
        let a = fail(build_cascade(n, Variant::Full, true, c.series))?;
        let k = fail(build_cascade(n, Variant::Negated, true, c.series))?;
        if a.final_total() != 0 {
            return Err(format!("cascade for {n} ends at {}", a.final_total()));
        }
        if k.final_total() != mu as i64 {
            return Err(format!(
                "negated cascade for {n} ends at {}",
                k.final_total()
            ));
        }
        if fail(mu_from_penultimate(&a))? != mu {
            return Err(format!("penultimate rule fails at {n}"));
        }
        if mu != 0 && a.total_through(n - 1) != Some(-(mu as i64)) {
            return Err(format!("square-free {n}: penultimate total is not {}", -mu));
        }
        for (ra, rk) in a.rows.iter().zip(&k.rows) {
            if ra.d != rk.d || ra.running_total != -rk.running_total {
                return Err(format!(
                    "negated rows do not mirror at n = {n}, d = {}",
                    ra.d
                ));
            }
        }
    }
    Ok(format!("n <= {top}"))
}

fn cascade_sections(c: &Ctx) -> CheckResult {
    let top = c.cap(IDENTITY_CAP);
    for n in 2..=top {
        let s = fail(section_split(n, c.series))?;
        if s.upper_sum + s.lower_sum != 0 {
            return Err(format!(
                "sections for {n} sum to {}",
                s.upper_sum + s.lower_sum
            ));
        }
    }
    Ok(format!("n <= {top}"))
}

fn cascade_doubling(c: &Ctx) -> CheckResult {
    if c.limit < 80 {
        return Ok("skipped below 80".into());
    }
    let trace = fail(doubling_trace(20, 2, c.series))?;
    let got: Vec<(i64, i64)> = trace.iter().map(|s| (s.upper_sum, s.lower_sum)).collect();
    if got != [(2, -2), (-3, 3), (4, -4)] {
        return Err(format!("20/40/80 trace is {got:?}"));
    }
    Ok("(+2,-2) (-3,+3) (+4,-4)".into())
}

fn first_primes(c: &Ctx, m: usize) -> Vec<u64> {
    c.table.primes().iter().take(m).map(|&p| p as u64).collect()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn combinatorics_squarefree(c: &Ctx) -> CheckResult {
    let all = first_primes(c, COLLECTION_PRIMES);
    for m in 1..=all.len() {
        let col = fail(build_divisor_collection(&all[..m]))?;
        let sizes = col.group_sizes();
        if (0..=m).any(|r| sizes[r] as u64 != binomial(m as u64, r as u64)) {
            return Err(format!("group sizes for m = {m}: {sizes:?}"));
        }
        if squarefree_moebius_sum(&col) != 0 {
            return Err(format!(
                "Moebius sum over {m} primes is {}",
                squarefree_moebius_sum(&col)
            ));
        }
        for (r, g) in col.groups.iter().enumerate() {
            let want = if r % 2 == 0 { 1 } else { -1 };
            for d in g {
                let in_range = u64::try_from(&d.value).ok().filter(|&v| v <= c.limit);
                let mu = match in_range {
                    Some(v) => c.oracle_mu[v as usize],
                    None => d.mu(),
                };
                if mu != want {
                    return Err(format!("{} in group {r} has mu {mu}", d.value));
                }
            }
        }
    }
    Ok(format!("first m <= {} primes", all.len()))
}

fn combinatorics_degree(c: &Ctx) -> CheckResult {
    let all = first_primes(c, 6);
    let mut members = 0usize;
    for m in 1..=all.len() {
        for k in 1..=4u32 {
            let col = fail(build_degree_collection(&all[..m], k))?;
            let want = if k % 2 == 0 { 1 } else { -1 };
            if degree_liouville_sum(&col) != want {
                return Err(format!(
                    "lambda sum for m = {m}, k = {k} is {}",
                    degree_liouville_sum(&col)
                ));
            }
            for d in &col.members {
                let degree = match d.value_u64().filter(|&v| v <= c.limit) {
                    Some(v) => fail(c.table.degree(v))?,
                    None => d.degree(),
                };
                if degree != k {
                    return Err(format!(
                        "{} in the degree-{k} collection has degree {degree}",
                        d.value
                    ));
                }
            }
            members += col.members.len();
        }
    }
    Ok(format!("m <= {}, k <= 4, {members} members", all.len()))
}

fn combinatorics_pascal(_: &Ctx) -> CheckResult {
    for m in 1..=20 {
        let r = fail(pascal_column_report(m))?;
        if r.alternating_total != -1 {
            return Err(format!(
                "alternating total for m = {m} is {}",
                r.alternating_total
            ));
        }
    }
    Ok("m <= 20".into())
}

fn growth_prefix(c: &Ctx) -> CheckResult {
    let points = default_sample_points(c.limit);
    let g = fail(sample_growth(
        c.limit,
        &points,
        DEFAULT_EPSILON,
        c.series,
        c.table,
    ))?;
    let lambda = c.table.liouville_values();
    let (mut m, mut l, mut q) = (0i64, 0i64, 0i64);
    let mut next = 0usize;
    for x in 1..=c.limit {
        m += c.oracle_mu[x as usize] as i64;
        l += lambda[x as usize] as i64;
        q += (c.oracle_mu[x as usize] != 0) as i64;
        if next < g.samples.len() && g.samples[next].x == x {
            let s = &g.samples[next];
            if s.mertens != m || s.liouville != l {
                return Err(format!(
                    "sample at {x}: ({}, {}) vs oracle ({m}, {l})",
                    s.mertens, s.liouville
                ));
            }
            if s.mertens.abs() > q {
                return Err(format!("|M({x})| exceeds the square-free count {q}"));
            }
            next += 1;
        }
    }
    let peak = g.max_abs_normalized(1000, c.limit);
    Ok(match peak {
        Some(v) => format!(
            "{} samples, max |M|/x^0.55 on [1000, limit] = {v:.4}",
            g.samples.len()
        ),
        None => format!("{} samples", g.samples.len()),
    })
}

fn growth_runs(c: &Ctx) -> CheckResult {
    let b = fail(sign_balance(c.limit, c.series))?;
    let m = fail(c.series.mertens(c.limit))?;
    if b.plus as i64 - b.minus as i64 != m {
        return Err(format!(
            "plus - minus = {}, M = {m}",
            b.plus as i64 - b.minus as i64
        ));
    }
    let squarefree = c.oracle_mu[1..=c.limit as usize]
        .iter()
        .filter(|&&v| v != 0)
        .count() as u64;
    let runs = fail(run_length_histogram(c.limit, c.series))?;
    if runs.plus.weighted_total() != b.plus || runs.minus.weighted_total() != b.minus {
        return Err("run lengths do not reconcile with sign counts".into());
    }
    if runs.plus.weighted_total() + runs.minus.weighted_total() != squarefree {
        return Err(format!(
            "run lengths do not total the square-free count {squarefree}"
        ));
    }
    Ok(format!(
        "{squarefree} square-free, longest runs +{} / -{}",
        runs.plus.longest(),
        runs.minus.longest()
    ))
}

fn growth_baseline(c: &Ctx) -> CheckResult {
    let a = fail(random_walk_baseline(1000, 2000, 1))?;
    let b = fail(random_walk_baseline(1000, 2000, 1))?;
    if a != b {
        return Err("identical seeds gave different reports".into());
    }
    let empirical = a.fraction_within(1.0);
    let limit_value = de_moivre_laplace_fraction(1.0);
    if (empirical - limit_value).abs() > BASELINE_TOLERANCE {
        return Err(format!("fraction {empirical:.4} vs {limit_value:.4}"));
    }
    let cmp = fail(compare_excursions(c.limit, c.series, 1, 200))?;
    if !(0.0..=100.0).contains(&cmp.percentile) {
        return Err(format!("percentile {} out of range", cmp.percentile));
    }
    Ok(format!(
        "fraction {empirical:.4} vs {limit_value:.4}; max |M| = {} at {}, percentile {:.1}",
        cmp.mobius_max_excursion, cmp.argmax, cmp.percentile
    ))
}
