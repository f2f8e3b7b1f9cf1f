//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Time bounds and tolerances are fixed below.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mobius_core::cascade::{
    build_cascade, doubling_trace, mu_from_penultimate, section_split, Variant,
};
use mobius_core::combinatorics::{
    build_degree_collection, build_divisor_collection, degree_liouville_sum, direct_degree_members,
    pascal_column_report, pascal_degree_members, squarefree_moebius_sum,
};
use mobius_core::growth::{
    de_moivre_laplace_fraction, default_sample_points, random_walk_baseline, run_length_histogram,
    sample_growth, DEFAULT_EPSILON,
};
use mobius_core::recursion::{meissel_sum, moebius_series, Strategy};
use mobius_core::sieve::build_sieve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASELINE_TOLERANCE: f64 = 0.05;
const BASELINE_FLIPS: u64 = 1000;
const BASELINE_TRIALS: u64 = 2000;
const BASELINE_SEED: u64 = 20_240_601;
const SUBSET_SEED: u64 = 7;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mobius(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_mobius"))
        .arg("--no-cache")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    String::from_utf8(o.stdout).map_err(|e| e.to_string())
}

fn golden(name: &str) -> Result<String, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
}

fn prime_counts() -> Outcome {
    ensure(mobius(&["pi", "100"])? == "pi(100) = 25\n", || {
        "pi(100) != 25".into()
    })?;
    ensure(mobius(&["pi", "20"])? == "pi(20) = 8\n", || {
        "pi(20) != 8".into()
    })?;

    let b = mobius(&["pi", "100", "--breakdown"])?;
    // The three expansion lines and the closing lines of the worked example.
    for line in [
        "= + 99 - 50 - 33 - 20 - 14\n",
        "  + 16 + 10 + 7 + 6 + 4 + 2\n",
        "  - 3 - 2 - 1 - 0 + 0\n",
        "= 21\n",
        "pi(10) = 4\n",
        "pi(100) = pi(10) + 21 = 4 + 21 = 25\n",
    ] {
        ensure(b.contains(line), || format!("breakdown lacks {line:?}"))?;
    }
    let rows = b
        .lines()
        .skip(2)
        .take_while(|l| !l.trim_start().starts_with("sum"))
        .count();
    ensure(rows == 16, || {
        format!("breakdown has {rows} product rows, expected 16")
    })?;

    let m = mobius(&["meissel", "20"])?;
    let listed: Vec<(String, String)> = m
        .lines()
        .skip(2)
        .take_while(|l| !l.trim_start().starts_with("sum"))
        .map(|l| {
            let mut it = l.split_whitespace();
            (
                it.next().unwrap_or("").to_string(),
                it.next().unwrap_or("").to_string(),
            )
        })
        .collect();
    let expected: Vec<(String, String)> = [
        ("1*", "+20"),
        ("2*", "-10"),
        ("3*", "-6"),
        ("5", "-4"),
        ("6*", "+3"),
        ("7", "-2"),
        ("10", "+2"),
        ("11", "-1"),
        ("13", "-1"),
        ("14", "+1"),
        ("15", "+1"),
        ("17", "-1"),
        ("19", "-1"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    ensure(listed == expected, || {
        format!("n = 20 rows differ: {listed:?}")
    })?;
    ensure(m.contains("   sum    +1\n"), || {
        "n = 20 total is not +1".into()
    })?;
    ensure(m.contains("sum over d* = 7\n"), || {
        "starred sum is not 7".into()
    })?;
    ensure(m.contains("7 - 1 + pi(n^(1/2)) = 8 = pi(20)\n"), || {
        "n = 20 count line missing".into()
    })?;
    Ok("pi(100) = 25 (sum 21), pi(20) = 8 (starred sum 7)".into())
}

fn cascades() -> Outcome {
    // (d, f, running total) rows as printed, d = n omitted; then mu(n).
    let printed: [(u64, &[(u64, i64, i64)], i64); 5] = [
        (2, &[(1, 1, 1)], -1),
        (3, &[(1, 2, 2), (2, -1, 1)], -1),
        (4, &[(1, 3, 3), (2, -2, 1), (3, -1, 0)], 0),
        (5, &[(1, 4, 4), (2, -2, 2), (3, -1, 1)], -1),
        (6, &[(1, 5, 5), (2, -3, 2), (3, -2, 0), (5, -1, -1)], 1),
    ];
    for (n, rows, mu) in printed {
        let a = mobius(&["cascade", &n.to_string()])?;
        ensure(a == golden(&format!("cascade_full_{n}.txt"))?, || {
            format!("full n = {n} differs from golden")
        })?;
        let k = mobius(&["cascade", &n.to_string(), "--variant", "klein"])?;
        ensure(k == golden(&format!("cascade_negated_{n}.txt"))?, || {
            format!("negated n = {n} differs from golden")
        })?;

        // The goldens themselves must carry the printed values.
        let body: Vec<Vec<&str>> = a
            .lines()
            .skip(2)
            .map(|l| l.split_whitespace().collect())
            .collect();
        for (i, &(d, f, t)) in rows.iter().enumerate() {
            let want = [d.to_string(), signed(f), signed(t)];
            ensure(body[i] == want, || {
                format!("full n = {n} row {i}: {:?}", body[i])
            })?;
            let kl: Vec<&str> = k
                .lines()
                .nth(2 + i)
                .unwrap_or("")
                .split_whitespace()
                .collect();
            let label = if d == 1 { vec![] } else { vec![d.to_string()] };
            let want: Vec<String> = label.into_iter().chain([signed(-f), signed(-t)]).collect();
            ensure(kl == want, || format!("negated n = {n} row {i}: {kl:?}"))?;
        }
        let close = format!("mu({n}) = {}", signed(mu));
        ensure(
            a.lines()
                .last()
                .is_some_and(|l| l.starts_with(&close) && l.ends_with(" 0")),
            || format!("full n = {n} closing line"),
        )?;
        let close = format!("therefore mu({n}) = {}", signed(mu));
        ensure(k.lines().last() == Some(close.as_str()), || {
            format!("negated n = {n} closing line")
        })?;
    }
    Ok("n = 2..6, both variants".into())
}

fn signed(v: i64) -> String {
    match v {
        0 => "0".into(),
        v if v > 0 => format!("+{v}"),
        v => v.to_string(),
    }
}

fn recursion_equivalence() -> Outcome {
    let limit = 50_000;
    let table = build_sieve(limit).map_err(|e| e.to_string())?;
    let series = moebius_series(limit, Strategy::Blocked).map_err(|e| e.to_string())?;
    for n in 1..=limit {
        let want = table.mu(n).map_err(|e| e.to_string())?;
        let got = series.mu(n).map_err(|e| e.to_string())?;
        ensure(got == want, || {
            format!("mu({n}): recursion {got}, sieve {want}")
        })?;
    }
    let naive = moebius_series(5_000, Strategy::Naive).map_err(|e| e.to_string())?;
    let blocked = moebius_series(5_000, Strategy::Blocked).map_err(|e| e.to_string())?;
    ensure(naive == blocked, || {
        "naive and blocked differ below 5000".into()
    })?;
    Ok(format!("n <= {limit}; strategies agree to 5000"))
}

fn identities() -> Outcome {
    let limit = 10_000;
    let table = build_sieve(limit).map_err(|e| e.to_string())?;
    let series = moebius_series(limit, Strategy::Blocked).map_err(|e| e.to_string())?;
    for n in 2..=limit {
        let e = |x: mobius_core::Error| x.to_string();
        ensure(meissel_sum(n, &series, false).map_err(e)? == 1, || {
            format!("unrectified sum at {n}")
        })?;
        ensure(meissel_sum(n, &series, true).map_err(e)? == 0, || {
            format!("rectified sum at {n}")
        })?;
        let s = section_split(n, &series).map_err(e)?;
        ensure(s.upper_sum + s.lower_sum == 0, || {
            format!("section balance at {n}")
        })?;
        let c = build_cascade(n, Variant::Full, false, &series).map_err(e)?;
        let mu = mu_from_penultimate(&c).map_err(e)?;
        ensure(mu == table.mu(n).map_err(e)?, || {
            format!("penultimate rule at {n}")
        })?;
    }
    Ok(format!("2 <= n <= {limit}"))
}

fn section_trace() -> Outcome {
    let series = moebius_series(80, Strategy::Blocked).map_err(|e| e.to_string())?;
    let trace = doubling_trace(20, 2, &series).map_err(|e| e.to_string())?;
    let got: Vec<(u64, i64, i64)> = trace
        .iter()
        .map(|s| (s.n, s.upper_sum, s.lower_sum))
        .collect();
    ensure(got == [(20, 2, -2), (40, -3, 3), (80, 4, -4)], || {
        format!("trace {got:?}")
    })?;
    Ok("(+2,-2) (-3,+3) (+4,-4)".into())
}

fn collection_sums() -> Outcome {
    let e = |x: mobius_core::Error| x.to_string();
    let pool: Vec<u64> = build_sieve(2_000)
        .map_err(e)?
        .primes()
        .iter()
        .map(|&p| p as u64)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SUBSET_SEED);
    for trial in 0..200 {
        let m = rng.random_range(1..=20usize);
        let mut picked = BTreeSet::new();
        while picked.len() < m {
            picked.insert(pool[rng.random_range(0..pool.len())]);
        }
        let primes: Vec<u64> = picked.into_iter().collect();
        let c = build_divisor_collection(&primes).map_err(e)?;
        ensure(squarefree_moebius_sum(&c) == 0, || {
            format!("trial {trial}: sum over {primes:?} is not 0")
        })?;
    }
    let first: Vec<u64> = vec![2, 3, 5, 7, 11, 13];
    for m in 1..=6 {
        for k in 1..=4u32 {
            let base = &first[..m];
            let direct: BTreeSet<_> = direct_degree_members(base, k)
                .map_err(e)?
                .into_iter()
                .map(|d| d.value)
                .collect();
            let nested: BTreeSet<_> = pascal_degree_members(base, k)
                .map_err(e)?
                .into_iter()
                .map(|d| d.value)
                .collect();
            ensure(direct == nested, || {
                format!("routes differ for m = {m}, k = {k}")
            })?;
            let c = build_degree_collection(base, k).map_err(e)?;
            let want = if k % 2 == 0 { 1 } else { -1 };
            ensure(degree_liouville_sum(&c) == want, || {
                format!("lambda sum for m = {m}, k = {k}")
            })?;
        }
    }
    for m in 1..=20 {
        let r = pascal_column_report(m).map_err(e)?;
        ensure(r.alternating_total == -1, || {
            format!("alternating total for m = {m}")
        })?;
    }
    Ok("200 random subsets; m <= 6, k <= 4; m <= 20".into())
}

fn growth_consistency() -> Outcome {
    let e = |x: mobius_core::Error| x.to_string();
    let limit = 1_000_000;
    let table = build_sieve(limit).map_err(e)?;
    let series = moebius_series(limit, Strategy::Blocked).map_err(e)?;
    let points = default_sample_points(limit);
    let g = sample_growth(limit, &points, DEFAULT_EPSILON, &series, &table).map_err(e)?;
    let (mut m, mut l, mut q) = (0i64, 0i64, 0u64);
    let mut samples = g.samples.iter().peekable();
    for x in 1..=limit {
        let f = table.factorize(x).map_err(e)?;
        m += f.mu() as i64;
        l += f.liouville() as i64;
        q += f.is_squarefree() as u64;
        if let Some(s) = samples.next_if(|s| s.x == x) {
            ensure(s.mertens == m && s.liouville == l, || {
                format!(
                    "x = {x}: ({}, {}) vs oracle ({m}, {l})",
                    s.mertens, s.liouville
                )
            })?;
        }
    }
    ensure(samples.next().is_none(), || {
        "unmatched sample points".into()
    })?;
    let runs = run_length_histogram(limit, &series).map_err(e)?;
    let total = runs.plus.weighted_total() + runs.minus.weighted_total();
    ensure(total == q, || {
        format!("run lengths total {total}, square-free count {q}")
    })?;
    Ok(format!(
        "{} samples to 10^6, {q} square-free",
        g.samples.len()
    ))
}

/// 2∫₀^a exp(-πx²) dx with a = (2K²/π)^(1/2), by composite Simpson.
fn integral_fraction(k: f64) -> f64 {
    let a = (2.0 * k * k / std::f64::consts::PI).sqrt();
    let n = 10_000;
    let h = a / n as f64;
    let f = |x: f64| (-std::f64::consts::PI * x * x).exp();
    let mut s = f(0.0) + f(a);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * s * h / 3.0
}

fn baseline() -> Outcome {
    let e = |x: mobius_core::Error| x.to_string();
    let target = integral_fraction(1.0);
    ensure(
        (target - de_moivre_laplace_fraction(1.0)).abs() < 1e-9,
        || "closed form disagrees with quadrature".into(),
    )?;
    let a = random_walk_baseline(BASELINE_FLIPS, BASELINE_TRIALS, BASELINE_SEED).map_err(e)?;
    let b = random_walk_baseline(BASELINE_FLIPS, BASELINE_TRIALS, BASELINE_SEED).map_err(e)?;
    ensure(a == b, || "same seed, different reports".into())?;
    let frac = a.fraction_within(1.0);
    ensure((frac - target).abs() <= BASELINE_TOLERANCE, || {
        format!("fraction {frac:.4} vs {target:.4}")
    })?;
    Ok(format!(
        "fraction {frac:.4} vs integral {target:.4} (tolerance {BASELINE_TOLERANCE})"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 8] = [
        (
            "1 worked prime counts",
            prime_counts,
            Some(Duration::from_secs(1)),
        ),
        ("2 worked cascades", cascades, Some(Duration::from_secs(1))),
        (
            "3 recursion equals sieve",
            recursion_equivalence,
            Some(Duration::from_secs(60)),
        ),
        (
            "4 identity suite",
            identities,
            Some(Duration::from_secs(30)),
        ),
        ("5 section trace", section_trace, None),
        (
            "6 collection sums",
            collection_sums,
            Some(Duration::from_secs(30)),
        ),
        (
            "7 growth consistency",
            growth_consistency,
            Some(Duration::from_secs(120)),
        ),
        ("8 random-walk baseline", baseline, None),
    ];
    let mut failed = 0;
    for (name, run, bound) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match (outcome, bound) {
            (Ok(_), Some(b)) if took > b => Err(format!("took {took:.2?}, bound {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {name:<26} {took:>10.2?}  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name:<26} {took:>10.2?}  {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
