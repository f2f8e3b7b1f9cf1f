use mobius_core::cascade::{build_cascade, doubling_trace, render_sections};
use mobius_core::combinatorics::{
    build_degree_collection, build_divisor_collection, degree_liouville_sum, pascal_column_report,
    squarefree_moebius_sum,
};
use mobius_core::growth::{
    compare_excursions, de_moivre_laplace_fraction, default_sample_points, run_length_histogram,
    sample_growth, sign_balance, RunLengthHistogram,
};
use mobius_core::legendre::{legendre_pi, term_breakdown};
use mobius_core::recursion::{meissel_table, moebius_series, Strategy};
use mobius_core::verify::{run_all, DEFAULT_LIMIT, QUICK_LIMIT};
use mobius_core::{isqrt, signed, Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::store::Store;
use crate::{Cli, Command, Format, PascalArgs, StatsArgs};

/// The Legendre count only needs the series for μ lookups; past this
/// range the parity of the factor count is used instead.
const PI_SERIES_CAP: u64 = 100_000;
const STATS_DEFAULT_LIMIT: u64 = 100_000;

pub struct Output {
    pub text: String,
    pub status: u8,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Output { text, status: 0 }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn csv_rows<S: Serialize>(rows: impl IntoIterator<Item = S>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Consistency(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Consistency(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// CSV with an explicit header, for column names serde cannot spell.
fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| Error::Consistency(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Consistency(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_out<T: Serialize>(v: &T) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(v).map_err(|e| Error::Consistency(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn run(cli: &Cli) -> Result<Output> {
    let store = Store::new(cli.no_cache, cli.cache_dir.as_deref());
    let f = cli.format;
    match &cli.command {
        Command::Sieve { n } => sieve(*n, f, &store).map(Output::from),
        Command::Mu { n, strategy } => mu(*n, (*strategy).into(), f, &store).map(Output::from),
        Command::Pi { n, breakdown } => pi(*n, *breakdown, f, &store).map(Output::from),
        Command::Cascade { n, variant, zeros } => {
            if *n < 2 {
                return Err(usage(format!("cascade needs n >= 2, got {n}")));
            }
            let series = store.series(*n)?;
            let t = build_cascade(*n, (*variant).into(), *zeros, &series)?;
            match f {
                Format::Text => Ok(t.render_text()),
                Format::Csv => csv_rows(&t.rows),
                Format::Json => json_out(&t),
            }
            .map(Output::from)
        }
        Command::Sections { n, doublings } => {
            if *n < 2 {
                return Err(usage(format!("sections need n >= 2, got {n}")));
            }
            let top = n
                .checked_shl(*doublings)
                .filter(|t| t >> doublings == *n)
                .ok_or_else(|| usage("doubling trace overflows"))?;
            let series = store.series(top)?;
            let trace = doubling_trace(*n, *doublings, &series)?;
            match f {
                Format::Text => Ok(render_sections(&trace)),
                Format::Csv => csv_rows(&trace),
                Format::Json => json_out(&trace),
            }
            .map(Output::from)
        }
        Command::Meissel { n, rectified } => {
            if *n < 2 {
                return Err(usage(format!("meissel table needs n >= 2, got {n}")));
            }
            let series = store.series(*n)?;
            let table = store.sieve(*n)?;
            let t = meissel_table(*n, &series, &table, *rectified)?;
            match f {
                Format::Text => Ok(t.render_text(table.prime_count(isqrt(*n))?)),
                Format::Csv => csv_rows(&t.rows),
                Format::Json => json_out(&t),
            }
            .map(Output::from)
        }
        Command::Pascal(args) => pascal(args, f).map(Output::from),
        Command::Degree { primes, max_k } => degree(primes, *max_k, f).map(Output::from),
        Command::Stats(args) => stats(args, cli.limit, f, &store),
        Command::Verify { quick } => {
            let limit = if *quick {
                QUICK_LIMIT
            } else {
                cli.limit.unwrap_or(DEFAULT_LIMIT)
            };
            if limit < 2 {
                return Err(usage(format!("verify needs limit >= 2, got {limit}")));
            }
            let series = store.series(limit)?;
            let table = store.sieve(limit)?;
            let report = run_all(limit, &table, &series)?;
            let status = if report.all_passed() { 0 } else { 1 };
            let text = match f {
                Format::Text => report.render_text(),
                Format::Csv => csv_table(
                    &["check", "passed", "seconds", "detail"],
                    report.checks.iter().map(|c| {
                        vec![
                            c.name.to_string(),
                            c.passed.to_string(),
                            format!("{:.3}", c.seconds),
                            c.detail.clone(),
                        ]
                    }),
                )?,
                Format::Json => json_out(&report)?,
            };
            for c in report.failures() {
                eprintln!("mobius: check failed: {}: {}", c.name, c.detail);
            }
            Ok(Output { text, status })
        }
    }
}

#[derive(Serialize)]
struct SieveRow {
    n: u64,
    spf: u64,
    factorization: String,
    mu: i8,
    lambda: i8,
    degree: u32,
}

fn sieve(n: u64, f: Format, store: &Store) -> Result<String> {
    if n == 0 {
        return Err(usage("sieve needs n >= 1"));
    }
    let table = store.sieve(n)?;
    let mut rows = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let fz = table.factorize(k)?;
        rows.push(SieveRow {
            n: k,
            spf: table.smallest_factor(k)?,
            factorization: fz.to_string(),
            mu: fz.mu(),
            lambda: fz.liouville(),
            degree: fz.degree(),
        });
    }
    match f {
        Format::Text => {
            let mut out = format!(
                "{:>10} {:>10}  {:<24} {:>3} {:>3} {:>3}\n",
                "n", "spf", "factors", "mu", "lam", "deg"
            );
            for r in &rows {
                out.push_str(&format!(
                    "{:>10} {:>10}  {:<24} {:>3} {:>3} {:>3}\n",
                    r.n,
                    r.spf,
                    r.factorization,
                    signed(r.mu as i64),
                    signed(r.lambda as i64),
                    r.degree
                ));
            }
            out.push_str(&format!("pi({n}) = {}\n", table.prime_count(n)?));
            Ok(out)
        }
        Format::Csv => csv_rows(&rows),
        Format::Json => json_out(&rows),
    }
}

#[derive(Serialize)]
struct MuRow {
    n: u64,
    mu: i8,
    mertens: i64,
}

fn mu(n: u64, strategy: Strategy, f: Format, store: &Store) -> Result<String> {
    if n == 0 {
        return Err(usage("mu needs n >= 1"));
    }
    let series = match strategy {
        Strategy::Blocked => store.series(n)?,
        Strategy::Naive => moebius_series(n, Strategy::Naive)?,
    };
    let rows: Vec<MuRow> = (1..=n)
        .map(|k| {
            Ok(MuRow {
                n: k,
                mu: series.mu(k)?,
                mertens: series.mertens(k)?,
            })
        })
        .collect::<Result<_>>()?;
    match f {
        Format::Text => {
            let mut out = format!("{:>10} {:>6} {:>8}\n", "n", "mu(n)", "M(n)");
            for r in &rows {
                out.push_str(&format!(
                    "{:>10} {:>6} {:>8}\n",
                    r.n,
                    signed(r.mu as i64),
                    signed(r.mertens)
                ));
            }
            Ok(out)
        }
        Format::Csv => csv_rows(&rows),
        Format::Json => json_out(&rows),
    }
}

fn pi(n: u64, breakdown: bool, f: Format, store: &Store) -> Result<String> {
    if n < 2 {
        return Err(usage(format!("prime counting needs n >= 2, got {n}")));
    }
    let table = store.sieve(isqrt(n).max(2))?;
    let series = store.series(n.min(PI_SERIES_CAP))?;
    if !breakdown {
        let count = legendre_pi(n, &table, &series)?;
        return match f {
            Format::Text => Ok(format!("pi({n}) = {count}\n")),
            Format::Csv => csv_table(&["n", "pi"], [vec![n.to_string(), count.to_string()]]),
            Format::Json => json_out(&json!({ "n": n, "pi": count })),
        };
    }
    let b = term_breakdown(n, &table, &series)?;
    match f {
        Format::Text => Ok(b.render_text()),
        Format::Csv => csv_table(
            &["d", "mu", "quotient", "contribution"],
            b.rows.iter().map(|r| {
                vec![
                    r.d.to_string(),
                    r.mu.to_string(),
                    r.quotient.to_string(),
                    r.contribution.to_string(),
                ]
            }),
        ),
        Format::Json => json_out(&json!({
            "n": n,
            "pi": b.prime_count(),
            "legendre_sum": b.sum(),
            "small_prime_count": b.small_prime_count(),
            "breakdown": b,
        })),
    }
}

fn listing_row(member: String, mu: i8, lambda: i8, degree: u32) -> Vec<String> {
    vec![
        member,
        mu.to_string(),
        lambda.to_string(),
        degree.to_string(),
    ]
}

const LISTING_HEADER: [&str; 4] = ["member", "mu", "lambda", "degree"];

fn pascal(args: &PascalArgs, f: Format) -> Result<String> {
    if let Some(k) = args.degree {
        let c = build_degree_collection(&args.primes, k)?;
        return match f {
            Format::Text => Ok(c.render_text()),
            Format::Csv => csv_table(
                &LISTING_HEADER,
                c.members
                    .iter()
                    .map(|d| listing_row(d.value.to_string(), d.mu(), d.liouville(), d.degree())),
            ),
            Format::Json => json_out(&json!({
                "primes": c.base_primes,
                "degree": k,
                "members": c.members.iter().map(|d| json!({
                    "value": d.value.to_string(),
                    "label": d.label(&c.base_primes),
                    "exponents": d.exponents,
                    "mu": d.mu(),
                    "lambda": d.liouville(),
                })).collect::<Vec<_>>(),
                "lambda_sum": degree_liouville_sum(&c),
            })),
        };
    }
    let c = build_divisor_collection(&args.primes)?;
    let report = pascal_column_report(c.m())?;
    let sum = squarefree_moebius_sum(&c);
    match f {
        Format::Text => {
            let mut out = c.render_pascal_form();
            let sizes: Vec<String> = c.group_sizes().iter().map(usize::to_string).collect();
            out.push_str(&format!("group sizes: {}\n", sizes.join(" ")));
            out.push_str(&format!("moebius sum: {sum}\n"));
            out.push_str(&report.render_text());
            Ok(out)
        }
        Format::Csv => csv_table(
            &LISTING_HEADER,
            c.members().map(|d| {
                let count = d.factor_count();
                listing_row(d.value.to_string(), d.mu(), d.mu(), u32::from(count > 0))
            }),
        ),
        Format::Json => json_out(&json!({
            "primes": c.base_primes,
            "groups": c.groups.iter()
                .map(|g| g.iter().map(|d| d.value.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "group_sizes": c.group_sizes(),
            "moebius_sum": sum,
            "pascal": report,
        })),
    }
}

#[derive(Serialize)]
struct DegreeRow {
    k: u32,
    members: usize,
    lambda_sum: i64,
    expected: i64,
}

fn degree(primes: &[u64], max_k: u32, f: Format) -> Result<String> {
    if max_k == 0 {
        return Err(usage("max-k must be at least 1"));
    }
    let mut rows = Vec::new();
    for k in 1..=max_k {
        let c = build_degree_collection(primes, k)?;
        rows.push(DegreeRow {
            k,
            members: c.members.len(),
            lambda_sum: degree_liouville_sum(&c),
            expected: if k % 2 == 0 { 1 } else { -1 },
        });
    }
    match f {
        Format::Text => {
            let list: Vec<String> = primes.iter().map(u64::to_string).collect();
            let mut out = format!(
                "primes {{{}}}\n{:>4} {:>10} {:>10}\n",
                list.join(","),
                "k",
                "members",
                "lambda sum"
            );
            for r in &rows {
                out.push_str(&format!(
                    "{:>4} {:>10} {:>10}\n",
                    r.k,
                    r.members,
                    signed(r.lambda_sum)
                ));
            }
            Ok(out)
        }
        Format::Csv => csv_rows(&rows),
        Format::Json => json_out(&rows),
    }
}

fn histogram_line(h: &RunLengthHistogram) -> String {
    let parts: Vec<String> = h
        .counts
        .iter()
        .map(|(len, c)| format!("{len}:{c}"))
        .collect();
    parts.join(" ")
}

fn stats(args: &StatsArgs, global_limit: Option<u64>, f: Format, store: &Store) -> Result<Output> {
    let limit = args.limit.or(global_limit).unwrap_or(STATS_DEFAULT_LIMIT);
    if limit == 0 {
        return Err(usage("stats needs limit >= 1"));
    }
    if !(0.0..=1.0).contains(&args.epsilon) {
        return Err(usage(format!("epsilon {} outside [0, 1]", args.epsilon)));
    }
    if args.trials == 0 {
        return Err(usage("trials must be at least 1"));
    }
    let series = store.series(limit)?;
    let table = store.sieve(limit)?;
    let growth = sample_growth(
        limit,
        &default_sample_points(limit),
        args.epsilon,
        &series,
        &table,
    )?;
    let balance = sign_balance(limit, &series)?;
    let runs = run_length_histogram(limit, &series)?;
    let cmp = compare_excursions(limit, &series, args.seed, args.trials)?;
    let within = cmp.baseline.fraction_within(1.0);
    let expected = de_moivre_laplace_fraction(1.0);

    let text = match f {
        Format::Text => {
            let mut out = growth.render_text();
            out.push_str(&format!(
                "\nmu signs up to {limit}: +1 x {}, -1 x {}, 0 x {}\n",
                balance.plus, balance.minus, balance.zero
            ));
            out.push_str(&format!(
                "+1 runs (length:count): {}\n",
                histogram_line(&runs.plus)
            ));
            out.push_str(&format!(
                "-1 runs (length:count): {}\n",
                histogram_line(&runs.minus)
            ));
            out.push_str(&format!(
                "\nmax |M(x)| for x <= {limit}: {} at x = {}\n",
                cmp.mobius_max_excursion, cmp.argmax
            ));
            out.push_str(&format!(
                "baseline: {} walks of {} steps (square-free count), generator {}, seed {}\n",
                args.trials, cmp.squarefree_count, cmp.baseline.generator, cmp.baseline.seed
            ));
            out.push_str(&format!(
                "baseline median max excursion {:.1}; walks below the Moebius excursion: {:.1}%\n",
                cmp.baseline_median, cmp.percentile
            ));
            out.push_str(&format!(
                "walks with |final sum| < 2 sqrt(N): {within:.4} (large-N limit {expected:.4})\n"
            ));
            out
        }
        Format::Csv if args.baseline => {
            eprintln!(
                "mobius: generator {}, seed {}, {} flips",
                cmp.baseline.generator, cmp.baseline.seed, cmp.baseline.num_flips
            );
            csv_rows(&cmp.baseline.trials)?
        }
        Format::Csv => csv_table(
            &["x", "M", "L", "M/x^(1/2+eps)", "L/x^(1/2+eps)"],
            growth.samples.iter().map(|s| {
                vec![
                    s.x.to_string(),
                    s.mertens.to_string(),
                    s.liouville.to_string(),
                    format!("{:.9}", s.mertens_normalized),
                    format!("{:.9}", s.liouville_normalized),
                ]
            }),
        )?,
        Format::Json => json_out(&json!({
            "limit": limit,
            "growth": growth,
            "sign_balance": balance,
            "run_lengths": runs,
            "excursions": cmp,
            "fraction_within_k1": within,
            "de_moivre_laplace_k1": expected,
        }))?,
    };
    Ok(text.into())
}
