//! Divisor collections generated by a finite prime set.
//!
//! The square-free products of m primes, grouped by factor count r, have
//! binomial(m, r) members each; their Möbius values alternate with r, so the
//! total is (1 + (-1))^m = 0. Numbers of degree k (largest exponent exactly
//! k) over the same primes carry Liouville values summing to (-1)^k.
//!
//! Member values are kept as [`BigUint`]: sixteen primes near 10^5 already
//! overflow 128 bits. Möbius, Liouville and degree always come from the
//! exponent data used to build a member, never from the value.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::invalid;
use crate::{Error, Result};

/// Largest prime set enumerated as a square-free collection.
pub const MAX_COLLECTION_PRIMES: usize = 20;

/// Cap on the exponent-vector space (k+1)^m for degree collections.
pub const MAX_DEGREE_SPACE: u64 = 1 << 24;

fn check_primes(base_primes: &[u64]) -> Result<()> {
    if base_primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("base primes must be strictly increasing"));
    }
    if let Some(&p) = base_primes.iter().find(|&&p| !is_prime(p)) {
        return Err(invalid(format!("{p} is not prime")));
    }
    Ok(())
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A square-free product, identified by which base primes it uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquarefreeMember {
    pub value: BigUint,
    /// Bit i set when base prime i divides the member.
    pub mask: u32,
}

impl SquarefreeMember {
    pub fn factor_count(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn mu(&self) -> i8 {
        if self.factor_count() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorCollection {
    pub base_primes: Vec<u64>,
    /// `groups[r]`: products of exactly r distinct base primes, ascending.
    pub groups: Vec<Vec<SquarefreeMember>>,
}

pub fn build_divisor_collection(base_primes: &[u64]) -> Result<DivisorCollection> {
    let m = base_primes.len();
    if m > MAX_COLLECTION_PRIMES {
        return Err(Error::ResourceLimit {
            what: "square-free divisor collection",
            requested: 1u64 << m.min(63),
            budget: 1 << MAX_COLLECTION_PRIMES,
        });
    }
    check_primes(base_primes)?;

    let size = 1usize << m;
    let mut values: Vec<BigUint> = Vec::with_capacity(size);
    values.push(BigUint::one());
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let v = &values[mask & (mask - 1)] * base_primes[low];
        values.push(v);
    }
    let mut groups: Vec<Vec<SquarefreeMember>> = vec![Vec::new(); m + 1];
    for (mask, value) in values.into_iter().enumerate() {
        groups[mask.count_ones() as usize].push(SquarefreeMember {
            value,
            mask: mask as u32,
        });
    }
    for g in &mut groups {
        g.sort_by(|a, b| a.value.cmp(&b.value));
    }
    Ok(DivisorCollection {
        base_primes: base_primes.to_vec(),
        groups,
    })
}

impl DivisorCollection {
    pub fn m(&self) -> usize {
        self.base_primes.len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn members(&self) -> impl Iterator<Item = &SquarefreeMember> {
        self.groups.iter().flatten()
    }

    /// Every member in the triangular layout: column j holds p_j times each
    /// product of the earlier primes, in the same order.
    pub fn render_pascal_form(&self) -> String {
        let m = self.m();
        let label = |mask: usize| -> String {
            (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.base_primes[i].to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        let columns: Vec<Vec<String>> = (0..m)
            .map(|j| ((1usize << j)..(1usize << (j + 1))).map(label).collect())
            .collect();
        let widths: Vec<usize> = columns
            .iter()
            .map(|c| c.iter().map(String::len).max().unwrap_or(0))
            .collect();
        let height = columns.last().map_or(0, Vec::len);
        let mut out = String::new();
        for row in 0..height {
            let cells: Vec<String> = columns
                .iter()
                .zip(&widths)
                .map(|(col, &w)| format!("{:<w$}", col.get(row).map_or("", String::as_str)))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Σ μ(d) over every member of the collection, 1 included. Zero for any
/// non-empty prime set; an empty set leaves only μ(1) = 1.
pub fn squarefree_moebius_sum(collection: &DivisorCollection) -> i64 {
    collection.members().map(|d| d.mu() as i64).sum()
}

/// Column r of the Pascal arrangement for m primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PascalColumn {
    /// 1-based column index = number of primes per product.
    pub index: usize,
    /// binomial(j, index - 1) for j = index - 1 ..= m - 1.
    pub entries: Vec<u128>,
    /// Sum of the entries, binomial(m, index).
    pub total: u128,
    /// Möbius sign carried by the column, (-1)^index.
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PascalReport {
    pub m: usize,
    pub columns: Vec<PascalColumn>,
    /// Σ_r (-1)^r · total_r.
    pub alternating_total: i128,
    /// Number of cells checked against the partial sum of the column before.
    pub hockey_stick_checks: usize,
}

impl PascalReport {
    pub fn render_text(&self) -> String {
        let mut out = format!("Pascal columns for m = {}\n", self.m);
        for c in &self.columns {
            let entries = c
                .entries
                .iter()
                .map(u128::to_string)
                .collect::<Vec<_>>()
                .join("+");
            out.push_str(&format!(
                "column {:>2} ({}): {} = {}\n",
                c.index,
                if c.sign < 0 { "-" } else { "+" },
                entries,
                c.total
            ));
        }
        out.push_str(&format!(
            "hockey-stick cells verified: {}\n",
            self.hockey_stick_checks
        ));
        out.push_str(&format!("alternating total: {}\n", self.alternating_total));
        out
    }
}

/// Largest m for which every binomial(m, r) fits comfortably in u128.
pub const MAX_PASCAL_M: usize = 120;

pub fn pascal_column_report(m: usize) -> Result<PascalReport> {
    if m == 0 {
        return Err(invalid("Pascal report needs m >= 1"));
    }
    if m > MAX_PASCAL_M {
        return Err(invalid(format!(
            "Pascal report supports m <= {MAX_PASCAL_M}"
        )));
    }
    // Rows 0..=m of the triangle by the additive rule.
    let mut tri: Vec<Vec<u128>> = vec![vec![1]];
    for j in 1..=m {
        let prev = &tri[j - 1];
        let mut row = vec![1u128; j + 1];
        for r in 1..j {
            row[r] = prev[r - 1] + prev[r];
        }
        tri.push(row);
    }
    let binom = |j: usize, r: usize| -> u128 {
        if r > j {
            0
        } else {
            tri[j][r]
        }
    };

    let mut columns = Vec::with_capacity(m);
    let mut checks = 0usize;
    for index in 1..=m {
        let entries: Vec<u128> = (index - 1..m).map(|j| binom(j, index - 1)).collect();
        let total: u128 = entries.iter().sum();
        if total != binom(m, index) {
            return Err(Error::Consistency(format!(
                "column {index} sums to {total}"
            )));
        }
        if index >= 2 {
            // Each cell equals the running sum of the previous column up to
            // the row above it.
            let mut partial = 0u128;
            for (row, j) in (index - 1..m).enumerate() {
                partial += binom(j - 1, index - 2);
                if entries[row] != partial {
                    return Err(Error::Consistency(format!(
                        "hockey stick fails at column {index}, row {row}"
                    )));
                }
                checks += 1;
            }
        }
        let sign = if index % 2 == 0 { 1 } else { -1 };
        columns.push(PascalColumn {
            index,
            entries,
            total,
            sign,
        });
    }
    let alternating_total = columns
        .iter()
        .map(|c| c.sign as i128 * c.total as i128)
        .sum();
    Ok(PascalReport {
        m,
        columns,
        alternating_total,
        hockey_stick_checks: checks,
    })
}

/// A number built from the base primes with a known exponent vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeMember {
    pub value: BigUint,
    /// Exponent of each base prime, aligned with `base_primes`.
    pub exponents: Vec<u32>,
}

impl DegreeMember {
    fn from_exponents(base_primes: &[u64], exponents: Vec<u32>) -> Self {
        let mut value = BigUint::one();
        for (&p, &e) in base_primes.iter().zip(&exponents) {
            value *= BigUint::from(p).pow(e);
        }
        DegreeMember { value, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().copied().max().unwrap_or(0)
    }

    pub fn liouville(&self) -> i8 {
        if self.exponents.iter().sum::<u32>() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn mu(&self) -> i8 {
        if self.exponents.iter().any(|&e| e > 1) {
            0
        } else if self.exponents.iter().sum::<u32>() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Value as u64 when it fits.
    pub fn value_u64(&self) -> Option<u64> {
        u64::try_from(&self.value).ok()
    }

    /// `2^2.3` style label.
    pub fn label(&self, base_primes: &[u64]) -> String {
        let parts: Vec<String> = base_primes
            .iter()
            .zip(&self.exponents)
            .filter(|(_, &e)| e > 0)
            .map(|(p, &e)| {
                if e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(".")
        }
    }
}

/// Every number whose prime support is a non-empty subset of the base
/// primes and whose largest exponent is exactly k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeCollection {
    pub base_primes: Vec<u64>,
    pub k: u32,
    /// Ascending by value.
    pub members: Vec<DegreeMember>,
}

impl DegreeCollection {
    pub fn values(&self) -> Vec<BigUint> {
        self.members.iter().map(|d| d.value.clone()).collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "degree {} collection over {{{}}}: {} members\n",
            self.k,
            self.base_primes
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(","),
            self.members.len()
        );
        for d in &self.members {
            out.push_str(&format!(
                "{:>12}  {:<20} lambda {}\n",
                d.value,
                d.label(&self.base_primes),
                crate::signed(d.liouville() as i64)
            ));
        }
        out.push_str(&format!(
            "lambda sum: {}\n",
            crate::signed(degree_liouville_sum(self))
        ));
        out
    }
}

fn degree_space(m: usize, k: u32) -> Result<u64> {
    let space = (k as u64 + 1)
        .checked_pow(m as u32)
        .filter(|&s| s <= MAX_DEGREE_SPACE)
        .ok_or(Error::ResourceLimit {
            what: "degree collection",
            requested: (k as u64 + 1).saturating_pow(m as u32),
            budget: MAX_DEGREE_SPACE,
        })?;
    Ok(space)
}

/// Direct route: all exponent vectors in {0..k}^m with maximum exactly k.
pub fn direct_degree_members(base_primes: &[u64], k: u32) -> Result<Vec<DegreeMember>> {
    let m = base_primes.len();
    degree_space(m, k)?;
    let mut out = Vec::new();
    let mut exps = vec![0u32; m];
    loop {
        if exps.iter().copied().max() == Some(k) {
            out.push(DegreeMember::from_exponents(base_primes, exps.clone()));
        }
        // Odometer increment over {0..k}^m.
        let mut i = 0;
        while i < m && exps[i] == k {
            exps[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
        exps[i] += 1;
    }
    out.sort_by(|a, b| a.value.cmp(&b.value));
    Ok(out)
}

/// Nested Pascal-form route: a degree-k collection is every square-free
/// product s (non-empty support S) multiplied into the degree-(k-1)
/// collection over S, starting from the degree-0 collection {1}.
pub fn pascal_degree_members(base_primes: &[u64], k: u32) -> Result<Vec<DegreeMember>> {
    let m = base_primes.len();
    if m > 31 {
        return Err(invalid("at most 31 base primes"));
    }
    degree_space(m, k)?;
    let full = if m == 0 { 0 } else { (1u32 << m) - 1 };
    let mut vectors = Vec::new();
    if k >= 1 {
        nest(full, k, &mut vec![0u32; m], &mut vectors);
    }
    let mut out: Vec<DegreeMember> = vectors
        .into_iter()
        .map(|e| DegreeMember::from_exponents(base_primes, e))
        .collect();
    out.sort_by(|a, b| a.value.cmp(&b.value));
    Ok(out)
}

fn nest(support: u32, k: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if k == 0 {
        out.push(acc.clone());
        return;
    }
    // Non-empty submasks of `support`.
    let mut sub = support;
    while sub != 0 {
        bump(acc, sub, 1);
        nest(sub, k - 1, acc, out);
        bump(acc, sub, -1);
        sub = (sub - 1) & support;
    }
}

fn bump(acc: &mut [u32], mask: u32, delta: i32) {
    for (i, e) in acc.iter_mut().enumerate() {
        if mask >> i & 1 == 1 {
            *e = (*e as i32 + delta) as u32;
        }
    }
}

/// Builds the degree-k collection by both routes and insists they agree.
pub fn build_degree_collection(base_primes: &[u64], k: u32) -> Result<DegreeCollection> {
    if k == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    check_primes(base_primes)?;
    let direct = direct_degree_members(base_primes, k)?;
    let nested = pascal_degree_members(base_primes, k)?;
    if direct != nested {
        return Err(Error::Consistency(format!(
            "degree-{k} enumerations disagree: {} direct vs {} nested members",
            direct.len(),
            nested.len()
        )));
    }
    Ok(DegreeCollection {
        base_primes: base_primes.to_vec(),
        k,
        members: direct,
    })
}

/// Σ λ(d) over a degree-k collection, which is (-1)^k. For k = 1 this is
/// -λ(d₀) with d₀ = 1 the only degree-0 number, i.e. -1.
pub fn degree_liouville_sum(collection: &DegreeCollection) -> i64 {
    collection
        .members
        .iter()
        .map(|d| d.liouville() as i64)
        .sum()
}
