//! Cascade tables: d, f(d) and the running total Σf(d) for one n.
//!
//! In the `Full` layout the running total always ends at 0 and its
//! penultimate value, sign reversed, is μ(n). The `Negated` layout
//! negates every term and stops at d = n - 1, so its last running total is
//! μ(n) itself.

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::recursion::{f_term, MoebiusSeries};
use crate::{signed, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Full,
    Negated,
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "appendix9" => Ok(Variant::Full),
            "negated" | "klein" => Ok(Variant::Negated),
            other => Err(invalid(format!("unknown cascade variant {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CascadeRow {
    pub d: u64,
    pub f: i64,
    pub running_total: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CascadeTable {
    pub n: u64,
    pub variant: Variant,
    pub include_zero_rows: bool,
    /// Last d folded into the running totals (n, or n - 1 when negated).
    pub through: u64,
    pub rows: Vec<CascadeRow>,
}

pub fn build_cascade(
    n: u64,
    variant: Variant,
    include_zero_rows: bool,
    series: &MoebiusSeries,
) -> Result<CascadeTable> {
    if n < 2 {
        return Err(invalid(format!("cascade needs n >= 2, got {n}")));
    }
    if series.limit() < n {
        return Err(invalid(format!(
            "series covers 1..={}, cascade needs {n}",
            series.limit()
        )));
    }
    let (through, sign) = match variant {
        Variant::Full => (n, 1),
        Variant::Negated => (n - 1, -1),
    };
    let mut rows = Vec::new();
    let mut total = 0i64;
    for d in 1..=through {
        let f = sign * f_term(d, n, series)?;
        total += f;
        if f != 0 || include_zero_rows {
            rows.push(CascadeRow {
                d,
                f,
                running_total: total,
            });
        }
    }
    Ok(CascadeTable {
        n,
        variant,
        include_zero_rows,
        through,
        rows,
    })
}

impl CascadeTable {
    /// Running total after every d `<= d_max` (zero rows count even when
    /// hidden).
    pub fn total_through(&self, d_max: u64) -> Option<i64> {
        if d_max > self.through {
            return None;
        }
        Some(
            self.rows
                .iter()
                .take_while(|r| r.d <= d_max)
                .last()
                .map_or(0, |r| r.running_total),
        )
    }

    pub fn final_total(&self) -> i64 {
        self.rows.last().map_or(0, |r| r.running_total)
    }

    /// Drops every row beyond `d_max`, as when the final term is left off.
    pub fn truncated(&self, d_max: u64) -> CascadeTable {
        let mut t = self.clone();
        t.rows.retain(|r| r.d <= d_max);
        t.through = t.through.min(d_max);
        t
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        match self.variant {
            Variant::Full => {
                out.push_str(&format!("n = {}\n", self.n));
                out.push_str(&format!("{:>6} {:>6} {:>9}\n", "d", "f(d)", "sum f(d)"));
                for r in &self.rows {
                    if r.d == self.n {
                        continue;
                    }
                    out.push_str(&row_line(&r.d.to_string(), r));
                }
                if self.through == self.n {
                    let mu = self.rows.iter().find(|r| r.d == self.n).map_or(0, |r| r.f);
                    out.push_str(&format!(
                        "mu({}) = {} {:>9}\n",
                        self.n,
                        signed(mu),
                        signed(self.final_total())
                    ));
                }
            }
            Variant::Negated => {
                out.push_str(&format!("n = {} (negated)\n", self.n));
                out.push_str(&format!("{:>6} {:>6} {:>9}\n", "d", "f(d)", "sum f(d)"));
                for r in &self.rows {
                    let label = if r.d == 1 {
                        String::new()
                    } else {
                        r.d.to_string()
                    };
                    out.push_str(&row_line(&label, r));
                }
                if self.through + 1 == self.n {
                    out.push_str(&format!(
                        "therefore mu({}) = {}\n",
                        self.n,
                        signed(self.final_total())
                    ));
                }
            }
        }
        out
    }
}

fn row_line(label: &str, r: &CascadeRow) -> String {
    format!(
        "{:>6} {:>6} {:>9}\n",
        label,
        signed(r.f),
        signed(r.running_total)
    )
}

/// μ(n) as the sign-reversed running total at d = n - 1.
pub fn mu_from_penultimate(table: &CascadeTable) -> Result<i8> {
    if table.variant != Variant::Full {
        return Err(invalid(
            "the penultimate-term rule applies to the full cascade only",
        ));
    }
    let total = table
        .total_through(table.n - 1)
        .ok_or_else(|| invalid(format!("cascade for n = {} is truncated", table.n)))?;
    if !(-1..=1).contains(&total) {
        return Err(crate::Error::Consistency(format!(
            "penultimate running total {total} for n = {}",
            table.n
        )));
    }
    Ok(-total as i8)
}

/// Split of the rectified terms at n/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SectionSummary {
    pub n: u64,
    /// Σ f(d) for d <= ⌊n/2⌋.
    pub upper_sum: i64,
    /// Σ μ(d) for ⌊n/2⌋ < d <= n (every quotient there is 1).
    pub lower_sum: i64,
    pub upper_term_count: u64,
    pub lower_term_count: u64,
    /// Nonzero upper-section terms with negative sign.
    pub upper_minus_count: u64,
    pub lower_minus_count: u64,
}

impl SectionSummary {
    /// Upper sum divided by its number of nonzero terms.
    pub fn upper_average(&self) -> f64 {
        ratio(self.upper_sum, self.upper_term_count)
    }

    pub fn lower_average(&self) -> f64 {
        ratio(self.lower_sum, self.lower_term_count)
    }
}

fn ratio(sum: i64, count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum as f64 / count as f64
    }
}

pub fn section_split(n: u64, series: &MoebiusSeries) -> Result<SectionSummary> {
    if n < 2 {
        return Err(invalid(format!("sections need n >= 2, got {n}")));
    }
    if series.limit() < n {
        return Err(invalid(format!(
            "series covers 1..={}, sections need {n}",
            series.limit()
        )));
    }
    let half = n / 2;
    let mut s = SectionSummary {
        n,
        upper_sum: 0,
        lower_sum: 0,
        upper_term_count: 0,
        lower_term_count: 0,
        upper_minus_count: 0,
        lower_minus_count: 0,
    };
    for d in 1..=half {
        let f = f_term(d, n, series)?;
        s.upper_sum += f;
        if f != 0 {
            s.upper_term_count += 1;
        }
        if f < 0 {
            s.upper_minus_count += 1;
        }
    }
    for d in half + 1..=n {
        let mu = series.mu(d)? as i64;
        s.lower_sum += mu;
        if mu != 0 {
            s.lower_term_count += 1;
        }
        if mu < 0 {
            s.lower_minus_count += 1;
        }
    }
    Ok(s)
}

/// Section summaries for n0, 2·n0, ..., n0·2^steps.
pub fn doubling_trace(n0: u64, steps: u32, series: &MoebiusSeries) -> Result<Vec<SectionSummary>> {
    let top = 1u64
        .checked_shl(steps)
        .and_then(|m| n0.checked_mul(m))
        .ok_or_else(|| invalid("doubling trace overflows"))?;
    if series.limit() < top {
        return Err(invalid(format!(
            "series covers 1..={}, trace needs {top}",
            series.limit()
        )));
    }
    (0..=steps)
        .map(|k| section_split(n0 << k, series))
        .collect()
}

pub fn render_sections(summaries: &[SectionSummary]) -> String {
    let mut out = format!(
        "{:>8} {:>7} {:>7} {:>7} {:>7} {:>8} {:>8}\n",
        "n", "upper", "lower", "terms_u", "terms_l", "minus_u", "d_minus"
    );
    let mut prev: Option<&SectionSummary> = None;
    for s in summaries {
        let delta = prev.map_or("-".to_string(), |p| {
            signed(s.upper_minus_count as i64 - p.upper_minus_count as i64)
        });
        out.push_str(&format!(
            "{:>8} {:>7} {:>7} {:>7} {:>7} {:>8} {:>8}\n",
            s.n,
            signed(s.upper_sum),
            signed(s.lower_sum),
            s.upper_term_count,
            s.lower_term_count,
            s.upper_minus_count,
            delta
        ));
        prev = Some(s);
    }
    out
}
