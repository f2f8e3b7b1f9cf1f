//! Finite-scale statistics for M(x) and L(x).
//!
//! Nothing here asserts a limit. M(x)/x^(1/2+ε) is reported at sample
//! points, sign counts and run lengths of μ are tabulated, and a seeded
//! coin-flip ensemble provides the random-walk baseline to compare against.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::invalid;
use crate::recursion::MoebiusSeries;
use crate::sieve::FactorizationTable;
use crate::Result;

pub const DEFAULT_EPSILON: f64 = 0.05;

/// Name of the generator behind [`random_walk_baseline`].
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64, next_u64 bits LSB first";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthSample {
    pub x: u64,
    pub mertens: i64,
    pub liouville: i64,
    pub mertens_normalized: f64,
    pub liouville_normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthSeries {
    pub epsilon: f64,
    pub samples: Vec<GrowthSample>,
}

impl GrowthSeries {
    pub fn max_abs_normalized(&self, from: u64, to: u64) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.x >= from && s.x <= to)
            .map(|s| s.mertens_normalized.abs())
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "{:>12} {:>8} {:>8} {:>14} {:>14}\n",
            "x",
            "M(x)",
            "L(x)",
            format!("M/x^{:.2}", 0.5 + self.epsilon),
            format!("L/x^{:.2}", 0.5 + self.epsilon)
        );
        for s in &self.samples {
            out.push_str(&format!(
                "{:>12} {:>8} {:>8} {:>14.6} {:>14.6}\n",
                s.x, s.mertens, s.liouville, s.mertens_normalized, s.liouville_normalized
            ));
        }
        out
    }
}

/// Powers of 10 and powers of 2 up to `limit`, ascending, deduplicated.
pub fn default_sample_points(limit: u64) -> Vec<u64> {
    let mut pts = Vec::new();
    let mut p = 1u64;
    while p <= limit {
        pts.push(p);
        match p.checked_mul(10) {
            Some(v) => p = v,
            None => break,
        }
    }
    let mut p = 2u64;
    while p <= limit {
        pts.push(p);
        match p.checked_mul(2) {
            Some(v) => p = v,
            None => break,
        }
    }
    pts.sort_unstable();
    pts.dedup();
    pts
}

pub fn sample_growth(
    limit: u64,
    sample_points: &[u64],
    epsilon: f64,
    series: &MoebiusSeries,
    sieve: &FactorizationTable,
) -> Result<GrowthSeries> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(invalid(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if series.limit() < limit || sieve.limit() < limit {
        return Err(invalid(format!(
            "limit {limit} exceeds series ({}) or sieve ({}) coverage",
            series.limit(),
            sieve.limit()
        )));
    }
    if let Some(&x) = sample_points.iter().find(|&&x| x == 0 || x > limit) {
        return Err(invalid(format!("sample point {x} outside 1..={limit}")));
    }
    if sample_points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("sample points must be strictly increasing"));
    }

    let lambda = sieve.liouville_values();
    let mut samples = Vec::with_capacity(sample_points.len());
    let mut l_acc = 0i64;
    let mut upto = 0u64;
    let exponent = 0.5 + epsilon;
    for &x in sample_points {
        while upto < x {
            upto += 1;
            l_acc += lambda[upto as usize] as i64;
        }
        let m = series.mertens(x)?;
        let scale = (x as f64).powf(exponent);
        samples.push(GrowthSample {
            x,
            mertens: m,
            liouville: l_acc,
            mertens_normalized: m as f64 / scale,
            liouville_normalized: l_acc as f64 / scale,
        });
    }
    Ok(GrowthSeries { epsilon, samples })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignBalance {
    pub plus: u64,
    pub minus: u64,
    pub zero: u64,
}

pub fn sign_balance(limit: u64, series: &MoebiusSeries) -> Result<SignBalance> {
    let values = covered(limit, series)?;
    let mut b = SignBalance {
        plus: 0,
        minus: 0,
        zero: 0,
    };
    for &v in values {
        match v {
            1 => b.plus += 1,
            -1 => b.minus += 1,
            _ => b.zero += 1,
        }
    }
    Ok(b)
}

fn covered(limit: u64, series: &MoebiusSeries) -> Result<&[i8]> {
    if limit == 0 || series.limit() < limit {
        return Err(invalid(format!(
            "series covers 1..={}, needs {limit}",
            series.limit()
        )));
    }
    Ok(&series.mu_slice()[..limit as usize])
}

/// Run length → number of maximal runs of that length, for one sign.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunLengthHistogram {
    pub sign: i8,
    pub counts: BTreeMap<u64, u64>,
}

impl RunLengthHistogram {
    pub fn weighted_total(&self) -> u64 {
        self.counts.iter().map(|(len, c)| len * c).sum()
    }

    pub fn longest(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunLengths {
    pub plus: RunLengthHistogram,
    pub minus: RunLengthHistogram,
}

/// Maximal constant-sign runs in the nonzero subsequence of μ(1..=limit).
pub fn run_length_histogram(limit: u64, series: &MoebiusSeries) -> Result<RunLengths> {
    let values = covered(limit, series)?;
    let mut plus = RunLengthHistogram {
        sign: 1,
        ..Default::default()
    };
    let mut minus = RunLengthHistogram {
        sign: -1,
        ..Default::default()
    };
    let mut run: Option<(i8, u64)> = None;
    let mut close = |sign: i8, len: u64| {
        let h = if sign > 0 { &mut plus } else { &mut minus };
        *h.counts.entry(len).or_insert(0) += 1;
    };
    for &v in values.iter().filter(|&&v| v != 0) {
        run = match run {
            Some((s, len)) if s == v => Some((s, len + 1)),
            Some((s, len)) => {
                close(s, len);
                Some((v, 1))
            }
            None => Some((v, 1)),
        };
    }
    if let Some((s, len)) = run {
        close(s, len);
    }
    Ok(RunLengths { plus, minus })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub max_excursion: u64,
    pub final_sum: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaselineReport {
    pub generator: String,
    pub seed: u64,
    pub num_flips: u64,
    pub trials: Vec<TrialOutcome>,
}

impl BaselineReport {
    /// Fraction of trials with |final sum| < 2K·√N.
    pub fn fraction_within(&self, k: f64) -> f64 {
        let bound = 2.0 * k * (self.num_flips as f64).sqrt();
        let hits = self
            .trials
            .iter()
            .filter(|t| (t.final_sum.unsigned_abs() as f64) < bound)
            .count();
        hits as f64 / self.trials.len() as f64
    }

    /// |final sum| / √N per trial.
    pub fn scaled_final_sums(&self) -> Vec<f64> {
        let root = (self.num_flips as f64).sqrt();
        self.trials
            .iter()
            .map(|t| t.final_sum.unsigned_abs() as f64 / root)
            .collect()
    }

    pub fn max_excursions(&self) -> Vec<u64> {
        self.trials.iter().map(|t| t.max_excursion).collect()
    }
}

/// Limit of P(|heads - tails| < 2K·√N) as N grows:
/// 2·∫₀^a exp(-πx²) dx with a = (2K²/π)^(1/2), which is erf(K·√2).
pub fn de_moivre_laplace_fraction(k: f64) -> f64 {
    libm::erf(k * std::f64::consts::SQRT_2)
}

/// `trials` independent ±1 walks of `num_flips` steps from one seeded
/// generator, consumed in trial order.
pub fn random_walk_baseline(num_flips: u64, trials: u64, seed: u64) -> Result<BaselineReport> {
    if trials == 0 {
        return Err(invalid("baseline needs at least one trial"));
    }
    if num_flips == 0 {
        return Err(invalid("baseline needs at least one flip"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut sum = 0i64;
        let mut max = 0u64;
        let mut left = num_flips;
        while left > 0 {
            let word = rng.next_u64();
            let take = left.min(64);
            for bit in 0..take {
                sum += if word >> bit & 1 == 1 { 1 } else { -1 };
                max = max.max(sum.unsigned_abs());
            }
            left -= take;
        }
        outcomes.push(TrialOutcome {
            trial,
            max_excursion: max,
            final_sum: sum,
        });
    }
    Ok(BaselineReport {
        generator: GENERATOR.to_string(),
        seed,
        num_flips,
        trials: outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcursionComparison {
    pub limit: u64,
    /// max |M(x)| over 1 <= x <= limit.
    pub mobius_max_excursion: u64,
    pub argmax: u64,
    /// Square-free integers up to `limit`: the number of nonzero μ values.
    pub squarefree_count: u64,
    /// Share of random walks (same length) whose maximum excursion is
    /// strictly below the Möbius one, in percent.
    pub percentile: f64,
    pub baseline_median: f64,
    pub baseline: BaselineReport,
}

pub fn compare_excursions(
    limit: u64,
    series: &MoebiusSeries,
    seed: u64,
    trials: u64,
) -> Result<ExcursionComparison> {
    let values = covered(limit, series)?;
    let mut best = (0u64, 1u64);
    for (i, &m) in series.mertens_slice()[..limit as usize].iter().enumerate() {
        if m.unsigned_abs() > best.0 {
            best = (m.unsigned_abs(), i as u64 + 1);
        }
    }
    let squarefree = values.iter().filter(|&&v| v != 0).count() as u64;
    let baseline = random_walk_baseline(squarefree.max(1), trials, seed)?;
    let mut ex = baseline.max_excursions();
    let below = ex.iter().filter(|&&e| e < best.0).count();
    ex.sort_unstable();
    let mid = ex.len() / 2;
    let median = if ex.len() % 2 == 1 {
        ex[mid] as f64
    } else {
        (ex[mid - 1] + ex[mid]) as f64 / 2.0
    };
    Ok(ExcursionComparison {
        limit,
        mobius_max_excursion: best.0,
        argmax: best.1,
        squarefree_count: squarefree,
        percentile: 100.0 * below as f64 / trials as f64,
        baseline_median: median,
        baseline,
    })
}
