//! Empirical set functions over coordinator records, order-effect
//! statistics, ordered outcome distributions and a fitted plane model.

mod counts;
mod fit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decentralized_sim::order_label;
use crate::error::{Error, Result};

pub use counts::{
    empirical_prob, ordered_conditional, parse_sequence_key, sequence_key, CountTable,
    HypothesisCounts, Sequence,
};
pub use fit::{fit_angles_for_state, fit_von_neumann_model, FittedModel, Q_GRID_STEP};

/// Default `|z|` needed to call an order effect significant.
pub const DEFAULT_Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEffect {
    pub z: f64,
    pub significant: bool,
}

/// Two-proportion z test with pooled variance.
pub fn order_effect_test(est_a: f64, n_a: u64, est_b: f64, n_b: u64, z_threshold: f64) -> OrderEffect {
    let (na, nb) = (n_a as f64, n_b as f64);
    let pooled = (est_a * na + est_b * nb) / (na + nb);
    let var = pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb);
    let z = if var > 0.0 { (est_a - est_b) / var.sqrt() } else { 0.0 };
    OrderEffect {
        z,
        significant: z.abs() >= z_threshold,
    }
}

/// Outcome distributions under both hypotheses for one measurement order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedDistribution {
    /// Label such as `"D2,D1,D3"`.
    pub order: String,
    pub outcomes: Vec<String>,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
}

pub const DISTRIBUTION_SUM_TOL: f64 = 1e-9;

impl OrderedDistribution {
    pub fn new(order: impl Into<String>, outcomes: Vec<String>, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        let d = Self {
            order: order.into(),
            outcomes,
            p0,
            p1,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.outcomes.len();
        for p in [&self.p0, &self.p1] {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.len(),
                });
            }
            let total: f64 = p.iter().sum();
            if p.iter().any(|&x| !(x >= 0.0)) || (total - 1.0).abs() > DISTRIBUTION_SUM_TOL {
                return Err(Error::invalid(
                    "ordered distribution",
                    format!("order {}: {p:?} is not a probability vector", self.order),
                ));
            }
        }
        Ok(())
    }
}

/// Distribution of the decision tuple read in `order`, from the runs whose
/// collection order was exactly `order`. Outcome `(d_1, ..., d_n)` sits at
/// index `sum d_k 2^(n-k)`, so for three decisions the index is `4 d_1 + 2 d_2 + d_3`.
pub fn ordered_distribution(table: &CountTable, order: &[usize]) -> Result<OrderedDistribution> {
    let n = order.len();
    let mut probs = [vec![0.0; 1 << n], vec![0.0; 1 << n]];
    for h in [0u8, 1] {
        let mut matched = 0u64;
        for (seq, c) in table.entries(h)? {
            if seq.len() != n || seq.iter().zip(order).any(|(&(id, _), &o)| id != o) {
                continue;
            }
            let idx = seq.iter().fold(0usize, |acc, &(_, d)| (acc << 1) | usize::from(d));
            probs[usize::from(h)][idx] += c as f64;
            matched += c;
        }
        if matched == 0 {
            return Err(Error::InsufficientData(format!(
                "no runs collected in order {} under h={h}",
                order_label(order)
            )));
        }
        for p in probs[usize::from(h)].iter_mut() {
            *p /= matched as f64;
        }
    }
    let outcomes = (0..1usize << n)
        .map(|idx| {
            (0..n)
                .map(|k| ((idx >> (n - 1 - k)) & 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let [p0, p1] = probs;
    OrderedDistribution::new(order_label(order), outcomes, p0, p1)
}

/// All permutations of `1..=n` in lexicographic order.
pub fn all_orders(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for id in 1..=n {
            if !prefix.contains(&id) {
                prefix.push(id);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

/// Keyed by order label.
pub fn distributions_by_order(dists: &[OrderedDistribution]) -> BTreeMap<String, OrderedDistribution> {
    dists.iter().map(|d| (d.order.clone(), d.clone())).collect()
}

/// One row of a conditional table: the estimate of the target observer's
/// decision given that `first` was collected before `second`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    /// Composed operation, applied right to left: `"T_E1∘T_E2'"` conditions on `E2'` first.
    pub operation: String,
    pub first: (usize, u8),
    pub second: (usize, u8),
    /// Runs matching `first` then `second`.
    pub n: u64,
    /// `P[target = 0 | ...]`, `None` when `n` is zero.
    pub p_target_0: Option<f64>,
    /// `P[target = 1 | ...]`, `None` when `n` is zero.
    pub p_target_1: Option<f64>,
}

fn event_name(id: usize, value: u8) -> String {
    if value == 1 {
        format!("E{id}")
    } else {
        format!("E{id}'")
    }
}

/// Eight rows for the pair `(a, b)` with target `c` under `h`: first the
/// four rows where `b` is collected first, then the four where `a` is.
pub fn conditional_table(table: &CountTable, h: u8, a: usize, b: usize, c: usize) -> Result<Vec<ConditionalRow>> {
    let mut rows = Vec::with_capacity(8);
    for a_first in [false, true] {
        // values of (a, b) in the order 00, 01, 10, 11
        for (va, vb) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            let (first, second) = if a_first { ((a, va), (b, vb)) } else { ((b, vb), (a, va)) };
            let operation = format!(
                "T_{}∘T_{}",
                event_name(second.0, second.1),
                event_name(first.0, first.1)
            );
            let row = match ordered_conditional(table, first, second, (c, 1), h) {
                Ok((p1, n)) => ConditionalRow {
                    operation,
                    first,
                    second,
                    n,
                    p_target_0: Some(1.0 - p1),
                    p_target_1: Some(p1),
                },
                Err(Error::ZeroDenominator(_)) => ConditionalRow {
                    operation,
                    first,
                    second,
                    n: 0,
                    p_target_0: None,
                    p_target_1: None,
                },
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Comparison of `P[c = 1 | a then b]` against `P[c = 1 | b then a]` for
/// fixed decision values of `a` and `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEffectEntry {
    pub h: u8,
    pub a: (usize, u8),
    pub b: (usize, u8),
    pub target: (usize, u8),
    pub estimate_a_first: Option<f64>,
    pub n_a_first: u64,
    pub estimate_b_first: Option<f64>,
    pub n_b_first: u64,
    pub z: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEffectReport {
    pub z_threshold: f64,
    pub entries: Vec<OrderEffectEntry>,
    /// Entries skipped because a conditioning event had no runs.
    pub zero_denominators: usize,
    pub any_significant: bool,
}

/// Order-effect tests for every hypothesis and every pair of decision values.
pub fn order_effect_report(table: &CountTable, a: usize, b: usize, c: usize, z_threshold: f64) -> Result<OrderEffectReport> {
    let mut entries = Vec::new();
    let mut zero_denominators = 0;
    for h in [0u8, 1] {
        for (va, vb) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            let lookup = |first, second| match ordered_conditional(table, first, second, (c, 1), h) {
                Ok((p, n)) => Ok((Some(p), n)),
                Err(Error::ZeroDenominator(_)) => Ok((None, 0)),
                Err(e) => Err(e),
            };
            let (pa, na) = lookup((a, va), (b, vb))?;
            let (pb, nb) = lookup((b, vb), (a, va))?;
            let test = match (pa, pb) {
                (Some(x), Some(y)) => Some(order_effect_test(x, na, y, nb, z_threshold)),
                _ => {
                    zero_denominators += 1;
                    None
                }
            };
            entries.push(OrderEffectEntry {
                h,
                a: (a, va),
                b: (b, vb),
                target: (c, 1),
                estimate_a_first: pa,
                n_a_first: na,
                estimate_b_first: pb,
                n_b_first: nb,
                z: test.map(|t| t.z),
                significant: test.is_some_and(|t| t.significant),
            });
        }
    }
    let any_significant = entries.iter().any(|e| e.significant);
    Ok(OrderEffectReport {
        z_threshold,
        entries,
        zero_denominators,
        any_significant,
    })
}
