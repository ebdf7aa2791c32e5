use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decentralized_sim::RunRecord;
use crate::error::{Error, Result};

/// `(observer id, decision)` pairs in collection order.
pub type Sequence = Vec<(usize, u8)>;

/// Formats a sequence as `"D2=1,D1=0,D3=1"`.
pub fn sequence_key(seq: &[(usize, u8)]) -> String {
    seq.iter()
        .map(|(id, d)| format!("D{id}={d}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_sequence_key(key: &str) -> Result<Sequence> {
    key.split(',')
        .map(|part| {
            let bad = || Error::invalid("sequence key", format!("cannot parse {part:?} in {key:?}"));
            let (id, d) = part.trim().split_once('=').ok_or_else(bad)?;
            let id: usize = id.trim().trim_start_matches('D').parse().map_err(|_| bad())?;
            let d: u8 = d.trim().parse().map_err(|_| bad())?;
            if d > 1 || id == 0 {
                return Err(bad());
            }
            Ok((id, d))
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisCounts {
    pub total: u64,
    /// Full decision sequences keyed by [`sequence_key`].
    pub counts: BTreeMap<String, u64>,
}

/// Decision-sequence counts per hypothesis. Tables built from disjoint sets
/// of runs can be merged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub h0: HypothesisCounts,
    pub h1: HypothesisCounts,
}

impl CountTable {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> Self {
        let mut t = Self::default();
        for r in records {
            t.add_record(r);
        }
        t
    }

    pub fn add_record(&mut self, record: &RunRecord) {
        self.add(record.h, &record.decisions, 1);
    }

    pub fn add(&mut self, h: u8, seq: &[(usize, u8)], count: u64) {
        let side = self.side_mut(h);
        side.total += count;
        *side.counts.entry(sequence_key(seq)).or_insert(0) += count;
    }

    pub fn merge(&mut self, other: &CountTable) {
        for h in [0, 1] {
            let theirs = other.side(h).clone();
            let mine = self.side_mut(h);
            mine.total += theirs.total;
            for (k, v) in theirs.counts {
                *mine.counts.entry(k).or_insert(0) += v;
            }
        }
    }

    pub fn side(&self, h: u8) -> &HypothesisCounts {
        if h == 0 {
            &self.h0
        } else {
            &self.h1
        }
    }

    fn side_mut(&mut self, h: u8) -> &mut HypothesisCounts {
        if h == 0 {
            &mut self.h0
        } else {
            &mut self.h1
        }
    }

    pub fn total(&self, h: u8) -> u64 {
        self.side(h).total
    }

    /// Parsed sequences with their counts under `h`.
    pub fn entries(&self, h: u8) -> Result<Vec<(Sequence, u64)>> {
        self.side(h)
            .counts
            .iter()
            .map(|(k, &v)| Ok((parse_sequence_key(k)?, v)))
            .collect()
    }

    /// Counts must add up to the totals and keys must parse.
    pub fn validate(&self) -> Result<()> {
        for h in [0, 1] {
            let side = self.side(h);
            let sum: u64 = self.entries(h)?.iter().map(|(_, c)| c).sum();
            if sum != side.total {
                return Err(Error::invalid(
                    "count table",
                    format!("counts under h={h} sum to {sum}, total is {}", side.total),
                ));
            }
        }
        Ok(())
    }

    /// Number of runs under `h` whose sequence satisfies `pred`.
    pub fn count_where(&self, h: u8, pred: impl Fn(&[(usize, u8)]) -> bool) -> Result<u64> {
        Ok(self
            .entries(h)?
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, c)| c)
            .sum())
    }
}

/// Fraction of runs under `h` whose decision sequence satisfies `event`.
pub fn empirical_prob(table: &CountTable, event: impl Fn(&[(usize, u8)]) -> bool, h: u8) -> Result<f64> {
    let total = table.total(h);
    if total == 0 {
        return Err(Error::EmptyTable { h });
    }
    Ok(table.count_where(h, event)? as f64 / total as f64)
}

/// Estimate of `P[target | first collected, then second collected]` under
/// `h`, with the number of runs in the conditioning event. `target` must be
/// the third decision collected.
pub fn ordered_conditional(
    table: &CountTable,
    first: (usize, u8),
    second: (usize, u8),
    target: (usize, u8),
    h: u8,
) -> Result<(f64, u64)> {
    let prefix = |s: &[(usize, u8)]| s.len() >= 3 && s[0] == first && s[1] == second;
    let n = table.count_where(h, prefix)?;
    if n == 0 {
        return Err(Error::ZeroDenominator(format!(
            "no runs with {} then {} under h={h}",
            sequence_key(&[first]),
            sequence_key(&[second])
        )));
    }
    let hits = table.count_where(h, |s| prefix(s) && s[2] == target)?;
    Ok((hits as f64 / n as f64, n))
}
