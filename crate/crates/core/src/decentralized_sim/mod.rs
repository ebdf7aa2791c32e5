//! Sequential observers feeding a coordinator that collects their decisions
//! one at a time in order of arrival.

mod sprt;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use sprt::{sprt_run, ObserverSampler, ObserverSpec, SprtOutcome, PMF_SUM_TOL};

/// Stream slots per run: one for the hypothesis draw, one per observer.
const SLOTS_PER_RUN: u64 = 16;
/// Runs handed to the sink at a time by [`simulate_chunked`].
pub const CHUNK_RUNS: usize = 1 << 16;

/// Observer specifications from the three-observer example, with the
/// default error targets.
pub fn default_observers() -> Vec<ObserverSpec> {
    let make = |p0: &[f64], p1: &[f64]| ObserverSpec {
        pmf_h0: p0.to_vec(),
        pmf_h1: p1.to_vec(),
        alpha: 0.05,
        beta: 0.05,
        max_samples: 10_000,
    };
    vec![
        make(&[0.20, 0.10, 0.15, 0.30, 0.25], &[0.40, 0.20, 0.10, 0.15, 0.15]),
        make(&[0.20, 0.40, 0.30, 0.10], &[0.25, 0.30, 0.20, 0.25]),
        make(&[0.25, 0.35, 0.40], &[0.35, 0.50, 0.15]),
    ]
}

fn default_runs() -> u64 {
    1_000_000
}

fn default_prior() -> [f64; 2] {
    [0.5, 0.5]
}

fn default_preference() -> Vec<usize> {
    vec![2, 1, 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_observers")]
    pub observers: Vec<ObserverSpec>,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    /// `(P[h = 0], P[h = 1])` for the per-run hypothesis draw.
    #[serde(default = "default_prior")]
    pub hypothesis_prior: [f64; 2],
    /// Observer ids (1-based) in order of precedence for simultaneous arrivals.
    #[serde(default = "default_preference")]
    pub preference: Vec<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            observers: default_observers(),
            runs: default_runs(),
            seed: 0,
            hypothesis_prior: default_prior(),
            preference: default_preference(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.observers.is_empty() || self.observers.len() as u64 >= SLOTS_PER_RUN {
            return Err(Error::invalid(
                "simulation config",
                format!("{} observers; 1 to {} supported", self.observers.len(), SLOTS_PER_RUN - 1),
            ));
        }
        for spec in &self.observers {
            spec.validate()?;
        }
        let [z0, z1] = self.hypothesis_prior;
        if !(z0 >= 0.0 && z1 >= 0.0) || (z0 + z1 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "simulation config",
                format!("hypothesis prior ({z0}, {z1}) is not a distribution"),
            ));
        }
        let mut pref = self.preference.clone();
        pref.sort_unstable();
        if pref != (1..=self.observers.len()).collect::<Vec<_>>() {
            return Err(Error::invalid(
                "simulation config",
                format!("preference {:?} is not a permutation of the observer ids", self.preference),
            ));
        }
        Ok(())
    }
}

/// One simulated run as seen by the coordinator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub h: u8,
    /// `(observer id, decision)` in collection order.
    pub decisions: Vec<(usize, u8)>,
    /// Stopping times indexed by observer id minus one.
    pub stop_times: Vec<u32>,
}

impl RunRecord {
    pub fn order(&self) -> impl Iterator<Item = usize> + '_ {
        self.decisions.iter().map(|&(id, _)| id)
    }

    /// Collection order as `"D2,D1,D3"`.
    pub fn order_label(&self) -> String {
        order_label(&self.order().collect::<Vec<_>>())
    }

    /// Decision of the given observer.
    pub fn decision_of(&self, observer: usize) -> Option<u8> {
        self.decisions.iter().find(|&&(id, _)| id == observer).map(|&(_, d)| d)
    }
}

pub fn order_label(order: &[usize]) -> String {
    order.iter().map(|id| format!("D{id}")).collect::<Vec<_>>().join(",")
}

/// Observer ids sorted by stopping time; equal times follow `preference`.
pub fn coordinate(stop_times: &[u32], decisions: &[u8], preference: &[usize]) -> Vec<(usize, u8)> {
    let rank = |id: usize| preference.iter().position(|&p| p == id).unwrap_or(usize::MAX);
    let mut ids: Vec<usize> = (1..=stop_times.len()).collect();
    ids.sort_by_key(|&id| (stop_times[id - 1], rank(id), id));
    ids.into_iter().map(|id| (id, decisions[id - 1])).collect()
}

/// Independent generator for `slot` of run `run_index`.
pub fn run_stream(seed: u64, run_index: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index.wrapping_mul(SLOTS_PER_RUN) + slot);
    rng
}

struct Campaign {
    samplers: Vec<ObserverSampler>,
    config: SimConfig,
}

impl Campaign {
    fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let samplers = config
            .observers
            .iter()
            .map(ObserverSpec::sampler)
            .collect::<Result<_>>()?;
        Ok(Self {
            samplers,
            config: config.clone(),
        })
    }

    fn run(&self, index: u64) -> RunRecord {
        let seed = self.config.seed;
        let h = u8::from(run_stream(seed, index, 0).gen::<f64>() < self.config.hypothesis_prior[1]);
        let outcomes: Vec<SprtOutcome> = self
            .samplers
            .iter()
            .enumerate()
            .map(|(i, s)| s.run(h, &mut run_stream(seed, index, i as u64 + 1)))
            .collect();
        let stop_times: Vec<u32> = outcomes.iter().map(|o| o.stop_time).collect();
        let decisions: Vec<u8> = outcomes.iter().map(|o| o.decision).collect();
        RunRecord {
            h,
            decisions: coordinate(&stop_times, &decisions, &self.config.preference),
            stop_times,
        }
    }
}

/// All runs of the campaign, computed in parallel. The output depends only
/// on the configuration.
pub fn simulate_campaign(config: &SimConfig) -> Result<Vec<RunRecord>> {
    let campaign = Campaign::new(config)?;
    Ok((0..config.runs).into_par_iter().map(|i| campaign.run(i)).collect())
}

/// Single-threaded equivalent of [`simulate_campaign`].
pub fn simulate_campaign_sequential(config: &SimConfig) -> Result<Vec<RunRecord>> {
    let campaign = Campaign::new(config)?;
    Ok((0..config.runs).map(|i| campaign.run(i)).collect())
}

/// Runs the campaign in parallel chunks of [`CHUNK_RUNS`], passing each
/// chunk to `sink` in run order without holding every record in memory.
pub fn simulate_chunked(
    config: &SimConfig,
    mut sink: impl FnMut(&[RunRecord]) -> Result<()>,
) -> Result<()> {
    let campaign = Campaign::new(config)?;
    let mut start = 0;
    while start < config.runs {
        let end = (start + CHUNK_RUNS as u64).min(config.runs);
        let chunk: Vec<RunRecord> = (start..end).into_par_iter().map(|i| campaign.run(i)).collect();
        sink(&chunk)?;
        start = end;
    }
    Ok(())
}

/// Per-run decision counts without storing records.
pub fn simulate_counts(config: &SimConfig) -> Result<crate::empirics::CountTable> {
    let campaign = Campaign::new(config)?;
    Ok((0..config.runs)
        .into_par_iter()
        .fold(crate::empirics::CountTable::default, |mut t, i| {
            t.add_record(&campaign.run(i));
            t
        })
        .reduce(crate::empirics::CountTable::default, |mut a, b| {
            a.merge(&b);
            a
        }))
}

/// Column header of the run-record CSV.
pub fn csv_header(observers: usize) -> Vec<String> {
    const ORDINALS: [&str; 3] = ["first", "second", "third"];
    let mut header = vec!["h".to_string(), "obs_order".to_string()];
    header.extend((0..observers).map(|k| match ORDINALS.get(k) {
        Some(w) => format!("d_{w}"),
        None => format!("d_{}", k + 1),
    }));
    header.extend((1..=observers).map(|i| format!("tau{i}")));
    header
}

/// Writes run records as CSV (header included when `header` is true).
pub fn write_records_csv<W: Write>(records: &[RunRecord], out: W, header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        let n = records.first().map_or(3, |r| r.stop_times.len());
        w.write_record(csv_header(n))?;
    }
    for r in records {
        let mut row = vec![r.h.to_string(), r.order_label()];
        row.extend(r.decisions.iter().map(|&(_, d)| d.to_string()));
        row.extend(r.stop_times.iter().map(u32::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses run records written by [`write_records_csv`].
pub fn read_records_csv<R: std::io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let bad = |what: &str| Error::invalid("run record", format!("{what} in row {:?}", row));
        let h: u8 = row.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("hypothesis"))?;
        let order: Vec<usize> = row
            .get(1)
            .ok_or_else(|| bad("order"))?
            .split(',')
            .map(|s| s.trim().trim_start_matches('D').parse().map_err(|_| bad("order")))
            .collect::<Result<_>>()?;
        let n = order.len();
        if row.len() != 2 + 2 * n {
            return Err(bad("column count"));
        }
        let field = |i: usize| row.get(i).unwrap_or_default();
        let decisions = order
            .iter()
            .enumerate()
            .map(|(k, &id)| field(2 + k).parse().map(|d| (id, d)).map_err(|_| bad("decision")))
            .collect::<Result<_>>()?;
        let stop_times = (0..n)
            .map(|k| field(2 + n + k).parse().map_err(|_| bad("stop time")))
            .collect::<Result<_>>()?;
        out.push(RunRecord {
            h,
            decisions,
            stop_times,
        });
    }
    Ok(out)
}
