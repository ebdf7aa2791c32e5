//! CSV emitters for the published table layouts, with readers used to
//! check that emitted values round-trip.
//!
//! Floats are written with `Display`, the shortest representation that
//! parses back to the same value.

use std::io::{Read, Write};

use crate::detection::{OrderError, OrderErrorTable};
use crate::empirics::{ConditionalRow, OrderedDistribution};
use crate::error::{Error, Result};

pub const ORDER_ERROR_HEADER: [&str; 3] = ["Order of measurements", "Probability of error", "optimal"];

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_cell(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::invalid("csv cell", format!("{s:?} is not a number")))
}

/// Conditional table for target observer `target`: header
/// `operation,E3',E3`, one row per composed operation.
pub fn write_conditional_csv<W: Write>(rows: &[ConditionalRow], target: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["operation".to_string(), format!("E{target}'"), format!("E{target}")])?;
    for r in rows {
        w.write_record([r.operation.clone(), cell(r.p_target_0), cell(r.p_target_1)])?;
    }
    w.flush()?;
    Ok(())
}

/// `(operation, P[target = 0], P[target = 1])` rows; empty cells are `None`.
pub type ConditionalCsvRow = (String, Option<f64>, Option<f64>);

pub fn read_conditional_csv<R: Read>(input: R) -> Result<Vec<ConditionalCsvRow>> {
    let mut reader = csv::Reader::from_reader(input);
    reader
        .records()
        .map(|row| {
            let row = row?;
            if row.len() != 3 {
                return Err(Error::invalid("conditional table", format!("row {row:?}")));
            }
            Ok((row[0].to_string(), parse_cell(&row[1])?, parse_cell(&row[2])?))
        })
        .collect()
}

/// One row per order with the minimum error; the `optimal` column marks
/// the smallest.
pub fn write_order_errors_csv<W: Write>(table: &OrderErrorTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ORDER_ERROR_HEADER)?;
    for (i, r) in table.rows.iter().enumerate() {
        w.write_record([r.order.clone(), r.error.to_string(), (i == table.best).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of an order-error CSV with the `optimal` flag.
pub fn read_order_errors_csv<R: Read>(input: R) -> Result<Vec<(OrderError, bool)>> {
    let mut reader = csv::Reader::from_reader(input);
    reader
        .records()
        .map(|row| {
            let row = row?;
            let bad = || Error::invalid("order error table", format!("row {row:?}"));
            if row.len() != 3 {
                return Err(bad());
            }
            let error = parse_cell(&row[1])?.ok_or_else(bad)?;
            let optimal = row[2].parse().map_err(|_| bad())?;
            Ok((
                OrderError {
                    order: row[0].to_string(),
                    error,
                },
                optimal,
            ))
        })
        .collect()
}

/// Distributions side by side, three columns each: outcome label, `h=0`,
/// `h=1`. The first header cell of each block is the order in brackets,
/// e.g. `[Y1,Y2]`. Shorter blocks are padded with empty cells.
pub fn write_distributions_csv<W: Write>(dists: &[OrderedDistribution], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = dists
        .iter()
        .flat_map(|d| [format!("[{}]", d.order), "h=0".into(), "h=1".into()])
        .collect();
    w.write_record(&header)?;
    let rows = dists.iter().map(|d| d.outcomes.len()).max().unwrap_or(0);
    for i in 0..rows {
        let row: Vec<String> = dists
            .iter()
            .flat_map(|d| match d.outcomes.get(i) {
                Some(o) => [o.clone(), d.p0[i].to_string(), d.p1[i].to_string()],
                None => Default::default(),
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_distributions_csv`].
pub fn read_distributions_csv<R: Read>(input: R) -> Result<Vec<OrderedDistribution>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.len() % 3 != 0 {
        return Err(Error::invalid("distribution table", "header is not in blocks of three"));
    }
    let blocks = header.len() / 3;
    let mut parts: Vec<(String, Vec<String>, Vec<f64>, Vec<f64>)> = (0..blocks)
        .map(|b| {
            let order = header[3 * b].trim_start_matches('[').trim_end_matches(']').to_string();
            (order, Vec::new(), Vec::new(), Vec::new())
        })
        .collect();
    for row in reader.records() {
        let row = row?;
        for (b, part) in parts.iter_mut().enumerate() {
            let label = &row[3 * b];
            if label.is_empty() {
                continue;
            }
            let bad = || Error::invalid("distribution table", format!("row {row:?}"));
            part.1.push(label.to_string());
            part.2.push(parse_cell(&row[3 * b + 1])?.ok_or_else(bad)?);
            part.3.push(parse_cell(&row[3 * b + 2])?.ok_or_else(bad)?);
        }
    }
    parts
        .into_iter()
        .map(|(order, outcomes, p0, p1)| OrderedDistribution::new(order, outcomes, p0, p1))
        .collect()
}
