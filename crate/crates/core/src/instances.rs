//! Benchmark expressions shipped with the crate.
//!
//! Term order matches the customary vertex numbering of each instance, so
//! vertex `k` (0-based) here is vertex `k + 1` in printed tables.

use crate::error::Error;
use crate::graph::ExclusivityMultigraph;
use crate::ingest::{build_multigraph, parse_expression, BellExpression, EventTable};

pub const NAMES: [&str; 6] = ["chsh", "pent1", "pent2", "pent3", "i3csw", "i3322csw"];

/// Raw expression document for a bundled instance.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "chsh" => include_str!("../data/chsh.json"),
        "pent1" => include_str!("../data/pent1.json"),
        "pent2" => include_str!("../data/pent2.json"),
        "pent3" => include_str!("../data/pent3.json"),
        "i3csw" => include_str!("../data/i3csw.json"),
        "i3322csw" => include_str!("../data/i3322csw.json"),
        _ => return None,
    })
}

pub fn expression(name: &str) -> Result<BellExpression, Error> {
    let text = source(name).ok_or_else(|| Error::Unknown {
        kind: "instance",
        name: name.to_string(),
    })?;
    parse_expression(text)
}

pub fn multigraph(name: &str) -> Result<ExclusivityMultigraph, Error> {
    Ok(build_multigraph(&expression(name)?).0)
}

pub fn event_table(name: &str) -> Result<EventTable, Error> {
    Ok(build_multigraph(&expression(name)?).1)
}
