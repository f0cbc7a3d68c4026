//! Reference-value suites: each entry recomputes one quantity on a bundled
//! instance and compares it with a stored value.

use serde::{Deserialize, Serialize};

use crate::classical::alpha;
use crate::clock::Stopwatch;
use crate::error::Error;
use crate::hierarchy::{mtheta_bound, BoundOptions, LevelFamily};
use crate::instances;
use crate::theta::moment_theta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Alpha,
    Theta,
    Mtheta,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Alpha => "alpha",
            Quantity::Theta => "theta",
            Quantity::Mtheta => "mtheta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Comparison {
    Equals { expected: f64, tolerance: f64 },
    WithinBand { lower: f64, upper: f64 },
}

impl Comparison {
    pub fn accepts(&self, v: f64) -> bool {
        match *self {
            Comparison::Equals { expected, tolerance } => (v - expected).abs() <= tolerance,
            Comparison::WithinBand { lower, upper } => (lower..=upper).contains(&v),
        }
    }

    /// Signed distance from the expected value, or from the nearest band edge.
    pub fn delta(&self, v: f64) -> f64 {
        match *self {
            Comparison::Equals { expected, .. } => v - expected,
            Comparison::WithinBand { lower, upper } => {
                if v < lower {
                    v - lower
                } else if v > upper {
                    v - upper
                } else {
                    0.0
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Comparison::Equals { expected, tolerance } => format!("{expected} ± {tolerance:e}"),
            Comparison::WithinBand { lower, upper } => format!("[{lower}, {upper}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySuiteEntry {
    pub instance: String,
    pub quantity: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<BoundOptions>,
    pub comparison: Comparison,
}

impl VerifySuiteEntry {
    pub fn validate(&self) -> Result<(), Error> {
        match self.comparison {
            Comparison::Equals { tolerance, .. } if !(tolerance > 0.0) => {
                Err(Error::Options(format!("{}: tolerance must be positive", self.label())))
            }
            Comparison::WithinBand { lower, upper } if !(lower <= upper) => {
                Err(Error::Options(format!("{}: band lower edge exceeds upper", self.label())))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match (&self.quantity, &self.options) {
            (Quantity::Mtheta, Some(o)) => format!("{} mtheta@{}", self.instance, o.descriptor()),
            (q, _) => format!("{} {}", self.instance, q.name()),
        }
    }

    /// Recompute the quantity.
    pub fn compute(&self) -> Result<f64, Error> {
        let mg = instances::multigraph(&self.instance)?;
        match self.quantity {
            Quantity::Alpha => Ok(alpha(&mg.flatten()).value),
            Quantity::Theta => Ok(moment_theta(&mg.flatten())?.value),
            Quantity::Mtheta => {
                let opts = self.options.clone().unwrap_or_default();
                Ok(mtheta_bound(&mg, &opts, &self.instance)?.bound)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub entry: String,
    pub expected: String,
    pub computed: Option<f64>,
    pub delta: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_ms: u64,
}

impl VerifyOutcome {
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        match (self.computed, &self.error) {
            (Some(v), _) => format!(
                "{status} {:<24} computed {v:.7} expected {} delta {:+.2e} ({} ms)",
                self.entry,
                self.expected,
                self.delta.unwrap_or(0.0),
                self.wall_ms
            ),
            (None, e) => format!(
                "{status} {:<24} error: {}",
                self.entry,
                e.as_deref().unwrap_or("no value")
            ),
        }
    }
}

pub fn run_entry(e: &VerifySuiteEntry) -> VerifyOutcome {
    let start = Stopwatch::start();
    let result = e.validate().and_then(|_| e.compute());
    let wall_ms = start.ms();
    let (computed, error) = match result {
        Ok(v) => (Some(v), None),
        Err(err) => (None, Some(err.to_string())),
    };
    VerifyOutcome {
        entry: e.label(),
        expected: e.comparison.describe(),
        computed,
        delta: computed.map(|v| e.comparison.delta(v)),
        pass: computed.is_some_and(|v| e.comparison.accepts(v)),
        error,
        wall_ms,
    }
}

/// Run every entry, handing each outcome to `report` as it finishes.
pub fn run_suite(entries: &[VerifySuiteEntry], mut report: impl FnMut(&VerifyOutcome)) -> Vec<VerifyOutcome> {
    entries
        .iter()
        .map(|e| {
            let o = run_entry(e);
            report(&o);
            o
        })
        .collect()
}

pub const SUITES: &[&str] = &["quick", "table5"];

fn eq(instance: &str, quantity: Quantity, expected: f64, tolerance: f64) -> VerifySuiteEntry {
    VerifySuiteEntry {
        instance: instance.into(),
        quantity,
        options: None,
        comparison: Comparison::Equals { expected, tolerance },
    }
}

fn mtheta(instance: &str, options: BoundOptions, comparison: Comparison) -> VerifySuiteEntry {
    VerifySuiteEntry {
        instance: instance.into(),
        quantity: Quantity::Mtheta,
        options: Some(options),
        comparison,
    }
}

/// The reference table minus the randomized hierarchy levels.
fn quick() -> Vec<VerifySuiteEntry> {
    let ab = || BoundOptions::level(LevelFamily::OnePlusAB);
    let eqc = |expected, tolerance| Comparison::Equals { expected, tolerance };
    let s2 = std::f64::consts::SQRT_2;
    vec![
        eq("chsh", Quantity::Alpha, 3.0, 1e-9),
        eq("pent1", Quantity::Alpha, 2.0, 1e-9),
        eq("pent2", Quantity::Alpha, 2.0, 1e-9),
        eq("pent3", Quantity::Alpha, 2.0, 1e-9),
        eq("i3csw", Quantity::Alpha, 6.0, 1e-9),
        eq("i3322csw", Quantity::Alpha, 6.0, 1e-9),
        eq("chsh", Quantity::Theta, 2.0 + s2, 1e-4),
        eq("pent1", Quantity::Theta, 5f64.sqrt(), 1e-5),
        eq("pent2", Quantity::Theta, 5f64.sqrt(), 1e-5),
        eq("pent3", Quantity::Theta, 5f64.sqrt(), 1e-5),
        eq("i3csw", Quantity::Theta, 4.0 * 3f64.sqrt(), 1e-3),
        eq("i3322csw", Quantity::Theta, 6.588412879, 1e-4),
        mtheta("chsh", ab(), eqc(3.4142, 1e-3)),
        mtheta("pent1", ab(), eqc(2.178, 1e-3)),
        mtheta("pent2", ab(), eqc(2.2071, 1e-3)),
        mtheta("pent3", ab(), eqc(2.2071, 1e-3)),
    ]
}

fn table5() -> Vec<VerifySuiteEntry> {
    let mut v = quick();
    v.push(mtheta(
        "i3csw",
        BoundOptions::one_x(11, 20, 42),
        Comparison::WithinBand {
            lower: 6.9139,
            upper: 6.9180,
        },
    ));
    v.push(mtheta(
        "i3322csw",
        BoundOptions::one_x(13, 20, 42),
        Comparison::WithinBand {
            lower: 6.2508,
            upper: 6.2535,
        },
    ));
    v
}

pub fn suite(id: &str) -> Result<Vec<VerifySuiteEntry>, Error> {
    match id {
        "quick" => Ok(quick()),
        "table5" => Ok(table5()),
        _ => Err(Error::Unknown {
            kind: "suite",
            name: id.to_string(),
        }),
    }
}

/// Parse a suite from a JSON array of entries.
pub fn parse_suite(text: &str) -> Result<Vec<VerifySuiteEntry>, Error> {
    let entries: Vec<VerifySuiteEntry> = serde_json::from_str(text)?;
    for e in &entries {
        e.validate()?;
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        let c = Comparison::Equals {
            expected: 2.0,
            tolerance: 0.1,
        };
        assert!(c.accepts(2.05) && !c.accepts(2.2));
        let b = Comparison::WithinBand { lower: 1.0, upper: 2.0 };
        assert!(b.accepts(1.5) && !b.accepts(2.5));
        assert_eq!(b.delta(2.5), 0.5);
        assert_eq!(b.delta(1.5), 0.0);
    }

    #[test]
    fn suites_are_valid_and_round_trip() {
        for id in SUITES {
            let s = suite(id).unwrap();
            for e in &s {
                e.validate().unwrap();
            }
            let text = serde_json::to_string(&s).unwrap();
            assert_eq!(parse_suite(&text).unwrap(), s);
        }
        assert!(suite("nope").is_err());
    }

    #[test]
    fn bad_entries_rejected() {
        let e = VerifySuiteEntry {
            instance: "chsh".into(),
            quantity: Quantity::Alpha,
            options: None,
            comparison: Comparison::Equals {
                expected: 3.0,
                tolerance: 0.0,
            },
        };
        assert!(e.validate().is_err());
        assert!(!run_entry(&e).pass);
    }

    #[test]
    fn wrong_expectation_fails() {
        let o = run_entry(&eq("chsh", Quantity::Alpha, 4.0, 1e-9));
        assert!(!o.pass);
        assert_eq!(o.computed, Some(3.0));
        let o = run_entry(&eq("chsh", Quantity::Alpha, 3.0, 1e-9));
        assert!(o.pass);
    }
}
