//! Upper bounds on the multigraph Lovász number via moment relaxations.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::classical::alpha;
use crate::clock::Stopwatch;
use crate::error::Error;
use crate::graph::ExclusivityMultigraph;
use crate::ingest::parse_event;
use crate::moment::{assemble_sdp, build_skeleton, MomentSkeleton, NormalizationMode};
use crate::sdp::{self, SdpSolution, SdpStatus, Tolerances};
use crate::theta::moment_theta;
use crate::words::{build_sequences, LevelSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Level family; `OneX` takes its subset size from [`BoundOptions::x`].
/// Serialized as its command-line spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LevelFamily {
    One,
    OneX,
    OnePlusAB,
    K(usize),
}

impl LevelFamily {
    pub fn is_randomized(self) -> bool {
        self == LevelFamily::OneX
    }
}

impl std::fmt::Display for LevelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevelFamily::One => f.write_str("1"),
            LevelFamily::OneX => f.write_str("1.x"),
            LevelFamily::OnePlusAB => f.write_str("1+AB"),
            LevelFamily::K(k) => write!(f, "{k}"),
        }
    }
}

impl From<LevelFamily> for String {
    fn from(l: LevelFamily) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for LevelFamily {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl FromStr for LevelFamily {
    type Err = Error;

    /// Accepts `1`, `1.x`, `1+AB`, or an integer `k >= 2`.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "1" => Ok(LevelFamily::One),
            "1.x" | "1.X" => Ok(LevelFamily::OneX),
            "1+AB" | "1+ab" => Ok(LevelFamily::OnePlusAB),
            t => match t.parse::<usize>() {
                Ok(k) if k >= 2 => Ok(LevelFamily::K(k)),
                _ => Err(Error::Options(format!(
                    "level must be 1, 1.x, 1+AB or an integer k >= 2, got {t:?}"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundOptions {
    pub level: LevelFamily,
    pub x: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: NormalizationMode,
    /// Draw one subset and use it for every party.
    pub equal_subsets: bool,
    pub tolerances: Tolerances,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            level: LevelFamily::OnePlusAB,
            x: 0,
            trials: 20,
            seed: 42,
            mode: NormalizationMode::Subnormalized,
            equal_subsets: false,
            tolerances: Tolerances::default(),
        }
    }
}

impl BoundOptions {
    pub fn level(level: LevelFamily) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }

    pub fn one_x(x: usize, trials: usize, seed: u64) -> Self {
        Self {
            level: LevelFamily::OneX,
            x,
            trials,
            seed,
            ..Self::default()
        }
    }

    pub fn descriptor(&self) -> String {
        match self.level {
            LevelFamily::One => "1".into(),
            LevelFamily::OneX => format!("1.{}", self.x),
            LevelFamily::OnePlusAB => "1+AB".into(),
            LevelFamily::K(k) => k.to_string(),
        }
    }
}

/// Solver diagnostics of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDiagnostics {
    pub relative_gap: f64,
    pub min_eigenvalue: f64,
    pub max_violation: f64,
    pub iterations: usize,
    pub matrix_size: usize,
    pub schur_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// One vertex subset per party (level 1.x only).
    pub subsets: Option<Vec<Vec<usize>>>,
    pub value: Option<f64>,
    pub status: SdpStatus,
    pub wall_ms: u64,
    pub diagnostics: TrialDiagnostics,
}

/// Joint and marginal probabilities read off an optimal moment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Behaviour {
    /// `joint[a][b] = P(a, b)`.
    pub joint: Vec<Vec<f64>>,
    /// `marginals[party][vertex]`.
    pub marginals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub instance: String,
    pub level: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: NormalizationMode,
    pub bound: f64,
    pub alpha: f64,
    pub theta_flatten: f64,
    pub per_trial: Vec<TrialRecord>,
    pub mean: f64,
    pub median: f64,
    /// Index into `per_trial` of the trial attaining `bound`.
    pub best_trial: usize,
    pub best_behaviour: Behaviour,
    pub tool_version: String,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    /// Copy with wall-clock fields zeroed, for replay comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for t in &mut r.per_trial {
            t.wall_ms = 0;
        }
        r
    }
}

/// Draw the per-party subsets of trial `trial`. Each trial has its own
/// ChaCha20 stream of the seed, so results do not depend on trial order.
pub fn trial_subsets(n: usize, x: usize, parties: usize, seed: u64, trial: usize, equal: bool) -> Vec<Vec<usize>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let mut draw = || {
        let mut v = sample(&mut rng, n, x).into_vec();
        v.sort_unstable();
        v
    };
    if equal {
        let s = draw();
        vec![s; parties]
    } else {
        (0..parties).map(|_| draw()).collect()
    }
}

/// Outcome of one relaxation at a fixed sequence set.
pub struct LevelSolve {
    pub skeleton: MomentSkeleton,
    pub solution: SdpSolution,
}

/// Build and solve the relaxation for one explicit sequence-set level.
pub fn solve_level(
    mg: &ExclusivityMultigraph,
    level: &LevelSpec,
    mode: NormalizationMode,
    tol: &Tolerances,
) -> Result<LevelSolve, Error> {
    let seqs = build_sequences(mg, level)?;
    let skeleton = build_skeleton(&seqs, mg);
    let problem = assemble_sdp(&skeleton, mg, mode, mg.weights())?;
    let solution = sdp::solve_with(&problem, tol)?;
    Ok(LevelSolve { skeleton, solution })
}

fn behaviour(sk: &MomentSkeleton, v: &[f64]) -> Behaviour {
    let n = sk.vertex_count();
    let joint = (0..n)
        .map(|a| (0..n).map(|b| sk.joint(&[a, b]).map_or(f64::NAN, |k| v[k])).collect())
        .collect();
    let marginals = (0..sk.party_count())
        .map(|p| (0..n).map(|i| sk.marginal(p, i).map_or(f64::NAN, |k| v[k])).collect())
        .collect();
    Behaviour { joint, marginals }
}

/// Upper bound on the multigraph Lovász number of `mg` at the requested level.
pub fn mtheta_bound(mg: &ExclusivityMultigraph, opts: &BoundOptions, instance: &str) -> Result<BoundReport, Error> {
    let n = mg.vertex_count();
    if opts.trials == 0 {
        return Err(Error::Options("trials must be at least 1".into()));
    }
    if opts.level.is_randomized() && opts.x > n {
        return Err(Error::Options(format!("x = {} exceeds the {n} vertices", opts.x)));
    }
    if mg.party_count() != 2 {
        return Err(Error::UnsupportedParties(mg.party_count()));
    }
    let flat = mg.flatten();
    let alpha_value = alpha(&flat).value;
    let theta_flatten = moment_theta(&flat)?.value;

    let trials = if opts.level.is_randomized() { opts.trials } else { 1 };
    let mut per_trial = Vec::with_capacity(trials);
    let mut best: Option<(usize, f64, Behaviour)> = None;
    for t in 0..trials {
        let start = Stopwatch::start();
        let (level, subsets) = match opts.level {
            LevelFamily::One => (LevelSpec::L1, None),
            LevelFamily::OnePlusAB => (LevelSpec::L1plusAB, None),
            LevelFamily::K(k) => (LevelSpec::Lk(k), None),
            LevelFamily::OneX => {
                let subsets = trial_subsets(n, opts.x, 2, opts.seed, t, opts.equal_subsets);
                (
                    LevelSpec::L1x {
                        x: opts.x,
                        subsets: subsets.clone(),
                    },
                    Some(subsets),
                )
            }
        };
        let LevelSolve { skeleton, solution } = solve_level(mg, &level, opts.mode, &opts.tolerances)?;
        let ok = solution.status == SdpStatus::Optimal;
        let value = ok.then_some(solution.objective);
        if let Some(v) = value {
            if best.as_ref().map_or(true, |b| v < b.1) {
                best = Some((t, v, behaviour(&skeleton, &solution.variables)));
            }
        }
        per_trial.push(TrialRecord {
            subsets,
            value,
            status: solution.status,
            wall_ms: start.ms(),
            diagnostics: TrialDiagnostics {
                relative_gap: solution.relative_gap,
                min_eigenvalue: solution.min_eigenvalue,
                max_violation: solution.max_violation,
                iterations: solution.stats.iterations,
                matrix_size: skeleton.size(),
                schur_size: solution.schur_size,
            },
        });
    }
    let Some((best_trial, bound, best_behaviour)) = best else {
        let statuses: Vec<&str> = per_trial.iter().map(|t| t.status.name()).collect();
        return Err(Error::Solver(format!("no trial reached an optimum: {statuses:?}")));
    };
    let mut values: Vec<f64> = per_trial.iter().filter_map(|t| t.value).collect();
    values.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mid = values.len() / 2;
    let median = if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    };
    Ok(BoundReport {
        instance: instance.to_string(),
        level: opts.descriptor(),
        x: opts.level.is_randomized().then_some(opts.x),
        trials,
        seed: opts.seed,
        mode: opts.mode,
        bound,
        alpha: alpha_value,
        theta_flatten,
        per_trial,
        mean,
        median,
        best_trial,
        best_behaviour,
        tool_version: TOOL_VERSION.to_string(),
    })
}

/// A pair of vertices whose events agree on one party's part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDiagnostic {
    pub party: usize,
    pub vertices: (usize, usize),
    pub marginal_difference: f64,
    pub joint_difference: f64,
    pub flagged: bool,
}

pub const LABEL_TOLERANCE: f64 = 1e-4;

/// For vertex pairs with the same party-J part and the same factor-J
/// neighbourhood, compare their marginals and joint rows in the best trial.
pub fn label_consistency_check(report: &BoundReport, mg: &ExclusivityMultigraph) -> Vec<LabelDiagnostic> {
    let Some(labels) = mg.labels() else {
        return Vec::new();
    };
    let np = mg.party_count();
    let parts: Vec<Option<Vec<_>>> = labels.iter().map(|l| parse_event(l, np)).collect();
    let n = mg.vertex_count();
    let b = &report.best_behaviour;
    let mut out = Vec::new();
    for party in 0..np.min(b.marginals.len()) {
        let f = mg.factor(party);
        let nbhd: Vec<Vec<usize>> = (0..n).map(|v| f.neighbours(v).collect()).collect();
        for i in 0..n {
            for j in i + 1..n {
                let (Some(pi), Some(pj)) = (&parts[i], &parts[j]) else {
                    continue;
                };
                if pi[party] != pj[party] || nbhd[i] != nbhd[j] {
                    continue;
                }
                let marginal_difference = (b.marginals[party][i] - b.marginals[party][j]).abs();
                let joint_difference = (0..n)
                    .map(|k| {
                        if party == 0 {
                            (b.joint[i][k] - b.joint[j][k]).abs()
                        } else {
                            (b.joint[k][i] - b.joint[k][j]).abs()
                        }
                    })
                    .fold(0.0, f64::max);
                out.push(LabelDiagnostic {
                    party,
                    vertices: (i, j),
                    marginal_difference,
                    joint_difference,
                    flagged: marginal_difference > LABEL_TOLERANCE || joint_difference > LABEL_TOLERANCE,
                });
            }
        }
    }
    out
}
