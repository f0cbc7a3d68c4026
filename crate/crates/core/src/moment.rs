//! Moment matrix skeletons and their semidefinite programs.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::ExclusivityMultigraph;
use crate::sdp::{LinearRow, SdpProblem, SymMatrix};
use crate::words::{adjoint, adjoint_class, multiply, party_letter, ProjectorWord};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EntryKind {
    One,
    Zero,
    /// One vertex per party.
    Joint(Vec<usize>),
    Marginal { party: usize, vertex: usize },
    /// Any other word; the payload is the variable index.
    Free(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// Marginals over each maximal clique sum to at most 1.
    #[default]
    #[serde(rename = "sub")]
    Subnormalized,
    /// Marginals over each maximal clique sum to exactly 1.
    Strict,
}

impl NormalizationMode {
    pub fn name(self) -> &'static str {
        match self {
            NormalizationMode::Subnormalized => "sub",
            NormalizationMode::Strict => "strict",
        }
    }
}

/// A moment variable: the adjoint class of a word, and how it is used.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVariable {
    pub word: ProjectorWord,
    pub kind: EntryKind,
}

#[derive(Debug, Clone)]
pub struct MomentSkeleton {
    sequences: Vec<ProjectorWord>,
    parties: usize,
    vertices: usize,
    kinds: Vec<EntryKind>,
    /// Variable index of each entry, `None` for constants.
    var_of: Vec<Option<usize>>,
    variables: Vec<MomentVariable>,
    registry: HashMap<ProjectorWord, usize>,
    joints: HashMap<Vec<usize>, usize>,
    marginals: HashMap<(usize, usize), usize>,
}

impl MomentSkeleton {
    pub fn size(&self) -> usize {
        self.sequences.len()
    }

    pub fn sequences(&self) -> &[ProjectorWord] {
        &self.sequences
    }

    pub fn kind(&self, i: usize, j: usize) -> &EntryKind {
        &self.kinds[i * self.size() + j]
    }

    pub fn variable_at(&self, i: usize, j: usize) -> Option<usize> {
        self.var_of[i * self.size() + j]
    }

    pub fn variables(&self) -> &[MomentVariable] {
        &self.variables
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_of_word(&self, w: &ProjectorWord) -> Option<usize> {
        self.registry.get(&adjoint_class(w)).copied()
    }

    /// Variable of `P(a, b, ...)`, one vertex per party.
    pub fn joint(&self, vertices: &[usize]) -> Option<usize> {
        self.joints.get(vertices).copied()
    }

    pub fn marginal(&self, party: usize, vertex: usize) -> Option<usize> {
        self.marginals.get(&(party, vertex)).copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn party_count(&self) -> usize {
        self.parties
    }

    /// Position-by-position rendering: `1`, `0`, `P(a,b)`, `PA(a)`, `x<k>`,
    /// 1-based vertices, one row per line.
    pub fn dump(&self) -> String {
        let s = self.size();
        let mut out = String::new();
        let _ = writeln!(out, "# skeleton {s}x{s}, {} variables", self.variables.len());
        for (i, w) in self.sequences.iter().enumerate() {
            let _ = writeln!(out, "# row {i}: {w}");
        }
        for i in 0..s {
            let cells: Vec<String> = (0..s).map(|j| self.cell(i, j)).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    fn cell(&self, i: usize, j: usize) -> String {
        match self.kind(i, j) {
            EntryKind::One => "1".into(),
            EntryKind::Zero => "0".into(),
            EntryKind::Joint(v) => {
                let v: Vec<String> = v.iter().map(|x| (x + 1).to_string()).collect();
                format!("P({})", v.join(","))
            }
            EntryKind::Marginal { party, vertex } => {
                format!("P{}({})", party_letter(*party), vertex + 1)
            }
            EntryKind::Free(k) => format!("x{k}"),
        }
    }
}

fn classify(w: &ProjectorWord) -> Option<EntryKind> {
    let parts = match w {
        ProjectorWord::Null => return Some(EntryKind::Zero),
        ProjectorWord::Word(p) => p,
    };
    if parts.iter().all(Vec::is_empty) {
        return Some(EntryKind::One);
    }
    let lens: Vec<usize> = parts.iter().map(Vec::len).collect();
    if lens.iter().sum::<usize>() == 1 {
        let party = lens.iter().position(|&l| l == 1).expect("one symbol");
        return Some(EntryKind::Marginal {
            party,
            vertex: parts[party][0],
        });
    }
    if parts.len() > 1 && lens.iter().all(|&l| l == 1) {
        return Some(EntryKind::Joint(parts.iter().map(|p| p[0]).collect()));
    }
    None
}

/// Classify every entry `seq_i† seq_j` of the moment matrix.
pub fn build_skeleton(seqs: &[ProjectorWord], mg: &ExclusivityMultigraph) -> MomentSkeleton {
    let s = seqs.len();
    let mut kinds = vec![EntryKind::Zero; s * s];
    let mut var_of = vec![None; s * s];
    let mut sk = MomentSkeleton {
        sequences: seqs.to_vec(),
        parties: mg.party_count(),
        vertices: mg.vertex_count(),
        kinds: Vec::new(),
        var_of: Vec::new(),
        variables: Vec::new(),
        registry: HashMap::new(),
        joints: HashMap::new(),
        marginals: HashMap::new(),
    };
    let adj: Vec<ProjectorWord> = seqs.iter().map(adjoint).collect();
    for i in 0..s {
        for j in i..s {
            let w = multiply(&adj[i], &seqs[j], mg);
            let fixed = classify(&w);
            let (kind, var) = match fixed {
                Some(EntryKind::Zero) => (EntryKind::Zero, None),
                Some(EntryKind::One) => (EntryKind::One, None),
                other => {
                    let key = adjoint_class(&w);
                    let next = sk.variables.len();
                    let k = *sk.registry.entry(key.clone()).or_insert(next);
                    let kind = other.unwrap_or(EntryKind::Free(k));
                    if k == next {
                        match &kind {
                            EntryKind::Joint(v) => {
                                sk.joints.insert(v.clone(), k);
                            }
                            EntryKind::Marginal { party, vertex } => {
                                sk.marginals.insert((*party, *vertex), k);
                            }
                            _ => {}
                        }
                        sk.variables.push(MomentVariable {
                            word: key,
                            kind: kind.clone(),
                        });
                    }
                    (kind, Some(k))
                }
            };
            kinds[i * s + j] = kind.clone();
            kinds[j * s + i] = kind;
            var_of[i * s + j] = var;
            var_of[j * s + i] = var;
        }
    }
    sk.kinds = kinds;
    sk.var_of = var_of;
    sk
}

/// Constraint rows of the assembled program, by family, for reporting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintCounts {
    pub nonnegativity: usize,
    pub joint_marginal: usize,
    pub normalization: usize,
}

/// Maximize `sum_i w_i P(i,i)` over moment matrices of the skeleton subject to
/// non-negativity, clique/marginal and clique normalization constraints.
pub fn assemble_sdp(
    skel: &MomentSkeleton,
    mg: &ExclusivityMultigraph,
    mode: NormalizationMode,
    weights: &[f64],
) -> Result<SdpProblem, Error> {
    Ok(assemble_sdp_with_counts(skel, mg, mode, weights)?.0)
}

pub fn assemble_sdp_with_counts(
    skel: &MomentSkeleton,
    mg: &ExclusivityMultigraph,
    mode: NormalizationMode,
    weights: &[f64],
) -> Result<(SdpProblem, ConstraintCounts), Error> {
    if mg.party_count() != 2 {
        return Err(Error::UnsupportedParties(mg.party_count()));
    }
    let n = mg.vertex_count();
    if weights.len() != n {
        return Err(crate::GraphError::WeightCount {
            expected: n,
            found: weights.len(),
        }
        .into());
    }
    let s = skel.size();
    let m = skel.variable_count();
    let mut a0 = SymMatrix::default();
    let mut mats = vec![SymMatrix::default(); m];
    for i in 0..s {
        for j in i..s {
            match skel.variable_at(i, j) {
                Some(k) => mats[k].push(i, j, 1.0),
                None if *skel.kind(i, j) == EntryKind::One => a0.push(i, j, 1.0),
                None => {}
            }
        }
    }
    let joint = |a: usize, b: usize| skel.joint(&[a, b]).expect("level 1 holds every joint");
    let marg = |p: usize, v: usize| skel.marginal(p, v).expect("level 1 holds every marginal");

    let mut objective = vec![0.0; m];
    for (i, &w) in weights.iter().enumerate() {
        objective[joint(i, i)] += w;
    }

    let mut counts = ConstraintCounts::default();
    let mut ineq = Vec::new();
    for (k, v) in skel.variables().iter().enumerate() {
        if matches!(v.kind, EntryKind::Joint(_) | EntryKind::Marginal { .. }) {
            ineq.push(LinearRow::new(vec![(k, -1.0)], 0.0));
            counts.nonnegativity += 1;
        }
    }
    let cliques: Vec<Vec<Vec<usize>>> = mg.factors().iter().map(|f| f.maximal_cliques()).collect();
    for (p, cl) in cliques.iter().enumerate() {
        let other = 1 - p;
        for clique in cl {
            for j in 0..n {
                let mut coeffs: Vec<(usize, f64)> = clique
                    .iter()
                    .map(|&i| (if p == 0 { joint(i, j) } else { joint(j, i) }, 1.0))
                    .collect();
                coeffs.push((marg(other, j), -1.0));
                ineq.push(LinearRow::new(coeffs, 0.0));
                counts.joint_marginal += 1;
            }
        }
    }
    let mut eq = Vec::new();
    for (p, cl) in cliques.iter().enumerate() {
        for clique in cl {
            let row = LinearRow::new(clique.iter().map(|&i| (marg(p, i), 1.0)).collect(), 1.0);
            counts.normalization += 1;
            match mode {
                NormalizationMode::Subnormalized => ineq.push(row),
                NormalizationMode::Strict => eq.push(row),
            }
        }
    }
    let kernel = match mode {
        NormalizationMode::Subnormalized => Vec::new(),
        NormalizationMode::Strict => strict_kernel(skel, mg, &cliques),
    };
    let problem = SdpProblem {
        size: s,
        a0,
        matrices: mats,
        inequalities: ineq,
        equalities: eq,
        objective,
        kernel,
    };
    Ok((problem, counts))
}

/// With clique sums pinned to 1, `r - sum_{i in K} P_i r` has zero norm for
/// the empty row `r` and, given that, for every single-symbol row of another
/// party. Only vectors whose rows are all present are returned.
fn strict_kernel(skel: &MomentSkeleton, mg: &ExclusivityMultigraph, cliques: &[Vec<Vec<usize>>]) -> Vec<Vec<(usize, f64)>> {
    let parties = mg.party_count();
    let row_of: HashMap<&ProjectorWord, usize> = skel.sequences().iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut out = Vec::new();
    for (p, cl) in cliques.iter().enumerate() {
        for (r, word) in skel.sequences().iter().enumerate() {
            let Some(parts) = word.parts() else { continue };
            if word.len() > 1 || !parts[p].is_empty() {
                continue;
            }
            'clique: for clique in cl {
                let mut u = vec![(r, 1.0)];
                for &i in clique {
                    let w = multiply(&ProjectorWord::singleton(parties, p, i), word, mg);
                    match row_of.get(&w) {
                        Some(&k) => u.push((k, -1.0)),
                        None => continue 'clique,
                    }
                }
                out.push(u);
            }
        }
    }
    out
}
