//! Products of projector symbols and the sequence sets indexing moment matrices.
//!
//! A word keeps one sequence per party. Symbols of different parties commute,
//! so only the per-party order matters. Within a party two rewrites apply:
//! `P P = P`, and `P Q = 0` when `P` and `Q` are adjacent in that party's factor.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::WordError;
use crate::graph::ExclusivityMultigraph;

/// Default ceiling on the number of words in a sequence set.
pub const DEFAULT_WORD_CEILING: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjectorSymbol {
    pub party: usize,
    pub vertex: usize,
}

impl ProjectorSymbol {
    pub fn new(party: usize, vertex: usize) -> Self {
        Self { party, vertex }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjectorWord {
    Null,
    /// `Word(seqs)` with `seqs[p]` the reduced sequence of party `p`.
    Word(Vec<Vec<usize>>),
}

impl ProjectorWord {
    pub fn identity(parties: usize) -> Self {
        ProjectorWord::Word(vec![Vec::new(); parties])
    }

    pub fn singleton(parties: usize, party: usize, vertex: usize) -> Self {
        let mut seqs = vec![Vec::new(); parties];
        seqs[party].push(vertex);
        ProjectorWord::Word(seqs)
    }

    pub fn is_null(&self) -> bool {
        matches!(self, ProjectorWord::Null)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, ProjectorWord::Word(s) if s.iter().all(Vec::is_empty))
    }

    /// Per-party sequences; `None` for the null word.
    pub fn parts(&self) -> Option<&[Vec<usize>]> {
        match self {
            ProjectorWord::Null => None,
            ProjectorWord::Word(s) => Some(s),
        }
    }

    /// Total number of symbols; 0 for the identity and for the null word.
    pub fn len(&self) -> usize {
        self.parts().map_or(0, |s| s.iter().map(Vec::len).sum())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbols in party-major order.
    pub fn symbols(&self) -> Vec<ProjectorSymbol> {
        self.parts()
            .unwrap_or(&[])
            .iter()
            .enumerate()
            .flat_map(|(p, seq)| seq.iter().map(move |&v| ProjectorSymbol::new(p, v)))
            .collect()
    }
}

impl fmt::Display for ProjectorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectorWord::Null => write!(f, "0"),
            w if w.is_identity() => write!(f, "1"),
            w => {
                let syms: Vec<String> = w
                    .symbols()
                    .iter()
                    .map(|s| format!("{}{}", party_letter(s.party), s.vertex + 1))
                    .collect();
                write!(f, "{}", syms.join("."))
            }
        }
    }
}

pub(crate) fn party_letter(p: usize) -> char {
    (b'A' + (p % 26) as u8) as char
}

/// Push `v` onto a reduced sequence. Returns false when the product vanishes.
fn push_reduced(seq: &mut Vec<usize>, v: usize, mg: &ExclusivityMultigraph, party: usize) -> bool {
    match seq.last() {
        Some(&top) if top == v => true,
        Some(&top) if mg.factor(party).adjacent(top, v) => false,
        _ => {
            seq.push(v);
            true
        }
    }
}

/// Reduce an arbitrary symbol list to canonical form.
pub fn canonicalize(raw: &[ProjectorSymbol], mg: &ExclusivityMultigraph) -> ProjectorWord {
    let mut seqs = vec![Vec::new(); mg.party_count()];
    for s in raw {
        if !push_reduced(&mut seqs[s.party], s.vertex, mg, s.party) {
            return ProjectorWord::Null;
        }
    }
    ProjectorWord::Word(seqs)
}

/// Re-reduce a word, e.g. one assembled by hand.
pub fn recanonicalize(w: &ProjectorWord, mg: &ExclusivityMultigraph) -> ProjectorWord {
    match w {
        ProjectorWord::Null => ProjectorWord::Null,
        w => canonicalize(&w.symbols(), mg),
    }
}

/// Reverse every party's sequence.
pub fn adjoint(w: &ProjectorWord) -> ProjectorWord {
    match w {
        ProjectorWord::Null => ProjectorWord::Null,
        ProjectorWord::Word(seqs) => ProjectorWord::Word(
            seqs.iter()
                .map(|s| s.iter().rev().copied().collect())
                .collect(),
        ),
    }
}

pub fn multiply(u: &ProjectorWord, v: &ProjectorWord, mg: &ExclusivityMultigraph) -> ProjectorWord {
    let (ProjectorWord::Word(a), ProjectorWord::Word(b)) = (u, v) else {
        return ProjectorWord::Null;
    };
    let mut seqs = a.clone();
    for (p, (seq, tail)) in seqs.iter_mut().zip(b).enumerate() {
        for &x in tail {
            if !push_reduced(seq, x, mg, p) {
                return ProjectorWord::Null;
            }
        }
    }
    ProjectorWord::Word(seqs)
}

/// Representative of `{w, w†}`, used to key moment variables.
pub fn adjoint_class(w: &ProjectorWord) -> ProjectorWord {
    let a = adjoint(w);
    if a < *w {
        a
    } else {
        w.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelSpec {
    L1,
    /// Level 1 plus cross-party pairs drawn from one vertex subset per party.
    L1x { x: usize, subsets: Vec<Vec<usize>> },
    L1plusAB,
    Lk(usize),
}

impl LevelSpec {
    pub fn descriptor(&self) -> String {
        match self {
            LevelSpec::L1 => "1".into(),
            LevelSpec::L1x { x, .. } => format!("1.{x}"),
            LevelSpec::L1plusAB => "1+AB".into(),
            LevelSpec::Lk(k) => k.to_string(),
        }
    }
}

/// Ordered, duplicate-free list of non-null words: identity, then the
/// singletons of each party in vertex order, then longer words.
pub fn build_sequences(
    mg: &ExclusivityMultigraph,
    level: &LevelSpec,
) -> Result<Vec<ProjectorWord>, WordError> {
    build_sequences_with_ceiling(mg, level, DEFAULT_WORD_CEILING)
}

pub fn build_sequences_with_ceiling(
    mg: &ExclusivityMultigraph,
    level: &LevelSpec,
    ceiling: usize,
) -> Result<Vec<ProjectorWord>, WordError> {
    let np = mg.party_count();
    let n = mg.vertex_count();
    let mut out = vec![ProjectorWord::identity(np)];
    for p in 0..np {
        out.extend((0..n).map(|v| ProjectorWord::singleton(np, p, v)));
    }
    let mut seen: HashSet<ProjectorWord> = out.iter().cloned().collect();
    let mut extra = Vec::new();
    match level {
        LevelSpec::L1 => {}
        LevelSpec::L1plusAB => {
            let all: Vec<usize> = (0..n).collect();
            extra = cross_pairs(mg, &vec![all; np]);
        }
        LevelSpec::L1x { x, subsets } => {
            let ok = subsets.len() == np
                && subsets.iter().all(|s| {
                    let mut t = s.clone();
                    t.sort_unstable();
                    t.dedup();
                    t.len() == *x && s.len() == *x && t.iter().all(|&v| v < n)
                });
            if !ok {
                return Err(WordError::BadSubset { x: *x });
            }
            extra = cross_pairs(mg, subsets);
        }
        LevelSpec::Lk(0) => return Err(WordError::BadLevel),
        LevelSpec::Lk(k) => {
            let singles: Vec<ProjectorWord> = out[1..].to_vec();
            let mut known = seen.clone();
            let mut frontier = singles.clone();
            for _ in 2..=*k {
                let mut next: Vec<ProjectorWord> = Vec::new();
                for s in &singles {
                    for t in &frontier {
                        let w = multiply(s, t, mg);
                        if w.len() > t.len() && known.insert(w.clone()) {
                            next.push(w);
                            if out.len() + extra.len() + next.len() > ceiling {
                                return Err(WordError::TooManyWords { limit: ceiling });
                            }
                        }
                    }
                }
                next.sort();
                extra.extend(next.iter().cloned());
                frontier = next;
            }
        }
    }
    for w in extra {
        if !w.is_null() && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    if out.len() > ceiling {
        return Err(WordError::TooManyWords { limit: ceiling });
    }
    Ok(out)
}

/// `P^p_a P^q_b` for every pair of parties `p < q`, `a` in `subsets[p]`,
/// `b` in `subsets[q]`, party-pair major then `a` then `b`.
fn cross_pairs(mg: &ExclusivityMultigraph, subsets: &[Vec<usize>]) -> Vec<ProjectorWord> {
    let np = mg.party_count();
    let mut out = Vec::new();
    for p in 0..np {
        for q in p + 1..np {
            let mut sp = subsets[p].clone();
            let mut sq = subsets[q].clone();
            sp.sort_unstable();
            sq.sort_unstable();
            for &a in &sp {
                for &b in &sq {
                    let mut seqs = vec![Vec::new(); np];
                    seqs[p].push(a);
                    seqs[q].push(b);
                    out.push(ProjectorWord::Word(seqs));
                }
            }
        }
    }
    out
}
