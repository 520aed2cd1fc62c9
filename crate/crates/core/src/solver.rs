//! Deciding codes by three independent methods, and building the table of
//! lower segments.
//!
//! * [`Method::Oracle`] tries every spanning 4-crown stack candidate.
//! * [`Method::SplitComplete`] searches all retractive splits exhaustively.
//! * [`Method::RecursiveRule`] reuses answers and witnesses of shorter codes:
//!   codes ending in `0` inherit the answer of the prefix two levels shorter;
//!   codes ending in `1` first try splits assembled from stored witnesses
//!   and the gap-stack construction, then fall back to the exhaustive split
//!   search with the pruning criteria enabled.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::{prune_reason, CriteriaMode};
use crate::pointset::PointSet;
use crate::poset::{find_isomorphism, Poset};
use crate::retraction::{
    has_4crownstack_retract, has_class_retract_minus, CandidateMode, RetractError, RetractWitness, Search, SearchError, Side,
};
use crate::sections::{build_from_code, segment_automorphisms, shift_map, GridPoset, SectionCode};
use crate::split::{
    build_retraction, check_down_condition, gap_stack_split, search_splits, DownSplit, SplitContext, SplitError,
    Split, SplitLog, SplitSearch,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    #[serde(rename = "splits")]
    SplitComplete,
    #[serde(rename = "recursive")]
    RecursiveRule,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Oracle, Method::SplitComplete, Method::RecursiveRule];

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::SplitComplete => "splits",
            Method::RecursiveRule => "recursive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How an answer was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Oracle,
    /// Inherited from the prefix two levels shorter.
    FinalZero,
    /// A split assembled from stored witnesses of shorter segments.
    StoredSplit,
    GapStack,
    /// Exhaustive split search.
    SplitSearch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentEntry {
    pub code: SectionCode,
    /// Whether the grid of `code` has a 4-crown stack as retract.
    pub answer: bool,
    /// A retraction of the whole grid onto a 4-crown stack when `answer`.
    pub witness: Option<RetractWitness>,
    /// `0` and every `k` whose prefix of length `k` has a retract; empty for
    /// codes not starting with `1`.
    pub tbase_levels: Vec<usize>,
    pub method: Method,
    pub route: Route,
    /// Set if the answer was first found for the reversed code.
    pub via_reverse: bool,
    /// Rejection counts of the exhaustive split search, if one ran.
    pub log: Option<SplitLog>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub code: SectionCode,
    pub verdicts: Vec<(Method, bool)>,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "methods disagree on {}:", self.code)?;
        for (m, a) in &self.verdicts {
            write!(f, " {m}={}", if *a { "yes" } else { "no" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("method {method} cannot decide code {code:?}: it starts and ends with 0")]
    Unsupported { code: String, method: Method },
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("{0}")]
    Discrepancy(Box<Discrepancy>),
}

/// Codes of height `h` starting with `1`, in table order: final bit `1`
/// first; then more inner `1`s first; then by the inner bits read with
/// position 1 as the least significant.
pub fn table_codes(h: usize) -> Vec<SectionCode> {
    let mut codes: Vec<SectionCode> = SectionCode::all_of_length(h)
        .into_iter()
        .filter(|c| c.is_lower_segment_code())
        .collect();
    let key = |c: &SectionCode| {
        let inner = if h >= 2 { 1..h - 1 } else { 1..1 };
        let ones = inner.clone().filter(|&i| c.bit(i)).count();
        let value: usize = inner.map(|i| usize::from(c.bit(i)) << (i - 1)).sum();
        (!c.ends_with_crown(), std::cmp::Reverse(ones), value)
    };
    codes.sort_by_key(key);
    codes
}

type StoreKey = (SectionCode, usize);

/// Memoizing decision engine. Safe to share between threads.
pub struct Solver {
    search: Search,
    criteria: Option<CriteriaMode>,
    entries: RwLock<HashMap<(SectionCode, Method), Arc<SegmentEntry>>>,
    store: RwLock<HashMap<StoreKey, Option<RetractWitness>>>,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(Search::from_env())
    }
}

impl Solver {
    pub fn new(search: Search) -> Self {
        Solver {
            search,
            criteria: Some(CriteriaMode::Sound),
            entries: RwLock::default(),
            store: RwLock::default(),
        }
    }

    /// Criteria used by the recursive method's exhaustive fallback; `None`
    /// disables pruning.
    pub fn with_criteria(mut self, criteria: Option<CriteriaMode>) -> Self {
        self.criteria = criteria;
        self
    }

    pub fn search(&self) -> &Search {
        &self.search
    }

    /// Decides `code` with `method`, memoized.
    pub fn solve(&self, code: &SectionCode, method: Method) -> Result<Arc<SegmentEntry>, SolveError> {
        let key = (code.clone(), method);
        if let Some(e) = self.entries.read().unwrap().get(&key) {
            return Ok(e.clone());
        }
        let entry = Arc::new(self.compute(code, method)?);
        self.entries.write().unwrap().entry(key).or_insert(entry.clone());
        Ok(entry)
    }

    /// Whether the lower segment `code` (starting with `1`, or empty) has a
    /// 2-antichain or 4-crown stack retract.
    pub fn has_retract(&self, code: &SectionCode) -> Result<bool, SolveError> {
        if code.is_empty() {
            return Ok(true);
        }
        Ok(self.solve(code, Method::RecursiveRule)?.answer)
    }

    /// `0` plus every `k ∈ [1, h-1]` whose prefix of length `k` has a retract.
    pub fn tbase_levels(&self, code: &SectionCode) -> Result<Vec<usize>, SolveError> {
        let mut out = vec![0];
        for k in 1..code.len() {
            if self.has_retract(&code.prefix(k))? {
                out.push(k);
            }
        }
        Ok(out)
    }

    /// Entries for all codes of height `1..=max_height` starting with `1`,
    /// in table order. Codes of one height are solved in parallel.
    pub fn build_table(&self, max_height: usize, method: Method) -> Result<Vec<Arc<SegmentEntry>>, SolveError> {
        let mut out = Vec::new();
        for h in 1..=max_height {
            let row: Result<Vec<_>, _> = table_codes(h).par_iter().map(|c| self.solve(c, method)).collect();
            out.extend(row?);
        }
        Ok(out)
    }

    /// Runs every method applicable to `code` and fails if they disagree.
    pub fn cross_validate(&self, code: &SectionCode) -> Result<Vec<Arc<SegmentEntry>>, SolveError> {
        let mut entries = Vec::new();
        for m in Method::ALL {
            match self.solve(code, m) {
                Ok(e) => entries.push(e),
                Err(SolveError::Unsupported { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if entries.windows(2).any(|w| w[0].answer != w[1].answer) {
            let verdicts = entries.iter().map(|e| (e.method, e.answer)).collect();
            return Err(SolveError::Discrepancy(Box::new(Discrepancy { code: code.clone(), verdicts })));
        }
        Ok(entries)
    }

    fn compute(&self, code: &SectionCode, method: Method) -> Result<SegmentEntry, SolveError> {
        let unsupported = || SolveError::Unsupported { code: code.to_string(), method };
        if code.is_empty() {
            return Err(unsupported());
        }
        let tbase_levels = if code.bit(0) { self.tbase_levels(code)? } else { Vec::new() };
        let mut entry = SegmentEntry {
            code: code.clone(),
            answer: false,
            witness: None,
            tbase_levels,
            method,
            route: Route::Oracle,
            via_reverse: false,
            log: None,
        };
        if method == Method::Oracle {
            let g = build_from_code(code);
            entry.witness = has_4crownstack_retract(g.poset(), CandidateMode::Spanning, &self.search)?;
            entry.answer = entry.witness.is_some();
            return Ok(entry);
        }
        if !code.bit(0) {
            if !code.ends_with_crown() {
                return Err(unsupported());
            }
            let rev = self.solve(&code.reversed(), method)?;
            entry.answer = rev.answer;
            entry.witness = rev.witness.as_ref().map(|w| from_reverse(code, w));
            entry.route = rev.route;
            entry.via_reverse = true;
            entry.log = rev.log;
            return Ok(entry);
        }
        let g = build_from_code(code);
        if method == Method::RecursiveRule && !code.ends_with_crown() {
            entry.route = Route::FinalZero;
            entry.witness = self.final_zero(&g)?;
            entry.answer = entry.witness.is_some();
            return Ok(entry);
        }
        if method == Method::RecursiveRule {
            if let Some((w, route, via_reverse)) = self.shortcut(&g)? {
                entry.answer = true;
                entry.witness = Some(w);
                entry.route = route;
                entry.via_reverse = via_reverse;
                return Ok(entry);
            }
        }
        entry.route = Route::SplitSearch;
        let outcome = if method == Method::RecursiveRule {
            match self.criteria {
                Some(mode) => {
                    let lookups = self.criteria_lookups(code)?;
                    let has = |c: &SectionCode| lookups[c];
                    let prune = |ctx: &SplitContext| prune_reason(code, ctx, &has, mode);
                    search_splits(g.poset(), SplitSearch { collect_all: false, prune: Some(&prune) }, &self.search)?
                }
                None => search_splits(g.poset(), SplitSearch::default(), &self.search)?,
            }
        } else {
            search_splits(g.poset(), SplitSearch::default(), &self.search)?
        };
        if let Some(split) = outcome.splits.first() {
            entry.witness = Some(build_retraction(g.poset(), split)?);
            entry.answer = true;
        }
        entry.log = Some(outcome.log);
        Ok(entry)
    }

    /// Answers to every retract question the criteria can ask about `code`.
    fn criteria_lookups(&self, code: &SectionCode) -> Result<HashMap<SectionCode, bool>, SolveError> {
        let mut out = HashMap::new();
        let h = code.len();
        if h > 3 && code.is_full_section() {
            for c in [code.clone(), code.reversed()] {
                for q in [c.prefix(h - 3), c.suffix(3).reversed()] {
                    let a = self.has_retract(&q)?;
                    out.insert(q, a);
                }
            }
        }
        Ok(out)
    }

    /// Retraction of `build(code)` minus the first `removed` points of its
    /// bottom level onto a 2-antichain or a 4-crown stack.
    pub fn stored_witness(&self, code: &SectionCode, removed: usize) -> Result<Option<RetractWitness>, SolveError> {
        let key = (code.clone(), removed);
        if let Some(w) = self.store.read().unwrap().get(&key) {
            return Ok(w.clone());
        }
        let g = build_from_code(code);
        let d: PointSet = (0..removed).collect();
        let w = match has_class_retract_minus(g.poset(), d, Side::Down, &self.search) {
            Ok(w) => w,
            Err(RetractError::Search(e)) => return Err(e.into()),
            Err(_) => None,
        };
        self.store.write().unwrap().entry(key).or_insert(w.clone());
        Ok(w)
    }

    /// Lifts a retract of `P(0 → h-2)` whose top is a 2-antichain by two
    /// points of the top level: one collects itself and its chain
    /// predecessor, the other the rest of the top two levels.
    fn final_zero(&self, g: &GridPoset) -> Result<Option<RetractWitness>, SolveError> {
        let h = g.height();
        let prefix = g.code().prefix(h - 2);
        let w = if prefix.is_empty() {
            self.stored_witness(&prefix, 0)?
        } else {
            self.solve(&prefix, Method::RecursiveRule)?.witness.clone()
        };
        let Some(w) = w else { return Ok(None) };
        let (a, b) = (g.point(h, 0), g.point(h, 1));
        let mut map = vec![None; g.len()];
        for x in w.domain() {
            map[x] = Some(w.apply(x));
        }
        for x in g.levels(h - 1, h) {
            map[x] = Some(if x == a || x == g.point(h - 1, 0) { a } else { b });
        }
        let lifted = RetractWitness::new(g.poset(), g.poset().points(), map)
            .map_err(|e| SplitError::Invariant(format!("lifted map of {} is not a retraction: {e}", g.code())))?;
        Ok(Some(lifted))
    }

    /// Splits from stored witnesses (for the code and its reverse), then the
    /// gap-stack construction.
    fn shortcut(&self, g: &GridPoset) -> Result<Option<(RetractWitness, Route, bool)>, SolveError> {
        if let Some(w) = self.stored_split(g)? {
            return Ok(Some((w, Route::StoredSplit, false)));
        }
        let rev = build_from_code(&g.code().reversed());
        if let Some(w) = self.stored_split(&rev)? {
            return Ok(Some((from_reverse(g.code(), &w), Route::StoredSplit, true)));
        }
        if let Some(w) = self.gap_stack(g)? {
            return Ok(Some((w, Route::GapStack, false)));
        }
        Ok(None)
    }

    /// Down-splits at every t-base level from stored witnesses, trying the
    /// six base-permutation transports on each side and up to two removed
    /// points.
    fn stored_split(&self, g: &GridPoset) -> Result<Option<RetractWitness>, SolveError> {
        let p = g.poset();
        let code = g.code();
        let h = g.height();
        for k in self.tbase_levels(code)? {
            let Some(t0) = self.stored_witness(&code.prefix(k), 0)? else { continue };
            let suffix = code.suffix(k + 1);
            let shift = shift_map(3 * (h - k), k + 1);
            let t_auts = segment_automorphisms(g, 0, k).map_err(|e| SplitError::Invariant(e.to_string()))?;
            let s_auts = segment_automorphisms(g, k + 1, h).map_err(|e| SplitError::Invariant(e.to_string()))?;
            for removed in 0..=2 {
                if k + 1 == h && removed > 1 {
                    break;
                }
                let Some(s0) = self.stored_witness(&suffix, removed)? else { continue };
                let s0 = transport(&s0, p, &shift)?;
                let d0: PointSet = (0..removed).map(|j| g.point(k + 1, j)).collect();
                for phi in &t_auts {
                    let t = transport(&t0, p, phi)?;
                    for psi in &s_auts {
                        let s = transport(&s0, p, psi)?;
                        let d = d0.iter().map(|x| psi[x]).collect();
                        let split = DownSplit { k, d, s, t: t.clone() };
                        if check_down_condition(p, &split)? {
                            return Ok(Some(build_retraction(p, &Split::Down(split))?));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    fn gap_stack(&self, g: &GridPoset) -> Result<Option<RetractWitness>, SolveError> {
        let code = g.code();
        let h = g.height();
        for k in 1..h {
            if code.bit(k - 1) && code.bit(k) {
                continue;
            }
            let Some(s) = self.stored_witness(&code.prefix(k - 1), 0)? else { continue };
            let suffix = code.suffix(k + 1);
            let Some(t) = self.stored_witness(&suffix, 0)? else { continue };
            let s = transport(&s, g.poset(), &shift_map(3 * k, 0))?;
            let t = transport(&t, g.poset(), &shift_map(3 * (h - k), k + 1))?;
            match gap_stack_split(g, k, &s, &t) {
                Ok(Some(split)) => return Ok(Some(build_retraction(g.poset(), &split)?)),
                Ok(None) | Err(SplitError::Precondition(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(None)
    }
}

fn transport(w: &RetractWitness, to: &Poset, phi: &[usize]) -> Result<RetractWitness, SolveError> {
    w.transport(to, phi)
        .map_err(|e| SplitError::Invariant(format!("transported witness is invalid: {e}")).into())
}

/// Moves a retraction of the grid of `code.reversed()` to the grid of
/// `code`, through an isomorphism with the dual.
pub fn from_reverse(code: &SectionCode, w: &RetractWitness) -> RetractWitness {
    let g = build_from_code(code);
    let q = build_from_code(&code.reversed());
    let iso = find_isomorphism(q.poset(), &g.poset().dual()).expect("reversed code gives the dual grid");
    w.transport(g.poset(), &iso).expect("isomorphisms preserve retractions")
}
