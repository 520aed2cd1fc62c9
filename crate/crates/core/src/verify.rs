//! Reproduction of the published results as a list of checked claims.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::criteria::{prune_reason, CriteriaMode};
use crate::known;
use crate::pointset::PointSet;
use crate::poset::{automorphisms, is_isomorphic};
use crate::report::table_json_lines;
use crate::retraction::{
    enumerate_4crownstack_candidates, has_4crownstack_retract, has_class_retract_minus, CandidateMode, RetractWitness,
    RetractionProblem, Search, Side,
};
use crate::sections::{build_from_code, is_nice_section, SectionCode};
use crate::solver::{table_codes, Method, Solver};
use crate::split::{build_retraction, check_condition, is_matching, search_splits, split_from_retraction, SplitSearch};

/// Greatest height covered by the published table.
pub const TABLE_HEIGHT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest height examined; claims needing more are skipped.
    pub cap: usize,
    /// Mode used by the criteria claims.
    pub criteria: CriteriaMode,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { cap: TABLE_HEIGHT, criteria: CriteriaMode::Sound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: u32,
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// Set when part of the claim was not checked.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

impl fmt::Display for ClaimResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:>2} {}: {}", self.status, self.id, self.name, self.detail)?;
        if let Some(w) = &self.warning {
            write!(f, " (warning: {w})")?;
        }
        Ok(())
    }
}

type Outcome = Result<String, String>;

/// Every claim id with its name, in run order.
pub const CLAIMS: [(u32, &str); 14] = [
    (1, "table answers"),
    (2, "t-base levels"),
    (3, "isomorphism types and automorphisms"),
    (4, "niceness"),
    (5, "split and retraction round trip"),
    (6, "removed bottom points of 011"),
    (7, "height six negatives"),
    (8, "all-ones codes"),
    (9, "duality"),
    (10, "determinism"),
    (11, "criteria soundness"),
    (12, "criteria as acceleration"),
    (13, "final zero rule"),
    (14, "record round trip"),
];

/// Runs all claims in order.
pub fn run(opts: VerifyOptions) -> Vec<ClaimResult> {
    run_selected(opts, |_| true)
}

/// Runs the claims whose id satisfies `select`.
pub fn run_selected(opts: VerifyOptions, select: impl Fn(u32) -> bool) -> Vec<ClaimResult> {
    let v = Verifier { opts, solver: Solver::new(Search::from_env()), h: opts.cap.min(TABLE_HEIGHT) };
    CLAIMS
        .iter()
        .filter(|(id, _)| select(*id))
        .map(|&(id, name)| {
            let (status, detail, warning) = match v.claim(id) {
                None => (Status::Skipped, format!("needs height {TABLE_HEIGHT}, cap is {}", opts.cap), None),
                Some((Ok(d), w)) => (Status::Pass, d, w),
                Some((Err(d), w)) => (Status::Fail, d, w),
            };
            ClaimResult { id, name: name.to_string(), status, detail, warning }
        })
        .collect()
}

struct Verifier {
    opts: VerifyOptions,
    solver: Solver,
    /// Table heights actually examined.
    h: usize,
}

fn code(s: &str) -> SectionCode {
    s.parse().expect("valid code")
}

fn yn(b: bool) -> char {
    if b {
        'y'
    } else {
        'n'
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Codes of length `n` with first and last bit `1`.
fn full_codes(n: usize) -> Vec<SectionCode> {
    SectionCode::all_of_length(n).into_iter().filter(|c| c.is_full_section()).collect()
}

impl Verifier {
    fn partial(&self, limit: usize) -> Option<String> {
        (self.h < limit).then(|| format!("heights above {} skipped", self.h))
    }

    fn claim(&self, id: u32) -> Option<(Outcome, Option<String>)> {
        let full = self.partial(TABLE_HEIGHT);
        Some(match id {
            1 => (self.table_answers(), full),
            2 => (self.tbase(), full),
            3 => (self.isomorphism(), None),
            4 => (self.niceness(), full),
            5 => (self.round_trip(), None),
            6 => (self.q011(), None),
            7 if self.h < TABLE_HEIGHT => return None,
            7 => (self.negatives(), None),
            8 => (self.all_ones(), full),
            9 => (self.duality(), full),
            10 => (self.determinism(), full),
            11 => (self.criteria_soundness(), self.partial(5)),
            12 => (self.criteria_acceleration(), full),
            13 => (self.final_zero(), full),
            14 => (self.records(), full),
            _ => unreachable!("unknown claim {id}"),
        })
    }

    fn answer(&self, c: &SectionCode, m: Method) -> Result<bool, String> {
        self.solver.solve(c, m).map(|e| e.answer).map_err(|e| format!("{c} by {m}: {e}"))
    }

    fn table_answers(&self) -> Outcome {
        let mut n = 0;
        for h in 1..=self.h {
            for c in table_codes(h) {
                let expected = known::answer(c.as_str()).ok_or_else(|| format!("{c} missing from the table"))?;
                let entries = self.solver.cross_validate(&c).map_err(|e| e.to_string())?;
                ensure(entries.len() == 3, || format!("{c}: only {} methods ran", entries.len()))?;
                for e in entries {
                    ensure(e.answer == expected, || format!("{c} by {}: {} instead of {}", e.method, yn(e.answer), yn(expected)))?;
                    if let Some(w) = &e.witness {
                        w.validate(build_from_code(&c).poset()).map_err(|err| format!("{c} by {}: {err}", e.method))?;
                    }
                }
                n += 1;
            }
        }
        Ok(format!("{n} codes agree with the table by all three methods"))
    }

    fn tbase(&self) -> Outcome {
        let mut n = 0;
        for h in 4..=self.h {
            for c in table_codes(h).into_iter().filter(|c| c.ends_with_crown()) {
                let got = self.solver.tbase_levels(&c).map_err(|e| e.to_string())?;
                let expected = known::tbase_levels(c.as_str()).ok_or_else(|| format!("{c} has no published levels"))?;
                ensure(got == expected, || format!("{c}: {got:?} instead of {expected:?}"))?;
                n += 1;
            }
        }
        Ok(format!("{n} level lists match"))
    }

    fn isomorphism(&self) -> Outcome {
        let mut counts = Vec::new();
        for n in 2..=5 {
            let grids: Vec<_> = full_codes(n).iter().map(build_from_code).collect();
            ensure(grids.len() == 1 << (n - 2), || format!("height {n}: {} codes", grids.len()))?;
            for (i, a) in grids.iter().enumerate() {
                let autos = automorphisms(a.poset()).len();
                ensure(autos == 6, || format!("{} has {autos} automorphisms", a.code()))?;
                for b in &grids[i + 1..] {
                    ensure(!is_isomorphic(a.poset(), b.poset()), || format!("{} and {} are isomorphic", a.code(), b.code()))?;
                }
            }
            counts.push(grids.len().to_string());
        }
        Ok(format!("heights 2 to 5 give {} types, each with 6 automorphisms", counts.join(", ")))
    }

    fn niceness(&self) -> Outcome {
        let mut n = 0;
        for h in 2..=self.h {
            for c in full_codes(h) {
                let g = build_from_code(&c);
                let irr = g.poset().irreducible_points();
                ensure(irr.is_empty() && is_nice_section(g.poset()), || format!("{c} has irreducible points {:?}", irr.to_vec()))?;
                n += 1;
            }
        }
        Ok(format!("{n} crowned codes have no irreducible point"))
    }

    fn round_trip(&self) -> Outcome {
        let search = self.solver.search();
        let (mut splits, mut witnesses) = (0, 0);
        for h in 1..=4 {
            for c in SectionCode::all_of_length(h) {
                let g = build_from_code(&c);
                let p = g.poset();
                let all = SplitSearch { collect_all: true, prune: None };
                let found = search_splits(p, all, search).map_err(|e| format!("{c}: {e}"))?;
                for s in &found.splits {
                    ensure(check_condition(p, s) == Ok(true), || format!("{c}: collected split fails its condition"))?;
                    let r = build_retraction(p, s).map_err(|e| format!("{c}: {e}"))?;
                    ensure(is_matching(s, &r), || format!("{c}: built retraction does not match its split"))?;
                    splits += 1;
                }
                if !c.is_full_section() {
                    continue;
                }
                for cand in enumerate_4crownstack_candidates(p, true) {
                    let problem = RetractionProblem::new(p, p.points(), cand);
                    let mut failure = None;
                    problem
                        .for_each_solution(search, |map| {
                            let w = RetractWitness::new(p, p.points(), map.to_vec()).expect("solver maps are retractions");
                            witnesses += 1;
                            match split_from_retraction(p, &w) {
                                Ok(v) if !v.is_empty() && v.iter().all(|s| is_matching(s, &w)) => ControlFlow::Continue(()),
                                Ok(_) => {
                                    failure = Some(format!("{c}: no matching split for a witness onto {:?}", cand.to_vec()));
                                    ControlFlow::Break(())
                                }
                                Err(e) => {
                                    failure = Some(format!("{c}: {e}"));
                                    ControlFlow::Break(())
                                }
                            }
                        })
                        .map_err(|e| format!("{c}: {e}"))?;
                    if let Some(f) = failure {
                        return Err(f);
                    }
                }
            }
        }
        Ok(format!("{splits} splits build retractions, {witnesses} spanning witnesses give matching splits"))
    }

    fn q011(&self) -> Outcome {
        let g = build_from_code(&code("011"));
        let p = g.poset();
        let bottom = g.level(0);
        let mut n = 0;
        for bits in 1..(1u64 << g.len()) - 1 {
            let d = PointSet::from_bits(bits);
            if !p.is_down_set_within(d, p.points()) || d.intersection(bottom).len() > 1 {
                continue;
            }
            let w = has_class_retract_minus(p, d, Side::Down, self.solver.search()).map_err(|e| e.to_string())?;
            ensure(w.is_none(), || format!("011 minus {:?} has a retract", d.to_vec()))?;
            n += 1;
        }
        Ok(format!("none of {n} down-sets meeting the bottom level at most once leaves a retract"))
    }

    fn negatives(&self) -> Outcome {
        for c in known::HEIGHT_SIX_NEGATIVES.map(code) {
            for m in [Method::Oracle, Method::SplitComplete] {
                ensure(!self.answer(&c, m)?, || format!("{c} by {m} is y"))?;
            }
        }
        Ok(format!("{} codes are n by the oracle and the exhaustive split search", known::HEIGHT_SIX_NEGATIVES.len()))
    }

    fn all_ones(&self) -> Outcome {
        let mut seen = String::new();
        for h in 1..=self.h {
            let c = code(&"1".repeat(h));
            let a = self.answer(&c, Method::Oracle)?;
            ensure(a == (h % 3 == 0), || format!("{c} is {}", yn(a)))?;
            seen.push(yn(a));
        }
        Ok(format!("heights 1 to {}: {seen}", self.h))
    }

    fn duality(&self) -> Outcome {
        let mut n = 0;
        for h in 1..=self.h {
            for c in table_codes(h).into_iter().filter(|c| c.ends_with_crown()) {
                let (a, b) = (self.answer(&c, Method::Oracle)?, self.answer(&c.reversed(), Method::Oracle)?);
                ensure(a == b, || format!("{c} is {} but its reverse is {}", yn(a), yn(b)))?;
                n += 1;
            }
        }
        Ok(format!("{n} codes answer like their reverses"))
    }

    fn table_lines(&self, threads: usize) -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| {
            let solver = Solver::new(Search::from_env());
            let rows = solver.build_table(self.h, Method::RecursiveRule).map_err(|e| e.to_string())?;
            Ok(table_json_lines(rows.iter().map(|e| e.as_ref())))
        })
    }

    fn determinism(&self) -> Outcome {
        let a = self.table_lines(1)?;
        let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
        let b = self.table_lines(threads)?;
        ensure(a == b, || "table records differ between sequential and parallel runs".into())?;
        Ok(format!("{} records identical on 1 and {threads} threads", a.lines().count()))
    }

    /// Pruning must leave a valid split for every code that has one. Valid
    /// splits removed individually are listed in the detail.
    fn criteria_soundness(&self) -> Outcome {
        let has = |c: &SectionCode| known::answer(c.as_str()).expect("criteria ask about table codes");
        let (mut kept, mut total) = (0, 0);
        let mut removed = BTreeMap::new();
        for h in 3..=self.h.min(5) {
            for c in full_codes(h) {
                let p = build_from_code(&c);
                let all = SplitSearch { collect_all: true, prune: None };
                let found = search_splits(p.poset(), all, self.solver.search()).map_err(|e| format!("{c}: {e}"))?;
                let mut survivors = 0;
                for s in &found.splits {
                    let ctx = s.context(h);
                    match prune_reason(&c, &ctx, &has, self.opts.criteria) {
                        Some(which) => {
                            let key = format!("criterion {which} on {c} {:?} k={} #D={}", ctx.direction, ctx.k, ctx.removed);
                            *removed.entry(key).or_insert(0) += 1;
                        }
                        None => survivors += 1,
                    }
                }
                ensure(found.splits.is_empty() || survivors > 0, || {
                    format!("criteria prune all {} valid splits of {c}", found.splits.len())
                })?;
                kept += survivors;
                total += found.splits.len();
            }
        }
        let mut detail = format!("{kept} of {total} valid splits survive and every code keeps one");
        if !removed.is_empty() {
            let list: Vec<String> = removed.iter().map(|(k, n)| format!("{k} ({n})")).collect();
            detail.push_str(&format!("; pruned valid splits: {}", list.join(", ")));
        }
        Ok(detail)
    }

    fn criteria_acceleration(&self) -> Outcome {
        let plain = Solver::new(Search::from_env()).with_criteria(None);
        let pruned = Solver::new(Search::from_env()).with_criteria(Some(self.opts.criteria));
        let mut contexts = [0u64; 2];
        let mut pruned_by = [0u64; 5];
        for h in 1..=self.h {
            for c in table_codes(h) {
                let a = plain.solve(&c, Method::RecursiveRule).map_err(|e| e.to_string())?;
                let b = pruned.solve(&c, Method::RecursiveRule).map_err(|e| e.to_string())?;
                ensure(a.answer == b.answer, || format!("{c}: {} without criteria, {} with", yn(a.answer), yn(b.answer)))?;
                for (i, e) in [a, b].iter().enumerate() {
                    if let Some(log) = &e.log {
                        contexts[i] += log.contexts;
                        if i == 1 {
                            for (t, x) in pruned_by.iter_mut().zip(log.pruned) {
                                *t += x;
                            }
                        }
                    }
                }
            }
        }
        Ok(format!(
            "same answers; split contexts {} without and {} with criteria, pruned per criterion {:?}",
            contexts[0], contexts[1], pruned_by
        ))
    }

    fn final_zero(&self) -> Outcome {
        let search = self.solver.search();
        let oracle = |c: &SectionCode| -> Result<bool, String> {
            if c.is_empty() {
                return Ok(true);
            }
            let g = build_from_code(c);
            has_4crownstack_retract(g.poset(), CandidateMode::Spanning, search)
                .map(|w| w.is_some())
                .map_err(|e| e.to_string())
        };
        let mut n = 0;
        for h in 2..=self.h {
            for c in table_codes(h).into_iter().filter(|c| !c.ends_with_crown()) {
                let (a, b) = (oracle(&c)?, oracle(&c.prefix(h - 2))?);
                ensure(a == b, || format!("{c} is {} but its prefix {} is {}", yn(a), c.prefix(h - 2), yn(b)))?;
                n += 1;
            }
        }
        Ok(format!("{n} codes ending in 0 answer like their prefixes"))
    }

    fn records(&self) -> Outcome {
        let rows = self.solver.build_table(self.h, Method::RecursiveRule).map_err(|e| e.to_string())?;
        let lines = table_json_lines(rows.iter().map(|e| e.as_ref()));
        let mut by_answer = BTreeMap::new();
        for line in lines.lines() {
            let rec = crate::report::TableRecord::parse(line).map_err(|e| e.to_string())?;
            *by_answer.entry(rec.answer.to_string()).or_insert(0) += 1;
        }
        Ok(format!("{} records parse and revalidate ({by_answer:?})", rows.len()))
    }
}

/// Claim lines as JSON, one per line.
pub fn json_lines(results: &[ClaimResult]) -> String {
    results.iter().map(|r| serde_json::to_string(r).expect("claims serialize") + "\n").collect()
}
