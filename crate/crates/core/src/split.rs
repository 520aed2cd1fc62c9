//! Retractive down- and up-splits.
//!
//! A down-split `(k, D, s, t)` cuts a poset below level `k + 1`: `t` retracts
//! the lower segment `P(0 → k)` onto `T`, and `s` retracts the upper segment
//! `P(k+1 → h)` minus the down-set `D` onto `S`. Up-splits are the dual
//! notion; they are handled as down-splits of the dual poset, which has the
//! same points with level `k` renumbered `h - k`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pointset::PointSet;
use crate::poset::Poset;
use crate::retraction::{
    class_retract, retract_candidates, singleton_preimage_points, CandidateKinds, CandidateMode, End,
    RetractWitness, RetractionProblem, Search, SearchError,
};
use crate::sections::{segment_automorphisms, GridPoset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownSplit {
    pub k: usize,
    pub d: PointSet,
    /// Retraction of `P(k+1 → h) \ D`.
    pub s: RetractWitness,
    /// Retraction of `P(0 → k)`.
    pub t: RetractWitness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpSplit {
    pub k: usize,
    pub u: PointSet,
    /// Retraction of `P(0 → k-1) \ U`.
    pub s: RetractWitness,
    /// Retraction of `P(k → h)`.
    pub t: RetractWitness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Split {
    Down(DownSplit),
    Up(UpSplit),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Down,
    Up,
}

impl Split {
    pub fn direction(&self) -> Direction {
        match self {
            Split::Down(_) => Direction::Down,
            Split::Up(_) => Direction::Up,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Split::Down(d) => d.k,
            Split::Up(u) => u.k,
        }
    }

    pub fn removed(&self) -> PointSet {
        match self {
            Split::Down(d) => d.d,
            Split::Up(u) => u.u,
        }
    }

    pub fn s(&self) -> &RetractWitness {
        match self {
            Split::Down(d) => &d.s,
            Split::Up(u) => &u.s,
        }
    }

    pub fn t(&self) -> &RetractWitness {
        match self {
            Split::Down(d) => &d.t,
            Split::Up(u) => &u.t,
        }
    }

    /// Context of the split in down form: up-splits of `P` are down-splits
    /// of the dual at level `h - k`.
    pub fn context(&self, height: usize) -> SplitContext {
        match self {
            Split::Down(d) => SplitContext { direction: Direction::Down, k: d.k, removed: d.d.len() },
            Split::Up(u) => SplitContext { direction: Direction::Up, k: height - u.k, removed: u.u.len() },
        }
    }
}

/// A `(k, D)` choice of the exhaustive search, in down form. For
/// [`Direction::Up`], `k` refers to the dual poset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SplitContext {
    pub direction: Direction,
    pub k: usize,
    pub removed: usize,
}

fn invariant(msg: impl Into<String>) -> SplitError {
    SplitError::Invariant(msg.into())
}

fn as_dual(u: &UpSplit, height: usize) -> Result<DownSplit, SplitError> {
    if u.k == 0 || u.k > height {
        return Err(invariant(format!("up-split level {} outside [1, {height}]", u.k)));
    }
    Ok(DownSplit { k: height - u.k, d: u.u, s: u.s.clone(), t: u.t.clone() })
}

/// Checks the shape of a down-split and returns its level sets
/// `(lower, upper)`.
fn validate_down(p: &Poset, split: &DownSplit) -> Result<(PointSet, PointSet), SplitError> {
    let h = p.height();
    let k = split.k;
    if p.is_empty() || k >= h {
        return Err(invariant(format!("down-split level {k} outside [0, {}]", h.saturating_sub(1))));
    }
    let lower = p.level_range(0, k);
    let upper = p.level_range(k + 1, h);
    if !split.d.is_subset(upper) || split.d == upper {
        return Err(invariant("removed set is not a proper subset of the upper segment"));
    }
    if !p.is_down_set_within(split.d, upper) {
        return Err(invariant("removed set is not a down-set of the upper segment"));
    }
    if split.t.domain() != lower {
        return Err(invariant("t is not defined on the lower segment"));
    }
    if split.s.domain() != upper.difference(split.d) {
        return Err(invariant("s is not defined on the upper segment minus the removed set"));
    }
    split.t.validate(p).map_err(|e| invariant(format!("t: {e}")))?;
    split.s.validate(p).map_err(|e| invariant(format!("s: {e}")))?;
    if !split.d.is_subset(p.levels()[k + 1]) {
        return Err(invariant("removed set reaches beyond the level adjacent to the cut"));
    }
    Ok((lower, upper))
}

/// Least `v` in the top level of `T` whose `t`-preimage has no point below
/// `d`.
fn tau(p: &Poset, t: &RetractWitness, d: usize) -> Option<usize> {
    t.top(p)
        .iter()
        .find(|&v| t.preimage(v).is_disjoint(p.below(d)))
}

/// `T(h_T) < S(0)` and every removed point has a top point of `T` whose
/// preimage has nothing below it.
pub fn check_down_condition(p: &Poset, split: &DownSplit) -> Result<bool, SplitError> {
    validate_down(p, split)?;
    let top = split.t.top(p);
    let bottom = split.s.bottom(p);
    let first = top.iter().all(|v| bottom.is_subset(p.above(v)));
    Ok(first && split.d.iter().all(|d| tau(p, &split.t, d).is_some()))
}

/// Dual of [`check_down_condition`]: `S(h_S) < T(0)` and every removed point
/// has a bottom point of `T` whose preimage has nothing above it.
pub fn check_up_condition(p: &Poset, split: &UpSplit) -> Result<bool, SplitError> {
    let q = p.dual();
    check_down_condition(&q, &as_dual(split, p.height())?)
}

/// The retraction onto `T ⊕ S` coupled with a down-split that satisfies
/// [`check_down_condition`].
pub fn build_retraction_from_down_split(p: &Poset, split: &DownSplit) -> Result<RetractWitness, SplitError> {
    if !check_down_condition(p, split)? {
        return Err(invariant("the down-split does not satisfy the condition"));
    }
    let top = split.t.top(p);
    let mut map = vec![None; p.len()];
    for x in split.t.domain() {
        map[x] = Some(split.t.apply(x));
    }
    for x in split.s.domain() {
        map[x] = Some(split.s.apply(x));
    }
    for d in split.d {
        let v = tau(p, &split.t, d).expect("condition checked above");
        map[d] = top.without(v).first();
    }
    RetractWitness::new(p, p.points(), map).map_err(|e| invariant(format!("coupled map is not a retraction: {e}")))
}

/// The retraction onto `S ⊕ T` coupled with an up-split that satisfies
/// [`check_up_condition`].
pub fn build_retraction_from_up_split(p: &Poset, split: &UpSplit) -> Result<RetractWitness, SplitError> {
    let q = p.dual();
    let w = build_retraction_from_down_split(&q, &as_dual(split, p.height())?)?;
    RetractWitness::new(p, p.points(), w.map().to_vec())
        .map_err(|e| invariant(format!("coupled map is not a retraction: {e}")))
}

pub fn build_retraction(p: &Poset, split: &Split) -> Result<RetractWitness, SplitError> {
    match split {
        Split::Down(d) => build_retraction_from_down_split(p, d),
        Split::Up(u) => build_retraction_from_up_split(p, u),
    }
}

pub fn check_condition(p: &Poset, split: &Split) -> Result<bool, SplitError> {
    match split {
        Split::Down(d) => check_down_condition(p, d),
        Split::Up(u) => check_up_condition(p, u),
    }
}

/// Whether `split` and the retraction `r` of `p` are coupled: `r` agrees
/// with `s` and `t` on their domains and sends the removed points into `T`.
pub fn is_matching(split: &Split, r: &RetractWitness) -> bool {
    let (s, t) = (split.s(), split.t());
    s.pairs().iter().all(|&(x, y)| r.apply(x) == y)
        && t.pairs().iter().all(|&(x, y)| r.apply(x) == y)
        && r.image_of(split.removed()).is_subset(t.retract())
        && r.retract() == s.retract().union(t.retract())
}

/// Down-splits of `p` read off a retraction onto a 4-crown stack: for every
/// cut `k` at which `r` maps `P(0 → k)` onto a proper lower part of `R`
/// lying inside `P(0 → k)`.
fn down_splits_from(p: &Poset, r: &RetractWitness) -> Result<Vec<DownSplit>, SplitError> {
    let h = p.height();
    let levels = r.levels(p);
    let mut prefix = Vec::with_capacity(levels.len());
    let mut acc = PointSet::EMPTY;
    for l in &levels {
        acc = acc.union(*l);
        prefix.push(acc);
    }
    let mut out = Vec::new();
    for k in 0..h {
        let lower = p.level_range(0, k);
        let upper = p.level_range(k + 1, h);
        let image = r.image_of(lower);
        if !image.is_subset(lower) || !prefix[..levels.len() - 1].contains(&image) {
            continue;
        }
        let d: PointSet = upper.iter().filter(|&x| image.contains(r.apply(x))).collect();
        let t = r.restrict(p, lower).map_err(|e| invariant(format!("t: {e}")))?;
        let s = r.restrict(p, upper.difference(d)).map_err(|e| invariant(format!("s: {e}")))?;
        out.push(DownSplit { k, d, s, t });
    }
    Ok(out)
}

/// All matching splits obtained from the retraction `r` of `p` onto a
/// 4-crown stack by cutting where the image of a lower (or, dually, upper)
/// segment is a lower part of `R` inside that segment.
///
/// Every split returned satisfies its condition; failing to find one is an
/// invariant error.
pub fn split_from_retraction(p: &Poset, r: &RetractWitness) -> Result<Vec<Split>, SplitError> {
    if r.domain() != p.points() || r.class().height() == 0 {
        return Err(invariant("expected a retraction of the whole poset onto a 4-crown stack"));
    }
    let h = p.height();
    let mut out: Vec<Split> = down_splits_from(p, r)?.into_iter().map(Split::Down).collect();
    let q = p.dual();
    let rq = RetractWitness::new(&q, q.points(), r.map().to_vec()).map_err(|e| invariant(e.to_string()))?;
    for d in down_splits_from(&q, &rq)? {
        out.push(Split::Up(UpSplit { k: h - d.k, u: d.d, s: d.s, t: d.t }));
    }
    for split in &out {
        if !check_condition(p, split)? || !is_matching(split, r) {
            return Err(invariant(format!("split at level {} does not match the retraction", split.k())));
        }
    }
    if out.is_empty() {
        return Err(invariant("no matching split found"));
    }
    Ok(out)
}

/// Combines retractions `s` of `P(0 → k-1)` and `t` of `P(k+1 → h)` with
/// singleton preimages at the top of `S` and the bottom of `T` into a split
/// whose coupled retraction maps onto `S ⊕ T`.
///
/// If `P(k, k+1)` is of type 3C, the upper covers `U` of a singleton top point
/// `a` are removed and the rest of `P(k)` joins the other top point of `S`,
/// giving the up-split `(k+1, U, s', t)`; if `P(k-1, k)` is of type 3C the dual
/// construction gives a down-split at `k - 1`. All base-permutation
/// transports of `s` and `t` are tried.
pub fn gap_stack_split(
    grid: &GridPoset,
    k: usize,
    s: &RetractWitness,
    t: &RetractWitness,
) -> Result<Option<Split>, SplitError> {
    let p = grid.poset();
    let h = grid.height();
    if k == 0 || k >= h {
        return Err(SplitError::Precondition(format!("level {k} outside [1, {}]", h.saturating_sub(1))));
    }
    if s.domain() != grid.levels(0, k - 1) || t.domain() != grid.levels(k + 1, h) {
        return Err(SplitError::Precondition("s or t is not defined on the expected segment".into()));
    }
    let code = grid.code();
    if code.bit(k - 1) && code.bit(k) {
        return Err(SplitError::Precondition(format!("levels {} to {} form a 6-crown stack", k - 1, k + 1)));
    }
    if singleton_preimage_points(s, p, End::Top).is_empty() || singleton_preimage_points(t, p, End::Bottom).is_empty() {
        return Err(SplitError::Precondition("no singleton preimage at the top of S or the bottom of T".into()));
    }
    let low = segment_automorphisms(grid, 0, k - 1).map_err(|e| invariant(e.to_string()))?;
    let high = segment_automorphisms(grid, k + 1, h).map_err(|e| invariant(e.to_string()))?;
    let level_k = grid.level(k);
    for phi in &low {
        let s2 = s.transport(p, phi).map_err(|e| invariant(e.to_string()))?;
        for psi in &high {
            let t2 = t.transport(p, psi).map_err(|e| invariant(e.to_string()))?;
            if !code.bit(k) {
                let s_top = s2.top(p);
                for a in singleton_preimage_points(&s2, p, End::Top) {
                    let b = s_top.without(a).first().unwrap();
                    let u = p.upper_covers(a).intersection(level_k);
                    let mut map = s2.map().to_vec();
                    for x in level_k.difference(u) {
                        map[x] = Some(b);
                    }
                    let domain = s2.domain().union(level_k.difference(u));
                    let Ok(s3) = RetractWitness::new(p, domain, map) else { continue };
                    let split = UpSplit { k: k + 1, u, s: s3, t: t2.clone() };
                    if check_up_condition(p, &split)? {
                        return Ok(Some(Split::Up(split)));
                    }
                }
            }
            if !code.bit(k - 1) {
                let t_bottom = t2.bottom(p);
                for v in singleton_preimage_points(&t2, p, End::Bottom) {
                    let w = t_bottom.without(v).first().unwrap();
                    let d = p.lower_covers(v).intersection(level_k);
                    let mut map = t2.map().to_vec();
                    for x in level_k.difference(d) {
                        map[x] = Some(w);
                    }
                    let domain = t2.domain().union(level_k.difference(d));
                    let Ok(t3) = RetractWitness::new(p, domain, map) else { continue };
                    let split = DownSplit { k: k - 1, d, s: t3, t: s2.clone() };
                    if check_down_condition(p, &split)? {
                        return Ok(Some(Split::Down(split)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Why a `(k, D)` context of the exhaustive search produced no split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitLog {
    /// `(k, D)` contexts examined.
    pub contexts: u64,
    /// Contexts removed by each of the five criteria.
    pub pruned: [u64; 5],
    /// The lower segment has no retraction onto a 2-antichain or 4-crown stack.
    pub no_t: u64,
    /// The upper segment minus `D` has no such retraction.
    pub no_s: u64,
    /// No `T` and `S` with `T(h_T) < S(0)`.
    pub no_stacking: u64,
    /// Stacking possible, but the removed points cannot be placed.
    pub no_tau: u64,
    /// Contexts with at least one split satisfying the condition.
    pub passed: u64,
}

impl SplitLog {
    fn add(&mut self, other: &SplitLog) {
        self.contexts += other.contexts;
        for i in 0..5 {
            self.pruned[i] += other.pruned[i];
        }
        self.no_t += other.no_t;
        self.no_s += other.no_s;
        self.no_stacking += other.no_stacking;
        self.no_tau += other.no_tau;
        self.passed += other.passed;
    }
}

#[derive(Debug, Clone, Default)]
pub struct SplitSearchOutcome {
    pub splits: Vec<Split>,
    pub log: SplitLog,
}

/// Options for [`search_splits`].
#[derive(Clone, Copy)]
pub struct SplitSearch<'a> {
    /// Collect every passing `(k, D, S, T, τ)` combination instead of
    /// stopping at the first.
    pub collect_all: bool,
    /// Returns the number (1 to 5) of a criterion that discards the context.
    pub prune: Option<&'a (dyn Fn(&SplitContext) -> Option<usize> + Sync)>,
}

impl Default for SplitSearch<'_> {
    fn default() -> Self {
        SplitSearch { collect_all: false, prune: None }
    }
}

struct Feasible {
    top_or_bottom: PointSet,
    witness: RetractWitness,
}

fn feasible_retracts(
    p: &Poset,
    domain: PointSet,
    search: &Search,
    bottom: bool,
) -> Result<Vec<Feasible>, SearchError> {
    let kinds = CandidateKinds { antichains: !p.is_connected_within(domain), stacks: true };
    let candidates = retract_candidates(p, domain, CandidateMode::Unconstrained, kinds);
    let mut out = Vec::new();
    for c in candidates {
        if let Some(map) = RetractionProblem::new(p, domain, c).solve_first(search)? {
            let witness = RetractWitness::new(p, domain, map).expect("map search produced an invalid retraction");
            let levels = p.levels_within(c);
            let top_or_bottom = if bottom { levels[0] } else { *levels.last().unwrap() };
            out.push(Feasible { top_or_bottom, witness });
        }
    }
    Ok(out)
}

/// Exhaustive search for down-splits of `p` satisfying the condition.
fn search_down(
    p: &Poset,
    direction: Direction,
    opts: SplitSearch<'_>,
    search: &Search,
    out: &mut SplitSearchOutcome,
) -> Result<(), SearchError> {
    let h = p.height();
    for k in 0..h {
        let lower = p.level_range(0, k);
        let upper = p.level_range(k + 1, h);
        let ts = feasible_retracts(p, lower, search, false)?;
        for d in p.levels()[k + 1].subsets_by_size() {
            if d == upper {
                continue;
            }
            out.log.contexts += 1;
            let ctx = SplitContext { direction, k, removed: d.len() };
            if let Some(c) = opts.prune.and_then(|f| f(&ctx)) {
                out.log.pruned[c - 1] += 1;
                continue;
            }
            if ts.is_empty() {
                out.log.no_t += 1;
                continue;
            }
            let ss = feasible_retracts(p, upper.difference(d), search, true)?;
            if ss.is_empty() {
                out.log.no_s += 1;
                continue;
            }
            let below_all = |v: PointSet, s0: PointSet| v.iter().all(|x| s0.is_subset(p.above(x)));
            let mut stacking = false;
            let mut passed = false;
            let removed = d.to_vec();
            for t in &ts {
                let fits: Vec<&Feasible> = ss.iter().filter(|s| below_all(t.top_or_bottom, s.top_or_bottom)).collect();
                if fits.is_empty() {
                    continue;
                }
                stacking = true;
                let top = t.top_or_bottom.to_vec();
                for choice in 0..1usize << removed.len() {
                    let mut problem = RetractionProblem::new(p, lower, t.witness.retract());
                    for (i, &x) in removed.iter().enumerate() {
                        let v = top[choice >> i & 1];
                        for y in p.below(x).intersection(lower) {
                            problem = problem.forbid(y, PointSet::singleton(v));
                        }
                    }
                    let Some(map) = problem.solve_first(search)? else { continue };
                    let tw = RetractWitness::new(p, lower, map).expect("map search produced an invalid retraction");
                    passed = true;
                    for s in &fits {
                        let split = DownSplit { k, d, s: s.witness.clone(), t: tw.clone() };
                        debug_assert_eq!(check_down_condition(p, &split), Ok(true));
                        out.splits.push(match direction {
                            Direction::Down => Split::Down(split),
                            Direction::Up => Split::Up(UpSplit { k: h - k, u: d, s: split.s, t: split.t }),
                        });
                        if !opts.collect_all {
                            out.log.passed += 1;
                            return Ok(());
                        }
                    }
                }
            }
            if passed {
                out.log.passed += 1;
            } else if stacking {
                out.log.no_tau += 1;
            } else {
                out.log.no_stacking += 1;
            }
        }
    }
    Ok(())
}

/// Exhaustive search over all down-splits and up-splits of `p`: every cut
/// `k`, every removed set inside the adjacent level, every retract shape of
/// both segments, and every choice of `τ`. Stops at the first split
/// satisfying its condition unless `collect_all` is set.
pub fn search_splits(p: &Poset, opts: SplitSearch<'_>, search: &Search) -> Result<SplitSearchOutcome, SearchError> {
    let mut out = SplitSearchOutcome::default();
    search_down(p, Direction::Down, opts, search, &mut out)?;
    if out.splits.is_empty() || opts.collect_all {
        let mut up = SplitSearchOutcome::default();
        search_down(&p.dual(), Direction::Up, opts, search, &mut up)?;
        out.splits.extend(up.splits);
        out.log.add(&up.log);
    }
    Ok(out)
}

/// 2-antichain retraction of a single level, used as the trivial t-base.
pub fn level_retraction(p: &Poset, level: usize, search: &Search) -> Result<Option<RetractWitness>, SearchError> {
    class_retract(p, p.levels()[level], search)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retraction::{has_4crownstack_retract, RetractClass};
    use crate::sections::{build_from_code, SectionCode};

    fn grid(s: &str) -> GridPoset {
        build_from_code(&s.parse::<SectionCode>().unwrap())
    }

    fn oracle(g: &GridPoset) -> RetractWitness {
        has_4crownstack_retract(g.poset(), CandidateMode::Spanning, &Search::default())
            .unwrap()
            .unwrap()
    }

    #[test]
    fn identity_on_a_stack_splits_with_nothing_removed() {
        let p = Poset::crown_stack(2, 2);
        let r = RetractWitness::new(&p, p.points(), (0..p.len()).map(Some).collect()).unwrap();
        let splits = split_from_retraction(&p, &r).unwrap();
        assert!(!splits.is_empty());
        assert!(splits.iter().all(|s| s.removed().is_empty()));
    }

    #[test]
    fn splits_of_the_six_crown_stack_of_height_three() {
        let g = grid("111");
        let r = oracle(&g);
        let splits = split_from_retraction(g.poset(), &r).unwrap();
        let downs: Vec<_> = splits.iter().filter(|s| s.direction() == Direction::Down).map(|s| s.k()).collect();
        let ups: Vec<_> = splits.iter().filter(|s| s.direction() == Direction::Up).map(|s| s.k()).collect();
        assert!(downs.contains(&0), "{downs:?}");
        assert!(ups.contains(&3), "{ups:?}");
        for s in &splits {
            let rebuilt = build_retraction(g.poset(), s).unwrap();
            assert_eq!(rebuilt.retract(), r.retract());
        }
    }

    #[test]
    fn down_split_of_1001_at_level_two() {
        let g = grid("1001");
        let out = search_splits(g.poset(), SplitSearch { collect_all: true, prune: None }, &Search::default()).unwrap();
        let at2: Vec<_> = out.splits.iter().filter(|s| s.direction() == Direction::Down && s.k() == 2).collect();
        assert!(!at2.is_empty());
        for s in at2 {
            assert_eq!(check_condition(g.poset(), s), Ok(true));
            let r = build_retraction(g.poset(), s).unwrap();
            assert!(matches!(r.class(), RetractClass::FourCrownStack { .. }));
            assert!(is_matching(s, &r));
        }
    }

    #[test]
    fn malformed_splits_are_rejected() {
        let g = grid("1001");
        let p = g.poset();
        let out = search_splits(p, SplitSearch::default(), &Search::default()).unwrap();
        let Split::Down(mut split) = out.splits[0].clone() else { panic!("expected a down-split") };
        split.k = 9;
        assert!(matches!(check_down_condition(p, &split), Err(SplitError::Invariant(_))));

        // A removed set reaching two levels above the cut.
        let k = 0;
        let lower = g.levels(0, 0);
        let upper = g.levels(1, 4);
        let d = g.level(1).union(PointSet::singleton(g.point(2, 0)));
        let t = class_retract(p, lower, &Search::default()).unwrap().unwrap();
        let s = class_retract(p, upper.difference(d), &Search::default()).unwrap().unwrap();
        let bad = DownSplit { k, d, s, t };
        assert!(matches!(check_down_condition(p, &bad), Err(SplitError::Invariant(_))));
    }

    #[test]
    fn up_split_with_nothing_removed_only_needs_stacking() {
        let g = grid("1001");
        let p = g.poset();
        let out = search_splits(p, SplitSearch { collect_all: true, prune: None }, &Search::default()).unwrap();
        for s in out.splits.iter().filter(|s| s.direction() == Direction::Up && s.removed().is_empty()) {
            assert_eq!(check_condition(p, s), Ok(true));
            let r = build_retraction(p, s).unwrap();
            assert!(is_matching(s, &r));
        }
    }

    #[test]
    fn gap_stack_on_10111() {
        let g = grid("10111");
        let p = g.poset();
        let search = Search::default();
        let s = class_retract(p, g.levels(0, 0), &search).unwrap().unwrap();
        // The 6-crown stack on levels 2..=5 retracts onto a 4-crown stack
        // with a singleton preimage at the bottom.
        let upper = g.levels(2, 5);
        let mut t = None;
        for c in retract_candidates(p, upper, CandidateMode::Unconstrained, CandidateKinds::STACKS) {
            RetractionProblem::new(p, upper, c)
                .for_each_solution(&search, |m| {
                    let w = RetractWitness::new(p, upper, m.to_vec()).unwrap();
                    if singleton_preimage_points(&w, p, End::Bottom).is_empty() {
                        std::ops::ControlFlow::Continue(())
                    } else {
                        t = Some(w);
                        std::ops::ControlFlow::Break(())
                    }
                })
                .unwrap();
            if t.is_some() {
                break;
            }
        }
        let t = t.unwrap();
        let split = gap_stack_split(&g, 1, &s, &t).unwrap().unwrap();
        assert_eq!(check_condition(p, &split), Ok(true));
        let r = build_retraction(p, &split).unwrap();
        assert!(matches!(r.class(), RetractClass::FourCrownStack { .. }));
    }

    #[test]
    fn gap_stack_rejects_crown_stack_windows() {
        let g = grid("111");
        let p = g.poset();
        let search = Search::default();
        let s = class_retract(p, g.levels(0, 0), &search).unwrap().unwrap();
        let t = class_retract(p, g.levels(2, 3), &search).unwrap();
        let t = t.unwrap_or_else(|| class_retract(p, g.level(3), &search).unwrap().unwrap());
        assert!(matches!(gap_stack_split(&g, 1, &s, &t), Err(SplitError::Precondition(_))));
    }
}
