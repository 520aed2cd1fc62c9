//! Retractions onto 2-antichains and 4-crown stacks.
//!
//! The oracle enumerates candidate retracts first and then searches for an
//! order-preserving map onto each candidate with [`RetractionProblem`].

mod csp;

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

pub use csp::{RetractionProblem, Search, SearchError, SearchStats, BUDGET_ENV, DEFAULT_NODE_BUDGET};

use crate::pointset::PointSet;
use crate::poset::Poset;

/// Shape of a retract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetractClass {
    TwoAntichain,
    FourCrownStack { height: usize },
}

impl RetractClass {
    pub fn name(self) -> &'static str {
        match self {
            RetractClass::TwoAntichain => "2-antichain",
            RetractClass::FourCrownStack { .. } => "4-crown-stack",
        }
    }

    pub fn height(self) -> usize {
        match self {
            RetractClass::TwoAntichain => 0,
            RetractClass::FourCrownStack { height } => height,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("map length {got} does not match the poset size {expected}")]
    Length { got: usize, expected: usize },
    #[error("map is defined exactly on the domain, but point {0} disagrees")]
    Domain(usize),
    #[error("point {x} is sent to {image}, outside the domain")]
    Image { x: usize, image: usize },
    #[error("retract point {0} is not fixed")]
    NotIdempotent(usize),
    #[error("order is not preserved on {x} < {y}")]
    Order { x: usize, y: usize },
    #[error("the retract is neither a 2-antichain nor a 4-crown stack")]
    Class,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetractError {
    #[error("removed set is not a {side} of the poset")]
    Side { side: &'static str },
    #[error("removing the set leaves no points")]
    Empty,
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// An order-preserving idempotent map on `domain` whose image is a
/// 2-antichain or a 4-crown stack. Point indices are those of the host poset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RetractWitness {
    domain: PointSet,
    retract: PointSet,
    map: Vec<Option<usize>>,
    class: RetractClass,
}

/// Classifies an induced sub-poset as a 2-antichain or a 4-crown stack.
pub fn classify_retract(p: &Poset, set: PointSet) -> Option<RetractClass> {
    let levels = p.levels_within(set);
    if levels.is_empty() || levels.iter().any(|l| l.len() != 2) {
        return None;
    }
    if levels.len() == 1 {
        return Some(RetractClass::TwoAntichain);
    }
    let complete = levels
        .windows(2)
        .all(|w| w[0].iter().all(|a| w[1].is_subset(p.above(a))));
    complete.then_some(RetractClass::FourCrownStack { height: levels.len() - 1 })
}

impl RetractWitness {
    /// Validates `map` as a retraction of the sub-poset on `domain`.
    pub fn new(p: &Poset, domain: PointSet, map: Vec<Option<usize>>) -> Result<Self, WitnessError> {
        if map.len() != p.len() {
            return Err(WitnessError::Length { got: map.len(), expected: p.len() });
        }
        for (x, m) in map.iter().enumerate() {
            if m.is_some() != domain.contains(x) {
                return Err(WitnessError::Domain(x));
            }
            if let Some(image) = *m {
                if !domain.contains(image) {
                    return Err(WitnessError::Image { x, image });
                }
            }
        }
        let retract: PointSet = map.iter().flatten().copied().collect();
        if let Some(a) = retract.iter().find(|&a| map[a] != Some(a)) {
            return Err(WitnessError::NotIdempotent(a));
        }
        for x in domain {
            for y in p.above(x).intersection(domain) {
                if !p.le(map[x].unwrap(), map[y].unwrap()) {
                    return Err(WitnessError::Order { x, y });
                }
            }
        }
        let class = classify_retract(p, retract).ok_or(WitnessError::Class)?;
        Ok(RetractWitness { domain, retract, map, class })
    }

    /// Re-checks the witness against `p`.
    pub fn validate(&self, p: &Poset) -> Result<(), WitnessError> {
        let fresh = RetractWitness::new(p, self.domain, self.map.clone())?;
        if fresh.class != self.class {
            return Err(WitnessError::Class);
        }
        Ok(())
    }

    pub fn domain(&self) -> PointSet {
        self.domain
    }

    pub fn retract(&self) -> PointSet {
        self.retract
    }

    pub fn class(&self) -> RetractClass {
        self.class
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    /// Image of `x`; panics outside the domain.
    pub fn apply(&self, x: usize) -> usize {
        self.map[x].expect("point outside the witness domain")
    }

    pub fn image_of(&self, set: PointSet) -> PointSet {
        set.intersection(self.domain).iter().map(|x| self.apply(x)).collect()
    }

    pub fn preimage(&self, a: usize) -> PointSet {
        self.domain.iter().filter(|&x| self.map[x] == Some(a)).collect()
    }

    /// Level sets of the retract, bottom first.
    pub fn levels(&self, p: &Poset) -> Vec<PointSet> {
        p.levels_within(self.retract)
    }

    pub fn bottom(&self, p: &Poset) -> PointSet {
        self.levels(p)[0]
    }

    pub fn top(&self, p: &Poset) -> PointSet {
        *self.levels(p).last().unwrap()
    }

    /// `(x, r(x))` for every point of the domain.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.domain.iter().map(|x| (x, self.apply(x))).collect()
    }

    /// Restriction to `sub`, which must be mapped into itself.
    pub fn restrict(&self, p: &Poset, sub: PointSet) -> Result<RetractWitness, WitnessError> {
        let map = (0..p.len())
            .map(|x| if sub.contains(x) { self.map[x] } else { None })
            .collect();
        RetractWitness::new(p, sub, map)
    }

    /// Moves the witness along the injective point map `phi` into a poset
    /// with `target.len()` points, and validates it there.
    pub fn transport(&self, target: &Poset, phi: &[usize]) -> Result<RetractWitness, WitnessError> {
        let mut map = vec![None; target.len()];
        for x in self.domain {
            map[phi[x]] = Some(phi[self.apply(x)]);
        }
        let domain = self.domain.iter().map(|x| phi[x]).collect();
        RetractWitness::new(target, domain, map)
    }
}

/// Which extreme level of a retract to inspect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Bottom,
    Top,
}

/// Points `a` of the bottom or top retract level with `r⁻¹(a) = {a}`.
pub fn singleton_preimage_points(w: &RetractWitness, p: &Poset, end: End) -> PointSet {
    let level = match end {
        End::Bottom => w.bottom(p),
        End::Top => w.top(p),
    };
    level
        .iter()
        .filter(|&a| w.preimage(a) == PointSet::singleton(a))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    /// Bottom level inside the minimal and top level inside the maximal
    /// points of the domain.
    Spanning,
    Unconstrained,
}

/// Which retract shapes a candidate enumeration yields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateKinds {
    pub antichains: bool,
    pub stacks: bool,
}

impl CandidateKinds {
    pub const STACKS: CandidateKinds = CandidateKinds { antichains: false, stacks: true };
    pub const BOTH: CandidateKinds = CandidateKinds { antichains: true, stacks: true };
}

/// Induced 2-antichains and 4-crown stacks inside `domain`, sorted by the
/// lexicographic order of their point lists. Each level of a candidate lies
/// in two consecutive levels of `p`.
pub fn retract_candidates(p: &Poset, domain: PointSet, mode: CandidateMode, kinds: CandidateKinds) -> Vec<PointSet> {
    let pts = domain.to_vec();
    let mut pairs = Vec::new();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            if !p.comparable(a, b) && p.level(a).abs_diff(p.level(b)) <= 1 {
                pairs.push(PointSet::singleton(a).with(b));
            }
        }
    }
    let (bottom_ok, top_ok) = match mode {
        CandidateMode::Spanning => {
            let levels = p.levels_within(domain);
            (levels.first().copied().unwrap_or_default(), levels.last().copied().unwrap_or_default())
        }
        CandidateMode::Unconstrained => (domain, domain),
    };
    // successors[i]: pairs entirely above pair i.
    let successors: Vec<Vec<usize>> = pairs
        .iter()
        .map(|&a| {
            let common = a.iter().fold(domain, |acc, x| acc.intersection(p.above(x)));
            (0..pairs.len()).filter(|&j| pairs[j].is_subset(common)).collect()
        })
        .collect();

    fn extend(
        i: usize,
        union: PointSet,
        len: usize,
        pairs: &[PointSet],
        successors: &[Vec<usize>],
        top_ok: PointSet,
        kinds: CandidateKinds,
        out: &mut Vec<PointSet>,
    ) {
        if pairs[i].is_subset(top_ok) && if len == 1 { kinds.antichains } else { kinds.stacks } {
            out.push(union);
        }
        if !kinds.stacks {
            return;
        }
        for &j in &successors[i] {
            extend(j, union.union(pairs[j]), len + 1, pairs, successors, top_ok, kinds, out);
        }
    }

    let mut out = Vec::new();
    for (i, &pair) in pairs.iter().enumerate() {
        if pair.is_subset(bottom_ok) {
            extend(i, pair, 1, &pairs, &successors, top_ok, kinds, &mut out);
        }
    }
    out.sort_by(|a, b| a.lex_cmp(*b));
    out
}

/// All induced 4-crown stacks of `p` of height at least one.
pub fn enumerate_4crownstack_candidates(p: &Poset, spanning: bool) -> Vec<PointSet> {
    let mode = if spanning { CandidateMode::Spanning } else { CandidateMode::Unconstrained };
    retract_candidates(p, p.points(), mode, CandidateKinds::STACKS)
}

/// Lexicographically least retraction of `domain` onto `target`.
pub fn retraction_onto(
    p: &Poset,
    domain: PointSet,
    target: PointSet,
    search: &Search,
) -> Result<Option<RetractWitness>, SearchError> {
    let Some(map) = RetractionProblem::new(p, domain, target).solve_first(search)? else {
        return Ok(None);
    };
    let w = RetractWitness::new(p, domain, map).expect("map search produced an invalid retraction");
    Ok(Some(w))
}

/// Retraction of the whole of `p` onto `target`, if one exists.
pub fn retraction_exists(p: &Poset, target: PointSet, search: &Search) -> Result<Option<RetractWitness>, SearchError> {
    retraction_onto(p, p.points(), target, search)
}

/// First candidate (in list order) admitting a retraction, with its
/// lexicographically least map. Runs the candidates in parallel.
pub fn first_retract(
    p: &Poset,
    domain: PointSet,
    candidates: &[PointSet],
    search: &Search,
) -> Result<Option<RetractWitness>, SearchError> {
    search.count_candidates(candidates.len());
    candidates
        .par_iter()
        .map(|&c| retraction_onto(p, domain, c, search))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
}

/// The oracle: does `p` have a 4-crown stack as retract?
///
/// In spanning mode only candidates with bottom in `min p` and top in
/// `max p` are tried; every retract that is a 4-crown stack can be replaced
/// by a spanning one of the same height, so both modes decide the same
/// question.
pub fn has_4crownstack_retract(
    p: &Poset,
    mode: CandidateMode,
    search: &Search,
) -> Result<Option<RetractWitness>, SearchError> {
    let candidates = retract_candidates(p, p.points(), mode, CandidateKinds::STACKS);
    first_retract(p, p.points(), &candidates, search)
}

/// Removal side for [`has_class_retract_minus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// The removed set is a down-set.
    Down,
    /// The removed set is an up-set.
    Up,
}

/// Does `p` minus `removed` retract onto a 2-antichain or a 4-crown stack?
///
/// A retraction onto an antichain is constant on connected components, so
/// 2-antichain candidates are only tried on disconnected domains.
pub fn has_class_retract_minus(
    p: &Poset,
    removed: PointSet,
    side: Side,
    search: &Search,
) -> Result<Option<RetractWitness>, RetractError> {
    let all = p.points();
    let closed = match side {
        Side::Down => p.is_down_set_within(removed, all),
        Side::Up => p.is_up_set_within(removed, all),
    };
    if !closed {
        let side = if side == Side::Down { "down-set" } else { "up-set" };
        return Err(RetractError::Side { side });
    }
    let domain = all.difference(removed);
    if domain.is_empty() {
        return Err(RetractError::Empty);
    }
    Ok(class_retract(p, domain, search)?)
}

/// First class retract of the sub-poset on `domain`, trying candidates in
/// lexicographic order.
pub fn class_retract(p: &Poset, domain: PointSet, search: &Search) -> Result<Option<RetractWitness>, SearchError> {
    let kinds = CandidateKinds { antichains: !p.is_connected_within(domain), stacks: true };
    let candidates = retract_candidates(p, domain, CandidateMode::Unconstrained, kinds);
    first_retract(p, domain, &candidates, search)
}

/// `R(0) ∩ P(0) ≠ ∅`.
pub fn bottom_meets_p0(w: &RetractWitness, p: &Poset) -> bool {
    !w.bottom(p).is_disjoint(p.minimal())
}

/// For every retract level `{a, b}` with largest `p`-level `ρ` strictly
/// between 0 and the height of `p` such that both `r⁻¹(a)` and `r⁻¹(b)`
/// meet `P(ρ-1)`: the image of `P(ρ+1 → h)` is the part of the retract above
/// that level, and it lies inside `P(ρ+1 → h)`.
pub fn push_up_holds(w: &RetractWitness, p: &Poset) -> bool {
    let h = p.height();
    let levels = w.levels(p);
    for (l, level) in levels.iter().enumerate() {
        let rho = level.iter().map(|x| p.level(x)).max().unwrap();
        if rho == 0 || rho >= h {
            continue;
        }
        let below = p.levels()[rho - 1];
        if level.iter().any(|a| w.preimage(a).is_disjoint(below)) {
            continue;
        }
        let upper = p.level_range(rho + 1, h);
        let rest = levels[l + 1..].iter().fold(PointSet::EMPTY, |acc, s| acc.union(*s));
        if w.image_of(upper) != rest || !rest.is_subset(upper) {
            return false;
        }
    }
    true
}

/// Compares witnesses by retract point list, then by map.
pub fn witness_cmp(a: &RetractWitness, b: &RetractWitness) -> Ordering {
    a.retract.lex_cmp(b.retract).then_with(|| a.map.cmp(&b.map))
}

#[cfg(test)]
mod tests {
    use std::ops::ControlFlow;

    use super::*;
    use crate::sections::{build_from_code, SectionCode};

    fn grid(s: &str) -> Poset {
        build_from_code(&s.parse::<SectionCode>().unwrap()).poset().clone()
    }

    #[test]
    fn identity_on_a_crown_stack() {
        let p = Poset::crown_stack(2, 3);
        let w = retraction_exists(&p, p.points(), &Search::default()).unwrap().unwrap();
        assert_eq!(w.class(), RetractClass::FourCrownStack { height: 3 });
        assert!(w.pairs().iter().all(|&(x, y)| x == y));
        assert_eq!(singleton_preimage_points(&w, &p, End::Bottom), p.minimal());
        assert_eq!(singleton_preimage_points(&w, &p, End::Top), p.maximal());
        let c = enumerate_4crownstack_candidates(&p, false);
        assert!(c.contains(&p.points()));
    }

    #[test]
    fn six_crown_has_no_4crown_retract() {
        let p = grid("1");
        // Each top point lies above exactly two bottom points, so no pair of
        // top points shares a pair of lower bounds.
        assert!(enumerate_4crownstack_candidates(&p, false).is_empty());
        assert!(has_4crownstack_retract(&p, CandidateMode::Unconstrained, &Search::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn code_10_retracts_onto_a_4crown_with_a_singleton_top_preimage() {
        let p = grid("10");
        let w = has_4crownstack_retract(&p, CandidateMode::Spanning, &Search::default())
            .unwrap()
            .unwrap();
        assert_eq!(w.class(), RetractClass::FourCrownStack { height: 1 });
        // Some retraction onto a 4-crown fixes a top point as its only preimage.
        let mut found = false;
        for c in enumerate_4crownstack_candidates(&p, false) {
            RetractionProblem::new(&p, p.points(), c)
                .for_each_solution(&Search::default(), |m| {
                    let w = RetractWitness::new(&p, p.points(), m.to_vec()).unwrap();
                    found |= !singleton_preimage_points(&w, &p, End::Top).is_empty();
                    if found { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
                })
                .unwrap();
        }
        assert!(found);
    }

    #[test]
    fn witness_validation_rejects_bad_maps() {
        let p = Poset::chain(2);
        let err = RetractWitness::new(&p, p.points(), vec![Some(1), Some(0)]).unwrap_err();
        assert_eq!(err, WitnessError::NotIdempotent(0));
        let ac = Poset::antichain(2);
        let w = RetractWitness::new(&ac, ac.points(), vec![Some(0), Some(1)]).unwrap();
        assert_eq!(w.class(), RetractClass::TwoAntichain);
        let err = RetractWitness::new(&ac, ac.points(), vec![Some(0), None]).unwrap_err();
        assert_eq!(err, WitnessError::Domain(1));
        let crown = Poset::crown(3);
        let id: Vec<_> = (0..6).map(Some).collect();
        assert_eq!(RetractWitness::new(&crown, crown.points(), id), Err(WitnessError::Class));
    }

    #[test]
    fn class_retract_minus_checks_the_side() {
        let p = grid("011");
        let top = p.levels()[3];
        assert_eq!(
            has_class_retract_minus(&p, top, Side::Down, &Search::default()),
            Err(RetractError::Side { side: "down-set" })
        );
        assert_eq!(
            has_class_retract_minus(&p, p.points(), Side::Down, &Search::default()),
            Err(RetractError::Empty)
        );
    }

    #[test]
    fn disconnected_domains_have_antichain_retracts() {
        let p = grid("0");
        let w = class_retract(&p, p.points(), &Search::default()).unwrap().unwrap();
        assert_eq!(w.class(), RetractClass::TwoAntichain);
        let p = grid("");
        let w = class_retract(&p, p.points(), &Search::default()).unwrap().unwrap();
        assert_eq!(w.retract().to_vec(), vec![0, 1]);
        assert_eq!(w.apply(2), 0);
    }

    #[test]
    fn transport_moves_maps() {
        let p = grid("10");
        let w = has_4crownstack_retract(&p, CandidateMode::Spanning, &Search::default())
            .unwrap()
            .unwrap();
        let auts = crate::poset::automorphisms(&p);
        for phi in &auts {
            let t = w.transport(&p, phi).unwrap();
            assert_eq!(t.class(), w.class());
            for x in p.points() {
                assert_eq!(t.apply(phi[x]), phi[w.apply(x)]);
            }
        }
    }
}
