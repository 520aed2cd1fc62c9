//! Backtracking search for order-preserving maps onto a fixed sub-poset.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pointset::PointSet;
use crate::poset::Poset;

/// Node budget used when neither the caller nor the environment sets one.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// Environment variable overriding the node budget of a single map search.
pub const BUDGET_ENV: &str = "NICESEC_NODE_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("undecided: a map search exceeded the node budget of {0}")]
    Undecided(u64),
}

/// Per-search effort cap plus shared counters.
#[derive(Debug)]
pub struct Search {
    budget: u64,
    candidates: AtomicU64,
    csp_calls: AtomicU64,
    nodes: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub candidates: u64,
    pub csp_calls: u64,
    pub nodes: u64,
}

impl Default for Search {
    fn default() -> Self {
        Search::with_budget(DEFAULT_NODE_BUDGET)
    }
}

impl Search {
    pub fn with_budget(budget: u64) -> Self {
        Search {
            budget,
            candidates: AtomicU64::new(0),
            csp_calls: AtomicU64::new(0),
            nodes: AtomicU64::new(0),
        }
    }

    /// Reads the budget from [`BUDGET_ENV`], falling back to the default.
    pub fn from_env() -> Self {
        let budget = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_NODE_BUDGET);
        Search::with_budget(budget)
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn stats(&self) -> SearchStats {
        SearchStats {
            candidates: self.candidates.load(Ordering::Relaxed),
            csp_calls: self.csp_calls.load(Ordering::Relaxed),
            nodes: self.nodes.load(Ordering::Relaxed),
        }
    }

    pub(crate) fn count_candidates(&self, n: usize) {
        self.candidates.fetch_add(n as u64, Ordering::Relaxed);
    }
}

/// An order-preserving map from `domain` onto `target` that fixes `target`,
/// optionally with a set of allowed values per point.
#[derive(Clone)]
pub struct RetractionProblem<'a> {
    p: &'a Poset,
    domain: PointSet,
    target: PointSet,
    allowed: Vec<PointSet>,
}

impl<'a> RetractionProblem<'a> {
    pub fn new(p: &'a Poset, domain: PointSet, target: PointSet) -> Self {
        RetractionProblem { p, domain, target, allowed: vec![target; p.len()] }
    }

    /// Forbids the values in `values` as images of `x`.
    pub fn forbid(mut self, x: usize, values: PointSet) -> Self {
        self.allowed[x] = self.allowed[x].difference(values);
        self
    }

    /// Lexicographically least solution in point-index order.
    pub fn solve_first(&self, search: &Search) -> Result<Option<Vec<Option<usize>>>, SearchError> {
        let mut found = None;
        self.for_each_solution(search, |m| {
            found = Some(m.to_vec());
            ControlFlow::Break(())
        })?;
        Ok(found)
    }

    /// Calls `f` on every solution in lexicographic order until it breaks.
    /// Maps are indexed by host point, `None` outside the domain.
    pub fn for_each_solution(
        &self,
        search: &Search,
        mut f: impl FnMut(&[Option<usize>]) -> ControlFlow<()>,
    ) -> Result<(), SearchError> {
        search.csp_calls.fetch_add(1, Ordering::Relaxed);
        let p = self.p;
        let target = self.target;
        if target.is_empty() || !target.is_subset(self.domain) {
            return Ok(());
        }
        let n = p.len();
        let mut up = vec![PointSet::EMPTY; n];
        let mut down = vec![PointSet::EMPTY; n];
        for a in target {
            up[a] = p.above(a).with(a).intersection(target);
            down[a] = p.below(a).with(a).intersection(target);
        }
        let mut map: Vec<Option<usize>> = vec![None; n];
        for a in target {
            if !self.allowed[a].contains(a) {
                return Ok(());
            }
            map[a] = Some(a);
        }
        let vars: Vec<usize> = self.domain.difference(target).to_vec();
        let mut doms = vec![PointSet::EMPTY; n];
        for &x in &vars {
            let mut d = self.allowed[x].intersection(target);
            for f in p.below(x).intersection(target) {
                d = d.intersection(up[f]);
            }
            for f in p.above(x).intersection(target) {
                d = d.intersection(down[f]);
            }
            if d.is_empty() {
                return Ok(());
            }
            doms[x] = d;
        }

        struct Ctx<'b, F> {
            p: &'b Poset,
            vars: &'b [usize],
            up: &'b [PointSet],
            down: &'b [PointSet],
            map: Vec<Option<usize>>,
            nodes: u64,
            budget: u64,
            f: F,
        }

        fn go<F: FnMut(&[Option<usize>]) -> ControlFlow<()>>(
            ctx: &mut Ctx<'_, F>,
            i: usize,
            doms: &[PointSet],
            unassigned: PointSet,
        ) -> Result<ControlFlow<()>, SearchError> {
            if i == ctx.vars.len() {
                return Ok((ctx.f)(&ctx.map));
            }
            let x = ctx.vars[i];
            let rest = unassigned.without(x);
            let ups = ctx.p.above(x).intersection(rest);
            let downs = ctx.p.below(x).intersection(rest);
            let mut next = doms.to_vec();
            'values: for a in doms[x] {
                ctx.nodes += 1;
                if ctx.nodes > ctx.budget {
                    return Err(SearchError::Undecided(ctx.budget));
                }
                next.copy_from_slice(doms);
                for y in ups {
                    next[y] = next[y].intersection(ctx.up[a]);
                    if next[y].is_empty() {
                        continue 'values;
                    }
                }
                for y in downs {
                    next[y] = next[y].intersection(ctx.down[a]);
                    if next[y].is_empty() {
                        continue 'values;
                    }
                }
                ctx.map[x] = Some(a);
                if go(ctx, i + 1, &next, rest)?.is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
            ctx.map[x] = None;
            Ok(ControlFlow::Continue(()))
        }

        let unassigned: PointSet = vars.iter().copied().collect();
        let mut ctx = Ctx {
            p,
            vars: &vars,
            up: &up,
            down: &down,
            map,
            nodes: 0,
            budget: search.budget,
            f: &mut f,
        };
        let result = go(&mut ctx, 0, &doms, unassigned);
        search.nodes.fetch_add(ctx.nodes, Ordering::Relaxed);
        result.map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over all maps into the target.
    fn brute_count(p: &Poset, domain: PointSet, target: PointSet) -> usize {
        let free: Vec<usize> = domain.difference(target).to_vec();
        let vals = target.to_vec();
        let mut count = 0;
        let total = vals.len().pow(free.len() as u32);
        for code in 0..total {
            let mut map: Vec<usize> = (0..p.len()).collect();
            let mut c = code;
            for &x in &free {
                map[x] = vals[c % vals.len()];
                c /= vals.len();
            }
            let ok = domain
                .iter()
                .all(|x| domain.iter().all(|y| !p.lt(x, y) || p.le(map[x], map[y])));
            if ok {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn counts_match_brute_force() {
        let crown = Poset::crown(3);
        let stack = Poset::crown_stack(3, 2);
        let cases = [
            (&crown, PointSet::full(6), PointSet::from_bits(0b01_0011)),
            (&stack, PointSet::full(9), PointSet::from_bits(0b1_1000_0011)),
            (&stack, PointSet::full(9).without(4), PointSet::from_bits(0b0_0001_0011)),
        ];
        for (p, domain, target) in cases {
            let mut n = 0;
            RetractionProblem::new(p, domain, target)
                .for_each_solution(&Search::default(), |_| {
                    n += 1;
                    ControlFlow::Continue(())
                })
                .unwrap();
            assert_eq!(n, brute_count(p, domain, target), "target {target:?}");
        }
    }

    #[test]
    fn first_solution_is_lexicographically_least() {
        let p = Poset::antichain(4);
        let target = PointSet::from_bits(0b0110);
        let m = RetractionProblem::new(&p, p.points(), target)
            .solve_first(&Search::default())
            .unwrap()
            .unwrap();
        assert_eq!(m, vec![Some(1), Some(1), Some(2), Some(1)]);
    }

    #[test]
    fn unary_constraints_are_respected() {
        let p = Poset::antichain(3);
        let target = PointSet::from_bits(0b011);
        let m = RetractionProblem::new(&p, p.points(), target)
            .forbid(2, PointSet::singleton(0))
            .solve_first(&Search::default())
            .unwrap()
            .unwrap();
        assert_eq!(m[2], Some(1));
        let none = RetractionProblem::new(&p, p.points(), target)
            .forbid(2, target)
            .solve_first(&Search::default())
            .unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let p = Poset::antichain(12);
        let target = PointSet::from_bits(0b11);
        let err = RetractionProblem::new(&p, p.points(), target)
            .for_each_solution(&Search::with_budget(100), |_| ControlFlow::Continue(()));
        assert_eq!(err, Err(SearchError::Undecided(100)));
    }
}
