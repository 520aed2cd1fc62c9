//! Finite posets stored as strict-order bitsets.
//!
//! Every [`Poset`] is transitively closed and irreflexive; covers, level sets
//! and point levels are derived once at construction. Level sets follow the
//! min-stripping recursion: level 0 is the set of minimal points, level `k+1`
//! the minimal points of what remains after removing levels `0..=k`.

use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::pointset::{PointSet, MAX_POINTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("point index {index} is out of range for a poset with {n} points")]
    Index { index: usize, n: usize },
    #[error("the relation has a directed cycle through point {0}")]
    Cycle(usize),
    #[error("{0} points requested; at most 64 are supported")]
    TooLarge(usize),
    #[error("level pair ({k}, {l}) is invalid for a poset with {levels} levels")]
    Level { k: usize, l: usize, levels: usize },
}

/// Type of the sub-poset formed by two level sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelPairType {
    /// A 6-crown.
    SixCrown,
    /// Three disjoint 2-chains without further comparabilities.
    ThreeC,
    /// Ordinal sum of two 3-antichains.
    ThreeThree,
    Other,
}

/// An immutable finite poset.
#[derive(Clone)]
pub struct Poset {
    n: usize,
    above: Vec<PointSet>,
    below: Vec<PointSet>,
    upper_covers: Vec<PointSet>,
    lower_covers: Vec<PointSet>,
    levels: Vec<PointSet>,
    level_of: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.above == other.above
    }
}

impl Eq for Poset {}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Poset")
            .field("n", &self.n)
            .field("covers", &self.covers())
            .finish()
    }
}

impl Poset {
    /// Transitive closure of `pairs`, where `(a, b)` means `a < b`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, PosetError> {
        if n > MAX_POINTS {
            return Err(PosetError::TooLarge(n));
        }
        let mut above = vec![PointSet::EMPTY; n];
        for &(a, b) in pairs {
            for index in [a, b] {
                if index >= n {
                    return Err(PosetError::Index { index, n });
                }
            }
            above[a].insert(b);
        }
        Self::close(above)
    }

    /// Builds a poset from strict up-sets, taking the transitive closure.
    pub fn from_above_sets(above: Vec<PointSet>) -> Result<Self, PosetError> {
        let n = above.len();
        if n > MAX_POINTS {
            return Err(PosetError::TooLarge(n));
        }
        for set in &above {
            if let Some(index) = set.difference(PointSet::full(n)).first() {
                return Err(PosetError::Index { index, n });
            }
        }
        Self::close(above)
    }

    fn close(mut above: Vec<PointSet>) -> Result<Self, PosetError> {
        let n = above.len();
        for k in 0..n {
            let via = above[k];
            for i in 0..n {
                if above[i].contains(k) {
                    above[i] = above[i].union(via);
                }
            }
        }
        if let Some(x) = (0..n).find(|&x| above[x].contains(x)) {
            return Err(PosetError::Cycle(x));
        }
        Ok(Self::from_closed(above))
    }

    fn from_closed(above: Vec<PointSet>) -> Self {
        let n = above.len();
        let mut below = vec![PointSet::EMPTY; n];
        for (x, ups) in above.iter().enumerate() {
            for y in ups.iter() {
                below[y].insert(x);
            }
        }
        let mut upper_covers = vec![PointSet::EMPTY; n];
        let mut lower_covers = vec![PointSet::EMPTY; n];
        for x in 0..n {
            for y in above[x].iter() {
                if above[x].intersection(below[y]).is_empty() {
                    upper_covers[x].insert(y);
                    lower_covers[y].insert(x);
                }
            }
        }
        let mut levels = Vec::new();
        let mut level_of = vec![0; n];
        let mut remaining = PointSet::full(n);
        while !remaining.is_empty() {
            let mins: PointSet = remaining
                .iter()
                .filter(|&x| below[x].is_disjoint(remaining))
                .collect();
            for x in mins.iter() {
                level_of[x] = levels.len();
            }
            levels.push(mins);
            remaining = remaining.difference(mins);
        }
        Poset {
            n,
            above,
            below,
            upper_covers,
            lower_covers,
            levels,
            level_of,
            labels: None,
        }
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_pairs(n, &[]).expect("antichain is a valid poset")
    }

    pub fn chain(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_pairs(n, &pairs).expect("chain is a valid poset")
    }

    /// The `2m`-crown: bottoms `0..m`, tops `m..2m`, with bottom `i` below
    /// tops `i` and `i-1 (mod m)`.
    pub fn crown(m: usize) -> Self {
        Self::crown_stack(m, 1)
    }

    /// The `2m`-crown stack of the given height: `height+1` levels of `m`
    /// points, consecutive levels forming `2m`-crowns.
    pub fn crown_stack(m: usize, height: usize) -> Self {
        assert!(m >= 2, "crowns need at least four points");
        let idx = |k: usize, i: usize| k * m + i;
        let mut pairs = Vec::new();
        for k in 0..height {
            for i in 0..m {
                pairs.push((idx(k, i), idx(k + 1, i)));
                pairs.push((idx(k, (i + 1) % m), idx(k + 1, i)));
            }
        }
        Self::from_pairs(m * (height + 1), &pairs).expect("crown stack is a valid poset")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n, "one label per point");
        self.labels = Some(labels);
        self
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of `x`, or its decimal index when the poset is unlabelled.
    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn points(&self) -> PointSet {
        PointSet::full(self.n)
    }

    #[inline]
    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.above[x].contains(y)
    }

    #[inline]
    pub fn le(&self, x: usize, y: usize) -> bool {
        x == y || self.lt(x, y)
    }

    #[inline]
    pub fn comparable(&self, x: usize, y: usize) -> bool {
        x == y || self.lt(x, y) || self.lt(y, x)
    }

    /// Points strictly above `x`.
    #[inline]
    pub fn above(&self, x: usize) -> PointSet {
        self.above[x]
    }

    /// Points strictly below `x`.
    #[inline]
    pub fn below(&self, x: usize) -> PointSet {
        self.below[x]
    }

    pub fn upper_covers(&self, x: usize) -> PointSet {
        self.upper_covers[x]
    }

    pub fn lower_covers(&self, x: usize) -> PointSet {
        self.lower_covers[x]
    }

    /// Number of strictly comparable ordered pairs.
    pub fn relation_size(&self) -> usize {
        self.above.iter().map(|s| s.len()).sum()
    }

    /// All cover pairs `(x, y)` with `x ⋖ y`, sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|x| self.upper_covers[x].iter().map(move |y| (x, y)))
            .collect()
    }

    /// Points with exactly one lower cover or exactly one upper cover.
    pub fn irreducible_points(&self) -> PointSet {
        (0..self.n)
            .filter(|&x| self.lower_covers[x].len() == 1 || self.upper_covers[x].len() == 1)
            .collect()
    }

    pub fn levels(&self) -> &[PointSet] {
        &self.levels
    }

    pub fn level(&self, x: usize) -> usize {
        self.level_of[x]
    }

    /// Length of a longest chain; 0 for the empty poset, which has no levels.
    pub fn height(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn minimal(&self) -> PointSet {
        self.levels.first().copied().unwrap_or_default()
    }

    pub fn maximal(&self) -> PointSet {
        (0..self.n).filter(|&x| self.above[x].is_empty()).collect()
    }

    /// Union of the levels `k..=l`.
    pub fn level_range(&self, k: usize, l: usize) -> PointSet {
        self.levels[k..=l]
            .iter()
            .fold(PointSet::EMPTY, |acc, s| acc.union(*s))
    }

    /// Level sets of the sub-poset induced by `domain`, bottom first.
    pub fn levels_within(&self, domain: PointSet) -> Vec<PointSet> {
        let mut out = Vec::new();
        let mut remaining = domain;
        while !remaining.is_empty() {
            let mins: PointSet = remaining
                .iter()
                .filter(|&x| self.below[x].is_disjoint(remaining))
                .collect();
            out.push(mins);
            remaining = remaining.difference(mins);
        }
        out
    }

    /// `true` if `set ⊆ within` is closed downwards inside `within`.
    pub fn is_down_set_within(&self, set: PointSet, within: PointSet) -> bool {
        set.is_subset(within)
            && set
                .iter()
                .all(|x| self.below[x].intersection(within).is_subset(set))
    }

    pub fn is_up_set_within(&self, set: PointSet, within: PointSet) -> bool {
        set.is_subset(within)
            && set
                .iter()
                .all(|x| self.above[x].intersection(within).is_subset(set))
    }

    /// Whether the comparability graph restricted to `domain` is connected.
    /// The empty set counts as connected.
    pub fn is_connected_within(&self, domain: PointSet) -> bool {
        let Some(start) = domain.first() else {
            return true;
        };
        let mut seen = PointSet::singleton(start);
        let mut frontier = seen;
        while let Some(x) = frontier.first() {
            frontier.remove(x);
            let next = self.above[x]
                .union(self.below[x])
                .intersection(domain)
                .difference(seen);
            seen = seen.union(next);
            frontier = frontier.union(next);
        }
        seen == domain
    }

    pub fn is_antichain(&self, set: PointSet) -> bool {
        set.iter().all(|x| self.above[x].is_disjoint(set))
    }

    /// Size of a largest antichain, by exhaustive branch and bound over the
    /// comparability graph.
    pub fn width(&self) -> usize {
        fn grow(p: &Poset, chosen: usize, candidates: PointSet, best: &mut usize) {
            if chosen + candidates.len() <= *best {
                return;
            }
            let Some(v) = candidates.first() else {
                *best = chosen;
                return;
            };
            let rest = candidates.without(v);
            let compatible = rest.difference(p.above[v].union(p.below[v]));
            grow(p, chosen + 1, compatible, best);
            grow(p, chosen, rest, best);
        }
        let mut best = 0;
        grow(self, 0, self.points(), &mut best);
        best
    }

    /// Sub-poset induced by `set`; point `i` of the result is the `i`-th
    /// smallest member of `set`.
    pub fn induced(&self, set: PointSet) -> Result<Poset, PosetError> {
        if let Some(index) = set.difference(self.points()).first() {
            return Err(PosetError::Index { index, n: self.n });
        }
        let members = set.to_vec();
        let mut pos = vec![usize::MAX; self.n];
        for (i, &x) in members.iter().enumerate() {
            pos[x] = i;
        }
        let above = members
            .iter()
            .map(|&x| self.above[x].intersection(set).iter().map(|y| pos[y]).collect())
            .collect();
        let mut sub = Self::from_closed(above);
        if let Some(labels) = &self.labels {
            sub.labels = Some(members.iter().map(|&x| labels[x].clone()).collect());
        }
        Ok(sub)
    }

    /// The same points with the order reversed.
    pub fn dual(&self) -> Poset {
        let mut d = Self::from_closed(self.below.clone());
        d.labels = self.labels.clone();
        d
    }

    /// `self ⊕ other`: the points of `other` are renumbered after those of
    /// `self` and placed above all of them.
    pub fn ordinal_sum(&self, other: &Poset) -> Result<Poset, PosetError> {
        let n = self.n + other.n;
        if n > MAX_POINTS {
            return Err(PosetError::TooLarge(n));
        }
        let shift = |s: PointSet| PointSet::from_bits(s.bits() << self.n);
        let top = shift(other.points());
        let mut above: Vec<PointSet> = self.above.iter().map(|s| s.union(top)).collect();
        above.extend(other.above.iter().map(|&s| shift(s)));
        let mut sum = Self::from_closed(above);
        if let (Some(a), Some(b)) = (&self.labels, &other.labels) {
            sum.labels = Some(a.iter().chain(b).cloned().collect());
        }
        Ok(sum)
    }

    /// Whether the poset is isomorphic to the `2m`-crown.
    pub fn is_crown(&self, m: usize) -> bool {
        m >= 2
            && self.n == 2 * m
            && self.levels.len() == 2
            && self.levels[0].len() == m
            && is_isomorphic(self, &Poset::crown(m))
    }

    /// Whether the poset is a `2m`-crown stack: height at least one, every
    /// pair of consecutive levels a `2m`-crown, and nothing else besides what
    /// transitivity forces.
    pub fn is_crown_stack(&self, m: usize) -> bool {
        if self.levels.len() < 2 {
            return false;
        }
        let pairs_ok = self.levels.windows(2).all(|w| {
            self.induced(w[0].union(w[1]))
                .map(|sub| sub.is_crown(m))
                .unwrap_or(false)
        });
        pairs_ok
            && self
                .covers()
                .iter()
                .all(|&(x, y)| self.level_of[y] == self.level_of[x] + 1)
    }

    /// Type of the sub-poset induced by levels `k` and `l`.
    pub fn classify_level_pair(&self, k: usize, l: usize) -> Result<LevelPairType, PosetError> {
        if k >= l || l >= self.levels.len() {
            return Err(PosetError::Level { k, l, levels: self.levels.len() });
        }
        let sub = self.induced(self.levels[k].union(self.levels[l]))?;
        Ok(classify_pair_poset(&sub))
    }
}

fn classify_pair_poset(sub: &Poset) -> LevelPairType {
    if sub.n != 6 || sub.levels.len() != 2 || sub.levels[0].len() != 3 {
        return LevelPairType::Other;
    }
    let pairs = sub.relation_size();
    if pairs == 9 {
        return LevelPairType::ThreeThree;
    }
    if pairs == 3 && (0..6).all(|x| sub.above[x].len() + sub.below[x].len() == 1) {
        return LevelPairType::ThreeC;
    }
    if sub.is_crown(3) {
        return LevelPairType::SixCrown;
    }
    LevelPairType::Other
}

/// Calls `visit` with every isomorphism `p → q`, given as the image of each
/// point of `p`. Levels are isomorphism invariants, so candidates are
/// restricted to points on the same level with the same cover and
/// comparability degrees.
pub fn for_each_isomorphism(
    p: &Poset,
    q: &Poset,
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) {
    if p.n != q.n
        || p.levels.len() != q.levels.len()
        || p.levels.iter().zip(&q.levels).any(|(a, b)| a.len() != b.len())
    {
        return;
    }
    let signature = |poset: &Poset, x: usize| {
        (
            poset.level_of[x],
            poset.lower_covers[x].len(),
            poset.upper_covers[x].len(),
            poset.below[x].len(),
            poset.above[x].len(),
        )
    };
    let order: Vec<usize> = p.levels.iter().flat_map(|l| l.iter()).collect();
    let candidates: Vec<Vec<usize>> = (0..p.n)
        .map(|x| {
            let sig = signature(p, x);
            q.levels[p.level_of[x]]
                .iter()
                .filter(|&y| signature(q, y) == sig)
                .collect()
        })
        .collect();

    struct State<'a> {
        p: &'a Poset,
        q: &'a Poset,
        order: &'a [usize],
        candidates: &'a [Vec<usize>],
        image: Vec<usize>,
        used: PointSet,
    }

    fn extend(st: &mut State<'_>, depth: usize, visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
        if depth == st.order.len() {
            return visit(&st.image);
        }
        let x = st.order[depth];
        for i in 0..st.candidates[x].len() {
            let y = st.candidates[x][i];
            if st.used.contains(y) {
                continue;
            }
            let consistent = st.order[..depth].iter().all(|&w| {
                let v = st.image[w];
                st.p.lt(w, x) == st.q.lt(v, y) && st.p.lt(x, w) == st.q.lt(y, v)
            });
            if !consistent {
                continue;
            }
            st.image[x] = y;
            st.used.insert(y);
            extend(st, depth + 1, visit)?;
            st.used.remove(y);
        }
        ControlFlow::Continue(())
    }

    let mut st = State {
        p,
        q,
        order: &order,
        candidates: &candidates,
        image: vec![usize::MAX; p.n],
        used: PointSet::EMPTY,
    };
    let _ = extend(&mut st, 0, visit);
}

pub fn find_isomorphism(p: &Poset, q: &Poset) -> Option<Vec<usize>> {
    let mut found = None;
    for_each_isomorphism(p, q, &mut |m| {
        found = Some(m.to_vec());
        ControlFlow::Break(())
    });
    found
}

pub fn is_isomorphic(p: &Poset, q: &Poset) -> bool {
    find_isomorphism(p, q).is_some()
}

/// All automorphisms of `p`, in the order the search finds them.
pub fn automorphisms(p: &Poset) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    for_each_isomorphism(p, p, &mut |m| {
        all.push(m.to_vec());
        ControlFlow::Continue(())
    });
    all
}
