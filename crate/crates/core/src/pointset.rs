use std::fmt;

/// Maximum number of points a [`PointSet`] can address.
pub const MAX_POINTS: usize = 64;

/// A set of point indices below [`MAX_POINTS`], stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PointSet(u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        PointSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_POINTS, "point index out of range");
        if n == MAX_POINTS {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(p: usize) -> Self {
        assert!(p < MAX_POINTS, "point index out of range");
        PointSet(1u64 << p)
    }

    #[inline]
    pub fn contains(self, p: usize) -> bool {
        p < MAX_POINTS && self.0 >> p & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, p: usize) {
        self.0 |= 1u64 << p;
    }

    #[inline]
    pub fn remove(&mut self, p: usize) {
        self.0 &= !(1u64 << p);
    }

    pub fn with(self, p: usize) -> Self {
        PointSet(self.0 | 1u64 << p)
    }

    pub fn without(self, p: usize) -> Self {
        PointSet(self.0 & !(1u64 << p))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        PointSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        PointSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        PointSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> PointIter {
        PointIter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, ordered by cardinality and then lexicographically
    /// by their sorted element lists.
    pub fn subsets_by_size(self) -> Vec<PointSet> {
        let elems = self.to_vec();
        let mut out = Vec::with_capacity(1 << elems.len());
        for size in 0..=elems.len() {
            combinations(&elems, size, &mut |c| out.push(c.iter().copied().collect()));
        }
        out
    }

    /// Lexicographic comparison of the sorted element lists.
    pub fn lex_cmp(self, other: Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

fn combinations(elems: &[usize], size: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(elems: &[usize], start: usize, size: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if acc.len() == size {
            f(acc);
            return;
        }
        for i in start..elems.len() {
            if elems.len() - i < size - acc.len() {
                break;
            }
            acc.push(elems[i]);
            go(elems, i + 1, size, acc, f);
            acc.pop();
        }
    }
    go(elems, 0, size, &mut Vec::with_capacity(size), f);
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = PointSet::EMPTY;
        for p in iter {
            assert!(p < MAX_POINTS, "point index out of range");
            s.insert(p);
        }
        s
    }
}

impl IntoIterator for PointSet {
    type Item = usize;
    type IntoIter = PointIter;

    fn into_iter(self) -> PointIter {
        self.iter()
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Iterator over the members of a [`PointSet`] in increasing order.
#[derive(Clone)]
pub struct PointIter(u64);

impl Iterator for PointIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for PointIter {}
