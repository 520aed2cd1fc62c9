//! Width-three sections generated from binary codes.
//!
//! A code `b_0 b_1 .. b_{h-1}` describes a poset on the grid points
//! `c{k},{j}` (`k ∈ 0..=h`, `j ∈ 0..3`), stored at index `3k + j`. Each
//! main chain `c{0},{j} < .. < c{h},{j}` is present; bit `k = 1` turns the
//! level pair `(k, k+1)` into a 6-crown by adding `c{k},{j} < c{k+1},{j+1}`,
//! bit `0` leaves it as three disjoint 2-chains; levels two or more apart are
//! completely comparable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::pointset::PointSet;
use crate::poset::{LevelPairType, Poset, PosetError};

/// Largest code length whose grid still fits in a [`PointSet`].
pub const MAX_CODE_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("invalid character {ch:?} at position {pos} (expected '0' or '1')")]
    InvalidChar { ch: char, pos: usize },
    #[error("code of length {0} is too long (at most {MAX_CODE_LEN})")]
    TooLong(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectionError {
    #[error("not a grid section: {0}")]
    Structure(String),
    #[error("horizon needs height at least 2, got {0}")]
    Height(usize),
    #[error("segment ({k}, {l}) is invalid for height {height}")]
    Level { k: usize, l: usize, height: usize },
    #[error("base permutation does not extend to an automorphism: {0}")]
    Extension(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// Binary code of the level-pair types of a segment: `1` for a 6-crown,
/// `0` for three disjoint 2-chains.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectionCode(String);

impl SectionCode {
    pub fn new(s: &str) -> Result<Self, CodeError> {
        s.parse()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Height of the coded segment.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, k: usize) -> bool {
        self.0.as_bytes()[k] == b'1'
    }

    /// Code of the dual segment.
    pub fn reversed(&self) -> SectionCode {
        SectionCode(self.0.chars().rev().collect())
    }

    /// Code of the levels `k..=l` of the coded segment.
    pub fn slice(&self, k: usize, l: usize) -> SectionCode {
        SectionCode(self.0[k..l].to_string())
    }

    /// Prefix with `k` bits, i.e. the code of levels `0..=k`.
    pub fn prefix(&self, k: usize) -> SectionCode {
        self.slice(0, k)
    }

    /// Suffix starting at level `k`, i.e. the code of levels `k..=h`.
    pub fn suffix(&self, k: usize) -> SectionCode {
        self.slice(k, self.len())
    }

    /// Full nice section of horizon two: height at least 2, first and last
    /// level pair 6-crowns.
    pub fn is_full_section(&self) -> bool {
        self.len() >= 2 && self.bit(0) && self.bit(self.len() - 1)
    }

    /// Lower segment of a full section (the universe of the decision table).
    pub fn is_lower_segment_code(&self) -> bool {
        !self.is_empty() && self.bit(0)
    }

    pub fn ends_with_crown(&self) -> bool {
        !self.is_empty() && self.bit(self.len() - 1)
    }

    /// All codes of length `len` in increasing binary order.
    pub fn all_of_length(len: usize) -> Vec<SectionCode> {
        (0..1u32 << len)
            .map(|v| {
                SectionCode(
                    (0..len)
                        .map(|i| if v >> (len - 1 - i) & 1 == 1 { '1' } else { '0' })
                        .collect(),
                )
            })
            .collect()
    }
}

impl FromStr for SectionCode {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, CodeError> {
        if let Some((pos, ch)) = s.chars().enumerate().find(|&(_, c)| c != '0' && c != '1') {
            return Err(CodeError::InvalidChar { ch, pos });
        }
        if s.len() > MAX_CODE_LEN {
            return Err(CodeError::TooLong(s.len()));
        }
        Ok(SectionCode(s.to_string()))
    }
}

impl fmt::Display for SectionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for SectionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Serialize for SectionCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SectionCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A poset on the grid points of a code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridPoset {
    poset: Poset,
    code: SectionCode,
}

/// Name of the grid point at level `k` on main chain `j`.
pub fn point_name(k: usize, j: usize) -> String {
    format!("c{k},{j}")
}

/// Inverse of [`point_name`].
pub fn parse_point_name(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix('c')?;
    let (k, j) = rest.split_once(',')?;
    let j: usize = j.parse().ok()?;
    (j < 3).then_some(())?;
    Some((k.parse().ok()?, j))
}

impl GridPoset {
    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn code(&self) -> &SectionCode {
        &self.code
    }

    pub fn height(&self) -> usize {
        self.code.len()
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    /// Index of `c{k},{j}`.
    pub fn point(&self, k: usize, j: usize) -> usize {
        3 * k + j
    }

    /// Level index `λ(p)`.
    pub fn level_of(&self, p: usize) -> usize {
        p / 3
    }

    /// Main-chain index `γ(p)`.
    pub fn chain_of(&self, p: usize) -> usize {
        p % 3
    }

    pub fn level(&self, k: usize) -> PointSet {
        PointSet::from_bits(0b111 << (3 * k))
    }

    /// Union of the levels `k..=l`.
    pub fn levels(&self, k: usize, l: usize) -> PointSet {
        PointSet::from_bits(((1u64 << (3 * (l - k + 1))) - 1) << (3 * k))
    }

    pub fn name(&self, p: usize) -> String {
        point_name(self.level_of(p), self.chain_of(p))
    }

    pub fn point_by_name(&self, name: &str) -> Option<usize> {
        let (k, j) = parse_point_name(name)?;
        (k <= self.height()).then(|| self.point(k, j))
    }
}

/// Builds the grid poset of `code`.
pub fn build_from_code(code: &SectionCode) -> GridPoset {
    let h = code.len();
    let n = 3 * (h + 1);
    let mut above = vec![PointSet::EMPTY; n];
    for k in 0..h {
        for j in 0..3 {
            let x = 3 * k + j;
            above[x].insert(3 * (k + 1) + j);
            if code.bit(k) {
                above[x].insert(3 * (k + 1) + (j + 1) % 3);
            }
            for l in k + 2..=h {
                above[x] = above[x].union(PointSet::from_bits(0b111 << (3 * l)));
            }
        }
    }
    let labels = (0..n).map(|p| point_name(p / 3, p % 3)).collect();
    let poset = Poset::from_above_sets(above)
        .expect("grid construction is acyclic")
        .with_labels(labels);
    GridPoset { poset, code: code.clone() }
}

/// Reads the code back from the level-pair types of `grid`.
pub fn code_of(grid: &GridPoset) -> Result<SectionCode, SectionError> {
    let p = grid.poset();
    let h = grid.height();
    if p.levels().len() != h + 1 || (0..=h).any(|k| p.levels()[k] != grid.level(k)) {
        return Err(SectionError::Structure("level sets do not match the grid rows".into()));
    }
    let mut bits = String::with_capacity(h);
    for k in 0..h {
        match p.classify_level_pair(k, k + 1)? {
            LevelPairType::SixCrown => bits.push('1'),
            LevelPairType::ThreeC => bits.push('0'),
            other => {
                return Err(SectionError::Structure(format!(
                    "level pair ({k}, {}) has type {other:?}",
                    k + 1
                )))
            }
        }
    }
    Ok(SectionCode(bits))
}

pub fn dual_code(code: &SectionCode) -> SectionCode {
    code.reversed()
}

/// Smallest `η` such that all level pairs at distance `η` are of type 33.
pub fn horizon(grid: &GridPoset) -> Result<usize, SectionError> {
    let p = grid.poset();
    let h = p.height();
    if p.is_empty() || h < 2 {
        return Err(SectionError::Height(h));
    }
    for eta in 1..=h {
        let mut all = true;
        for k in 0..=h - eta {
            if p.classify_level_pair(k, k + eta)? != LevelPairType::ThreeThree {
                all = false;
                break;
            }
        }
        if all {
            return Ok(eta);
        }
    }
    Err(SectionError::Structure("top and bottom levels are not of type 33".into()))
}

/// Finds a grid labelling `rows[k][j] = c{k},{j}` witnessing that `p` is a
/// section of height at least one, or `None`.
///
/// Level 0 is labelled in index order; relabelling the chains by any
/// permutation turns the rotation into itself or its inverse, so this loses
/// no generality.
pub fn section_labelling(p: &Poset) -> Option<Vec<[usize; 3]>> {
    let levels = p.levels();
    if levels.len() < 2 || levels.iter().any(|l| l.len() != 3) {
        return None;
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

    fn rotation_consistent(p: &Poset, rows: &[[usize; 3]]) -> bool {
        let top = rows.len() - 1;
        for (k, row) in rows.iter().enumerate() {
            for j in 0..3 {
                for jt in 0..3 {
                    let x = row[j];
                    let y = rows[top][jt];
                    let rx = row[(j + 1) % 3];
                    let ry = rows[top][(jt + 1) % 3];
                    if p.lt(x, y) != p.lt(rx, ry) {
                        return false;
                    }
                    if k == top && p.lt(y, x) != p.lt(ry, rx) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn extend(p: &Poset, rows: &mut Vec<[usize; 3]>) -> bool {
        let k = rows.len();
        if k == p.levels().len() {
            return true;
        }
        let pts = p.levels()[k].to_vec();
        for perm in PERMS {
            let row = [pts[perm[0]], pts[perm[1]], pts[perm[2]]];
            if (0..3).any(|j| !p.lt(rows[k - 1][j], row[j])) {
                continue;
            }
            rows.push(row);
            if rotation_consistent(p, rows) && extend(p, rows) {
                return true;
            }
            rows.pop();
        }
        false
    }

    let first = levels[0].to_vec();
    let mut rows = vec![[first[0], first[1], first[2]]];
    if !rotation_consistent(p, &rows) || !extend(p, &mut rows) {
        return None;
    }
    let no_33 = (0..levels.len() - 1)
        .all(|k| p.classify_level_pair(k, k + 1) != Ok(LevelPairType::ThreeThree));
    no_33.then_some(rows)
}

/// A 2-antichain, or a poset with a grid labelling satisfying the section
/// axioms (main chains, antichain rows, rotation automorphism, no
/// consecutive 33 pair).
pub fn is_section(p: &Poset) -> bool {
    (p.len() == 2 && p.is_antichain(p.points())) || section_labelling(p).is_some()
}

/// A section without irreducible points.
pub fn is_nice_section(p: &Poset) -> bool {
    is_section(p) && p.irreducible_points().is_empty()
}

/// A width-three section whose first and last level pairs are 6-crowns.
pub fn is_crowned_section(p: &Poset) -> bool {
    if !is_section(p) || p.width() != 3 || p.height() < 1 {
        return false;
    }
    let h = p.height();
    p.classify_level_pair(0, 1) == Ok(LevelPairType::SixCrown)
        && p.classify_level_pair(h - 1, h) == Ok(LevelPairType::SixCrown)
}

/// The segment on levels `k..=l`, re-levelled from 0.
pub fn segment(grid: &GridPoset, k: usize, l: usize) -> Result<GridPoset, SectionError> {
    let h = grid.height();
    if k > l || l > h {
        return Err(SectionError::Level { k, l, height: h });
    }
    let sub = grid.poset().induced(grid.levels(k, l))?;
    let labels = (0..sub.len()).map(|p| point_name(p / 3, p % 3)).collect();
    Ok(GridPoset { poset: sub.with_labels(labels), code: grid.code().slice(k, l) })
}

/// Extends a permutation of the bottom level (given as the image of
/// `c{0},{j}` for each `j`) level by level to an automorphism of `grid`.
///
/// Each point is sent to the unique point of its image level whose lower
/// neighbours one level down are the images of its own; the result is checked
/// against every comparability before it is returned.
pub fn extend_base_permutation(grid: &GridPoset, base: [usize; 3]) -> Result<Vec<usize>, SectionError> {
    let p = grid.poset();
    let mut sorted = base;
    sorted.sort_unstable();
    if sorted != [0, 1, 2] {
        return Err(SectionError::Extension(format!("{base:?} is not a permutation of the bottom level")));
    }
    let mut map = vec![usize::MAX; p.len()];
    map[..3].copy_from_slice(&base);
    for k in 0..grid.height() {
        let lower = grid.level(k);
        let upper = grid.level(k + 1);
        for y in upper.iter() {
            let target: PointSet = p.below(y).intersection(lower).iter().map(|x| map[x]).collect();
            let mut matches = upper
                .iter()
                .filter(|&y2| p.below(y2).intersection(lower) == target);
            match (matches.next(), matches.next()) {
                (Some(y2), None) => map[y] = y2,
                (None, _) => {
                    return Err(SectionError::Extension(format!("no image for {}", grid.name(y))))
                }
                (Some(_), Some(_)) => {
                    return Err(SectionError::Extension(format!("image of {} is not unique", grid.name(y))))
                }
            }
        }
    }
    let bijective = map.iter().copied().collect::<PointSet>() == p.points();
    let preserves = (0..p.len()).all(|x| (0..p.len()).all(|y| p.lt(x, y) == p.lt(map[x], map[y])));
    if !bijective || !preserves {
        return Err(SectionError::Extension("extension is not an automorphism".into()));
    }
    Ok(map)
}

/// The six automorphisms obtained by extending each permutation of the bottom
/// level, identity first.
pub fn base_automorphisms(grid: &GridPoset) -> Result<Vec<Vec<usize>>, SectionError> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.iter().map(|&perm| extend_base_permutation(grid, perm)).collect()
}

/// Base automorphisms of the segment on levels `k..=l`, as maps on the whole
/// grid that fix every point outside the segment.
pub fn segment_automorphisms(grid: &GridPoset, k: usize, l: usize) -> Result<Vec<Vec<usize>>, SectionError> {
    let seg = segment(grid, k, l)?;
    let offset = 3 * k;
    Ok(base_automorphisms(&seg)?
        .into_iter()
        .map(|a| {
            let mut m: Vec<usize> = (0..grid.len()).collect();
            for (x, y) in a.into_iter().enumerate() {
                m[x + offset] = y + offset;
            }
            m
        })
        .collect())
}

/// Embedding of the grid of `code[k..]` as the upper segment starting at
/// level `k`.
pub fn shift_map(len: usize, k: usize) -> Vec<usize> {
    (0..len).map(|x| x + 3 * k).collect()
}
