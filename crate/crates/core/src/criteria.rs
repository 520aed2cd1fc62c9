//! Pruning criteria for the exhaustive split search.
//!
//! All five criteria are stated for down-splits `(k, D, s, t)` of a code
//! `P` with first and last bit `1` and height at least 3. An up-split of `P`
//! is a down-split of the dual, whose code is the reversed code, so the same
//! rules apply to it with `k` replaced by `h - k`.
//!
//! | # | context      | prunes when                                         |
//! |---|--------------|-----------------------------------------------------|
//! | 1 | `k = h-1`    | `P(0 → h-3)` has no 2-antichain or 4-crown stack retract |
//! | 2 | `k = h-2`    | `#D < 2`                                            |
//! | 3 | `k = h-2`    | `P(h-2, h-1)` is a 6-crown                          |
//! | 4 | `k = 0`      | `#D ≥ 2`                                            |
//! | 5 | `k = 0`      | `P(1, 2)` is a 6-crown and `P(3 → h)` has no such retract |
//!
//! Criterion 3 can discard individual valid splits: `10111` has valid
//! down-splits at `k = 3` with two removed points, because `t` may send a
//! point of `P(h-2)` below the top level of `T`. Every code still keeps a
//! valid split that no criterion touches, so answers do not change.

use thiserror::Error;

use crate::sections::SectionCode;
use crate::split::{Direction, SplitContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Prune,
    NoPrune,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("criteria need a code with first and last bit 1 and height at least 3, got {0:?}")]
    Code(String),
    #[error("criterion {which} does not apply at level {k} of a poset of height {height}")]
    Level { which: usize, k: usize, height: usize },
    #[error("there is no criterion {0}")]
    Unknown(usize),
}

/// How criteria are evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CriteriaMode {
    #[default]
    Sound,
    /// Every verdict flipped; for fault injection.
    Inverted,
    /// Criteria 3 and 5 without their 6-crown hypotheses.
    Unguarded,
}

/// The code seen from the side of the split: reversed for up-splits.
fn down_form(code: &SectionCode, direction: Direction) -> SectionCode {
    match direction {
        Direction::Down => code.clone(),
        Direction::Up => code.reversed(),
    }
}

/// Evaluates criterion `which` in `ctx` for the poset coded by `code`.
///
/// `has_retract` answers, for a code starting with `1`, whether its lower
/// segment has a 2-antichain or 4-crown stack retract.
pub fn criterion(
    code: &SectionCode,
    which: usize,
    ctx: &SplitContext,
    has_retract: &dyn Fn(&SectionCode) -> bool,
    mode: CriteriaMode,
) -> Result<Verdict, ContextError> {
    let c = down_form(code, ctx.direction);
    let h = c.len();
    if h < 3 || !c.is_full_section() {
        return Err(ContextError::Code(code.to_string()));
    }
    let applies = match which {
        1 => ctx.k == h - 1,
        2 | 3 => ctx.k == h - 2,
        4 | 5 => ctx.k == 0,
        _ => return Err(ContextError::Unknown(which)),
    };
    if !applies {
        return Err(ContextError::Level { which, k: ctx.k, height: h });
    }
    let unguarded = mode == CriteriaMode::Unguarded;
    let prune = match which {
        1 => h > 3 && !has_retract(&c.prefix(h - 3)),
        2 => ctx.removed < 2,
        3 => unguarded || c.bit(h - 2),
        4 => ctx.removed >= 2,
        // P(3 → h) read from its top is the reversed suffix, which starts
        // with 1; a single level always retracts onto a 2-antichain.
        5 => (unguarded || c.bit(1)) && h > 3 && !has_retract(&c.suffix(3).reversed()),
        _ => unreachable!(),
    };
    let prune = prune != (mode == CriteriaMode::Inverted);
    Ok(if prune { Verdict::Prune } else { Verdict::NoPrune })
}

/// The first criterion pruning `ctx`, if any. Codes outside the criteria's
/// scope are never pruned.
pub fn prune_reason(
    code: &SectionCode,
    ctx: &SplitContext,
    has_retract: &dyn Fn(&SectionCode) -> bool,
    mode: CriteriaMode,
) -> Option<usize> {
    (1..=5).find(|&which| criterion(code, which, ctx, has_retract, mode) == Ok(Verdict::Prune))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::known;

    fn table(c: &SectionCode) -> bool {
        known::answer(c.as_str()).unwrap()
    }

    fn code(s: &str) -> SectionCode {
        s.parse().unwrap()
    }

    fn down(k: usize, removed: usize) -> SplitContext {
        SplitContext { direction: Direction::Down, k, removed }
    }

    #[test]
    fn criterion_5_prunes_the_upper_segment_of_1111() {
        let v = criterion(&code("1111"), 5, &down(0, 1), &table, CriteriaMode::Sound);
        assert_eq!(v, Ok(Verdict::Prune));
        let v = criterion(&code("1101"), 5, &down(0, 0), &table, CriteriaMode::Sound);
        assert_eq!(v, Ok(Verdict::Prune));
    }

    #[test]
    fn criteria_for_1011() {
        let c = code("1011");
        // Top pair as s-base: the pair below it is a 6-crown.
        assert_eq!(criterion(&c, 3, &down(2, 2), &table, CriteriaMode::Sound), Ok(Verdict::Prune));
        // Top level as s-base: 1011(0 → 1) = 1 has no retract.
        assert_eq!(criterion(&c, 1, &down(3, 0), &table, CriteriaMode::Sound), Ok(Verdict::Prune));
        // P(1 → 4) with two removed points.
        assert_eq!(criterion(&c, 4, &down(0, 2), &table, CriteriaMode::Sound), Ok(Verdict::Prune));
        assert_eq!(criterion(&c, 4, &down(0, 1), &table, CriteriaMode::Sound), Ok(Verdict::NoPrune));
    }

    #[test]
    fn nothing_prunes_the_level_two_split_of_1001() {
        let c = code("1001");
        for removed in 0..3 {
            assert_eq!(prune_reason(&c, &down(2, removed), &table, CriteriaMode::Sound), if removed < 2 { Some(2) } else { None });
        }
        assert_eq!(criterion(&c, 3, &down(2, 2), &table, CriteriaMode::Unguarded), Ok(Verdict::Prune));
    }

    #[test]
    fn up_contexts_use_the_reversed_code() {
        let c = code("1101");
        let up = SplitContext { direction: Direction::Up, k: 0, removed: 0 };
        // Reversed code 1011: bit 1 is 0, so criterion 5 does not apply.
        assert_eq!(criterion(&c, 5, &up, &table, CriteriaMode::Sound), Ok(Verdict::NoPrune));
    }

    #[test]
    fn context_errors() {
        assert!(matches!(
            criterion(&code("10"), 1, &down(1, 0), &table, CriteriaMode::Sound),
            Err(ContextError::Code(_))
        ));
        assert!(matches!(
            criterion(&code("1110"), 1, &down(3, 0), &table, CriteriaMode::Sound),
            Err(ContextError::Code(_))
        ));
        assert_eq!(
            criterion(&code("1011"), 4, &down(1, 0), &table, CriteriaMode::Sound),
            Err(ContextError::Level { which: 4, k: 1, height: 4 })
        );
        assert_eq!(
            criterion(&code("1011"), 6, &down(1, 0), &table, CriteriaMode::Sound),
            Err(ContextError::Unknown(6))
        );
    }

    #[test]
    fn inverted_mode_flips_verdicts() {
        let c = code("1111");
        assert_eq!(criterion(&c, 5, &down(0, 1), &table, CriteriaMode::Inverted), Ok(Verdict::NoPrune));
        assert_eq!(criterion(&c, 4, &down(0, 1), &table, CriteriaMode::Inverted), Ok(Verdict::Prune));
    }
}
