use std::collections::BTreeSet;
use std::ops::ControlFlow;

use nicesec_core::criteria::{prune_reason, CriteriaMode};
use nicesec_core::known;
use nicesec_core::pointset::PointSet;
use nicesec_core::poset::Poset;
use nicesec_core::retraction::{
    enumerate_4crownstack_candidates, has_4crownstack_retract, has_class_retract_minus, CandidateMode, RetractWitness,
    RetractionProblem, Search, Side,
};
use nicesec_core::sections::{build_from_code, SectionCode};
use nicesec_core::split::{
    build_retraction, check_condition, is_matching, search_splits, split_from_retraction, Direction, Split, SplitSearch,
};

const ALL: SplitSearch<'static> = SplitSearch { collect_all: true, prune: None };

fn code(s: &str) -> SectionCode {
    s.parse().unwrap()
}

fn splits(c: &SectionCode) -> Vec<Split> {
    search_splits(build_from_code(c).poset(), ALL, &Search::default()).unwrap().splits
}

fn table(c: &SectionCode) -> bool {
    known::answer(c.as_str()).unwrap()
}

fn for_each_spanning_witness(p: &Poset, mut f: impl FnMut(RetractWitness)) {
    for cand in enumerate_4crownstack_candidates(p, true) {
        RetractionProblem::new(p, p.points(), cand)
            .for_each_solution(&Search::default(), |m| {
                f(RetractWitness::new(p, p.points(), m.to_vec()).unwrap());
                ControlFlow::Continue(())
            })
            .unwrap();
    }
}

/// `(direction, k)` of every split matching some witness of `p`.
fn matching_indices(p: &Poset, w: &RetractWitness) -> BTreeSet<(Direction, usize)> {
    split_from_retraction(p, w).unwrap().iter().map(|s| (s.direction(), s.k())).collect()
}

#[test]
fn every_valid_split_builds_a_matching_retraction() {
    for c in (1..=4).flat_map(SectionCode::all_of_length) {
        let p = build_from_code(&c);
        for s in splits(&c) {
            assert_eq!(check_condition(p.poset(), &s), Ok(true), "{c}");
            let r = build_retraction(p.poset(), &s).unwrap();
            r.validate(p.poset()).unwrap();
            assert!(is_matching(&s, &r), "{c}");
        }
    }
}

#[test]
fn valid_splits_exist_iff_the_oracle_finds_a_retract() {
    for c in (2..=5).flat_map(SectionCode::all_of_length).filter(|c| c.is_full_section()) {
        let p = build_from_code(&c);
        let yes = has_4crownstack_retract(p.poset(), CandidateMode::Spanning, &Search::default()).unwrap().is_some();
        let one = search_splits(p.poset(), SplitSearch::default(), &Search::default()).unwrap();
        assert_eq!(!one.splits.is_empty(), yes, "{c}");
    }
}

#[test]
fn every_spanning_witness_has_a_matching_split() {
    for c in (2..=4).flat_map(SectionCode::all_of_length).filter(|c| c.is_full_section()) {
        let g = build_from_code(&c);
        let p = g.poset();
        for_each_spanning_witness(p, |w| {
            let found = split_from_retraction(p, &w).unwrap();
            assert!(!found.is_empty(), "{c}");
            for s in &found {
                assert!(is_matching(s, &w), "{c}");
                assert_eq!(check_condition(p, s), Ok(true), "{c}");
            }
        });
    }
    for c in SectionCode::all_of_length(5).into_iter().filter(|c| c.is_full_section()) {
        let g = build_from_code(&c);
        let p = g.poset();
        if let Some(w) = has_4crownstack_retract(p, CandidateMode::Spanning, &Search::default()).unwrap() {
            let found = split_from_retraction(p, &w).unwrap();
            assert!(!found.is_empty() && found.iter().all(|s| is_matching(s, &w)), "{c}");
        }
    }
}

#[test]
fn witnesses_of_the_height_three_sections_split_at_the_published_levels() {
    let g = build_from_code(&code("111"));
    let mut seen = false;
    for_each_spanning_witness(g.poset(), |w| {
        let ix = matching_indices(g.poset(), &w);
        seen |= ix.contains(&(Direction::Down, 0)) && ix.contains(&(Direction::Up, 3));
    });
    assert!(seen);

    let g = build_from_code(&code("101"));
    let mut seen = false;
    for_each_spanning_witness(g.poset(), |w| {
        let ix = matching_indices(g.poset(), &w);
        let down: BTreeSet<usize> = ix.iter().filter(|i| i.0 == Direction::Down).map(|i| i.1).collect();
        let up: BTreeSet<usize> = ix.iter().filter(|i| i.0 == Direction::Up).map(|i| i.1).collect();
        seen |= down == BTreeSet::from([0, 2]) && up == BTreeSet::from([1, 3]);
    });
    assert!(seen);
}

#[test]
fn removing_at_most_one_bottom_point_of_011_leaves_no_retract() {
    let g = build_from_code(&code("011"));
    let p = g.poset();
    let mut checked = 0;
    for bits in 1..(1u64 << g.len()) - 1 {
        let d = PointSet::from_bits(bits);
        if !p.is_down_set_within(d, p.points()) || d.intersection(g.level(0)).len() > 1 {
            continue;
        }
        let w = has_class_retract_minus(p, d, Side::Down, &Search::default()).unwrap();
        assert!(w.is_none(), "{:?}", d.to_vec());
        checked += 1;
    }
    assert_eq!(checked, 6);
}

#[test]
fn criteria_keep_a_valid_split_for_every_code() {
    for c in (3..=5).flat_map(SectionCode::all_of_length).filter(|c| c.is_full_section()) {
        let all = splits(&c);
        let survivors = all.iter().filter(|s| prune_reason(&c, &s.context(c.len()), &table, CriteriaMode::Sound).is_none());
        assert_eq!(survivors.count() == 0, all.is_empty(), "{c}");
    }
}

#[test]
fn only_criterion_3_ever_discards_a_valid_split() {
    let mut discarded = BTreeSet::new();
    for c in (3..=5).flat_map(SectionCode::all_of_length).filter(|c| c.is_full_section()) {
        for s in splits(&c) {
            let ctx = s.context(c.len());
            if let Some(which) = prune_reason(&c, &ctx, &table, CriteriaMode::Sound) {
                discarded.insert((which, c.to_string(), ctx.direction, ctx.k, ctx.removed));
            }
        }
    }
    let expected = BTreeSet::from([
        (3, "10111".to_string(), Direction::Down, 3, 2),
        (3, "11101".to_string(), Direction::Up, 3, 2),
    ]);
    assert_eq!(discarded, expected);
}

#[test]
fn criterion_3_counterexample_on_10111() {
    let g = build_from_code(&code("10111"));
    let p = g.poset();
    let s = splits(&code("10111"))
        .into_iter()
        .find(|s| s.direction() == Direction::Down && s.k() == 3 && s.removed().len() == 2)
        .unwrap();
    // Both top points of T have singleton preimages; the third point of
    // P(3) goes below the top of T.
    let t = s.t();
    assert_eq!(t.top(p).iter().map(|v| t.preimage(v).len()).collect::<Vec<_>>(), [1, 1]);
    assert!(g.level(3).iter().any(|x| !t.top(p).contains(t.apply(x))));
    let r = build_retraction(p, &s).unwrap();
    assert_eq!(r.class().name(), "4-crown-stack");
    assert!(is_matching(&s, &r));
}

#[test]
fn crown_hypotheses_of_criteria_3_and_5_are_needed_on_1001() {
    let c = code("1001");
    let all = splits(&c);
    let reasons = |mode| -> BTreeSet<usize> {
        all.iter().filter_map(|s| prune_reason(&c, &s.context(4), &table, mode)).collect()
    };
    assert!(reasons(CriteriaMode::Sound).is_empty());
    let unguarded = reasons(CriteriaMode::Unguarded);
    assert!(unguarded.contains(&3) && unguarded.contains(&5), "{unguarded:?}");
    assert!(all.iter().any(|s| s.direction() == Direction::Down && s.k() == 2));
}

#[test]
fn published_split_shapes_exist() {
    let has = |c: &str, dir: Direction, k: usize, removed: usize| {
        splits(&code(c)).iter().any(|s| s.direction() == dir && s.k() == k && s.removed().len() == removed)
    };
    assert!(has("1001", Direction::Down, 2, 2) || has("1001", Direction::Down, 2, 1));
    // s on P(0 → 2) and t on P(3 → 5): an up-split at level 3.
    assert!(has("10101", Direction::Up, 3, 0));
    assert!(has("10001", Direction::Up, 3, 0));
    assert!(has("10011", Direction::Down, 4, 0));
    assert!(has("101001", Direction::Down, 2, 1));
    assert!(has("100001", Direction::Down, 2, 1));
}
