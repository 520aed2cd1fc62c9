use proptest::prelude::*;

use nicesec_core::dot::to_dot;
use nicesec_core::pointset::PointSet;
use nicesec_core::poset::{find_isomorphism, is_isomorphic, LevelPairType, Poset};
use nicesec_core::report::WitnessReport;
use nicesec_core::retraction::{enumerate_4crownstack_candidates, has_4crownstack_retract, CandidateMode, Search};
use nicesec_core::sections::{
    base_automorphisms, build_from_code, code_of, dual_code, horizon, is_nice_section, segment, SectionCode,
};

fn code_strategy(min: usize, max: usize) -> impl Strategy<Value = SectionCode> {
    proptest::collection::vec(any::<bool>(), min..=max)
        .prop_map(|bits| bits.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>().parse().unwrap())
}

fn crowned_code(min: usize, max: usize) -> impl Strategy<Value = SectionCode> {
    code_strategy(min, max).prop_map(|c| {
        let mut s: Vec<char> = c.as_str().chars().collect();
        s[0] = '1';
        *s.last_mut().unwrap() = '1';
        s.into_iter().collect::<String>().parse().unwrap()
    })
}

fn random_pairs() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..12).prop_flat_map(|n| {
        let pairs = proptest::collection::vec((0..n, 0..n), 0..20);
        let forward = pairs.prop_map(|v| v.into_iter().filter(|(a, b)| a != b).map(|(a, b)| (a.min(b), a.max(b))).collect());
        (Just(n), forward)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closures_are_strict_orders((n, pairs) in random_pairs()) {
        let p = Poset::from_pairs(n, &pairs).unwrap();
        for x in 0..n {
            prop_assert!(!p.lt(x, x));
            for y in p.above(x) {
                prop_assert!(p.above(y).is_subset(p.above(x)));
            }
        }
        for &(a, b) in &pairs {
            prop_assert!(p.lt(a, b));
        }
    }

    #[test]
    fn levels_partition_and_respect_the_order((n, pairs) in random_pairs()) {
        let p = Poset::from_pairs(n, &pairs).unwrap();
        let union = p.levels().iter().fold(PointSet::EMPTY, |acc, l| {
            assert!(acc.is_disjoint(*l));
            acc.union(*l)
        });
        prop_assert_eq!(union, p.points());
        prop_assert_eq!(p.levels().len(), p.height() + 1);
        for x in 0..n {
            let expected = p.lower_covers(x).iter().map(|y| p.level(y) + 1).max().unwrap_or(0);
            prop_assert_eq!(p.level(x), expected);
            for y in p.above(x) {
                prop_assert!(p.level(x) < p.level(y));
            }
        }
    }

    #[test]
    fn duality((n, pairs) in random_pairs()) {
        let p = Poset::from_pairs(n, &pairs).unwrap();
        let d = p.dual();
        prop_assert_eq!(&d.dual(), &p);
        prop_assert_eq!(d.minimal(), p.maximal());
        prop_assert_eq!(d.maximal(), p.minimal());
        prop_assert_eq!(d.height(), p.height());
        prop_assert_eq!(d.width(), p.width());
    }

    #[test]
    fn codes_round_trip(c in code_strategy(1, 12)) {
        let g = build_from_code(&c);
        prop_assert_eq!(code_of(&g).unwrap(), c.clone());
        prop_assert_eq!(g.height(), c.len());
        prop_assert_eq!(g.poset().width(), 3);
        prop_assert_eq!(c.to_string().parse::<SectionCode>().unwrap(), c.clone());
        if c.len() >= 2 {
            prop_assert_eq!(horizon(&g).unwrap(), 2);
        }
    }

    #[test]
    fn grid_structure(c in code_strategy(1, 8)) {
        let g = build_from_code(&c);
        let p = g.poset();
        for j in 0..3 {
            for k in 0..c.len() {
                prop_assert!(p.lt(g.point(k, j), g.point(k + 1, j)));
            }
        }
        for k in 0..=c.len() {
            prop_assert!(p.is_antichain(g.level(k)));
            prop_assert_eq!(p.levels()[k], g.level(k));
            for l in k + 1..=c.len() {
                let t = p.classify_level_pair(k, l).unwrap();
                let expected = match (l - k, c.bit(k)) {
                    (1, true) => LevelPairType::SixCrown,
                    (1, false) => LevelPairType::ThreeC,
                    _ => LevelPairType::ThreeThree,
                };
                prop_assert_eq!(t, expected);
            }
        }
    }

    #[test]
    fn reversed_code_builds_the_dual(c in code_strategy(1, 6)) {
        let g = build_from_code(&c);
        let r = build_from_code(&dual_code(&c));
        prop_assert!(find_isomorphism(r.poset(), &g.poset().dual()).is_some());
    }

    #[test]
    fn segments_are_grids_of_slices(c in code_strategy(1, 8), a in 0usize..9, b in 0usize..9) {
        let (k, l) = (a.min(b) % (c.len() + 1), a.max(b).min(c.len()));
        prop_assume!(k <= l);
        let s = segment(&build_from_code(&c), k, l).unwrap();
        let expected = build_from_code(&c.slice(k, l));
        prop_assert_eq!(s.code(), expected.code());
        prop_assert_eq!(s.poset(), expected.poset());
    }

    #[test]
    fn crowned_codes_give_nice_sections(c in crowned_code(2, 7)) {
        let g = build_from_code(&c);
        prop_assert!(g.poset().irreducible_points().is_empty());
        prop_assert!(is_nice_section(g.poset()));
    }

    #[test]
    fn base_permutations_extend_to_six_automorphisms(c in code_strategy(1, 6)) {
        let g = build_from_code(&c);
        let autos = base_automorphisms(&g).unwrap();
        let p = g.poset();
        for a in &autos {
            for x in 0..p.len() {
                for y in 0..p.len() {
                    prop_assert_eq!(p.lt(x, y), p.lt(a[x], a[y]));
                }
            }
        }
        let mut distinct = autos.clone();
        distinct.sort();
        distinct.dedup();
        prop_assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn candidates_are_crown_stacks(c in code_strategy(1, 4)) {
        let g = build_from_code(&c);
        let p = g.poset();
        for cand in enumerate_4crownstack_candidates(p, false) {
            let sub = p.induced(cand).unwrap();
            prop_assert!(sub.is_crown_stack(2));
            prop_assert!(sub.levels().iter().all(|l| l.len() == 2) && sub.height() >= 1);
        }
    }

    #[test]
    fn witnesses_survive_serialization(c in code_strategy(1, 5)) {
        let g = build_from_code(&c);
        if let Some(w) = has_4crownstack_retract(g.poset(), CandidateMode::Spanning, &Search::default()).unwrap() {
            let report = WitnessReport::new(&g, &w);
            let json = serde_json::to_string(&report).unwrap();
            let back: WitnessReport = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back.to_witness(&g).unwrap(), w.clone());
            prop_assert_eq!(to_dot(&g, Some(&w)), to_dot(&g, Some(&w)));
        }
    }
}

#[test]
fn full_sections_of_each_height_are_pairwise_non_isomorphic() {
    for n in 2..=5 {
        let grids: Vec<_> = SectionCode::all_of_length(n)
            .into_iter()
            .filter(|c| c.is_full_section())
            .map(|c| build_from_code(&c))
            .collect();
        assert_eq!(grids.len(), 1 << (n - 2));
        for (i, a) in grids.iter().enumerate() {
            for b in &grids[i + 1..] {
                assert!(!is_isomorphic(a.poset(), b.poset()), "{} {}", a.code(), b.code());
            }
        }
    }
}
