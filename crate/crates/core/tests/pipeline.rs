mod common;

use ecami_core::evolution::{
    build_successor, compose, detect_period, initial_distribution, jump_map, push_forward,
    SuccessorMap,
};
use ecami_core::info::{
    asymptotic_report, marginal, measure, mutual_information, quarter_mi, total_entropy, Region,
};
use ecami_core::necklaces::{burnside_count, canonical_bits, enumerate_representatives};
use ecami_core::rules::{
    apply_rule, mirror, negate, nonequivalent_rules, rotate_left, rule_table, RingState,
};
use proptest::prelude::*;

/// Per-state probabilities of a reduced distribution, expanded over every rotation.
fn expand(index: &ecami_core::NecklaceIndex, masses: &[f64]) -> Vec<f64> {
    let n = index.n();
    let mut full = vec![0.0; 1 << n];
    for (i, &rep) in index.representatives().iter().enumerate() {
        let per_state = masses[i] / index.orbit_size(i) as f64;
        let mut s = rep;
        for _ in 0..n {
            full[s as usize] = per_state;
            s = rotate_left(s, 1, n);
        }
    }
    full
}

#[test]
fn representatives_match_exhaustive_canonicalisation() {
    for n in 1..=16 {
        let idx = enumerate_representatives(n).unwrap();
        let mut brute: Vec<u64> = (0..1u64 << n)
            .filter(|&s| canonical_bits(s, n).0 == s)
            .collect();
        brute.sort_unstable();
        assert_eq!(idx.representatives(), &brute[..], "N={n}");
        let total: u64 = idx.orbit_sizes().iter().map(|&k| k as u64).sum();
        assert_eq!(total, 1 << n);
        for (i, &rep) in idx.representatives().iter().enumerate() {
            assert_eq!(n % idx.orbit_size(i), 0);
            for k in 1..n {
                assert!(rep <= rotate_left(rep, k, n));
            }
        }
        for s in 0..1u64 << n {
            assert!(idx.lookup(canonical_bits(s, n).0).is_some());
        }
    }
}

#[test]
fn burnside_matches_enumeration_up_to_30() {
    for n in 1..=30 {
        assert_eq!(enumerate_representatives(n).unwrap().len() as u64, burnside_count(n), "N={n}");
    }
    assert_eq!(burnside_count(28), 9_587_580);
}

#[test]
fn rules_commute_with_rotation_exhaustively() {
    for n in [5u32, 8, 12] {
        for r in [30u32, 54, 110, 184, 57] {
            let t = rule_table(r).unwrap();
            for s in 0..1u64 << n {
                let st = RingState::new(s, n).unwrap();
                for k in 0..n {
                    assert_eq!(apply_rule(t, st.rotate(k)), apply_rule(t, st).rotate(k));
                }
            }
        }
    }
}

#[test]
fn library_rule_matches_sitewise_rule() {
    for n in [3u32, 7, 10] {
        for r in 0..=255u32 {
            let t = rule_table(r).unwrap();
            for s in 0..1u64 << n {
                assert_eq!(t.apply_bits(s, n), common::apply(r as u8, s, n));
            }
        }
    }
}

#[test]
fn symmetries_are_involutions() {
    for r in 0..=255u8 {
        assert_eq!(mirror(mirror(r)), r);
        assert_eq!(negate(negate(r)), r);
    }
    let reps = nonequivalent_rules();
    assert_eq!(reps.len(), 88);
    assert!(reps.contains(&184));
    assert!(!reps.contains(&226));
}

#[test]
fn trivial_rules_become_constant_or_shift() {
    for n in [6u32, 9, 12] {
        for r in [0u8, 8, 15, 51, 170, 204] {
            let map = common::step_map(r, n);
            let late = common::power_of_two(&map, n);
            let image: std::collections::BTreeSet<u32> = late.iter().copied().collect();
            // On the attractor one step rotates every state, possibly complemented.
            for &s in &image {
                let next = map[s as usize] as u64;
                let flipped = !(s as u64) & ((1 << n) - 1);
                let ok = (0..n).any(|k| {
                    rotate_left(s as u64, k, n) == next || rotate_left(flipped, k, n) == next
                });
                assert!(ok, "rule {r} N={n} state {s:b}");
            }
        }
    }
}

#[test]
fn jump_map_equals_literal_iteration() {
    for n in 4..=10 {
        let idx = enumerate_representatives(n).unwrap();
        for r in [184u32, 110, 30, 54, 14] {
            let t = rule_table(r).unwrap();
            let jump = jump_map(t, &idx);
            assert_eq!(jump.steps(), 1 << n);
            for (i, &rep) in idx.representatives().iter().enumerate() {
                let mut s = rep;
                for _ in 0..1u64 << n {
                    s = t.apply_bits(s, n);
                }
                assert_eq!(jump.image(i), idx.index_of(s), "rule {r} N={n}");
            }
            // The image set is invariant: jump∘jump stays on the same cycles.
            let twice = compose(&jump, &jump).unwrap();
            let image: std::collections::HashSet<u32> = jump.next().iter().copied().collect();
            assert!(twice.next().iter().all(|j| image.contains(j)));
        }
    }
}

#[test]
fn two_step_composition_matches_double_application() {
    for n in [8u32, 12] {
        let idx = enumerate_representatives(n).unwrap();
        let t = rule_table(110).unwrap();
        let one = build_successor(t, &idx);
        let two = compose(&one, &one).unwrap();
        assert_eq!(two.steps(), 2);
        for (i, &rep) in idx.representatives().iter().enumerate() {
            let s = t.apply_bits(t.apply_bits(rep, n), n);
            assert_eq!(two.image(i), idx.index_of(s));
        }
        let id = SuccessorMap::identity(t, &idx);
        assert_eq!(compose(&id, &two).unwrap(), two);
    }
}

#[test]
fn reduced_distribution_matches_unreduced_per_state() {
    let times_pow = |n: u32| [0u64, 1, 5, 1 << n];
    for n in [6u32, 8, 10] {
        let idx = enumerate_representatives(n).unwrap();
        for &r in &nonequivalent_rules() {
            let t = rule_table(r as u32).unwrap();
            let full_map = common::step_map(r, n);
            let one = build_successor(t, &idx);
            for q in [0.3, 0.5] {
                let d0 = initial_distribution(&idx, q).unwrap();
                let p0 = common::product_state(n, q);
                for steps in times_pow(n) {
                    let (d, p) = if steps == 1 << n {
                        (
                            push_forward(&d0, &jump_map(t, &idx)),
                            common::push(&p0, &common::power_of_two(&full_map, n)),
                        )
                    } else {
                        let mut d = d0.clone();
                        let mut p = p0.clone();
                        for _ in 0..steps {
                            d = push_forward(&d, &one);
                            p = common::push(&p, &full_map);
                        }
                        (d, p)
                    };
                    assert!((d.total_mass() - 1.0).abs() <= 1e-12);
                    let full = expand(&idx, d.orbit_mass());
                    let err = full
                        .iter()
                        .zip(&p)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    assert!(err <= 1e-12, "rule {r} N={n} q={q} t={steps}: {err:e}");
                }
            }
        }
    }
}

#[test]
fn rule_184_period_matches_cycle_structure() {
    let n = 8;
    let idx = enumerate_representatives(n).unwrap();
    let t = rule_table(184).unwrap();
    let d = push_forward(&initial_distribution(&idx, 0.5).unwrap(), &jump_map(t, &idx));
    let period = detect_period(&d, &build_successor(t, &idx), 64).unwrap();

    // Brute force: the distribution on the attractor returns after the lcm of
    // the cycle lengths of the states carrying mass, up to rotation.
    let map = common::step_map(184, n);
    let p = common::push(&common::product_state(n, 0.5), &common::power_of_two(&map, n));
    let reduce = |p: &[f64]| {
        let mut out = vec![0.0; idx.len()];
        for (s, &m) in p.iter().enumerate() {
            out[idx.index_of(s as u64)] += m;
        }
        out
    };
    let start = reduce(&p);
    let mut cur = p.clone();
    let mut brute = None;
    for k in 1..=64u32 {
        cur = common::push(&cur, &map);
        let red = reduce(&cur);
        if red.iter().zip(&start).all(|(a, b)| (a - b).abs() <= 1e-12) {
            brute = Some(k);
            break;
        }
    }
    assert_eq!(Some(period), brute);
}

#[test]
fn marginals_and_measures_match_unreduced() {
    for n in [8u32, 12] {
        let idx = enumerate_representatives(n).unwrap();
        for r in [30u32, 110, 184, 90, 14, 43] {
            let t = rule_table(r).unwrap();
            let d = push_forward(&initial_distribution(&idx, 0.3).unwrap(), &jump_map(t, &idx));
            let p = common::push(
                &common::product_state(n, 0.3),
                &common::power_of_two(&common::step_map(r as u8, n), n),
            );
            let left = marginal(&d, &idx, &[Region::left_half(n)]).unwrap();
            let sites: Vec<u32> = (0..n / 2).collect();
            let want = common::marginal(&p, n, &sites);
            for (a, b) in left.probs.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12);
            }
            let (s, ih, iq) = common::measures(&p, n);
            let m = measure(&d, &idx).unwrap();
            assert!((m.s_total - s).abs() <= 1e-10);
            assert!((m.i_half - ih.max(0.0)).abs() <= 1e-10);
            assert!((m.i_quarter.unwrap() - iq.unwrap().max(0.0)).abs() <= 1e-10);
            assert!((quarter_mi(&d, &idx).unwrap() - m.i_quarter.unwrap()).abs() <= 1e-12);
            // Whole ring as one region reproduces the total entropy.
            let whole = marginal(&d, &idx, &[Region::new(0, n)]).unwrap();
            assert!((whole.entropy().unwrap() - total_entropy(&d, &idx)).abs() <= 1e-10);
        }
    }
}

#[test]
fn half_cut_mi_is_translation_covariant() {
    let n = 12;
    let idx = enumerate_representatives(n).unwrap();
    let t = rule_table(54).unwrap();
    let d = push_forward(&initial_distribution(&idx, 0.5).unwrap(), &jump_map(t, &idx));
    let base = mutual_information(&d, &idx, Region::new(0, 6), Region::new(6, 6)).unwrap();
    let p = common::push(
        &common::product_state(n, 0.5),
        &common::power_of_two(&common::step_map(54, n), n),
    );
    for shift in 1..n {
        let a: Vec<u32> = (0..6).map(|k| (k + shift) % n).collect();
        let b: Vec<u32> = (6..12).map(|k| (k + shift) % n).collect();
        let oracle = common::mutual_information(&p, n, &a, &b);
        let reduced =
            mutual_information(&d, &idx, Region::new(shift, 6), Region::new((shift + 6) % n, 6))
                .unwrap();
        assert!((oracle - base).abs() <= 1e-10);
        assert!((reduced - base).abs() <= 1e-10);
    }
}

#[test]
fn product_ensemble_has_no_mutual_information() {
    for n in [8u32, 12] {
        let idx = enumerate_representatives(n).unwrap();
        for q in [0.1, 0.3, 0.5, 0.77] {
            let m = measure(&initial_distribution(&idx, q).unwrap(), &idx).unwrap();
            assert!(m.i_half.abs() <= 1e-12);
            assert!(m.i_quarter.unwrap().abs() <= 1e-12);
        }
    }
}

#[test]
fn report_bounds_hold_for_all_classes() {
    let n = 10;
    let idx = enumerate_representatives(n).unwrap();
    for &r in &nonequivalent_rules() {
        let rep = asymptotic_report(&idx, rule_table(r as u32).unwrap(), 0.5, 10).unwrap();
        assert!(rep.i_half >= 0.0);
        assert!(rep.i_half <= n as f64 / 2.0 + 1e-10);
        assert!(rep.s_total <= n as f64 + 1e-10);
        assert!(rep.i_quarter.is_none());
        assert!(rep.t_av_used >= 1 && rep.t_av_used <= 10);
    }
}

#[test]
fn rule_90_gives_integer_mi() {
    for n in [8u32, 10, 12, 14] {
        let idx = enumerate_representatives(n).unwrap();
        let rep = asymptotic_report(&idx, rule_table(90).unwrap(), 0.5, 10).unwrap();
        assert!((rep.i_half - rep.i_half.round()).abs() <= 1e-9, "N={n}: {}", rep.i_half);
    }
}

#[test]
fn rule_0_collapses() {
    let idx = enumerate_representatives(12).unwrap();
    let t = rule_table(0).unwrap();
    let d = push_forward(&initial_distribution(&idx, 0.4).unwrap(), &jump_map(t, &idx));
    let left = marginal(&d, &idx, &[Region::left_half(12)]).unwrap();
    assert!((left.probs[0] - 1.0).abs() < 1e-12);
    assert_eq!(quarter_mi(&d, &idx).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_conserved(rule in 0u32..256, n in 2u32..=12, q in 0.0f64..=1.0, steps in 1usize..20) {
        let idx = enumerate_representatives(n).unwrap();
        let one = build_successor(rule_table(rule).unwrap(), &idx);
        let mut d = initial_distribution(&idx, q).unwrap();
        for _ in 0..steps {
            d = push_forward(&d, &one);
        }
        prop_assert!((d.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(d.orbit_mass().iter().all(|&m| m >= 0.0));
        prop_assert!(one.next().iter().all(|&j| (j as usize) < idx.len()));
    }

    #[test]
    fn canonical_form_is_rotation_invariant(n in 1u32..=40, bits in any::<u64>(), k in 0u32..40) {
        let s = bits & ((1u64 << n) - 1);
        let (rep, shift) = canonical_bits(s, n);
        prop_assert_eq!(rotate_left(s, shift, n), rep);
        prop_assert_eq!(canonical_bits(rotate_left(s, k % n, n), n).0, rep);
    }

    #[test]
    fn mi_is_bounded(rule in 0u32..256, q in 0.05f64..0.95) {
        let n = 8;
        let idx = enumerate_representatives(n).unwrap();
        let rep = asymptotic_report(&idx, rule_table(rule).unwrap(), q, 10).unwrap();
        let d = push_forward(&initial_distribution(&idx, q).unwrap(), &jump_map(rule_table(rule).unwrap(), &idx));
        let m = measure(&d, &idx).unwrap();
        prop_assert!(m.i_half <= m.s_left.min(m.s_right) + 1e-10);
        prop_assert!(rep.i_half >= 0.0 && rep.i_quarter.unwrap() >= 0.0);
    }
}
