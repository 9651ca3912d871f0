use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use redgrp_core::algebra::AlgebraElement;
use redgrp_core::ball::DEFAULT_BALL_CAP;
use redgrp_core::compression::{increasing_window_profile, norm_oracle};
use redgrp_core::marked::{limit_of_means, marked_distance, relation_ball, LimitOfMeans, Marking};
use redgrp_core::means::{certify_mean, extension_certificate, FolnerMean, Measure, Mean, SectionData, TreeMean};
use redgrp_core::{Group, Letter, Word};

fn w(s: &str) -> Word {
    Word::parse(s).unwrap()
}

fn words(list: &[&str]) -> Vec<Word> {
    list.iter().map(|s| w(s)).collect()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn reduced_word(rank: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..rank, any::<bool>()), 0..12).prop_map(|letters| {
        let mut out = Word::empty();
        for (g, inv) in letters {
            out.push_reduced(Letter::new(g, inv));
        }
        out
    })
}

fn integer_measure() -> impl Strategy<Value = Measure> {
    prop::collection::vec((-6i64..=6, 1u64..=5), 1..6).prop_map(|atoms| {
        let z = Group::integers();
        let denom = atoms.iter().map(|(_, c)| c).sum();
        let weights = atoms.into_iter().map(|(k, c)| (z.eval(&Word::power(Letter::gen(0), k)).unwrap(), c));
        Measure::from_weights(weights, denom).unwrap()
    })
}

fn integer_element() -> impl Strategy<Value = AlgebraElement> {
    prop::collection::vec((-3i64..=3, -4i64..=4), 1..5).prop_map(|terms| {
        let z = Group::integers();
        let words: Vec<(Word, BigRational)> =
            terms.into_iter().map(|(k, c)| (Word::power(Letter::gen(0), k), q(c, 2))).collect();
        AlgebraElement::from_words(&z, &words).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tree_measures_are_uniform_near_identity(x in reduced_word(2), n in 1usize..12, end in 0usize..4) {
        let f2 = Group::free(2);
        let mean = TreeMean::new(&f2, n, Letter::new(end / 2, end % 2 == 1)).unwrap();
        let eta = mean.eval(&f2.eval(&x).unwrap()).unwrap();
        prop_assert_eq!(eta.support_len(), n);
        prop_assert_eq!(eta.denom(), n as u64);
        prop_assert!(eta.atoms().iter().all(|(_, c)| *c == 1));
        prop_assert!(eta.atoms().iter().all(|(y, _)| f2.canonical_word(y).len() < n));
    }

    #[test]
    fn l1_distance_is_a_metric(a in integer_measure(), b in integer_measure(), c in integer_measure()) {
        let two = q(2, 1);
        prop_assert_eq!(a.l1_distance(&b), b.l1_distance(&a));
        prop_assert!(a.l1_distance(&a).is_zero());
        prop_assert!(a.l1_distance(&b) <= two);
        prop_assert!(a.l1_distance(&c) <= a.l1_distance(&b) + b.l1_distance(&c));
        let aff = a.affinity(&b);
        prop_assert!(aff.value() <= 1.0 + 1e-12);
        if let Some(exact) = aff.exact {
            prop_assert_eq!(exact.is_one(), a == b);
        }
    }

    #[test]
    fn translation_preserves_distance(a in integer_measure(), b in integer_measure(), k in -5i64..=5) {
        let z = Group::integers();
        let s = z.eval(&Word::power(Letter::gen(0), k)).unwrap();
        prop_assert_eq!(a.translate(&z, &s).l1_distance(&b.translate(&z, &s)), a.l1_distance(&b));
    }

    #[test]
    fn compression_profile_is_monotone_and_bounded(f in integer_element()) {
        let z = Group::integers();
        let radii: Vec<usize> = (1..=8).collect();
        let profile = increasing_window_profile(&f, &z.standard_generating_set(), &radii, 1e-12, DEFAULT_BALL_CAP).unwrap();
        prop_assert!(profile.is_nondecreasing());
        let norm = norm_oracle(&f).unwrap().value;
        for row in &profile.rows {
            prop_assert!(row.norm <= norm + 1e-8);
        }
    }

    #[test]
    fn relation_balls_are_nested(order in 1u64..9, r in 1usize..10) {
        let m = Marking::new(1, &Group::cyclic(order)).unwrap();
        let small = relation_ball(&m, r, DEFAULT_BALL_CAP).unwrap();
        let large = relation_ball(&m, r + 1, DEFAULT_BALL_CAP).unwrap();
        prop_assert!(small.relators.iter().all(|x| large.contains(x)));
        prop_assert!(large.relators.iter().all(|x| x.len() > r || small.contains(x)));
    }

    #[test]
    fn marked_distance_is_an_ultrametric(a in 0u64..10, b in 0u64..10, c in 0u64..10) {
        const R: usize = 24;
        let mark = |n: u64| Marking::new(2, &Group::abelian(vec![n, 2])).unwrap();
        let agree = |x: &Marking, y: &Marking| {
            let d = marked_distance(x, y, R, DEFAULT_BALL_CAP).unwrap();
            if d.exhausted { R } else { d.agreement }
        };
        let (ma, mb, mc) = (mark(a), mark(b), mark(c));
        prop_assert_eq!(agree(&ma, &mb), agree(&mb, &ma));
        prop_assert!(agree(&ma, &mc) >= agree(&ma, &mb).min(agree(&mb, &mc)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn window_defects_shrink_with_n(n in 2usize..30) {
        let z = Group::integers();
        let f = words(&["e", "a", "A"]);
        let small = certify_mean(&FolnerMean::new(&z, &f, n).unwrap(), &f, 3, DEFAULT_BALL_CAP).unwrap();
        let large = certify_mean(&FolnerMean::new(&z, &f, n + 1).unwrap(), &f, 3, DEFAULT_BALL_CAP).unwrap();
        prop_assert!(large.defect <= small.defect);
        prop_assert_eq!(small.defect, q(4, n as i64));
    }

    #[test]
    fn tree_defect_does_not_depend_on_the_end(n in 2usize..5, end in 0usize..4) {
        let f2 = Group::free(2);
        let f = f2.standard_generating_set();
        let reference = certify_mean(&TreeMean::new(&f2, n, Letter::gen(0)).unwrap(), &f, n + 3, DEFAULT_BALL_CAP).unwrap();
        let other = TreeMean::new(&f2, n, Letter::new(end / 2, end % 2 == 1)).unwrap();
        let cert = certify_mean(&other, &f, n + 3, DEFAULT_BALL_CAP).unwrap();
        prop_assert_eq!(&cert.defect, &reference.defect);
        prop_assert_eq!(cert.defect, q(8, n as i64));
        prop_assert!(cert.stabilized && cert.radius_precondition);
        let (bound, holds) = cert.tree_bound.unwrap();
        prop_assert!(holds);
        prop_assert_eq!(bound, q(16, n as i64));
    }

    #[test]
    fn limit_defect_is_at_most_the_term_defects(width in 2usize..8, base in 20u64..40) {
        let f = words(&["e", "a", "A"]);
        let z = Marking::new(1, &Group::integers()).unwrap();
        let terms: Vec<(Marking, FolnerMean)> = [base, base + 7, base + 13]
            .iter()
            .map(|&n| (Marking::new(1, &Group::cyclic(n)).unwrap(), FolnerMean::new(&Group::cyclic(n), &f, width).unwrap()))
            .collect();
        let refs: Vec<(Marking, &dyn Mean)> = terms.iter().map(|(m, mean)| (m.clone(), mean as &dyn Mean)).collect();
        match limit_of_means(&z, &refs, &f, 4, 2, DEFAULT_BALL_CAP).unwrap() {
            LimitOfMeans::Conclusive { certificate, term_defects, defect_ok, .. } => {
                let worst = term_defects.iter().max().cloned().unwrap_or_else(BigRational::zero);
                prop_assert!(certificate.defect <= worst);
                prop_assert!(defect_ok);
            }
            LimitOfMeans::Inconclusive { point, .. } => prop_assert!(false, "unsettled at {}", point),
        }
    }

    #[test]
    fn extension_defect_is_bounded_per_generator(nq in 2usize..12, nk in 2usize..12, shift in -2i64..=2) {
        let z = Group::integers();
        let z2 = Group::abelian(vec![0, 0]);
        let section_word = w("b").concat(&Word::power(Letter::gen(0), shift));
        let sec = Arc::new(
            SectionData::new(&z2, &z, &z, words(&["e", "a"]), vec![section_word], words(&["a"]), words(&["a", "e"])).unwrap(),
        );
        let quotient: Arc<dyn Mean> = Arc::new(FolnerMean::new(&z, &[], nq).unwrap());
        let kernel: Arc<dyn Mean> = Arc::new(FolnerMean::new(&z, &[], nk).unwrap());
        let f = z2.standard_generating_set();
        let report = extension_certificate(quotient, kernel, sec, &f, 2, 2, 3, DEFAULT_BALL_CAP).unwrap();
        let worst = report.combined.per_generator.iter().max().unwrap();
        prop_assert!(*worst <= report.generator_bound);
        prop_assert!(report.generator_ok);
        // the summed form needs each kernel generator to come from one cocycle
        if shift == 0 {
            prop_assert!(report.combined.defect <= &report.quotient.defect + &report.kernel.defect);
            prop_assert!(report.defect_ok && report.support_ok);
        }
    }
}
