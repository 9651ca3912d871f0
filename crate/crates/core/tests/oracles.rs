mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use redgrp_core::algebra::{moment_sequence, rational_to_f64, AlgebraElement, RadialElement};
use redgrp_core::ball::DEFAULT_BALL_CAP;
use redgrp_core::compression::{compression, dense_operator_norm, norm_oracle, operator_norm, NormMethod};
use redgrp_core::finite::FiniteTable;
use redgrp_core::marked::{marked_distance, Marking};
use redgrp_core::{Ball, Group, Letter, Word};

use common::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn generator_sum(g: &Group) -> AlgebraElement {
    let terms: Vec<(Word, BigRational)> = g
        .standard_generating_set()
        .into_iter()
        .filter(|w| !w.is_empty())
        .map(|w| (w, q(1, 1)))
        .collect();
    AlgebraElement::from_words(g, &terms).unwrap()
}

#[test]
fn path_compressions_match_dense_eigensolve() {
    let z = Group::integers();
    let f = generator_sum(&z);
    for n in 1..=15 {
        let ball = Ball::new(&z, &z.standard_generating_set(), n, DEFAULT_BALL_CAP).unwrap();
        let c = compression(&f, &ball).unwrap();
        let oracle = path_graph_dense(n);
        assert!((dense_operator_norm(&c).value - oracle).abs() < 1e-10, "n = {n}");
        assert!((operator_norm(&c, 1e-13).unwrap().value - oracle).abs() < 1e-9, "n = {n}");
    }
}

#[test]
fn integer_moments_are_central_binomials() {
    let z = Group::integers();
    let m = moment_sequence(&generator_sum(&z), 40).unwrap();
    for (i, v) in m.values.iter().enumerate() {
        let k = i as u64 + 1;
        assert_eq!(*v, BigRational::from_integer(binomial(2 * k, k)));
    }
}

#[test]
fn free_moments_count_tree_walks() {
    for rank in [2usize, 3] {
        let g = Group::free(rank);
        let walks = tree_closed_walks(2 * rank as u64, 24);
        let full = moment_sequence(&generator_sum(&g), 4).unwrap();
        for (v, expected) in full.values.iter().zip(&walks) {
            assert_eq!(*v, BigRational::from_integer(expected.clone()));
        }
        let radial = RadialElement::for_rank(rank, vec![q(0, 1), q(1, 1)]).moments(24).unwrap();
        assert_eq!(radial.values.len(), walks.len());
        for (v, expected) in radial.values.iter().zip(&walks) {
            assert_eq!(*v, BigRational::from_integer(expected.clone()));
        }
    }
}

#[test]
fn cyclic_norms_match_characters() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for order in [2u64, 5, 8, 12, 30] {
        let g = Group::cyclic(order);
        for _ in 0..10 {
            let terms: Vec<(i64, i64, i64)> = (0..4)
                .map(|_| (rng.gen_range(0..order as i64), rng.gen_range(-4..=4), rng.gen_range(1..=3)))
                .collect();
            let words: Vec<(Word, BigRational)> = terms
                .iter()
                .map(|&(e, n, d)| (Word::power(Letter::gen(0), e), q(n, d)))
                .collect();
            let f = AlgebraElement::from_words(&g, &words).unwrap();
            let dft: Vec<(i64, f64)> = terms.iter().map(|&(e, n, d)| (e, n as f64 / d as f64)).collect();
            let est = norm_oracle(&f).unwrap();
            assert!((est.value - cyclic_dft_norm(order, &dft)).abs() < 1e-10, "{}", f.to_text());
        }
    }
}

/// Left regular representation `M[x][y] = f(x y⁻¹)` of a finite group given
/// by its multiplication table, and its largest singular value.
fn regular_norm(table: &FiniteTable, terms: &[(Word, f64)]) -> f64 {
    let order = table.order();
    let eval = |w: &Word| w.letters().iter().fold(0u32, |acc, &l| table.mul(acc, table.letter(l)));
    let mut m = DMatrix::<f64>::zeros(order, order);
    for (w, c) in terms {
        let g = eval(w);
        for y in 0..order as u32 {
            m[(table.mul(g, y) as usize, y as usize)] += c;
        }
    }
    m.singular_values().max()
}

#[test]
fn finite_norms_match_regular_representation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for table in [FiniteTable::symmetric(3).unwrap(), FiniteTable::dihedral(5).unwrap(), FiniteTable::symmetric(4).unwrap()] {
        let g = Group::finite(table.clone());
        for _ in 0..8 {
            let terms: Vec<(Word, i64, i64)> = (0..4)
                .map(|_| {
                    let len = rng.gen_range(0..4);
                    let letters = (0..len).map(|_| Letter::new(rng.gen_range(0..table.rank()), rng.gen())).collect();
                    (Word::from_letters(letters), rng.gen_range(-3..=3), rng.gen_range(1..=2))
                })
                .collect();
            let words: Vec<(Word, BigRational)> = terms.iter().map(|(w, n, d)| (w.clone(), q(*n, *d))).collect();
            let f = AlgebraElement::from_words(&g, &words).unwrap();
            let floats: Vec<(Word, f64)> = terms.iter().map(|(w, n, d)| (w.clone(), *n as f64 / *d as f64)).collect();
            let est = norm_oracle(&f).unwrap();
            assert!((est.value - regular_norm(&table, &floats)).abs() < 1e-9, "{}", f.to_text());
        }
    }
}

#[test]
fn lattice_norms_match_symbol_grid() {
    const GRID: usize = 400;
    let z2 = Group::abelian(vec![0, 0]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..6 {
        let terms: Vec<(i64, i64, i64)> = (0..4)
            .map(|_| (rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-3..=3)))
            .collect();
        let words: Vec<(Word, BigRational)> = terms
            .iter()
            .map(|&(x, y, c)| (Word::power(Letter::gen(0), x).concat(&Word::power(Letter::gen(1), y)), q(c, 2)))
            .collect();
        let f = AlgebraElement::from_words(&z2, &words).unwrap();
        let symbol = |s: f64, t: f64| -> f64 {
            terms
                .iter()
                .map(|&(x, y, c)| Complex64::from_polar(c as f64 / 2.0, x as f64 * s + y as f64 * t))
                .sum::<Complex64>()
                .norm()
        };
        let h = std::f64::consts::TAU / GRID as f64;
        let mut grid_max: f64 = 0.0;
        for i in 0..GRID {
            for j in 0..GRID {
                grid_max = grid_max.max(symbol(i as f64 * h, j as f64 * h));
            }
        }
        // |symbol| is Lipschitz in the sup metric with constant Σ|c|·(|x|+|y|)
        let lipschitz: f64 = terms.iter().map(|&(x, y, c)| (c as f64 / 2.0).abs() * (x.abs() + y.abs()) as f64).sum();
        let est = norm_oracle(&f).unwrap();
        assert!(grid_max <= est.value + 1e-7, "{} below grid {}", est.value, grid_max);
        assert!(est.value <= grid_max + lipschitz * h / 2.0 + 1e-7, "{} above grid {}", est.value, grid_max);
    }
}

#[test]
fn scalar_norm_is_absolute_value() {
    for g in [Group::free(3), Group::cyclic(7), Group::integers()] {
        let f = AlgebraElement::delta(&g, g.identity(), q(-5, 3));
        let est = norm_oracle(&f).unwrap();
        assert_eq!(est.method, NormMethod::Scalar);
        assert!((est.value - 5.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn finite_moments_are_bounded_by_regular_norm() {
    let table = FiniteTable::symmetric(3).unwrap();
    let g = Group::finite(table.clone());
    let f = AlgebraElement::from_int_words(&g, &[("a", 1), ("b", 2), ("ab", -1)]).unwrap();
    let norm = regular_norm(&table, &[(Word::parse("a").unwrap(), 1.0), (Word::parse("b").unwrap(), 2.0), (Word::parse("ab").unwrap(), -1.0)]);
    let m = moment_sequence(&f, 30).unwrap();
    for r in &m.roots {
        assert!(*r <= norm + 1e-12);
    }
    // on a finite group the roots approach the norm like (1/|G|)^{1/2n}
    let last = *m.roots.last().unwrap();
    assert!(last >= norm * (1.0 / 6.0f64).powf(1.0 / 60.0) - 1e-12);
    assert!(rational_to_f64(&m.values[0]) > 0.0);
}

#[test]
fn cyclic_markings_separate_at_the_smaller_order() {
    let cap = DEFAULT_BALL_CAP;
    for (m, n) in [(3u64, 7u64), (4, 8), (6, 9), (5, 5)] {
        let a = Marking::new(1, &Group::cyclic(m)).unwrap();
        let b = Marking::new(1, &Group::cyclic(n)).unwrap();
        let d = marked_distance(&a, &b, 20, cap).unwrap();
        if m == n {
            assert!(d.exhausted);
        } else {
            // a^m is the shortest word trivial in exactly one of them
            assert_eq!(d.agreement, m.min(n) as usize - 1);
            assert_eq!(d.witness.as_ref().map(Word::len), Some(m.min(n) as usize));
        }
    }
}
