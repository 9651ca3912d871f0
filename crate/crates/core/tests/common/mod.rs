//! Oracles that share no code with the library beyond words and groups.
#![allow(dead_code)]

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use redgrp_core::{Letter, Word};

/// Top eigenvalue of the path graph on `2N+1` vertices by dense eigensolve.
pub fn path_graph_dense(n: usize) -> f64 {
    let dim = 2 * n + 1;
    let m = DMatrix::from_fn(dim, dim, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::MIN, f64::max)
}

pub fn path_graph_closed_form(n: usize) -> f64 {
    2.0 * (std::f64::consts::PI / (2 * n + 2) as f64).cos()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Closed walks of each even length `2, 4, …, 2·count` from the root of the
/// `degree`-regular tree, by dynamic programming on the distance to the root.
pub fn tree_closed_walks(degree: u64, count: usize) -> Vec<BigInt> {
    let steps = 2 * count;
    let mut dist = vec![BigInt::from(0); steps + 2];
    dist[0] = BigInt::from(1);
    let mut out = Vec::new();
    for step in 1..=steps {
        let mut next = vec![BigInt::from(0); steps + 2];
        for d in 0..=steps {
            if dist[d] == BigInt::from(0) {
                continue;
            }
            if d == 0 {
                next[1] += &dist[0] * degree;
            } else {
                next[d - 1] += &dist[d];
                next[d + 1] += &dist[d] * (degree - 1);
            }
        }
        dist = next;
        if step % 2 == 0 {
            out.push(dist[0].clone());
        }
    }
    out
}

/// `max_k |Σ_g c_g e^{2πi k g/n}|` over all characters of `Z/n`.
pub fn cyclic_dft_norm(n: u64, terms: &[(i64, f64)]) -> f64 {
    (0..n)
        .map(|k| {
            terms
                .iter()
                .map(|&(g, c)| Complex64::from_polar(c, std::f64::consts::TAU * (k as f64) * (g as f64) / n as f64))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// Every reduced word of length exactly `len` over `rank` generators, in
/// shortlex order.
pub fn reduced_words(rank: usize, len: usize) -> Vec<Word> {
    let alphabet: Vec<Letter> = Letter::alphabet(rank).collect();
    let mut level = vec![Word::empty()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &level {
            for &l in &alphabet {
                if w.last() != Some(l.inverse()) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        level = next;
    }
    level
}

pub fn reduced_words_up_to(rank: usize, len: usize) -> Vec<Word> {
    (0..=len).flat_map(|l| reduced_words(rank, l)).collect()
}

/// Reduced words of length `≤ bound` among products of up to two conjugates
/// `g r^{±1} g⁻¹` with `|g| ≤ reach` (one conjugate) or `|g| ≤ reach2` (two).
pub fn normal_closure_words(rank: usize, relator: &Word, reach: usize, reach2: usize, bound: usize) -> HashSet<Word> {
    let rels = [relator.clone(), relator.inverse()];
    let conj = |g: &Word, r: &Word| g.free_mul(r).free_mul(&g.inverse());
    let mut out = HashSet::from([Word::empty()]);
    for g in reduced_words_up_to(rank, reach) {
        for r in &rels {
            let c = conj(&g, r);
            if c.len() <= bound {
                out.insert(c);
            }
        }
    }
    let small: Vec<Word> = reduced_words_up_to(rank, reach2)
        .iter()
        .flat_map(|g| rels.iter().map(move |r| conj(g, r)))
        .collect();
    for x in &small {
        for y in &small {
            let p = x.free_mul(y);
            if p.len() <= bound {
                out.insert(p);
            }
        }
    }
    out
}

/// Reduced words of length `≤ bound` reachable from `e` by multiplying with
/// generators and their inverses, never leaving length `bound`.
pub fn subgroup_closure(generators: &[Word], bound: usize) -> HashSet<Word> {
    let steps: Vec<Word> = generators
        .iter()
        .flat_map(|g| [g.reduce(), g.inverse().reduce()])
        .collect();
    let mut seen = HashSet::from([Word::empty()]);
    let mut frontier = vec![Word::empty()];
    while let Some(w) = frontier.pop() {
        for s in &steps {
            let v = w.free_mul(s);
            if v.len() <= bound && seen.insert(v.clone()) {
                frontier.push(v);
            }
        }
    }
    seen
}
