//! Finite groups given by a multiplication table.
//!
//! Table file format (plain text, `#` starts a comment):
//!
//! ```text
//! generators: 1 2
//! 0 1 2 3 4 5
//! 1 0 ...
//! ```
//!
//! Row `i`, column `j` holds the index of `i * j`. Element `0` must be the
//! identity. The listed generators give the marking.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::word::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTable {
    order: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
    generators: Vec<u32>,
    canonical: Vec<Word>,
}

impl FiniteTable {
    /// Validates the group axioms and computes shortlex-least normal forms.
    pub fn new(rows: Vec<Vec<usize>>, generators: Vec<usize>) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::invalid("empty multiplication table"));
        }
        if generators.is_empty() {
            return Err(Error::invalid("a finite group needs at least one generator"));
        }
        let mut table = Vec::with_capacity(order * order);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(Error::invalid(format!("row {i} has {} entries, expected {order}", row.len())));
            }
            for &x in row {
                if x >= order {
                    return Err(Error::invalid(format!("entry {x} out of range in row {i}")));
                }
                table.push(x as u32);
            }
        }
        let at = |i: usize, j: usize| table[i * order + j] as usize;
        for i in 0..order {
            if at(0, i) != i || at(i, 0) != i {
                return Err(Error::invalid("element 0 is not the identity"));
            }
        }
        let mut inverse = vec![0u32; order];
        for i in 0..order {
            let inv = (0..order)
                .find(|&j| at(i, j) == 0)
                .ok_or_else(|| Error::invalid(format!("element {i} has no inverse")))?;
            if at(inv, i) != 0 {
                return Err(Error::invalid(format!("element {i} has no two-sided inverse")));
            }
            inverse[i] = inv as u32;
        }
        for a in 0..order {
            for b in 0..order {
                let ab = at(a, b);
                for c in 0..order {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(Error::invalid(format!(
                            "multiplication is not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        if let Some(&g) = generators.iter().find(|&&g| g >= order) {
            return Err(Error::invalid(format!("generator {g} out of range")));
        }
        let generators: Vec<u32> = generators.into_iter().map(|g| g as u32).collect();

        // BFS over letters in shortlex order gives shortlex-least words.
        let mut canonical: Vec<Option<Word>> = vec![None; order];
        canonical[0] = Some(Word::empty());
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let base = canonical[x].clone().expect("visited");
            for l in Letter::alphabet(generators.len()) {
                let g = generators[l.generator()] as usize;
                let g = if l.is_inverse() { inverse[g] as usize } else { g };
                let y = at(x, g);
                if canonical[y].is_none() {
                    let mut word = base.clone();
                    word.push(l);
                    canonical[y] = Some(word);
                    queue.push_back(y);
                }
            }
        }
        let canonical = canonical
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::invalid("generators do not generate the table"))?;

        Ok(FiniteTable {
            order,
            table,
            inverse,
            generators,
            canonical,
        })
    }

    /// Symmetric group on `n` points, marked by the transposition (0 1) and the
    /// cycle (0 1 ... n-1). Elements are permutations in lexicographic order.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(Error::invalid("symmetric group supported for 1 <= n <= 6"));
        }
        let perms = permutations(n);
        let index = |p: &[usize]| perms.iter().position(|q| q == p).expect("permutation");
        let rows: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| {
                        // (p * q)(i) = p(q(i))
                        let pq: Vec<usize> = q.iter().map(|&i| p[i]).collect();
                        index(&pq)
                    })
                    .collect()
            })
            .collect();
        let mut transposition: Vec<usize> = (0..n).collect();
        if n >= 2 {
            transposition.swap(0, 1);
        }
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let mut gens = vec![index(&transposition)];
        if n >= 3 {
            gens.push(index(&cycle));
        }
        FiniteTable::new(rows, gens)
    }

    /// Dihedral group of order `2n`, marked by a rotation and a reflection.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("dihedral group needs n >= 1"));
        }
        // element (k, f) with index k + n f represents r^k s^f
        let idx = |k: usize, f: usize| k % n + n * f;
        let mut rows = vec![vec![0; 2 * n]; 2 * n];
        for a in 0..2 * n {
            let (ka, fa) = (a % n, a / n);
            for b in 0..2 * n {
                let (kb, fb) = (b % n, b / n);
                // r^ka s^fa r^kb s^fb = r^(ka ± kb) s^(fa+fb)
                let k = if fa == 0 { ka + kb } else { ka + n - kb };
                rows[a][b] = idx(k, (fa + fb) % 2);
            }
        }
        FiniteTable::new(rows, vec![idx(1, 0), idx(0, 1)])
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut generators = None;
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("generators:") {
                let gens = parse_indices(rest, lineno + 1, raw)?;
                generators = Some(gens);
                continue;
            }
            rows.push(parse_indices(line, lineno + 1, raw)?);
        }
        let generators =
            generators.ok_or_else(|| Error::parse(1, 1, "missing `generators:` line"))?;
        FiniteTable::new(rows, generators)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        let _ = writeln!(out, "generators: {}", gens.join(" "));
        for row in self.table.chunks(self.order) {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.order + b as usize]
    }

    pub fn inverse(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    pub fn letter(&self, l: Letter) -> u32 {
        let g = self.generators[l.generator()];
        if l.is_inverse() {
            self.inverse(g)
        } else {
            g
        }
    }

    /// Shortlex-least word for element `a`; its length is the word metric.
    pub fn canonical_word(&self, a: u32) -> &Word {
        &self.canonical[a as usize]
    }
}

fn parse_indices(text: &str, line: usize, raw: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| {
                let column = raw.find(tok).map_or(1, |c| c + 1);
                Error::parse(line, column, format!("expected an element index, found {tok:?}"))
            })
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_three() {
        let s3 = FiniteTable::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        for a in 0..6 {
            assert_eq!(s3.mul(a, s3.inverse(a)), 0);
        }
        // nonabelian
        assert_ne!(s3.mul(s3.letter(Letter::gen(0)), s3.letter(Letter::gen(1))), s3.mul(s3.letter(Letter::gen(1)), s3.letter(Letter::gen(0))));
    }

    #[test]
    fn round_trip_text() {
        let d4 = FiniteTable::dihedral(4).unwrap();
        assert_eq!(FiniteTable::parse(&d4.to_text()).unwrap(), d4);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(FiniteTable::new(vec![vec![0, 1], vec![1, 1]], vec![1]).is_err());
        assert!(FiniteTable::new(vec![vec![0, 1], vec![1, 0]], vec![0]).is_err());
        let err = FiniteTable::parse("generators: 1\n0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 3, .. }), "{err}");
    }

    #[test]
    fn canonical_words_are_geodesic() {
        let s4 = FiniteTable::symmetric(4).unwrap();
        let lengths: Vec<usize> = (0..24).map(|a| s4.canonical_word(a).len()).collect();
        assert_eq!(lengths[0], 0);
        assert!(lengths.iter().all(|&l| l <= 6));
    }
}
