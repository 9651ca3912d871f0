//! Balls `F^r` in a marked group, enumerated breadth-first.
//!
//! Shell `k` holds the elements whose shortest expression needs exactly `k`
//! factors from `F ∪ {1}`. Each shell is sorted shortlex by canonical word, so
//! the enumeration is deterministic.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::word::Word;

pub const DEFAULT_BALL_CAP: usize = 2_000_000;

/// Environment variable that overrides [`DEFAULT_BALL_CAP`] in front ends.
pub const BALL_CAP_ENV: &str = "REDGRP_BALL_CAP";

/// The cap from [`BALL_CAP_ENV`], falling back to the default.
pub fn ball_cap_from_env() -> usize {
    std::env::var(BALL_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BALL_CAP)
}

/// Position lookup that also works when normal forms are not unique.
#[derive(Clone, Debug, Default)]
struct Registry {
    index: HashMap<Element, usize>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl Registry {
    fn find(&self, group: &Group, elements: &[Element], x: &Element) -> Option<usize> {
        if let Some(&i) = self.index.get(x) {
            return Some(i);
        }
        if group.has_canonical_forms() {
            return None;
        }
        self.buckets
            .get(&group.exponent_sums(x))?
            .iter()
            .copied()
            .find(|&i| group.equal(&elements[i], x))
    }

    fn insert(&mut self, group: &Group, x: &Element, i: usize) {
        self.index.insert(x.clone(), i);
        if !group.has_canonical_forms() {
            self.buckets.entry(group.exponent_sums(x)).or_default().push(i);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Ball {
    group: Group,
    generators: Vec<Element>,
    radius: usize,
    elements: Vec<Element>,
    shell_starts: Vec<usize>,
    registry: Registry,
}

impl Ball {
    /// All products of at most `radius` factors from `generators ∪ {1}`.
    pub fn new(group: &Group, generators: &[Word], radius: usize, cap: usize) -> Result<Ball> {
        let gens = generators
            .iter()
            .map(|w| group.eval(w))
            .collect::<Result<Vec<_>>>()?;
        Ball::from_elements(group, gens, radius, cap)
    }

    pub fn from_elements(group: &Group, generators: Vec<Element>, radius: usize, cap: usize) -> Result<Ball> {
        let mut gens: Vec<Element> = Vec::new();
        for g in generators {
            if !gens.iter().any(|h| group.equal(h, &g)) {
                gens.push(g);
            }
        }
        gens.sort_by(|a, b| group.shortlex_cmp(a, b));
        let mut ball = Ball {
            group: group.clone(),
            generators: gens,
            radius: 0,
            elements: vec![group.identity()],
            shell_starts: vec![0, 1],
            registry: Registry::default(),
        };
        ball.registry.insert(group, &ball.elements[0], 0);
        if cap == 0 {
            return Err(Error::BallOverflow { cap });
        }
        while ball.radius < radius {
            if !ball.grow(cap)? {
                break;
            }
        }
        ball.radius = radius;
        while ball.shell_starts.len() < radius + 2 {
            ball.shell_starts.push(ball.elements.len());
        }
        Ok(ball)
    }

    /// Adds the next shell; returns false once the ball stops growing.
    fn grow(&mut self, cap: usize) -> Result<bool> {
        let start = self.shell_starts[self.radius];
        let end = self.shell_starts[self.radius + 1];
        let new_start = self.elements.len();
        for i in start..end {
            for s in &self.generators {
                let y = self.group.mul(&self.elements[i], s);
                if self.registry.find(&self.group, &self.elements, &y).is_none() {
                    let pos = self.elements.len();
                    self.registry.insert(&self.group, &y, pos);
                    self.elements.push(y);
                    if self.elements.len() > cap {
                        return Err(Error::BallOverflow { cap });
                    }
                }
            }
        }
        let group = &self.group;
        self.elements[new_start..].sort_by(|a, b| group.shortlex_cmp(a, b));
        for pos in new_start..self.elements.len() {
            self.registry.index.insert(self.elements[pos].clone(), pos);
        }
        if !group.has_canonical_forms() {
            self.registry.buckets.clear();
            for (pos, x) in self.elements.iter().enumerate() {
                self.registry.buckets.entry(group.exponent_sums(x)).or_default().push(pos);
            }
        }
        self.radius += 1;
        self.shell_starts.push(self.elements.len());
        Ok(self.elements.len() > new_start)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, x: &Element) -> Option<usize> {
        self.registry.find(&self.group, &self.elements, x)
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.position(x).is_some()
    }

    /// Elements at factor distance exactly `k`.
    pub fn shell(&self, k: usize) -> &[Element] {
        if k > self.radius {
            return &[];
        }
        &self.elements[self.shell_starts[k]..self.shell_starts[k + 1]]
    }

    /// Factor distance of the element at position `i`.
    pub fn shell_of(&self, i: usize) -> usize {
        self.shell_starts.partition_point(|&s| s <= i) - 1
    }

    pub fn words(&self) -> Vec<Word> {
        self.elements.iter().map(|x| self.group.canonical_word(x)).collect()
    }

    /// The sub-ball of radius `r <= self.radius()`.
    pub fn truncate(&self, r: usize) -> Ball {
        let r = r.min(self.radius);
        let end = self.shell_starts[r + 1];
        let mut registry = Registry::default();
        let elements = self.elements[..end].to_vec();
        for (i, x) in elements.iter().enumerate() {
            registry.insert(&self.group, x, i);
        }
        Ball {
            group: self.group.clone(),
            generators: self.generators.clone(),
            radius: r,
            elements,
            shell_starts: self.shell_starts[..r + 2].to_vec(),
            registry,
        }
    }
}

/// `F ∪ F^{-1} ∪ {1}` as canonical words, deduplicated and sorted shortlex.
pub fn unital_symmetric(group: &Group, words: &[Word]) -> Result<Vec<Word>> {
    let mut elems = vec![group.identity()];
    for w in words {
        let x = group.eval(w)?;
        for y in [group.inverse(&x), x] {
            if !elems.iter().any(|e| group.equal(e, &y)) {
                elems.push(y);
            }
        }
    }
    elems.sort_by(|a, b| group.shortlex_cmp(a, b));
    Ok(elems.iter().map(|e| group.canonical_word(e)).collect())
}

/// True when `words` is closed under inverses and contains the identity.
pub fn is_unital_symmetric(group: &Group, words: &[Word]) -> Result<bool> {
    let elems = words.iter().map(|w| group.eval(w)).collect::<Result<Vec<_>>>()?;
    let has = |y: &Element| elems.iter().any(|e| group.equal(e, y));
    Ok(has(&group.identity()) && elems.iter().all(|x| has(&group.inverse(x))))
}

/// Lengths of `targets` in factors of `generators`.
///
/// Uses the closed-form word metric when `generators` is the standard
/// generating set, otherwise breadth-first search up to `limit` factors.
/// Targets farther than `limit` map to `None`.
pub fn factor_lengths(
    group: &Group,
    generators: &[Element],
    targets: &[Element],
    limit: usize,
    cap: usize,
) -> Result<Vec<Option<usize>>> {
    if is_standard_set(group, generators) {
        let direct: Option<Vec<usize>> = targets.iter().map(|t| group.standard_length(t)).collect();
        if let Some(lengths) = direct {
            return Ok(lengths.into_iter().map(|l| (l <= limit).then_some(l)).collect());
        }
    }
    let mut out = vec![None; targets.len()];
    let mut ball = Ball::from_elements(group, generators.to_vec(), 0, cap)?;
    loop {
        let mut missing = false;
        for (t, slot) in targets.iter().zip(out.iter_mut()) {
            if slot.is_none() {
                match ball.position(t) {
                    Some(i) => *slot = Some(ball.shell_of(i)),
                    None => missing = true,
                }
            }
        }
        if !missing || ball.radius() >= limit {
            return Ok(out);
        }
        if !ball.grow(cap)? {
            return Ok(out);
        }
    }
}

pub(crate) fn is_standard_set(group: &Group, generators: &[Element]) -> bool {
    let standard: Vec<Element> = group
        .standard_generating_set()
        .iter()
        .map(|w| group.eval(w).expect("standard word"))
        .collect();
    let id = group.identity();
    let covers = |a: &[Element], b: &[Element]| {
        a.iter()
            .filter(|x| !group.equal(x, &id))
            .all(|x| b.iter().any(|y| group.equal(x, y)))
    };
    covers(generators, &standard) && covers(&standard, generators)
}
