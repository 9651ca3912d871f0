//! Letters and words over a free generating alphabet.
//!
//! A [`Letter`] is a generator index together with a sign. Words are written
//! with `a..z` for generators and `A..Z` for their inverses; the empty word is
//! printed as `e`.
//!
//! Words order shortlex: shorter words first, ties broken letter by letter with
//! generator index first and the positive letter before its inverse.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Generator `index` with sign. Encoded as `2 * index + inverse` so that the
/// derived order is (index, sign) with the positive letter first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u32);

impl Letter {
    pub const fn new(generator: usize, inverse: bool) -> Self {
        Letter(((generator as u32) << 1) | inverse as u32)
    }

    pub const fn gen(generator: usize) -> Self {
        Letter::new(generator, false)
    }

    pub const fn inv(generator: usize) -> Self {
        Letter::new(generator, true)
    }

    pub const fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub const fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    /// +1 or -1.
    pub const fn sign(self) -> i64 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub const fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> Option<char> {
        let g = self.generator();
        if g >= 26 {
            return None;
        }
        let base = if self.is_inverse() { b'A' } else { b'a' };
        Some((base + g as u8) as char)
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Letter::gen(c as usize - 'a' as usize)),
            'A'..='Z' => Some(Letter::inv(c as usize - 'A' as usize)),
            _ => None,
        }
    }

    /// All `2 * rank` letters in shortlex order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> {
        (0..rank).flat_map(|g| [Letter::gen(g), Letter::inv(g)])
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_char() {
            Some(c) => write!(f, "{c}"),
            None if self.is_inverse() => write!(f, "x{}^-1", self.generator()),
            None => write!(f, "x{}", self.generator()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub const fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// `l^exponent`, using the inverse letter for negative exponents.
    pub fn power(l: Letter, exponent: i64) -> Self {
        let l = if exponent < 0 { l.inverse() } else { l };
        Word(vec![l; exponent.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// Appends `l` and cancels it against the last letter when they are inverse.
    pub fn push_reduced(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    /// Largest generator index plus one.
    pub fn min_rank(&self) -> usize {
        self.0.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    /// Formal concatenation (no cancellation).
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Free reduction: the unique reduced word equal to `self` in the free group.
    pub fn reduce(&self) -> Word {
        let mut out = Word(Vec::with_capacity(self.len()));
        for &l in &self.0 {
            out.push_reduced(l);
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inverse())
    }

    /// Reduced product in the free group; both inputs are assumed reduced.
    pub fn free_mul(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push_reduced(l);
        }
        out
    }

    /// Cyclic reduction: strips matching inverse letters from both ends.
    pub fn cyclically_reduce(&self) -> Word {
        let w = self.reduce();
        let mut lo = 0;
        let mut hi = w.len();
        while hi - lo >= 2 && w.0[lo] == w.0[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        Word(w.0[lo..hi].to_vec())
    }

    /// Rewrites every letter through `image` (one word per generator) and
    /// concatenates without reduction.
    pub fn substitute(&self, image: &[Word]) -> Word {
        let mut out = Vec::new();
        for l in &self.0 {
            let w = &image[l.generator()];
            if l.is_inverse() {
                out.extend(w.0.iter().rev().map(|x| x.inverse()));
            } else {
                out.extend_from_slice(&w.0);
            }
        }
        Word(out)
    }

    /// Parses `a..z`/`A..Z` letters; `e`, `1` and the empty string denote the
    /// identity. Whitespace is ignored.
    pub fn parse(text: &str) -> Result<Word> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "e" || trimmed == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for (i, c) in trimmed.chars().enumerate() {
            if c.is_whitespace() {
                continue;
            }
            let l = Letter::from_char(c)
                .ok_or_else(|| Error::parse(1, i + 1, format!("unexpected character {c:?}")))?;
            letters.push(l);
        }
        Ok(Word(letters))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// Convenience for tests and literals: panics on malformed input.
pub fn w(text: &str) -> Word {
    Word::parse(text).expect("malformed word literal")
}
