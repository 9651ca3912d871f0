//! Dehn's algorithm for one-relator presentations satisfying C'(1/6).
//!
//! The symmetrized relator set holds every cyclic permutation of the
//! cyclically reduced relator and of its inverse. A piece is a common prefix of
//! two distinct members of that set; C'(1/6) asks every piece to be shorter
//! than a sixth of the relator length. Under that condition every nonempty
//! reduced word representing the identity contains more than half of some
//! symmetrized relator, so greedy shortening decides the word problem.

use crate::error::{Error, Result};
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DehnPresentation {
    rank: usize,
    relator: Word,
    symmetrized: Vec<Word>,
    max_piece: Word,
}

impl DehnPresentation {
    pub fn new(rank: usize, relator: &Word) -> Result<Self> {
        if relator.min_rank() > rank {
            return Err(Error::MalformedLetter {
                letter: relator.to_string(),
                rank,
            });
        }
        let relator = relator.cyclically_reduce();
        if relator.is_empty() {
            return Err(Error::invalid("relator is trivial in the free group"));
        }
        let symmetrized = symmetrize(&relator);
        let max_piece = max_piece(&symmetrized);
        if 6 * max_piece.len() >= relator.len() {
            return Err(Error::SmallCancellation {
                piece: max_piece,
                relator_len: relator.len(),
            });
        }
        Ok(DehnPresentation {
            rank,
            relator,
            symmetrized,
            max_piece,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn relator(&self) -> &Word {
        &self.relator
    }

    pub fn symmetrized(&self) -> &[Word] {
        &self.symmetrized
    }

    /// A longest piece of the symmetrized relator set.
    pub fn max_piece(&self) -> &Word {
        &self.max_piece
    }

    /// Repeatedly replaces a subword that is more than half of a symmetrized
    /// relator by the inverse of the remaining part, freely reducing after
    /// each step. The result is empty exactly when `w` is trivial.
    pub fn reduce(&self, w: &Word) -> Word {
        let mut current = w.reduce();
        let n = self.relator.len();
        let half = n / 2 + 1;
        'outer: loop {
            let letters = current.letters();
            for start in 0..letters.len() {
                let window = &letters[start..];
                for r in &self.symmetrized {
                    let rl = r.letters();
                    let common = window
                        .iter()
                        .zip(rl)
                        .take_while(|(x, y)| x == y)
                        .count();
                    if common >= half {
                        // window[..common] = r[..common] and r = u v = 1, so u = v^{-1}
                        let complement = Word::from_letters(rl[common..].to_vec()).inverse();
                        let mut next = Word::from_letters(letters[..start].to_vec());
                        for &l in complement.letters() {
                            next.push_reduced(l);
                        }
                        for &l in &letters[start + common..] {
                            next.push_reduced(l);
                        }
                        current = next;
                        continue 'outer;
                    }
                }
            }
            return current;
        }
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        self.reduce(w).is_empty()
    }
}

fn symmetrize(relator: &Word) -> Vec<Word> {
    let mut out = Vec::new();
    for base in [relator.clone(), relator.inverse()] {
        let letters = base.letters();
        for i in 0..letters.len() {
            let rotated: Word = letters[i..].iter().chain(&letters[..i]).copied().collect();
            if !out.contains(&rotated) {
                out.push(rotated);
            }
        }
    }
    out.sort();
    out
}

fn max_piece(symmetrized: &[Word]) -> Word {
    let mut best = Word::empty();
    for (i, r) in symmetrized.iter().enumerate() {
        for s in &symmetrized[i + 1..] {
            let common = r
                .letters()
                .iter()
                .zip(s.letters())
                .take_while(|(x, y)| x == y)
                .count();
            if common > best.len() {
                best = Word::from_letters(r.letters()[..common].to_vec());
            }
        }
    }
    best
}
