//! Marked groups with a decidable word problem.
//!
//! A [`Group`] fixes a rank `d` and interprets letter `i` as its `i`-th
//! generator, so it is a marking `F_d -> G`. Elements are carried in a compact
//! per-kind representation ([`Element`]); [`Group::canonical_word`] renders
//! them as words.
//!
//! Generators of `product(G,H)` and `freeprod(G,H)` are those of `G` followed
//! by those of `H`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::dehn::DehnPresentation;
use crate::error::{Error, Result};
use crate::finite::FiniteTable;
use crate::word::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Group {
    Free { rank: usize },
    /// Finitely generated abelian group `Z/m_1 x ... x Z/m_k`; `m_i = 0` is `Z`.
    Abelian { torsion: Vec<u64> },
    Finite(Arc<FiniteTable>),
    Product(Vec<Group>),
    FreeProduct(Vec<Group>),
    OneRelator(Arc<DehnPresentation>),
}

/// A group element in the normal form of its group.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Free(Word),
    Abelian(Vec<i64>),
    Finite(u32),
    Product(Vec<Element>),
    /// Alternating syllables `(factor, nontrivial element of that factor)`.
    FreeProduct(Vec<(usize, Element)>),
    /// Dehn-reduced word; not unique per element.
    Relator(Word),
}

impl Group {
    pub fn free(rank: usize) -> Self {
        Group::Free { rank }
    }

    pub fn cyclic(order: u64) -> Self {
        Group::Abelian {
            torsion: vec![order],
        }
    }

    pub fn integers() -> Self {
        Group::cyclic(0)
    }

    pub fn abelian(torsion: Vec<u64>) -> Self {
        Group::Abelian { torsion }
    }

    pub fn finite(table: FiniteTable) -> Self {
        Group::Finite(Arc::new(table))
    }

    pub fn one_relator(rank: usize, relator: &Word) -> Result<Self> {
        Ok(Group::OneRelator(Arc::new(DehnPresentation::new(rank, relator)?)))
    }

    pub fn rank(&self) -> usize {
        match self {
            Group::Free { rank } => *rank,
            Group::Abelian { torsion } => torsion.len(),
            Group::Finite(t) => t.rank(),
            Group::Product(parts) | Group::FreeProduct(parts) => parts.iter().map(Group::rank).sum(),
            Group::OneRelator(p) => p.rank(),
        }
    }

    /// False only for the Dehn backend, whose reduced words are not unique.
    pub fn has_canonical_forms(&self) -> bool {
        match self {
            Group::OneRelator(_) => false,
            Group::Product(parts) | Group::FreeProduct(parts) => {
                parts.iter().all(Group::has_canonical_forms)
            }
            _ => true,
        }
    }

    /// Order of the group when it is known to be finite.
    pub fn finite_order(&self) -> Option<u128> {
        match self {
            Group::Free { rank } => (*rank == 0).then_some(1),
            Group::Abelian { torsion } => torsion
                .iter()
                .try_fold(1u128, |acc, &m| (m > 0).then(|| acc * m as u128)),
            Group::Finite(t) => Some(t.order() as u128),
            Group::Product(parts) => parts
                .iter()
                .try_fold(1u128, |acc, g| g.finite_order().map(|o| acc * o)),
            Group::FreeProduct(parts) => {
                let nontrivial = parts.iter().filter(|g| g.finite_order() != Some(1)).count();
                if nontrivial <= 1 {
                    parts
                        .iter()
                        .try_fold(1u128, |acc, g| g.finite_order().map(|o| acc * o))
                } else {
                    None
                }
            }
            Group::OneRelator(_) => None,
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            Group::Free { .. } => Element::Free(Word::empty()),
            Group::Abelian { torsion } => Element::Abelian(vec![0; torsion.len()]),
            Group::Finite(_) => Element::Finite(0),
            Group::Product(parts) => Element::Product(parts.iter().map(Group::identity).collect()),
            Group::FreeProduct(_) => Element::FreeProduct(Vec::new()),
            Group::OneRelator(_) => Element::Relator(Word::empty()),
        }
    }

    fn check_letter(&self, l: Letter) -> Result<()> {
        if l.generator() >= self.rank() {
            return Err(Error::MalformedLetter {
                letter: l.to_string(),
                rank: self.rank(),
            });
        }
        Ok(())
    }

    /// Which factor of a product owns generator `g`, and its local index.
    fn locate(parts: &[Group], g: usize) -> (usize, usize) {
        let mut offset = 0;
        for (i, p) in parts.iter().enumerate() {
            let r = p.rank();
            if g < offset + r {
                return (i, g - offset);
            }
            offset += r;
        }
        panic!("generator {g} outside product rank {offset}");
    }

    fn offsets(parts: &[Group]) -> Vec<usize> {
        let mut out = Vec::with_capacity(parts.len());
        let mut offset = 0;
        for p in parts {
            out.push(offset);
            offset += p.rank();
        }
        out
    }

    /// `x * l` for a letter of valid rank.
    pub fn mul_letter(&self, x: &Element, l: Letter) -> Element {
        let mut out = x.clone();
        self.mul_letter_in_place(&mut out, l);
        out
    }

    fn mul_letter_in_place(&self, x: &mut Element, l: Letter) {
        match (self, x) {
            (Group::Free { .. }, Element::Free(w)) => w.push_reduced(l),
            (Group::Abelian { torsion }, Element::Abelian(v)) => {
                let g = l.generator();
                let m = torsion[g];
                v[g] += l.sign();
                if m > 0 {
                    v[g] = v[g].rem_euclid(m as i64);
                }
            }
            (Group::Finite(t), Element::Finite(a)) => *a = t.mul(*a, t.letter(l)),
            (Group::Product(parts), Element::Product(v)) => {
                let (i, local) = Group::locate(parts, l.generator());
                parts[i].mul_letter_in_place(&mut v[i], Letter::new(local, l.is_inverse()));
            }
            (Group::FreeProduct(parts), Element::FreeProduct(syllables)) => {
                let (i, local) = Group::locate(parts, l.generator());
                let local = Letter::new(local, l.is_inverse());
                match syllables.last_mut() {
                    Some((f, e)) if *f == i => {
                        parts[i].mul_letter_in_place(e, local);
                        if parts[i].is_identity(e) {
                            syllables.pop();
                        }
                    }
                    _ => {
                        let e = parts[i].mul_letter(&parts[i].identity(), local);
                        if !parts[i].is_identity(&e) {
                            syllables.push((i, e));
                        }
                    }
                }
            }
            (Group::OneRelator(p), Element::Relator(w)) => {
                w.push(l);
                *w = p.reduce(w);
            }
            (g, x) => panic!("element {x:?} does not belong to {g}"),
        }
    }

    /// Evaluates a word; errors on letters beyond the rank.
    pub fn eval(&self, word: &Word) -> Result<Element> {
        for &l in word.letters() {
            self.check_letter(l)?;
        }
        if let Group::OneRelator(p) = self {
            return Ok(Element::Relator(p.reduce(word)));
        }
        let mut x = self.identity();
        for &l in word.letters() {
            self.mul_letter_in_place(&mut x, l);
        }
        Ok(x)
    }

    pub fn generator(&self, l: Letter) -> Result<Element> {
        self.check_letter(l)?;
        Ok(self.mul_letter(&self.identity(), l))
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        match (self, x, y) {
            (Group::Free { .. }, Element::Free(a), Element::Free(b)) => Element::Free(a.free_mul(b)),
            (Group::Abelian { torsion }, Element::Abelian(a), Element::Abelian(b)) => Element::Abelian(
                a.iter()
                    .zip(b)
                    .zip(torsion)
                    .map(|((&p, &q), &m)| if m > 0 { (p + q).rem_euclid(m as i64) } else { p + q })
                    .collect(),
            ),
            (Group::Finite(t), Element::Finite(a), Element::Finite(b)) => Element::Finite(t.mul(*a, *b)),
            (Group::Product(parts), Element::Product(a), Element::Product(b)) => Element::Product(
                parts
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(g, (p, q))| g.mul(p, q))
                    .collect(),
            ),
            (Group::FreeProduct(parts), Element::FreeProduct(a), Element::FreeProduct(b)) => {
                let mut out = a.clone();
                let mut rest = b.iter();
                for (f, e) in rest.by_ref() {
                    match out.last_mut() {
                        Some((g, last)) if g == f => {
                            let merged = parts[*f].mul(last, e);
                            if parts[*f].is_identity(&merged) {
                                out.pop();
                            } else {
                                *last = merged;
                                break;
                            }
                        }
                        _ => {
                            out.push((*f, e.clone()));
                            break;
                        }
                    }
                }
                out.extend(rest.cloned());
                Element::FreeProduct(out)
            }
            (Group::OneRelator(p), Element::Relator(a), Element::Relator(b)) => {
                Element::Relator(p.reduce(&a.concat(b)))
            }
            _ => panic!("elements {x:?}, {y:?} do not belong to {self}"),
        }
    }

    pub fn inverse(&self, x: &Element) -> Element {
        match (self, x) {
            (Group::Free { .. }, Element::Free(w)) => Element::Free(w.inverse()),
            (Group::Abelian { torsion }, Element::Abelian(v)) => Element::Abelian(
                v.iter()
                    .zip(torsion)
                    .map(|(&p, &m)| if m > 0 { (-p).rem_euclid(m as i64) } else { -p })
                    .collect(),
            ),
            (Group::Finite(t), Element::Finite(a)) => Element::Finite(t.inverse(*a)),
            (Group::Product(parts), Element::Product(v)) => {
                Element::Product(parts.iter().zip(v).map(|(g, e)| g.inverse(e)).collect())
            }
            (Group::FreeProduct(parts), Element::FreeProduct(s)) => Element::FreeProduct(
                s.iter().rev().map(|(f, e)| (*f, parts[*f].inverse(e))).collect(),
            ),
            (Group::OneRelator(p), Element::Relator(w)) => Element::Relator(p.reduce(&w.inverse())),
            _ => panic!("element {x:?} does not belong to {self}"),
        }
    }

    pub fn is_identity(&self, x: &Element) -> bool {
        match x {
            Element::Free(w) | Element::Relator(w) => w.is_empty(),
            Element::Abelian(v) => v.iter().all(|&e| e == 0),
            Element::Finite(a) => *a == 0,
            Element::Product(v) => match self {
                Group::Product(parts) => parts.iter().zip(v).all(|(g, e)| g.is_identity(e)),
                _ => false,
            },
            Element::FreeProduct(s) => s.is_empty(),
        }
    }

    /// Group equality, which differs from `==` on elements only for the
    /// Dehn backend.
    pub fn equal(&self, x: &Element, y: &Element) -> bool {
        if self.has_canonical_forms() {
            return x == y;
        }
        self.is_identity(&self.mul(x, &self.inverse(y)))
    }

    /// Normal-form word of an element.
    pub fn canonical_word(&self, x: &Element) -> Word {
        match (self, x) {
            (Group::Free { .. }, Element::Free(w)) | (Group::OneRelator(_), Element::Relator(w)) => w.clone(),
            (Group::Abelian { .. }, Element::Abelian(v)) => {
                let mut letters = Vec::new();
                for (g, &e) in v.iter().enumerate() {
                    letters.extend(Word::power(Letter::gen(g), e).into_letters());
                }
                Word::from_letters(letters)
            }
            (Group::Finite(t), Element::Finite(a)) => t.canonical_word(*a).clone(),
            (Group::Product(parts), Element::Product(v)) => {
                let offsets = Group::offsets(parts);
                let mut letters = Vec::new();
                for ((g, e), off) in parts.iter().zip(v).zip(offsets) {
                    letters.extend(shift(&g.canonical_word(e), off).into_letters());
                }
                Word::from_letters(letters)
            }
            (Group::FreeProduct(parts), Element::FreeProduct(s)) => {
                let offsets = Group::offsets(parts);
                let mut letters = Vec::new();
                for (f, e) in s {
                    letters.extend(shift(&parts[*f].canonical_word(e), offsets[*f]).into_letters());
                }
                Word::from_letters(letters)
            }
            _ => panic!("element {x:?} does not belong to {self}"),
        }
    }

    /// Canonical word of the product; the `multiply` operation on words.
    pub fn multiply(&self, x: &Word, y: &Word) -> Result<Word> {
        let p = self.mul(&self.eval(x)?, &self.eval(y)?);
        Ok(self.canonical_word(&p))
    }

    /// Canonical word of `word`.
    pub fn normal_form(&self, word: &Word) -> Result<Word> {
        Ok(self.canonical_word(&self.eval(word)?))
    }

    /// Shortlex comparison of canonical words.
    pub fn shortlex_cmp(&self, x: &Element, y: &Element) -> Ordering {
        match (x, y) {
            (Element::Free(a), Element::Free(b)) => a.cmp(b),
            _ => self.canonical_word(x).cmp(&self.canonical_word(y)),
        }
    }

    /// Word length with respect to the standard symmetric generating set,
    /// when it has a closed form. `None` for the Dehn backend.
    pub fn standard_length(&self, x: &Element) -> Option<usize> {
        match (self, x) {
            (Group::Free { .. }, Element::Free(w)) => Some(w.len()),
            (Group::Abelian { torsion }, Element::Abelian(v)) => Some(
                v.iter()
                    .zip(torsion)
                    .map(|(&e, &m)| {
                        if m > 0 {
                            e.min(m as i64 - e) as usize
                        } else {
                            e.unsigned_abs() as usize
                        }
                    })
                    .sum(),
            ),
            (Group::Finite(t), Element::Finite(a)) => Some(t.canonical_word(*a).len()),
            (Group::Product(parts), Element::Product(v)) => parts
                .iter()
                .zip(v)
                .map(|(g, e)| g.standard_length(e))
                .sum(),
            (Group::FreeProduct(parts), Element::FreeProduct(s)) => {
                s.iter().map(|(f, e)| parts[*f].standard_length(e)).sum()
            }
            _ => None,
        }
    }

    /// The standard unital symmetric generating set `{e} ∪ S ∪ S^{-1}` as
    /// words, deduplicated as group elements and sorted shortlex.
    pub fn standard_generating_set(&self) -> Vec<Word> {
        let mut elems = vec![self.identity()];
        for l in Letter::alphabet(self.rank()) {
            let g = self.mul_letter(&self.identity(), l);
            if !elems.iter().any(|e| self.equal(e, &g)) {
                elems.push(g);
            }
        }
        let mut words: Vec<Word> = elems.iter().map(|e| self.canonical_word(e)).collect();
        words.sort();
        words
    }

    /// Abelianization image, used to bucket elements of the Dehn backend.
    pub(crate) fn exponent_sums(&self, x: &Element) -> Vec<i64> {
        let w = self.canonical_word(x);
        let mut v = vec![0i64; self.rank()];
        for l in w.letters() {
            v[l.generator()] += l.sign();
        }
        v
    }
}

fn shift(w: &Word, offset: usize) -> Word {
    w.letters()
        .iter()
        .map(|l| Letter::new(l.generator() + offset, l.is_inverse()))
        .collect()
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Free { rank } => write!(f, "free:{rank}"),
            Group::Abelian { torsion } if torsion.len() == 1 => write!(f, "cyclic:{}", torsion[0]),
            Group::Abelian { torsion } => {
                let parts: Vec<String> = torsion.iter().map(|m| m.to_string()).collect();
                write!(f, "abelian:[{}]", parts.join(","))
            }
            Group::Finite(t) => write!(f, "finite:<order {}>", t.order()),
            Group::Product(parts) | Group::FreeProduct(parts) => {
                let name = if matches!(self, Group::Product(_)) { "product" } else { "freeprod" };
                let inner: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{name}({})", inner.join(","))
            }
            Group::OneRelator(p) => write!(f, "onerel:free:{}:{}", p.rank(), p.relator()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    #[test]
    fn multiply_examples() {
        let f2 = Group::free(2);
        assert_eq!(f2.multiply(&w("ab"), &w("Ba")).unwrap(), w("aa"));
        let z5 = Group::cyclic(5);
        assert_eq!(z5.multiply(&w("aaa"), &w("aaa")).unwrap(), w("a"));
        assert_eq!(z5.normal_form(&w("A")).unwrap(), w("aaaa"));
        let s3 = Group::finite(FiniteTable::symmetric(3).unwrap());
        for x in 0..6u32 {
            let e = Element::Finite(x);
            assert!(s3.is_identity(&s3.mul(&e, &s3.inverse(&e))));
        }
    }

    #[test]
    fn malformed_letters_are_rejected() {
        let f2 = Group::free(2);
        assert!(matches!(f2.eval(&w("c")), Err(Error::MalformedLetter { .. })));
    }

    #[test]
    fn product_normal_form_is_componentwise() {
        let g = Group::Product(vec![Group::free(2), Group::integers()]);
        assert_eq!(g.normal_form(&w("acbC")).unwrap(), w("ab"));
        assert_eq!(g.normal_form(&w("caA")).unwrap(), w("c"));
        assert_eq!(g.rank(), 3);
    }

    #[test]
    fn free_product_syllables() {
        let g = Group::FreeProduct(vec![Group::cyclic(2), Group::cyclic(3)]);
        assert_eq!(g.normal_form(&w("aa")).unwrap(), Word::empty());
        assert_eq!(g.normal_form(&w("abBa")).unwrap(), Word::empty());
        assert_eq!(g.normal_form(&w("bB")).unwrap(), Word::empty());
        assert_eq!(g.normal_form(&w("Bab")).unwrap(), w("bbab"));
        let x = g.eval(&w("abab")).unwrap();
        let y = g.eval(&w("BaBa")).unwrap();
        assert!(g.is_identity(&g.mul(&x, &y)));
        assert_eq!(g.mul(&x, &g.inverse(&x)), g.identity());
    }

    #[test]
    fn dehn_backend_equality() {
        let g = Group::one_relator(4, &w("abABcdCD")).unwrap();
        assert!(!g.has_canonical_forms());
        let x = g.eval(&w("abAB")).unwrap();
        let y = g.eval(&w("dcDC")).unwrap();
        assert!(g.equal(&x, &y));
        assert_ne!(x, y);
    }

    #[test]
    fn standard_lengths() {
        let z12 = Group::cyclic(12);
        assert_eq!(z12.standard_length(&z12.eval(&w("aaaaaaaaaaa")).unwrap()), Some(1));
        let g = Group::Product(vec![Group::free(2), Group::integers()]);
        assert_eq!(g.standard_length(&g.eval(&w("abCC")).unwrap()), Some(4));
        assert_eq!(Group::cyclic(2).standard_generating_set(), vec![w("e"), w("a")]);
    }

    #[test]
    fn finite_orders() {
        assert_eq!(Group::cyclic(12).finite_order(), Some(12));
        assert_eq!(Group::integers().finite_order(), None);
        assert_eq!(Group::Product(vec![Group::cyclic(2), Group::cyclic(3)]).finite_order(), Some(6));
        assert_eq!(Group::FreeProduct(vec![Group::cyclic(2), Group::cyclic(2)]).finite_order(), None);
    }
}
