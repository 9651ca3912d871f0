//! Finitely supported elements of the group algebra with exact rational
//! coefficients, convolution, the involution, moment sequences and the
//! radial subalgebra of a free group.
//!
//! Text format: one `word,numerator/denominator` pair per line (`word,n` is
//! accepted for integers), `e` for the identity, `#` comments.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::word::Word;

pub const DEFAULT_SUPPORT_CAP: usize = 2_000_000;

/// Collects coefficients, merging keys that are equal in the group.
struct Accumulator<'a> {
    group: &'a Group,
    map: HashMap<Element, BigRational>,
    buckets: HashMap<Vec<i64>, Vec<Element>>,
}

impl<'a> Accumulator<'a> {
    fn new(group: &'a Group) -> Self {
        Accumulator {
            group,
            map: HashMap::new(),
            buckets: HashMap::new(),
        }
    }

    fn add(&mut self, x: Element, c: BigRational) {
        if self.group.has_canonical_forms() {
            *self.map.entry(x).or_insert_with(BigRational::zero) += c;
            return;
        }
        let bucket = self.buckets.entry(self.group.exponent_sums(&x)).or_default();
        let key = bucket.iter().find(|k| self.group.equal(k, &x)).cloned();
        match key {
            Some(k) => *self.map.get_mut(&k).expect("bucketed key") += c,
            None => {
                bucket.push(x.clone());
                self.map.insert(x, c);
            }
        }
    }

    fn len(&self) -> usize {
        self.map.len()
    }

    fn finish(self) -> AlgebraElement {
        AlgebraElement {
            group: self.group.clone(),
            coeffs: self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    group: Group,
    coeffs: BTreeMap<Element, BigRational>,
}

impl AlgebraElement {
    pub fn zero(group: &Group) -> Self {
        AlgebraElement {
            group: group.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    /// `c · δ_x`.
    pub fn delta(group: &Group, x: Element, c: BigRational) -> Self {
        let mut acc = Accumulator::new(group);
        acc.add(x, c);
        acc.finish()
    }

    pub fn from_terms(group: &Group, terms: impl IntoIterator<Item = (Element, BigRational)>) -> Self {
        let mut acc = Accumulator::new(group);
        for (x, c) in terms {
            acc.add(x, c);
        }
        acc.finish()
    }

    /// Evaluates every word in `group`; colliding words add up. This is the
    /// pushforward of an element of the free group through a marking.
    pub fn from_words(group: &Group, terms: &[(Word, BigRational)]) -> Result<Self> {
        let mut acc = Accumulator::new(group);
        for (w, c) in terms {
            acc.add(group.eval(w)?, c.clone());
        }
        Ok(acc.finish())
    }

    /// Integer-coefficient shorthand, mostly for tests and examples.
    pub fn from_int_words(group: &Group, terms: &[(&str, i64)]) -> Result<Self> {
        let terms: Vec<(Word, BigRational)> = terms
            .iter()
            .map(|(w, c)| Ok((Word::parse(w)?, BigRational::from_integer((*c).into()))))
            .collect::<Result<_>>()?;
        AlgebraElement::from_words(group, &terms)
    }

    pub fn parse(group: &Group, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let lineno = i + 1;
            let (word, coeff) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(lineno, 1, "expected `word,coefficient`"))?;
            let word_col = raw.find(word.trim()).unwrap_or(0) + 1;
            let w = Word::parse(word).map_err(|e| match e {
                Error::Parse { column, message, .. } => Error::parse(lineno, word_col + column - 1, message),
                other => other,
            })?;
            let coeff_col = word.len() + 2;
            let c = parse_rational(coeff.trim())
                .ok_or_else(|| Error::parse(lineno, coeff_col, format!("bad coefficient {:?}", coeff.trim())))?;
            if w.min_rank() > group.rank() {
                return Err(Error::parse(lineno, word_col, format!("word {w} exceeds rank {}", group.rank())));
            }
            terms.push((w, c));
        }
        AlgebraElement::from_words(group, &terms)
    }

    /// Lines `word,num/den` sorted shortlex by word.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (w, c) in self.word_terms() {
            let _ = writeln!(out, "{w},{}", format_rational(&c));
        }
        out
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Element, &BigRational)> {
        self.coeffs.iter()
    }

    /// Terms as canonical words, sorted shortlex.
    pub fn word_terms(&self) -> Vec<(Word, BigRational)> {
        let mut out: Vec<(Word, BigRational)> = self
            .coeffs
            .iter()
            .map(|(x, c)| (self.group.canonical_word(x), c.clone()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, x: &Element) -> BigRational {
        if let Some(c) = self.coeffs.get(x) {
            return c.clone();
        }
        if self.group.has_canonical_forms() {
            return BigRational::zero();
        }
        self.coeffs
            .iter()
            .find(|(k, _)| self.group.equal(k, x))
            .map_or_else(BigRational::zero, |(_, c)| c.clone())
    }

    pub fn coefficient_at_word(&self, w: &Word) -> Result<BigRational> {
        Ok(self.coefficient(&self.group.eval(w)?))
    }

    fn check_group(&self, other: &AlgebraElement) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(format!("{} vs {}", self.group, other.group)));
        }
        Ok(())
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_group(other)?;
        Ok(AlgebraElement::from_terms(
            &self.group,
            self.coeffs.iter().chain(&other.coeffs).map(|(x, c)| (x.clone(), c.clone())),
        ))
    }

    pub fn scale(&self, c: &BigRational) -> AlgebraElement {
        AlgebraElement::from_terms(&self.group, self.coeffs.iter().map(|(x, v)| (x.clone(), v * c)))
    }

    /// `(f ∗ g)(x) = Σ_t f(t) g(t⁻¹x)`.
    pub fn convolve(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.convolve_capped(other, DEFAULT_SUPPORT_CAP)
    }

    pub fn convolve_capped(&self, other: &AlgebraElement, cap: usize) -> Result<AlgebraElement> {
        self.check_group(other)?;
        let mut acc = Accumulator::new(&self.group);
        for (t, a) in &self.coeffs {
            for (u, b) in &other.coeffs {
                acc.add(self.group.mul(t, u), a * b);
                if acc.len() > cap {
                    return Err(Error::SupportOverflow { cap });
                }
            }
        }
        Ok(acc.finish())
    }

    /// `f*(t) = f(t⁻¹)`; coefficients are real.
    pub fn involute(&self) -> AlgebraElement {
        AlgebraElement::from_terms(
            &self.group,
            self.coeffs.iter().map(|(x, c)| (self.group.inverse(x), c.clone())),
        )
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.involute() == *self
    }

    pub fn l1_norm(&self) -> BigRational {
        self.coeffs.values().map(|c| c.abs()).fold(BigRational::zero(), |a, b| a + b)
    }

    /// Square of the ℓ2 norm, exact.
    pub fn l2_norm_squared(&self) -> BigRational {
        self.coeffs.values().map(|c| c * c).fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn l2_norm(&self) -> f64 {
        rational_to_f64(&self.l2_norm_squared()).sqrt()
    }

    /// Canonical trace `f(e)`.
    pub fn trace(&self) -> BigRational {
        self.coefficient(&self.group.identity())
    }

    /// Largest factor distance of the support from the identity, measured in
    /// the standard generating set.
    pub fn support_radius(&self) -> Option<usize> {
        self.coeffs.keys().map(|x| self.group.standard_length(x)).try_fold(0, |m, l| l.map(|l| m.max(l)))
    }
}

/// `⟨a, b⟩ = Σ_t a(t)·b(t⁻¹) = (a ∗ b)(e)`, without forming the product.
fn trace_of_product(a: &AlgebraElement, b: &AlgebraElement) -> BigRational {
    let mut sum = BigRational::zero();
    for (t, c) in a.terms() {
        let d = b.coefficient(&a.group.inverse(t));
        if !d.is_zero() {
            sum += c * d;
        }
    }
    sum
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    /// `values[n - 1] = m_{2n} = ((f*∗f)^{∗n})(e)`.
    pub values: Vec<BigRational>,
    /// `roots[n - 1] = m_{2n}^{1/2n}`.
    pub roots: Vec<f64>,
    pub requested: usize,
    /// Set when the support cap stopped the computation early.
    pub truncated: bool,
}

impl MomentSequence {
    fn from_values(values: Vec<BigRational>, requested: usize, truncated: bool) -> Self {
        let roots = values
            .iter()
            .enumerate()
            .map(|(i, m)| rational_root(m, 2 * (i as u32 + 1)))
            .collect();
        MomentSequence {
            values,
            roots,
            requested,
            truncated,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn best_root(&self) -> f64 {
        self.roots.iter().copied().fold(0.0, f64::max)
    }
}

/// `m_{2n}` for `n = 1..=count`. Uses `m_{2n} = ⟨h^{⌈n/2⌉}, h^{⌊n/2⌋}⟩` with
/// `h = f*∗f`, so only powers up to `⌈count/2⌉` are formed.
pub fn moment_sequence(f: &AlgebraElement, count: usize) -> Result<MomentSequence> {
    moment_sequence_capped(f, count, DEFAULT_SUPPORT_CAP)
}

pub fn moment_sequence_capped(f: &AlgebraElement, count: usize, cap: usize) -> Result<MomentSequence> {
    if count == 0 {
        return Err(Error::invalid("moment sequence needs N >= 1"));
    }
    let group = f.group();
    let h = f.involute().convolve_capped(f, cap)?;
    let mut powers = vec![AlgebraElement::delta(group, group.identity(), BigRational::one()), h.clone()];
    let mut values = Vec::with_capacity(count);
    for n in 1..=count {
        let hi = n.div_ceil(2);
        while powers.len() <= hi {
            match powers.last().expect("nonempty").convolve_capped(&h, cap) {
                Ok(p) => powers.push(p),
                Err(e) if e.is_cap() => return Ok(MomentSequence::from_values(values, count, true)),
                Err(e) => return Err(e),
            }
        }
        values.push(trace_of_product(&powers[hi], &powers[n / 2]));
    }
    Ok(MomentSequence::from_values(values, count, false))
}

/// `x^{1/k}` in double precision, through logarithms of the big integers so
/// that huge numerators and denominators do not overflow.
pub fn rational_root(x: &BigRational, k: u32) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let ln = ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude());
    (ln / k as f64).exp()
}

fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * rational_root(&x.abs(), 1)
}

pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(text.parse().ok()?)),
    }
}

/// `n` for integers, `n/d` otherwise.
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// An element of the radial subalgebra of `F_d`: `Σ_r c_r A_r` where `A_r`
/// is the indicator of the sphere of radius `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialElement {
    q: u64,
    coeffs: Vec<BigRational>,
}

impl RadialElement {
    /// `q = 2d - 1` for the free group of rank `d`.
    pub fn new(q: u64, coeffs: Vec<BigRational>) -> Self {
        let mut r = RadialElement { q, coeffs };
        r.trim();
        r
    }

    pub fn for_rank(rank: usize, coeffs: Vec<BigRational>) -> Self {
        RadialElement::new(2 * rank as u64 - 1, coeffs)
    }

    /// The sphere indicator `A_r`.
    pub fn sphere(q: u64, r: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); r + 1];
        coeffs[r] = BigRational::one();
        RadialElement { q, coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coefficient(&self, r: usize) -> BigRational {
        self.coeffs.get(r).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn radius(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// `|S_r|`: `1` for `r = 0`, `(q+1) q^{r-1}` otherwise.
    pub fn sphere_size(q: u64, r: usize) -> BigInt {
        if r == 0 {
            BigInt::one()
        } else {
            BigInt::from(q + 1) * num_traits::pow(BigInt::from(q), r - 1)
        }
    }

    fn add_scaled(&mut self, other: &RadialElement, c: &BigRational) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), BigRational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * c;
        }
        self.trim();
    }

    /// `A_1 · self` by `A_1 A_0 = A_1`, `A_1 A_1 = A_2 + (q+1) A_0` and
    /// `A_1 A_n = A_{n+1} + q A_{n-1}` for `n >= 2`.
    fn times_a1(&self) -> RadialElement {
        let q = BigRational::from_integer(self.q.into());
        let mut out = vec![BigRational::zero(); self.coeffs.len() + 1];
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out[n + 1] += c;
            match n {
                0 => {}
                1 => out[0] += c * (&q + BigRational::one()),
                _ => out[n - 1] += c * &q,
            }
        }
        RadialElement::new(self.q, out)
    }

    pub fn convolve(&self, other: &RadialElement) -> Result<RadialElement> {
        if self.q != other.q {
            return Err(Error::GroupMismatch(format!("radial q = {} vs {}", self.q, other.q)));
        }
        let q = BigRational::from_integer(self.q.into());
        let mut result = RadialElement::new(self.q, Vec::new());
        // A_m g from A_{m+1} g = A_1 (A_m g) - c_m A_{m-1} g
        let mut prev: Option<RadialElement> = None;
        let mut cur = other.clone();
        for (m, c) in self.coeffs.iter().enumerate() {
            if m > 0 {
                let mut next = cur.times_a1();
                if let Some(p) = &prev {
                    let back = if m == 2 { &q + BigRational::one() } else { q.clone() };
                    next.add_scaled(p, &-back);
                }
                prev = Some(std::mem::replace(&mut cur, next));
            }
            result.add_scaled(&cur, c);
        }
        Ok(result)
    }

    /// Radial elements are self-adjoint, so `f* ∗ f = f ∗ f`.
    pub fn moments(&self, count: usize) -> Result<MomentSequence> {
        if count == 0 {
            return Err(Error::invalid("moment sequence needs N >= 1"));
        }
        let h = self.convolve(self)?;
        let mut powers = vec![RadialElement::sphere(self.q, 0), h.clone()];
        let mut values = Vec::with_capacity(count);
        for n in 1..=count {
            let hi = n.div_ceil(2);
            while powers.len() <= hi {
                let p = powers.last().expect("nonempty").convolve(&h)?;
                powers.push(p);
            }
            let (a, b) = (&powers[hi], &powers[n / 2]);
            let mut sum = BigRational::zero();
            for (r, (x, y)) in a.coeffs.iter().zip(&b.coeffs).enumerate() {
                sum += x * y * BigRational::from_integer(RadialElement::sphere_size(self.q, r));
            }
            values.push(sum);
        }
        Ok(MomentSequence::from_values(values, count, false))
    }

    /// Expands into the full group algebra of `F_d`.
    pub fn to_algebra(&self, cap: usize) -> Result<AlgebraElement> {
        let rank = self.q.div_ceil(2) as usize;
        let group = Group::free(rank);
        let radius = self.radius().unwrap_or(0);
        let ball = Ball::new(&group, &group.standard_generating_set(), radius, cap)?;
        let mut terms = Vec::new();
        for (r, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                terms.extend(ball.shell(r).iter().map(|x| (x.clone(), c.clone())));
            }
        }
        Ok(AlgebraElement::from_terms(&group, terms))
    }

    /// Recognizes an element of a free group that is constant on spheres.
    pub fn from_algebra(f: &AlgebraElement) -> Option<RadialElement> {
        let Group::Free { rank } = f.group() else {
            return None;
        };
        if *rank == 0 {
            return None;
        }
        let q = 2 * *rank as u64 - 1;
        let mut coeffs: Vec<Option<BigRational>> = Vec::new();
        let mut counts: Vec<BigInt> = Vec::new();
        for (x, c) in f.terms() {
            let r = f.group().standard_length(x)?;
            if coeffs.len() <= r {
                coeffs.resize(r + 1, None);
                counts.resize(r + 1, BigInt::zero());
            }
            match &coeffs[r] {
                Some(existing) if existing != c => return None,
                _ => coeffs[r] = Some(c.clone()),
            }
            counts[r] += 1;
        }
        for (r, count) in counts.iter().enumerate() {
            if coeffs[r].is_some() && *count != RadialElement::sphere_size(q, r) {
                return None;
            }
        }
        Some(RadialElement::new(
            q,
            coeffs.into_iter().map(|c| c.unwrap_or_else(BigRational::zero)).collect(),
        ))
    }
}
