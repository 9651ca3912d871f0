//! Approximate invariant means `η: Γ → Prob Γ` and their defect certificates.
//!
//! Supports live near the identity and equivariance compares `η^{sx}` with
//! the left translate `s·η^x`, where `(s·η)(g) = η(s⁻¹g)`. The defect of `η`
//! on a finite unital symmetric set `F` is `Σ_{s∈F} sup_x ‖η^{sx} − s·η^x‖₁`,
//! computed exactly over a finite test ball.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::algebra::{format_rational, rational_to_f64, AlgebraElement};
use crate::ball::{factor_lengths, is_standard_set, is_unital_symmetric, Ball};
use crate::compression::{compression, operator_norm, ModulusEntry, ModulusTable, NormEstimate};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::word::{Letter, Word};

/// Largest support of a single Følner window.
pub const MAX_WINDOW: usize = 2_000_000;

/// A finitely supported probability measure with rational weights
/// `weight / denom`, kept in lowest terms and sorted by atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Measure {
    atoms: Vec<(Element, u64)>,
    denom: u64,
}

impl Measure {
    /// Merges repeated atoms; the weights must sum to `denom`.
    pub fn from_weights(weights: impl IntoIterator<Item = (Element, u64)>, denom: u64) -> Result<Self> {
        let mut merged: BTreeMap<Element, u64> = BTreeMap::new();
        for (x, w) in weights {
            if w > 0 {
                let slot = merged.entry(x).or_insert(0);
                *slot = slot.checked_add(w).ok_or_else(|| Error::invalid("measure weight overflow"))?;
            }
        }
        let total: u128 = merged.values().map(|&w| w as u128).sum();
        if denom == 0 || total != denom as u128 {
            return Err(Error::invalid(format!("weights sum to {total}, not to the denominator {denom}")));
        }
        let g = merged.values().fold(denom, |g, &w| g.gcd(&w));
        Ok(Measure {
            atoms: merged.into_iter().map(|(x, w)| (x, w / g)).collect(),
            denom: denom / g,
        })
    }

    pub fn uniform(atoms: impl IntoIterator<Item = Element>) -> Result<Self> {
        let atoms: Vec<Element> = atoms.into_iter().collect();
        let n = atoms.len() as u64;
        let m = Measure::from_weights(atoms.into_iter().map(|x| (x, 1)), n)?;
        if m.denom != n {
            return Err(Error::invalid("uniform measure needs distinct atoms"));
        }
        Ok(m)
    }

    pub fn point(x: Element) -> Self {
        Measure {
            atoms: vec![(x, 1)],
            denom: 1,
        }
    }

    pub fn atoms(&self) -> &[(Element, u64)] {
        &self.atoms
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn mass(&self, x: &Element) -> BigRational {
        match self.atoms.binary_search_by(|(a, _)| a.cmp(x)) {
            Ok(i) => BigRational::new(self.atoms[i].1.into(), self.denom.into()),
            Err(_) => BigRational::zero(),
        }
    }

    /// Image under a map of atoms, merging collisions.
    pub fn map(&self, mut f: impl FnMut(&Element) -> Element) -> Measure {
        Measure::from_weights(self.atoms.iter().map(|(x, w)| (f(x), *w)), self.denom)
            .expect("pushforward preserves mass")
    }

    /// `s·η`: the atom `y` moves to `s y`.
    pub fn translate(&self, group: &Group, s: &Element) -> Measure {
        self.map(|y| group.mul(s, y))
    }

    /// Exact `‖self − other‖₁`.
    pub fn l1_distance(&self, other: &Measure) -> BigRational {
        let (a, b) = (self.denom as u128, other.denom as u128);
        let mut num: u128 = 0;
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() || j < other.atoms.len() {
            let ord = match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    num += self.atoms[i].1 as u128 * b;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    num += other.atoms[j].1 as u128 * a;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    num += (self.atoms[i].1 as u128 * b).abs_diff(other.atoms[j].1 as u128 * a);
                    i += 1;
                    j += 1;
                }
            }
        }
        BigRational::new(BigInt::from(num), BigInt::from(a * b))
    }

    /// `Σ_g √(self(g)·other(g))`; exact when every product is a perfect square.
    pub fn affinity(&self, other: &Measure) -> Affinity {
        let den = self.denom as u128 * other.denom as u128;
        let mut exact_num: Option<u128> = Some(0);
        let mut approx = 0.0;
        let mut j = 0;
        for (x, w) in &self.atoms {
            while j < other.atoms.len() && other.atoms[j].0 < *x {
                j += 1;
            }
            if j < other.atoms.len() && other.atoms[j].0 == *x {
                let p = *w as u128 * other.atoms[j].1 as u128;
                approx += (p as f64).sqrt();
                let r = p.sqrt();
                exact_num = exact_num.and_then(|n| (r * r == p).then_some(n + r));
            }
        }
        let den_root = den.sqrt();
        let exact = match exact_num {
            Some(n) if den_root * den_root == den => Some(BigRational::new(n.into(), den_root.into())),
            _ => None,
        };
        Affinity {
            exact,
            approx: approx / (den as f64).sqrt(),
        }
    }

    /// Largest factor length of an atom, by the closed-form metric.
    fn standard_radius(&self, group: &Group) -> Option<usize> {
        self.atoms.iter().map(|(x, _)| group.standard_length(x)).try_fold(0, |m, l| l.map(|l| m.max(l)))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(|(x, w)| format!("{x:?}:{w}")).collect();
        write!(f, "[{}]/{}", parts.join(" "), self.denom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Affinity {
    pub exact: Option<BigRational>,
    pub approx: f64,
}

impl Affinity {
    pub fn value(&self) -> f64 {
        self.exact.as_ref().map_or(self.approx, rational_to_f64)
    }
}

pub trait Mean: Send + Sync + fmt::Debug {
    fn group(&self) -> &Group;
    fn eval(&self, x: &Element) -> Result<Measure>;
    /// The size parameter `n` (window side or tree depth).
    fn parameter(&self) -> usize;
    fn label(&self) -> String;
    fn is_tree(&self) -> bool {
        false
    }
}

/// The constant mean `x ↦ ξ`, `ξ` uniform on a Følner window: the box
/// `[0, n)` in each free coordinate of an abelian group (cut to `[0, m)` on
/// `Z/m`), the whole subgroup `⟨F⟩` in a finite group.
#[derive(Clone, Debug)]
pub struct FolnerMean {
    group: Group,
    n: usize,
    window: Measure,
}

impl FolnerMean {
    pub fn new(group: &Group, f_set: &[Word], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("window size must be positive"));
        }
        let atoms = match group {
            Group::Abelian { torsion } => {
                let sides: Vec<usize> = torsion
                    .iter()
                    .map(|&m| if m > 0 { n.min(m as usize) } else { n })
                    .collect();
                let size = sides.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s).filter(|&p| p <= MAX_WINDOW));
                if size.is_none() {
                    return Err(Error::SupportOverflow { cap: MAX_WINDOW });
                }
                let mut atoms = vec![Vec::new()];
                for side in sides {
                    atoms = atoms
                        .into_iter()
                        .flat_map(|v: Vec<i64>| {
                            (0..side as i64).map(move |i| {
                                let mut v = v.clone();
                                v.push(i);
                                v
                            })
                        })
                        .collect();
                }
                atoms.into_iter().map(Element::Abelian).collect()
            }
            Group::Free { rank: 1 } => (0..n as i64)
                .map(|i| Element::Free(Word::power(Letter::gen(0), i)))
                .collect(),
            Group::Finite(_) => {
                let order = group.finite_order().expect("finite") as usize;
                let gens: Vec<Word> = if f_set.is_empty() { group.standard_generating_set() } else { f_set.to_vec() };
                Ball::new(group, &gens, order, order + 1)?.elements().to_vec()
            }
            Group::Free { .. } | Group::FreeProduct(_) | Group::OneRelator(_) => {
                return Err(Error::NotAmenable(format!("{group} has no Følner windows here")))
            }
            Group::Product(_) => {
                return Err(Error::Unsupported(format!(
                    "Følner windows on {group}; combine factor means as an extension"
                )))
            }
        };
        Ok(FolnerMean {
            group: group.clone(),
            n,
            window: Measure::uniform(atoms)?,
        })
    }

    pub fn window(&self) -> &Measure {
        &self.window
    }
}

impl Mean for FolnerMean {
    fn group(&self) -> &Group {
        &self.group
    }

    fn eval(&self, _x: &Element) -> Result<Measure> {
        Ok(self.window.clone())
    }

    fn parameter(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        format!("folner(n={})", self.n)
    }
}

/// Geodesic means on a free group: `η^x` is uniform on the first `n`
/// prefixes of the infinite reduced word `x·g₀^∞`.
#[derive(Clone, Debug)]
pub struct TreeMean {
    group: Group,
    n: usize,
    end: Letter,
}

impl TreeMean {
    pub fn new(group: &Group, n: usize, end: Letter) -> Result<Self> {
        let Group::Free { rank } = group else {
            return Err(Error::Unsupported(format!(
                "tree means need a free group, got {group}; fold a subgroup to a free basis first"
            )));
        };
        if end.generator() >= *rank {
            return Err(Error::MalformedLetter {
                letter: end.to_string(),
                rank: *rank,
            });
        }
        if n == 0 {
            return Err(Error::invalid("tree mean depth must be positive"));
        }
        Ok(TreeMean {
            group: group.clone(),
            n,
            end,
        })
    }

    /// The measure `η^x` for a reduced word `x`.
    pub fn measure(&self, x: &Word) -> Measure {
        let mut w = x.clone();
        while w.last() == Some(self.end.inverse()) {
            w.pop();
        }
        let mut prefix = Word::empty();
        let mut atoms = Vec::with_capacity(self.n);
        let letters = w.letters();
        for k in 0..self.n {
            atoms.push(Element::Free(prefix.clone()));
            prefix.push(letters.get(k).copied().unwrap_or(self.end));
        }
        Measure::uniform(atoms).expect("prefixes are distinct")
    }

    pub fn end(&self) -> Letter {
        self.end
    }
}

impl Mean for TreeMean {
    fn group(&self) -> &Group {
        &self.group
    }

    fn eval(&self, x: &Element) -> Result<Measure> {
        match x {
            Element::Free(w) => Ok(self.measure(w)),
            other => Err(Error::GroupMismatch(format!("{other:?} is not a free-group element"))),
        }
    }

    fn parameter(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        format!("tree(n={}, end={})", self.n, self.end)
    }

    fn is_tree(&self) -> bool {
        true
    }
}

/// A mean known on finitely many points.
#[derive(Clone, Debug)]
pub struct TabulatedMean {
    group: Group,
    n: usize,
    label: String,
    table: HashMap<Element, Measure>,
}

impl TabulatedMean {
    pub fn new(group: &Group, n: usize, label: impl Into<String>, table: HashMap<Element, Measure>) -> Self {
        TabulatedMean {
            group: group.clone(),
            n,
            label: label.into(),
            table,
        }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Mean for TabulatedMean {
    fn group(&self) -> &Group {
        &self.group
    }

    fn eval(&self, x: &Element) -> Result<Measure> {
        self.table
            .get(x)
            .cloned()
            .ok_or_else(|| Error::NotTabulated(self.group.canonical_word(x)))
    }

    fn parameter(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Which mean to build for a given `F` and size `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeanFamily {
    Folner,
    Tree { end: Letter },
}

impl MeanFamily {
    pub fn build(self, group: &Group, f_set: &[Word], n: usize) -> Result<Box<dyn Mean>> {
        Ok(match self {
            MeanFamily::Folner => Box::new(FolnerMean::new(group, f_set, n)?),
            MeanFamily::Tree { end } => Box::new(TreeMean::new(group, n, end)?),
        })
    }

    /// Følner windows for amenable kinds, tree means for free groups.
    pub fn for_group(group: &Group) -> Result<Self> {
        match group {
            Group::Free { rank } if *rank >= 2 => Ok(MeanFamily::Tree { end: Letter::gen(0) }),
            Group::Abelian { .. } | Group::Finite(_) | Group::Free { .. } => Ok(MeanFamily::Folner),
            g => Err(Error::Unsupported(format!("no mean family for {g}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanCertificate {
    pub group: String,
    pub f_set: Vec<Word>,
    pub mean: String,
    pub n: usize,
    /// Least `k` with every tested `supp η^x ⊆ F^k`; `None` when some atom
    /// lies outside `⟨F⟩`.
    pub support_radius: Option<usize>,
    pub test_radius: usize,
    pub ball_size: usize,
    /// `Σ_s sup_x ‖η^{sx} − s·η^x‖₁` over the test ball.
    pub defect: BigRational,
    /// `sup_x Σ_s ‖η^{sx} − s·η^x‖₁`, never larger than `defect`.
    pub pointwise_defect: BigRational,
    /// `sup_x ‖η^{sx} − s·η^x‖₁`, in the order of `f_set`.
    pub per_generator: Vec<BigRational>,
    /// Defect restricted to each shell of the test ball.
    pub shell_defects: Vec<BigRational>,
    /// The outer two shells have equal defect.
    pub stabilized: bool,
    /// `Σ_s 4|s|/n` for tree means, and whether the defect respects it.
    pub tree_bound: Option<(BigRational, bool)>,
    /// Whether `R ≥ n + max|s| + 2`, the radius at which every translate
    /// pattern of the mean has been seen.
    pub radius_precondition: bool,
}

impl MeanCertificate {
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let words: Vec<String> = self.f_set.iter().map(Word::to_string).collect();
        let _ = writeln!(out, "group: {}", self.group);
        let _ = writeln!(out, "F: {}", words.join(" "));
        let _ = writeln!(out, "mean: {}", self.mean);
        let _ = writeln!(out, "n: {}", self.n);
        let radius = self.support_radius.map_or("outside <F>".to_string(), |k| k.to_string());
        let _ = writeln!(out, "E radius: {radius}");
        let _ = writeln!(out, "R: {}", self.test_radius);
        let _ = writeln!(out, "ball size: {}", self.ball_size);
        let _ = writeln!(out, "defect: {}", format_rational(&self.defect));
        let _ = writeln!(out, "pointwise defect: {}", format_rational(&self.pointwise_defect));
        let per: Vec<String> = self
            .f_set
            .iter()
            .zip(&self.per_generator)
            .map(|(s, d)| format!("{s}={}", format_rational(d)))
            .collect();
        let _ = writeln!(out, "per generator: {}", per.join(" "));
        let shells: Vec<String> = self.shell_defects.iter().map(format_rational).collect();
        let _ = writeln!(out, "shell defects: {}", shells.join(" "));
        let _ = writeln!(out, "stabilized: {}", self.stabilized);
        if let Some((bound, holds)) = &self.tree_bound {
            let verdict = if *holds { "holds" } else { "VIOLATED" };
            let _ = writeln!(out, "tree bound: {} ({verdict})", format_rational(bound));
        }
        let _ = writeln!(out, "radius precondition: {}", self.radius_precondition);
        out
    }
}

/// Per-point data from a sweep of the test ball.
struct PointData {
    shell: usize,
    distances: Vec<BigRational>,
    affinities: Vec<Affinity>,
    radius: Option<usize>,
}

fn evaluate_point(
    mean: &dyn Mean,
    group: &Group,
    f_elems: &[Element],
    x: &Element,
    shell: usize,
    standard: bool,
    with_affinity: bool,
) -> Result<(PointData, Option<Vec<Element>>)> {
    let eta = mean.eval(x)?;
    let mut distances = Vec::with_capacity(f_elems.len());
    let mut affinities = Vec::new();
    for s in f_elems {
        let moved = eta.translate(group, s);
        let target = mean.eval(&group.mul(s, x))?;
        distances.push(target.l1_distance(&moved));
        if with_affinity {
            affinities.push(moved.affinity(&target));
        }
    }
    let (radius, atoms) = if standard {
        (eta.standard_radius(group), None)
    } else {
        (None, Some(eta.atoms.iter().map(|(a, _)| a.clone()).collect()))
    };
    Ok((
        PointData {
            shell,
            distances,
            affinities,
            radius,
        },
        atoms,
    ))
}

struct Sweep {
    points: Vec<PointData>,
    support_radius: Option<usize>,
    ball_size: usize,
}

fn sweep(mean: &dyn Mean, f_set: &[Word], test_radius: usize, cap: usize, with_affinity: bool) -> Result<Sweep> {
    let group = mean.group();
    if !group.has_canonical_forms() {
        return Err(Error::Unsupported("means need canonical normal forms".into()));
    }
    if !is_unital_symmetric(group, f_set)? {
        return Err(Error::invalid("F must be unital and symmetric"));
    }
    let f_elems: Vec<Element> = f_set.iter().map(|w| group.eval(w)).collect::<Result<_>>()?;
    let ball = Ball::from_elements(group, f_elems.clone(), test_radius, cap)?;
    let standard = is_standard_set(group, &f_elems)
        && ball.elements().iter().all(|x| group.standard_length(x).is_some());
    let results: Vec<(PointData, Option<Vec<Element>>)> = ball
        .elements()
        .par_iter()
        .enumerate()
        .map(|(i, x)| evaluate_point(mean, group, &f_elems, x, ball.shell_of(i), standard, with_affinity))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(results.len());
    let mut atoms: HashSet<Element> = HashSet::new();
    for (p, a) in results {
        points.push(p);
        if let Some(a) = a {
            atoms.extend(a);
        }
    }
    let support_radius = if standard {
        points.iter().map(|p| p.radius).try_fold(0, |m, r| r.map(|r| m.max(r)))
    } else {
        let mut atoms: Vec<Element> = atoms.into_iter().collect();
        atoms.sort();
        let limit = 64 * (test_radius + mean.parameter() + 1);
        factor_lengths(group, &f_elems, &atoms, limit, cap)?
            .into_iter()
            .try_fold(0, |m, r| r.map(|r| m.max(r)))
    };
    Ok(Sweep {
        points,
        support_radius,
        ball_size: ball.len(),
    })
}

/// Exact defect of `mean` on `F` over the test ball `F^R`.
pub fn certify_mean(mean: &dyn Mean, f_set: &[Word], test_radius: usize, cap: usize) -> Result<MeanCertificate> {
    if test_radius < 2 {
        return Err(Error::invalid("test radius must be at least 2 to compare outer shells"));
    }
    let group = mean.group();
    let sw = sweep(mean, f_set, test_radius, cap, false)?;
    let m = f_set.len();
    let mut per_generator = vec![BigRational::zero(); m];
    let mut per_shell = vec![vec![BigRational::zero(); m]; test_radius + 1];
    let mut pointwise = BigRational::zero();
    for p in &sw.points {
        let mut total = BigRational::zero();
        for (j, d) in p.distances.iter().enumerate() {
            if *d > per_generator[j] {
                per_generator[j] = d.clone();
            }
            if *d > per_shell[p.shell][j] {
                per_shell[p.shell][j] = d.clone();
            }
            total += d;
        }
        if total > pointwise {
            pointwise = total;
        }
    }
    let defect: BigRational = per_generator.iter().sum();
    let shell_defects: Vec<BigRational> = per_shell.iter().map(|v| v.iter().sum()).collect();
    let stabilized = shell_defects[test_radius] == shell_defects[test_radius - 1];
    let n = mean.parameter();
    let tree_bound = mean.is_tree().then(|| {
        let total: usize = f_set
            .iter()
            .map(|s| group.normal_form(s).map(|w| w.len()).unwrap_or(0))
            .sum();
        let bound = BigRational::new((4 * total).into(), n.into());
        let holds = defect <= bound;
        (bound, holds)
    });
    let max_len = f_set.iter().map(Word::len).max().unwrap_or(0);
    Ok(MeanCertificate {
        group: group.to_string(),
        f_set: f_set.to_vec(),
        mean: mean.label(),
        n,
        support_radius: sw.support_radius,
        test_radius,
        ball_size: sw.ball_size,
        defect,
        pointwise_defect: pointwise,
        per_generator,
        shell_defects,
        stabilized,
        tree_bound,
        radius_precondition: test_radius >= n + max_len + 2,
    })
}

/// Least window size whose certified defect is at most `1/|F|`, for each `F`,
/// and the matching `k` with `E ⊆ F^k`.
pub fn modulus_estimate(
    group: &Group,
    family: MeanFamily,
    sets: &[Vec<Word>],
    test_radius: usize,
    n_cap: usize,
    cap: usize,
) -> Result<ModulusTable> {
    let mut table = ModulusTable::new();
    for f_set in sets {
        let target = BigRational::new(BigInt::one(), f_set.len().into());
        let entry = modulus_search(group, family, f_set, &target, test_radius, n_cap, cap)?;
        table.insert(f_set.len(), entry);
    }
    Ok(table)
}

/// Least `n` whose certified defect on `F` is at most `target`, found by
/// doubling and then bisection; the defect is taken to be monotone in `n`.
pub fn modulus_search(
    group: &Group,
    family: MeanFamily,
    f_set: &[Word],
    target: &BigRational,
    test_radius: usize,
    n_cap: usize,
    cap: usize,
) -> Result<ModulusEntry> {
    let certify = |n: usize| -> Result<MeanCertificate> {
        let mean = family.build(group, f_set, n)?;
        certify_mean(mean.as_ref(), f_set, test_radius, cap)
    };
    let mut hi = 1;
    let mut hi_cert = certify(hi)?;
    while hi_cert.defect > *target {
        if hi >= n_cap {
            return Err(Error::SearchCap { cap: n_cap });
        }
        hi = (2 * hi).min(n_cap);
        hi_cert = certify(hi)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let cert = certify(mid)?;
        if cert.defect <= *target {
            hi = mid;
            hi_cert = cert;
        } else {
            lo = mid;
        }
    }
    let k = hi_cert
        .support_radius
        .ok_or_else(|| Error::invalid("mean support leaves the subgroup generated by F"))?;
    Ok(ModulusEntry {
        k,
        defect: Some(hi_cert.defect.clone()),
        certificate: Some(hi_cert.to_record()),
    })
}

/// Data for an extension `1 → Δ → Γ → Γ̄ → 1`, all given by images of
/// generators.
#[derive(Clone, Debug)]
pub struct SectionData {
    pub gamma: Group,
    pub quotient: Group,
    pub kernel: Group,
    /// Image in `Γ̄` of each generator of `Γ`.
    pub project: Vec<Word>,
    /// Lift in `Γ` of each generator of `Γ̄`; `ς(p)` substitutes these into
    /// the canonical word of `p`.
    pub section: Vec<Word>,
    /// Image in `Γ` of each generator of `Δ`.
    pub include: Vec<Word>,
    /// A homomorphism `Γ → Δ` that is the identity on `Δ`; used only to read
    /// off kernel elements, and every reading is checked through `include`.
    pub retract: Vec<Word>,
}

impl SectionData {
    pub fn new(
        gamma: &Group,
        quotient: &Group,
        kernel: &Group,
        project: Vec<Word>,
        section: Vec<Word>,
        include: Vec<Word>,
        retract: Vec<Word>,
    ) -> Result<Self> {
        let check = |maps: &[Word], count: usize, target: &Group, what: &str| -> Result<()> {
            if maps.len() != count {
                return Err(Error::invalid(format!("{what} needs {count} images, got {}", maps.len())));
            }
            for w in maps {
                target.eval(w)?;
            }
            Ok(())
        };
        check(&project, gamma.rank(), quotient, "projection")?;
        check(&section, quotient.rank(), gamma, "section")?;
        check(&include, kernel.rank(), gamma, "inclusion")?;
        check(&retract, gamma.rank(), kernel, "retraction")?;
        let sec = SectionData {
            gamma: gamma.clone(),
            quotient: quotient.clone(),
            kernel: kernel.clone(),
            project,
            section,
            include,
            retract,
        };
        for (i, w) in sec.section.iter().enumerate() {
            let back = sec.bar(&gamma.eval(w)?);
            if back != quotient.generator(Letter::gen(i))? {
                return Err(Error::invalid(format!("section of generator {i} does not project back")));
            }
        }
        for (i, w) in sec.include.iter().enumerate() {
            let y = gamma.eval(w)?;
            if !quotient.is_identity(&sec.bar(&y)) {
                return Err(Error::invalid(format!("kernel generator {i} does not project to the identity")));
            }
            if sec.kernel_part(&y)? != kernel.generator(Letter::gen(i))? {
                return Err(Error::invalid(format!("retraction does not fix kernel generator {i}")));
            }
        }
        Ok(sec)
    }

    /// `x̄`.
    pub fn bar(&self, x: &Element) -> Element {
        let w = self.gamma.canonical_word(x).substitute(&self.project);
        self.quotient.eval(&w).expect("validated projection")
    }

    /// `ς(p)`.
    pub fn lift(&self, p: &Element) -> Element {
        let w = self.quotient.canonical_word(p).substitute(&self.section);
        self.gamma.eval(&w).expect("validated section")
    }

    pub fn include_elem(&self, d: &Element) -> Element {
        let w = self.kernel.canonical_word(d).substitute(&self.include);
        self.gamma.eval(&w).expect("validated inclusion")
    }

    /// The element of `Δ` equal to `y`, which must lie in the kernel.
    pub fn kernel_part(&self, y: &Element) -> Result<Element> {
        let word = self.gamma.canonical_word(y);
        if !self.quotient.is_identity(&self.bar(y)) {
            return Err(Error::invalid(format!("{word} does not lie in the kernel")));
        }
        let d = self.kernel.eval(&word.substitute(&self.retract))?;
        if self.include_elem(&d) != *y {
            return Err(Error::invalid(format!("{word} is not recovered by the retraction")));
        }
        Ok(d)
    }

    /// `α(s, p) = ς(s̄p)⁻¹·s·ς(p)`, as an element of `Δ`.
    pub fn cocycle(&self, s: &Element, p: &Element) -> Result<Element> {
        let g = &self.gamma;
        let sp = self.quotient.mul(&self.bar(s), p);
        let alpha = g.mul(&g.mul(&g.inverse(&self.lift(&sp)), s), &self.lift(p));
        self.kernel_part(&alpha).map_err(|_| Error::CocycleOutside {
            s: g.canonical_word(s),
            p: self.quotient.canonical_word(p),
            alpha: g.canonical_word(&alpha),
            reason: "is not in the kernel",
        })
    }
}

/// `ζ^x = Σ_p η̄^{x̄}(p)·ς(p)·ξ̃^{ς(p)⁻¹x}`, where `ξ̃^y = ξ^{y·ς(ȳ)⁻¹}`
/// extends the kernel mean `Δ`-equivariantly to `Γ`.
#[derive(Clone, Debug)]
pub struct CombinedMean {
    section: Arc<SectionData>,
    quotient_mean: Arc<dyn Mean>,
    kernel_mean: Arc<dyn Mean>,
}

impl CombinedMean {
    fn kernel_measure(&self, y: &Element) -> Result<Measure> {
        let g = &self.section.gamma;
        let base = self.section.lift(&self.section.bar(y));
        let d = self.section.kernel_part(&g.mul(y, &g.inverse(&base)))?;
        self.kernel_mean.eval(&d)
    }
}

impl Mean for CombinedMean {
    fn group(&self) -> &Group {
        &self.section.gamma
    }

    fn eval(&self, x: &Element) -> Result<Measure> {
        let g = &self.section.gamma;
        let outer = self.quotient_mean.eval(&self.section.bar(x))?;
        let mut terms: Vec<(Element, u64, u64)> = Vec::new();
        for (p, wp) in outer.atoms() {
            let sp = self.section.lift(p);
            let inner = self.kernel_measure(&g.mul(&g.inverse(&sp), x))?;
            for (d, wd) in inner.atoms() {
                let atom = g.mul(&sp, &self.section.include_elem(d));
                terms.push((atom, wp * wd, inner.denom()));
            }
        }
        let lcm = terms.iter().try_fold(1u64, |l, t| {
            let next = l / l.gcd(&t.2);
            next.checked_mul(t.2)
        });
        let lcm = lcm.ok_or_else(|| Error::invalid("measure denominator overflow"))?;
        let denom = lcm
            .checked_mul(outer.denom())
            .ok_or_else(|| Error::invalid("measure denominator overflow"))?;
        Measure::from_weights(terms.into_iter().map(|(a, w, d)| (a, w * (lcm / d))), denom)
    }

    fn parameter(&self) -> usize {
        self.quotient_mean.parameter().max(self.kernel_mean.parameter())
    }

    fn label(&self) -> String {
        format!("extension({} by {})", self.quotient_mean.label(), self.kernel_mean.label())
    }
}

/// Builds the combined mean after checking that every cocycle value
/// `α(s, p)` with `s ∈ F` and `p` among `points` lies in the kernel set `F'`
/// on which the kernel mean is certified. `points` should cover the supports
/// of the quotient mean wherever the combined mean will be evaluated; see
/// [`quotient_support`].
pub fn extension_combine(
    quotient_mean: Arc<dyn Mean>,
    kernel_mean: Arc<dyn Mean>,
    section: Arc<SectionData>,
    f_set: &[Word],
    points: &[Element],
    kernel_set: &[Word],
) -> Result<CombinedMean> {
    let sec = section.as_ref();
    let f_elems: Vec<Element> = f_set.iter().map(|w| sec.gamma.eval(w)).collect::<Result<_>>()?;
    let allowed: Vec<Element> = kernel_set.iter().map(|w| sec.kernel.eval(w)).collect::<Result<_>>()?;
    for s in &f_elems {
        for p in points {
            let alpha = sec.cocycle(s, p)?;
            if !allowed.contains(&alpha) {
                return Err(Error::CocycleOutside {
                    s: sec.gamma.canonical_word(s),
                    p: sec.quotient.canonical_word(p),
                    alpha: sec.kernel.canonical_word(&alpha),
                    reason: "is outside the certified kernel set",
                });
            }
        }
    }
    Ok(CombinedMean {
        section,
        quotient_mean,
        kernel_mean,
    })
}

/// `⋃ supp η̄^{x̄}` over `x` in the ball `F^{R+1}` of `Γ`: the quotient points
/// a certificate of the combined mean on `F^R` can reach. It lies inside
/// `F̄^k` but is usually far smaller.
pub fn quotient_support(
    quotient_mean: &dyn Mean,
    section: &SectionData,
    f_set: &[Word],
    test_radius: usize,
    cap: usize,
) -> Result<Vec<Element>> {
    let ball = Ball::new(&section.gamma, f_set, test_radius + 1, cap)?;
    let bars: HashSet<Element> = ball.elements().iter().map(|x| section.bar(x)).collect();
    let mut points: HashSet<Element> = HashSet::new();
    for p in bars {
        points.extend(quotient_mean.eval(&p)?.atoms.iter().map(|(y, _)| y.clone()));
    }
    let mut points: Vec<Element> = points.into_iter().collect();
    points.sort_by(|a, b| section.quotient.shortlex_cmp(a, b));
    Ok(points)
}

/// The kernel set `F'`: `α(F, points)` closed under inverses, with the
/// identity, sorted shortlex.
pub fn cocycle_set(section: &SectionData, f_set: &[Word], points: &[Element]) -> Result<Vec<Word>> {
    let f_elems: Vec<Element> = f_set.iter().map(|w| section.gamma.eval(w)).collect::<Result<_>>()?;
    let k = &section.kernel;
    let mut set: Vec<Element> = vec![k.identity()];
    for s in &f_elems {
        for p in points {
            let a = section.cocycle(s, p)?;
            for y in [k.inverse(&a), a] {
                if !set.contains(&y) {
                    set.push(y);
                }
            }
        }
    }
    set.sort_by(|a, b| k.shortlex_cmp(a, b));
    Ok(set.iter().map(|x| k.canonical_word(x)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionReport {
    pub quotient: MeanCertificate,
    pub kernel: MeanCertificate,
    pub combined: MeanCertificate,
    pub defect_sum: BigRational,
    pub defect_ok: bool,
    /// Largest per-generator defect of the quotient plus that of the kernel;
    /// every per-generator defect of the combined mean is at most this.
    pub generator_bound: BigRational,
    pub generator_ok: bool,
    /// `k + 2(k+1)k'`.
    pub support_bound: usize,
    pub support_ok: bool,
}

/// Certifies both components and the combined mean, and compares the
/// combined defect and support with the component data.
#[allow(clippy::too_many_arguments)]
pub fn extension_certificate(
    quotient_mean: Arc<dyn Mean>,
    kernel_mean: Arc<dyn Mean>,
    section: Arc<SectionData>,
    f_set: &[Word],
    quotient_test_radius: usize,
    kernel_test_radius: usize,
    test_radius: usize,
    cap: usize,
) -> Result<ExtensionReport> {
    let sec = section.as_ref();
    let mut f_bar: Vec<Element> = Vec::new();
    for w in f_set {
        let p = sec.bar(&sec.gamma.eval(w)?);
        if !f_bar.contains(&p) {
            f_bar.push(p);
        }
    }
    f_bar.sort_by(|a, b| sec.quotient.shortlex_cmp(a, b));
    let f_bar_words: Vec<Word> = f_bar.iter().map(|p| sec.quotient.canonical_word(p)).collect();
    let quotient = certify_mean(quotient_mean.as_ref(), &f_bar_words, quotient_test_radius, cap)?;
    let k = quotient
        .support_radius
        .ok_or_else(|| Error::invalid("quotient mean leaves the subgroup generated by its F"))?;
    let points = quotient_support(quotient_mean.as_ref(), sec, f_set, test_radius, cap)?;
    let kernel_set = cocycle_set(sec, f_set, &points)?;
    let kernel = certify_mean(kernel_mean.as_ref(), &kernel_set, kernel_test_radius, cap)?;
    let k_prime = kernel
        .support_radius
        .ok_or_else(|| Error::invalid("kernel mean leaves the subgroup generated by its F'"))?;
    let combined_mean = extension_combine(quotient_mean, kernel_mean, section, f_set, &points, &kernel_set)?;
    let combined = certify_mean(&combined_mean, f_set, test_radius, cap)?;
    let defect_sum = &quotient.defect + &kernel.defect;
    let support_bound = k + 2 * (k + 1) * k_prime;
    let worst = |c: &MeanCertificate| c.per_generator.iter().max().cloned().unwrap_or_else(BigRational::zero);
    let generator_bound = worst(&quotient) + worst(&kernel);
    Ok(ExtensionReport {
        defect_ok: combined.defect <= defect_sum,
        generator_ok: worst(&combined) <= generator_bound,
        generator_bound,
        support_ok: combined.support_radius.is_some_and(|r| r <= support_bound),
        quotient,
        kernel,
        combined,
        defect_sum,
        support_bound,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorBound {
    pub s: Word,
    /// `sup_x |1 − f_s(x)|` with `f_s(x) = ⟨s·ξ^x, ξ^{sx}⟩`, `ξ = η^{1/2}`.
    pub gap: f64,
    /// The same supremum exactly, when every affinity was a rational.
    pub exact_gap: Option<BigRational>,
    /// `sup_x ‖η^{sx} − s·η^x‖₁`.
    pub distance: BigRational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionBoundReport {
    pub eps: BigRational,
    pub generators: Vec<GeneratorBound>,
    /// `sup_x Σ_s |1 − f_s(x)|`.
    pub scalar_bound: f64,
    pub scalar_ok: bool,
    pub reference: NormEstimate,
    pub window_radius: usize,
    /// The window was cut below `F^k` to fit the ball cap; compressions are
    /// monotone in the window, so a pass on the smaller window still counts.
    pub window_truncated: bool,
    pub compression: NormEstimate,
    /// `(1 − ε)·reference`.
    pub lower_bound: f64,
    pub compression_ok: bool,
    pub passed: bool,
}

/// Checks `2·sup_x|1 − f_s(x)| ≤ sup_x ‖η^{sx} − s·η^x‖₁` for each `s`, the
/// scalar bound `sup_x Σ_s |1 − f_s(x)| ≤ ε`, and
/// `‖P_E λ(f) P_E‖ ≥ (1 − ε)·reference` for `f` supported in `F`.
pub fn mean_to_compression_bound(
    mean: &dyn Mean,
    cert: &MeanCertificate,
    f: &AlgebraElement,
    reference: &NormEstimate,
    tol: f64,
    cap: usize,
) -> Result<CompressionBoundReport> {
    let group = mean.group();
    if f.group() != group {
        return Err(Error::GroupMismatch(format!("element over {} but mean over {group}", f.group())));
    }
    let eps = cert.defect.clone();
    if eps >= BigRational::one() {
        return Err(Error::invalid("the certificate defect must be below 1"));
    }
    let f_elems: Vec<Element> = cert.f_set.iter().map(|w| group.eval(w)).collect::<Result<_>>()?;
    for (x, _) in f.terms() {
        if !f_elems.iter().any(|s| group.equal(s, x)) {
            return Err(Error::invalid(format!("support element {} lies outside F", group.canonical_word(x))));
        }
    }
    let sw = sweep(mean, &cert.f_set, cert.test_radius, cap, true)?;
    let m = cert.f_set.len();
    let mut gap = vec![0.0f64; m];
    let mut exact_gap: Vec<Option<BigRational>> = vec![Some(BigRational::zero()); m];
    let mut distance = vec![BigRational::zero(); m];
    let mut scalar = 0.0f64;
    for p in &sw.points {
        let mut total = 0.0;
        for j in 0..m {
            let a = &p.affinities[j];
            let g = (1.0 - a.value()).abs();
            total += g;
            gap[j] = gap[j].max(g);
            exact_gap[j] = match (exact_gap[j].take(), &a.exact) {
                (Some(best), Some(v)) => {
                    let g = (BigRational::one() - v).abs();
                    Some(if g > best { g } else { best })
                }
                _ => None,
            };
            if p.distances[j] > distance[j] {
                distance[j] = p.distances[j].clone();
            }
        }
        scalar = scalar.max(total);
    }
    let generators: Vec<GeneratorBound> = (0..m)
        .map(|j| {
            let holds = match &exact_gap[j] {
                Some(g) => BigRational::from_integer(2.into()) * g <= distance[j],
                None => 2.0 * gap[j] <= rational_to_f64(&distance[j]) + 1e-12,
            };
            GeneratorBound {
                s: cert.f_set[j].clone(),
                gap: gap[j],
                exact_gap: exact_gap[j].clone(),
                distance: distance[j].clone(),
                holds,
            }
        })
        .collect();
    let eps_f = rational_to_f64(&eps);
    let scalar_ok = scalar <= eps_f + 1e-12;

    let k = cert
        .support_radius
        .ok_or_else(|| Error::invalid("certificate has no support radius"))?;
    let mut radius = k;
    let window = loop {
        match Ball::new(group, &cert.f_set, radius, cap) {
            Ok(b) => break b,
            Err(e) if e.is_cap() && radius > 0 => radius -= 1,
            Err(e) => return Err(e),
        }
    };
    let comp = operator_norm(&compression(f, &window)?, tol)?;
    let lower_bound = (1.0 - eps_f) * reference.value;
    let compression_ok = comp.value >= lower_bound - tol * reference.value.max(1.0);
    let passed = generators.iter().all(|g| g.holds) && scalar_ok && compression_ok;
    Ok(CompressionBoundReport {
        eps,
        generators,
        scalar_bound: scalar,
        scalar_ok,
        reference: *reference,
        window_radius: radius,
        window_truncated: radius < k,
        compression: comp,
        lower_bound,
        compression_ok,
        passed,
    })
}
