//! Marked groups: a group with its generators read as the images of the free
//! generators of `F_d`. Relation balls, the `2^{-r}` metric, and experiments
//! along convergent sequences of markings.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::{moment_sequence_capped, AlgebraElement};
use crate::ball::{unital_symmetric, Ball};
use crate::compression::{fmt_sig, norm_oracle, NormEstimate};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::means::{certify_mean, Mean, MeanCertificate, Measure, TabulatedMean};
use crate::word::{Letter, Word};

/// `F_d → Γ`, sending the `i`-th free generator to the `i`-th generator of
/// the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    rank: usize,
    group: Group,
}

impl Marking {
    pub fn new(rank: usize, group: &Group) -> Result<Self> {
        if group.rank() != rank {
            return Err(Error::invalid(format!("{group} has {} generators, marking needs {rank}", group.rank())));
        }
        Ok(Marking {
            rank,
            group: group.clone(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn image(&self, w: &Word) -> Result<Element> {
        self.group.eval(w)
    }

    /// Pushforward of a free-group element; colliding words add up.
    pub fn push_forward(&self, f: &AlgebraElement) -> Result<AlgebraElement> {
        if *f.group() != Group::free(self.rank) {
            return Err(Error::GroupMismatch(format!("expected an element over free:{}", self.rank)));
        }
        AlgebraElement::from_words(&self.group, &f.word_terms())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationBall {
    pub rank: usize,
    pub radius: usize,
    /// Trivial reduced words of length `≤ radius`, shortlex, starting at `e`.
    pub relators: Vec<Word>,
}

impl RelationBall {
    pub fn contains(&self, w: &Word) -> bool {
        self.relators.binary_search(w).is_ok()
    }

    pub fn len(&self) -> usize {
        self.relators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relators.is_empty()
    }
}

/// All reduced words of length `≤ r` over the marking's generators that map
/// to the identity. `cap` bounds the number of words visited.
pub fn relation_ball(m: &Marking, r: usize, cap: usize) -> Result<RelationBall> {
    let alphabet: Vec<Letter> = Letter::alphabet(m.rank).collect();
    let group = &m.group;
    let mut relators = vec![Word::empty()];
    let mut level: Vec<(Word, Element)> = vec![(Word::empty(), group.identity())];
    let mut visited = 1usize;
    for _ in 0..r {
        let mut next = Vec::new();
        for (w, x) in &level {
            for &l in &alphabet {
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                let y = group.mul_letter(x, l);
                let mut v = w.clone();
                v.push(l);
                if group.is_identity(&y) {
                    relators.push(v.clone());
                }
                next.push((v, y));
            }
        }
        visited += next.len();
        if visited > cap {
            return Err(Error::BallOverflow { cap });
        }
        level = next;
    }
    Ok(RelationBall {
        rank: m.rank,
        radius: r,
        relators,
    })
}

/// Agreement of two markings' relation balls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedDistance {
    /// Largest radius at which the relation balls agree.
    pub agreement: usize,
    /// The balls agree through the requested `r_max`.
    pub exhausted: bool,
    /// Shortlex-first word trivial in exactly one of the two groups.
    pub witness: Option<Word>,
}

impl MarkedDistance {
    /// `2^{-agreement}`; `None` when agreement reached `r_max`, so that only a
    /// bound `≤ 2^{-r_max}` is known.
    pub fn value(&self) -> Option<BigRational> {
        (!self.exhausted).then(|| BigRational::new(BigInt::one(), BigInt::one() << self.agreement))
    }
}

impl fmt::Display for MarkedDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exhausted {
            write!(f, ">= {} agreement", self.agreement)
        } else {
            write!(f, "2^-{}", self.agreement)
        }
    }
}

/// Compares relation balls level by level. Words reaching the same pair of
/// elements with the same last letter have the same future, so only the
/// shortlex-first of them is kept; `cap` bounds the states per level.
pub fn marked_distance(m1: &Marking, m2: &Marking, r_max: usize, cap: usize) -> Result<MarkedDistance> {
    if m1.rank != m2.rank {
        return Err(Error::GroupMismatch(format!("ranks {} and {} differ", m1.rank, m2.rank)));
    }
    let alphabet: Vec<Letter> = Letter::alphabet(m1.rank).collect();
    let (g1, g2) = (&m1.group, &m2.group);
    let mut level: Vec<(Word, Element, Element)> = vec![(Word::empty(), g1.identity(), g2.identity())];
    for r in 1..=r_max {
        let mut seen: HashSet<(Letter, Element, Element)> = HashSet::new();
        let mut next = Vec::new();
        for (w, x1, x2) in &level {
            for &l in &alphabet {
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                let (y1, y2) = (g1.mul_letter(x1, l), g2.mul_letter(x2, l));
                let mut v = w.clone();
                v.push(l);
                if g1.is_identity(&y1) != g2.is_identity(&y2) {
                    return Ok(MarkedDistance {
                        agreement: r - 1,
                        exhausted: false,
                        witness: Some(v),
                    });
                }
                if seen.insert((l, y1.clone(), y2.clone())) {
                    next.push((v, y1, y2));
                }
            }
        }
        if next.len() > cap {
            return Err(Error::BallOverflow { cap });
        }
        level = next;
    }
    Ok(MarkedDistance {
        agreement: r_max,
        exhausted: true,
        witness: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub label: String,
    pub distance: MarkedDistance,
    pub norm: NormEstimate,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub limit_norm: NormEstimate,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,distance,norm,gap,method\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.label,
                row.distance,
                fmt_sig(row.norm.value),
                fmt_sig(row.gap),
                row.norm.method
            ));
        }
        out
    }
}

/// For each term, the marked distance to the limit and `‖λ(φ_n(f))‖` against
/// `‖λ(φ_∞(f))‖`. Rows are computed in parallel and kept in input order.
pub fn strong_convergence_table(
    limit: &Marking,
    terms: &[(String, Marking)],
    f: &AlgebraElement,
    r_max: usize,
    cap: usize,
) -> Result<ConvergenceTable> {
    let limit_norm = norm_oracle(&limit.push_forward(f)?)?;
    let rows = terms
        .par_iter()
        .map(|(label, m)| {
            let distance = marked_distance(m, limit, r_max, cap)?;
            let norm = norm_oracle(&m.push_forward(f)?)?;
            Ok(ConvergenceRow {
                label: label.clone(),
                distance,
                gap: (norm.value - limit_norm.value).abs(),
                norm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable { limit_norm, rows })
}

#[derive(Debug)]
pub enum LimitOfMeans {
    Conclusive {
        mean: TabulatedMean,
        certificate: MeanCertificate,
        term_defects: Vec<BigRational>,
        /// The limit defect is at most the largest term defect.
        defect_ok: bool,
    },
    /// Some lifted point had not settled over the last terms.
    Inconclusive { point: Word, values: Vec<Measure> },
}

/// Desk-scale limit of means along a sequence of markings. Each term mean is
/// evaluated at the image of a word, its atoms are lifted to canonical words
/// and read in the limit group. A point is settled when the last `tail`
/// terms give the same measure; the settled values, tabulated on `F^{R+1}`,
/// form the limit mean, which is then certified on `F^R`.
pub fn limit_of_means(
    limit: &Marking,
    terms: &[(Marking, &dyn Mean)],
    f_set: &[Word],
    test_radius: usize,
    tail: usize,
    cap: usize,
) -> Result<LimitOfMeans> {
    if tail == 0 || terms.len() < tail {
        return Err(Error::invalid(format!("need at least {tail} terms and a positive tail")));
    }
    let lg = limit.group();
    let ball = Ball::new(lg, f_set, test_radius + 1, cap)?;
    let lifted = |m: &Marking, mean: &dyn Mean, w: &Word| -> Result<Measure> {
        let eta = mean.eval(&m.image(w)?)?;
        let atoms = eta
            .atoms()
            .iter()
            .map(|(y, c)| Ok((lg.eval(&m.group().canonical_word(y))?, *c)))
            .collect::<Result<Vec<_>>>()?;
        Measure::from_weights(atoms, eta.denom())
    };
    let points: Vec<(Element, Vec<Measure>)> = ball
        .elements()
        .par_iter()
        .map(|x| {
            let w = lg.canonical_word(x);
            let values = terms[terms.len() - tail..]
                .iter()
                .map(|(m, mean)| lifted(m, *mean, &w))
                .collect::<Result<Vec<_>>>()?;
            Ok((x.clone(), values))
        })
        .collect::<Result<_>>()?;
    let mut table = HashMap::new();
    for (x, values) in points {
        if values.windows(2).any(|p| p[0] != p[1]) {
            return Ok(LimitOfMeans::Inconclusive {
                point: lg.canonical_word(&x),
                values,
            });
        }
        table.insert(x, values.into_iter().next().expect("tail is positive"));
    }
    let (_, last) = terms.last().expect("nonempty");
    let mean = TabulatedMean::new(lg, last.parameter(), format!("limit of {}", last.label()), table);
    let certificate = certify_mean(&mean, f_set, test_radius, cap)?;
    let term_defects = terms
        .iter()
        .map(|(m, mean)| {
            let f = unital_symmetric(m.group(), f_set)?;
            Ok(certify_mean(*mean, &f, test_radius, cap)?.defect)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = term_defects.iter().max().cloned().unwrap_or_else(BigRational::zero);
    Ok(LimitOfMeans::Conclusive {
        defect_ok: certificate.defect <= worst,
        mean,
        certificate,
        term_defects,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformityRow {
    pub label: String,
    pub reference: NormEstimate,
    /// Least `n` with `m_{2n}^{1/2n} ≥ (1 − δ)·reference`, or `None` when the
    /// computed moments never got there.
    pub n: Option<usize>,
    pub moments_computed: usize,
    pub best_root: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformityTable {
    pub delta: f64,
    pub rows: Vec<UniformityRow>,
}

impl UniformityTable {
    /// Common bound over the family, when every row reached the threshold.
    pub fn uniform_n(&self) -> Option<usize> {
        self.rows.iter().map(|r| r.n).try_fold(0, |m, n| n.map(|n| m.max(n)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance,reference,n,best_root\n");
        for r in &self.rows {
            let n = r.n.map_or(format!("> {}", r.moments_computed), |n| n.to_string());
            out.push_str(&format!("{},{},{},{}\n", r.label, fmt_sig(r.reference.value), n, fmt_sig(r.best_root)));
        }
        out
    }
}

/// How many moments each instance needs before its root is within `δ` of
/// the reference norm.
pub fn srf_uniformity(instances: &[(String, AlgebraElement)], delta: f64, n_max: usize, cap: usize) -> Result<UniformityTable> {
    let rows = instances
        .par_iter()
        .map(|(label, f)| {
            let reference = norm_oracle(f)?;
            let moments = moment_sequence_capped(f, n_max, cap)?;
            let threshold = (1.0 - delta) * reference.value;
            let n = moments.roots.iter().position(|&r| r >= threshold).map(|i| i + 1);
            Ok(UniformityRow {
                label: label.clone(),
                reference,
                n,
                moments_computed: moments.len(),
                best_root: moments.best_root(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniformityTable { delta, rows })
}
