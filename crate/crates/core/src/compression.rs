//! Compressions `P_E λ(f)|_{ℓ²E}` to finite windows, their norms, and exact
//! norm oracles for abelian and finite groups.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::f64::consts::TAU;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::algebra::{rational_to_f64, AlgebraElement, MomentSequence};
use crate::ball::{unital_symmetric, Ball};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::word::Word;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;
/// Target accuracy of the symbol supremum on infinite abelian groups.
pub const SYMBOL_TOLERANCE: f64 = 1e-8;

/// Rows above which matrix-vector products run in parallel.
const PARALLEL_ROWS: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Csr {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Csr { row_ptr, cols, vals }
    }

    fn transpose(&self, dim: usize) -> Csr {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
        for i in 0..dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                rows[self.cols[k] as usize].push((i as u32, self.vals[k]));
            }
        }
        Csr::from_rows(rows)
    }

    fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .map(|k| self.vals[k] * v[self.cols[k] as usize])
            .sum()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        if out.len() >= PARALLEL_ROWS {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = self.row_dot(i, v));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.row_dot(i, v);
            }
        }
    }
}

/// The matrix `(f(x y⁻¹))_{x,y ∈ E}` in compressed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionOperator {
    dim: usize,
    matrix: Csr,
    transpose: Csr,
}

/// Assembles the compression of `f` to the window `E`.
pub fn compression(f: &AlgebraElement, window: &Ball) -> Result<CompressionOperator> {
    if f.group() != window.group() {
        return Err(Error::GroupMismatch(format!(
            "element over {} but window over {}",
            f.group(),
            window.group()
        )));
    }
    let group = f.group();
    let terms: Vec<(Element, f64)> = f
        .terms()
        .map(|(t, c)| (group.inverse(t), rational_to_f64(c)))
        .collect();
    let dim = window.len();
    let build_row = |x: &Element| {
        let mut row: Vec<(u32, f64)> = terms
            .iter()
            .filter_map(|(t_inv, c)| window.position(&group.mul(t_inv, x)).map(|j| (j as u32, *c)))
            .collect();
        row.sort_by_key(|&(j, _)| j);
        row
    };
    let rows: Vec<Vec<(u32, f64)>> = if dim >= PARALLEL_ROWS {
        window.elements().par_iter().map(build_row).collect()
    } else {
        window.elements().iter().map(build_row).collect()
    };
    let matrix = Csr::from_rows(rows);
    let transpose = matrix.transpose(dim);
    Ok(CompressionOperator { dim, matrix, transpose })
}

impl CompressionOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.matrix.vals.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let m = &self.matrix;
        (m.row_ptr[i]..m.row_ptr[i + 1])
            .find(|&k| m.cols[k] as usize == j)
            .map_or(0.0, |k| m.vals[k])
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.matrix.row_ptr[i + 1] - self.matrix.row_ptr[i]
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.transpose
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.matrix.row_ptr[i]..self.matrix.row_ptr[i + 1] {
                m[(i, self.matrix.cols[k] as usize)] += self.matrix.vals[k];
            }
        }
        m
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.matrix.apply(v, out);
    }

    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        self.transpose.apply(v, out);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMethod {
    PowerIteration,
    Dft,
    /// Supremum of the symbol over the dual torus by branch and bound.
    SymbolSupremum,
    FullRegular,
    Moment,
    DenseSvd,
    /// `f = c·δ_e`, whose norm is `|c|` in every group.
    Scalar,
}

impl fmt::Display for NormMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NormMethod::PowerIteration => "power-iteration",
            NormMethod::Dft => "dft",
            NormMethod::SymbolSupremum => "symbol-supremum",
            NormMethod::FullRegular => "full-regular",
            NormMethod::Moment => "moment",
            NormMethod::DenseSvd => "dense-svd",
            NormMethod::Scalar => "scalar",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub tolerance: f64,
    pub iterations: usize,
}

impl NormEstimate {
    /// The best moment root, a certified lower bound for `‖λ(f)‖`.
    pub fn from_moments(moments: &MomentSequence) -> Self {
        NormEstimate {
            value: moments.best_root(),
            method: NormMethod::Moment,
            tolerance: 1e-12 * moments.best_root(),
            iterations: moments.len(),
        }
    }
}

/// SplitMix64 of `i`, scaled to `[0, 1)`.
fn unit_hash(i: u64) -> f64 {
    let mut z = i.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest singular value by power iteration on `CᵀC`.
///
/// The start vector is a fixed hashed vector with entries in `[0.5, 1.5)`. A
/// constant or slowly varying start is nearly orthogonal to high-frequency
/// characters of a circulant and can settle on a lower singular value, while
/// the hashed one has a share of order `1/√N` on every mode. Iteration stops once the Rayleigh increments, extrapolated
/// geometrically, fall below `tol` relative to the estimate, or reach the
/// rounding floor.
pub fn operator_norm(c: &CompressionOperator, tol: f64) -> Result<NormEstimate> {
    operator_norm_capped(c, tol, MAX_ITERATIONS)
}

pub fn operator_norm_capped(c: &CompressionOperator, tol: f64, max_iterations: usize) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let done = |value: f64, iterations| NormEstimate {
        value,
        method: NormMethod::PowerIteration,
        tolerance: tol,
        iterations,
    };
    if c.matrix.vals.iter().all(|&v| v == 0.0) {
        return Ok(done(0.0, 0));
    }
    let n = c.dim;
    let mut v: Vec<f64> = (0..n as u64).map(|i| 0.5 + unit_hash(i)).collect();
    let s = norm2(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut w = vec![0.0; n];
    let mut lambda_prev = 0.0;
    let mut delta_prev = f64::NAN;
    let mut streak = 0;
    for k in 1..=max_iterations {
        c.apply(&v, &mut w);
        // Rayleigh quotient of CᵀC at the unit vector v
        let lambda = w.iter().map(|x| x * x).sum::<f64>();
        c.apply_transpose(&w, &mut v);
        let s = norm2(&v);
        if s == 0.0 {
            return Ok(done(lambda.sqrt(), k));
        }
        v.iter_mut().for_each(|x| *x /= s);

        let delta = lambda - lambda_prev;
        let floor = 64.0 * f64::EPSILON * lambda;
        let settled = if delta.abs() <= floor {
            true
        } else if k >= 3 && delta_prev > 0.0 {
            let rho = delta / delta_prev;
            rho < 1.0 && delta <= tol * lambda * (1.0 - rho.max(0.0))
        } else {
            false
        };
        streak = if settled { streak + 1 } else { 0 };
        if streak >= 3 {
            return Ok(done(lambda.sqrt(), k));
        }
        lambda_prev = lambda;
        delta_prev = delta;
    }
    Err(Error::NonConvergence {
        last: lambda_prev.sqrt(),
        iterations: max_iterations,
    })
}

/// Largest singular value by dense SVD; an independent check for small
/// windows.
pub fn dense_operator_norm(c: &CompressionOperator) -> NormEstimate {
    let value = if c.dim == 0 {
        0.0
    } else {
        c.to_dense().singular_values().iter().copied().fold(0.0, f64::max)
    };
    NormEstimate {
        value,
        method: NormMethod::DenseSvd,
        tolerance: 1e-12,
        iterations: 0,
    }
}

/// `‖λ(f)‖` for groups where it is computable: finite abelian groups by the
/// DFT, infinite abelian groups by the supremum of the symbol, finite tables
/// by the full regular representation. Multiples of the identity are exact
/// in any group.
pub fn norm_oracle(f: &AlgebraElement) -> Result<NormEstimate> {
    let group = f.group();
    if f.terms().all(|(x, _)| group.is_identity(x)) {
        return Ok(NormEstimate {
            value: rational_to_f64(&f.trace().abs()),
            method: NormMethod::Scalar,
            tolerance: 0.0,
            iterations: 0,
        });
    }
    match group {
        Group::Abelian { torsion } => abelian_norm(f, torsion),
        Group::Finite(_) => {
            let group = f.group();
            let order = group.finite_order().expect("finite table") as usize;
            let ball = Ball::new(group, &group.standard_generating_set(), order, order + 1)?;
            let c = compression(f, &ball)?;
            Ok(NormEstimate {
                method: NormMethod::FullRegular,
                ..dense_operator_norm(&c)
            })
        }
        g => Err(Error::Unsupported(format!("no exact norm oracle for {g}"))),
    }
}

const MAX_CHARACTERS: u128 = 50_000_000;

fn abelian_norm(f: &AlgebraElement, torsion: &[u64]) -> Result<NormEstimate> {
    if f.is_zero() {
        return Ok(NormEstimate {
            value: 0.0,
            method: NormMethod::Dft,
            tolerance: 0.0,
            iterations: 0,
        });
    }
    let finite: Vec<usize> = (0..torsion.len()).filter(|&i| torsion[i] > 0).collect();
    let infinite: Vec<usize> = (0..torsion.len()).filter(|&i| torsion[i] == 0).collect();
    let characters: u128 = finite.iter().map(|&i| torsion[i] as u128).product();
    if characters > MAX_CHARACTERS {
        return Err(Error::Unsupported(format!("{characters} characters exceed the DFT limit")));
    }
    let terms: Vec<(&Vec<i64>, f64)> = f
        .terms()
        .map(|(x, c)| match x {
            Element::Abelian(v) => (v, rational_to_f64(c)),
            _ => unreachable!("abelian element"),
        })
        .collect();
    let mut best = 0.0f64;
    let mut evaluations = 0usize;
    let mut chi = vec![0u64; finite.len()];
    loop {
        // coefficients twisted by the finite character chi
        let twisted: Vec<(Vec<i64>, Complex64)> = terms
            .iter()
            .map(|(v, c)| {
                let mut turns = 0.0;
                for (slot, &i) in finite.iter().enumerate() {
                    let m = torsion[i];
                    let phase = (v[i] as u128 * chi[slot] as u128 % m as u128) as f64 / m as f64;
                    turns += phase;
                }
                let exps = infinite.iter().map(|&i| v[i]).collect();
                (exps, Complex64::from_polar(*c, TAU * turns.fract()))
            })
            .collect();
        let (value, evals) = if infinite.is_empty() {
            (twisted.iter().map(|(_, c)| c).sum::<Complex64>().norm(), 1)
        } else {
            symbol_supremum(&twisted, infinite.len(), SYMBOL_TOLERANCE)
        };
        best = best.max(value);
        evaluations += evals;
        // next character in odometer order
        let mut slot = 0;
        loop {
            if slot == finite.len() {
                let (method, tolerance) = if infinite.is_empty() {
                    (NormMethod::Dft, 1e-12 * best.max(1.0))
                } else {
                    (NormMethod::SymbolSupremum, SYMBOL_TOLERANCE)
                };
                return Ok(NormEstimate {
                    value: best,
                    method,
                    tolerance,
                    iterations: evaluations,
                });
            }
            chi[slot] += 1;
            if chi[slot] < torsion[finite[slot]] {
                break;
            }
            chi[slot] = 0;
            slot += 1;
        }
    }
}

#[derive(Clone, Debug)]
struct Cell {
    bound: f64,
    centre: Vec<f64>,
    half: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.bound.total_cmp(&other.bound) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound)
    }
}

/// `sup_θ |Σ c_x e^{i⟨x,θ⟩}|` over the torus `[0, 2π)^dims`, to within `tol`.
///
/// A cell of half-width `h` around `θ₀` is bounded by the first-order
/// expansion at `θ₀`, maximized over the cell corners, plus the remainder
/// `h²/2 · Σ|c_x| ‖x‖₁²`. Cells are refined best-first until the largest
/// bound is within `tol` of the best value found.
pub fn symbol_supremum(terms: &[(Vec<i64>, Complex64)], dims: usize, tol: f64) -> (f64, usize) {
    let max_freq = terms
        .iter()
        .flat_map(|(x, _)| x.iter().map(|e| e.unsigned_abs()))
        .max()
        .unwrap_or(0);
    let curvature: f64 = terms
        .iter()
        .map(|(x, c)| {
            let l1: f64 = x.iter().map(|e| e.unsigned_abs() as f64).sum();
            c.norm() * l1 * l1
        })
        .sum();
    let eval = |theta: &[f64]| -> (Complex64, Vec<Complex64>) {
        let mut value = Complex64::zero();
        let mut grad = vec![Complex64::zero(); dims];
        for (x, c) in terms {
            let phase: f64 = x.iter().zip(theta).map(|(&e, &t)| e as f64 * t).sum();
            let z = c * Complex64::from_polar(1.0, phase);
            value += z;
            for (g, &e) in grad.iter_mut().zip(x) {
                *g += Complex64::i() * z * e as f64;
            }
        }
        (value, grad)
    };
    let mut evaluations = 0;
    let mut best = 0.0f64;
    let mut cell = |centre: Vec<f64>, half: f64, best: &mut f64| -> Cell {
        evaluations += 1;
        let (value, grad) = eval(&centre);
        *best = best.max(value.norm());
        let mut corner_max = 0.0f64;
        for mask in 0..1usize << dims {
            let mut z = value;
            for (j, g) in grad.iter().enumerate() {
                let sign = if mask >> j & 1 == 1 { half } else { -half };
                z += g * sign;
            }
            corner_max = corner_max.max(z.norm());
        }
        Cell {
            bound: corner_max + 0.5 * half * half * curvature,
            centre,
            half,
        }
    };

    // initial grid with centres at multiples of 2π/G, so θ = 0 and θ = π are
    // sampled exactly
    let grid = (4 * max_freq as usize).clamp(8, 256) & !1;
    let half = std::f64::consts::PI / grid as f64;
    let mut heap = BinaryHeap::new();
    let mut index = vec![0usize; dims];
    loop {
        let centre: Vec<f64> = index.iter().map(|&i| i as f64 * TAU / grid as f64).collect();
        heap.push(cell(centre, half, &mut best));
        let mut j = 0;
        while j < dims {
            index[j] += 1;
            if index[j] < grid {
                break;
            }
            index[j] = 0;
            j += 1;
        }
        if j == dims {
            break;
        }
    }
    while let Some(top) = heap.pop() {
        if top.bound <= best + tol {
            break;
        }
        let h = top.half / 2.0;
        for mask in 0..1usize << dims {
            let centre: Vec<f64> = top
                .centre
                .iter()
                .enumerate()
                .map(|(j, &t)| if mask >> j & 1 == 1 { t + h } else { t - h })
                .collect();
            let c = cell(centre, h, &mut best);
            if c.bound > best + tol {
                heap.push(c);
            }
        }
    }
    (best, evaluations)
}

/// Certified values `m ↦ k(m)` of a modulus of uniform exactness.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModulusTable {
    entries: BTreeMap<usize, ModulusEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusEntry {
    pub k: usize,
    /// Exact defect of the certificate behind `k`; `None` for entries that
    /// were declared rather than certified.
    pub defect: Option<BigRational>,
    /// Human-readable certificate record.
    pub certificate: Option<String>,
}

impl ModulusTable {
    pub fn new() -> Self {
        ModulusTable::default()
    }

    /// Uncertified entries `k(m)` for `m` in `range`, as in textbook examples.
    pub fn from_fn(range: impl IntoIterator<Item = usize>, k: impl Fn(usize) -> usize) -> Self {
        let mut t = ModulusTable::new();
        for m in range {
            t.insert(m, ModulusEntry { k: k(m), defect: None, certificate: None });
        }
        t
    }

    pub fn insert(&mut self, m: usize, entry: ModulusEntry) {
        self.entries.insert(m, entry);
    }

    pub fn k(&self, m: usize) -> Option<usize> {
        self.entries.get(&m).map(|e| e.k)
    }

    pub fn entry(&self, m: usize) -> Option<&ModulusEntry> {
        self.entries.get(&m)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &ModulusEntry)> {
        self.entries.iter().map(|(&m, e)| (m, e))
    }
}

/// The window `(F ∪ {1} ∪ F⁻¹)^{k(|F| + ⌊2/ε⌋)}`.
///
/// With `eps = 0` the term `⌊2/ε⌋` is unbounded; the window then uses the
/// first entry at or above `|F|` whose certificate has defect exactly zero.
pub fn prop_a_window(
    group: &Group,
    f_set: &[Word],
    eps: f64,
    table: &ModulusTable,
    cap: usize,
) -> Result<Ball> {
    if !(eps >= 0.0) {
        return Err(Error::invalid("eps must be nonnegative"));
    }
    let symmetric = unital_symmetric(group, f_set)?;
    let radius = if eps == 0.0 {
        table
            .entries()
            .find(|(m, e)| *m >= f_set.len() && e.defect.as_ref().is_some_and(Zero::is_zero))
            .map(|(_, e)| e.k)
            .ok_or_else(|| Error::invalid("eps = 0 needs a zero-defect modulus entry"))?
    } else {
        let m = f_set.len() + (2.0 / eps).floor() as usize;
        table
            .k(m)
            .ok_or_else(|| Error::invalid(format!("modulus table has no entry at {m}")))?
    };
    Ball::new(group, &symmetric, radius, cap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub reference: NormEstimate,
    pub compression: NormEstimate,
    pub eps: f64,
    pub dimension: usize,
    /// `(1+ε)·‖compression‖ − reference`; nonnegative when the lower
    /// direction holds.
    pub lower_margin: f64,
    /// `reference − ‖compression‖`; nonnegative when the upper direction
    /// holds.
    pub upper_margin: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Checks `reference ≤ (1+ε)·‖P_E λ(f) P_E‖` and `‖P_E λ(f) P_E‖ ≤ reference`
/// up to the combined numerical tolerance.
pub fn sandwich_check(
    f: &AlgebraElement,
    window: &Ball,
    eps: f64,
    reference: &NormEstimate,
    tol: f64,
) -> Result<SandwichReport> {
    let c = compression(f, window)?;
    let comp = operator_norm(&c, tol)?;
    let scale = reference.value.max(comp.value).max(1.0);
    let slack = reference.tolerance + 4.0 * tol * scale;
    let lower_margin = (1.0 + eps) * comp.value - reference.value;
    let upper_margin = reference.value - comp.value;
    Ok(SandwichReport {
        reference: *reference,
        compression: comp,
        eps,
        dimension: c.dim(),
        lower_margin,
        upper_margin,
        slack,
        passed: lower_margin >= -slack && upper_margin >= -slack,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub radius: usize,
    pub dimension: usize,
    pub norm: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowProfile {
    pub rows: Vec<ProfileRow>,
    /// Radii that could not be enumerated within the ball cap.
    pub truncated: Vec<usize>,
}

impl WindowProfile {
    /// Norms never decrease by more than the iteration tolerance.
    pub fn is_nondecreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|p| p[1].norm >= p[0].norm - 4.0 * p[0].tolerance * p[0].norm.max(1.0))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,dimension,norm,iterations,tolerance\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.radius,
                r.dimension,
                fmt_sig(r.norm),
                r.iterations,
                fmt_sig(r.tolerance)
            ));
        }
        for r in &self.truncated {
            out.push_str(&format!("{r},cap,,,\n"));
        }
        out
    }
}

/// Compression norms of `f` over the balls `generators^r` for each radius.
/// The largest feasible ball is built once and truncated per radius.
pub fn increasing_window_profile(
    f: &AlgebraElement,
    generators: &[Word],
    radii: &[usize],
    tol: f64,
    cap: usize,
) -> Result<WindowProfile> {
    if radii.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::invalid("radii must be increasing"));
    }
    let group = f.group();
    let symmetric = unital_symmetric(group, generators)?;
    let mut feasible = radii.len();
    let ball = loop {
        let Some(&r) = feasible.checked_sub(1).map(|i| &radii[i]) else {
            return Ok(WindowProfile {
                rows: Vec::new(),
                truncated: radii.to_vec(),
            });
        };
        match Ball::new(group, &symmetric, r, cap) {
            Ok(b) => break b,
            Err(e) if e.is_cap() => feasible -= 1,
            Err(e) => return Err(e),
        }
    };
    let rows = radii[..feasible]
        .par_iter()
        .map(|&r| {
            let window = ball.truncate(r);
            let c = compression(f, &window)?;
            let est = operator_norm(&c, tol)?;
            Ok(ProfileRow {
                radius: r,
                dimension: c.dim(),
                norm: est.value,
                iterations: est.iterations,
                tolerance: tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowProfile {
        rows,
        truncated: radii[feasible..].to_vec(),
    })
}

/// Twelve significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    if (0..=20).contains(&digits) {
        let s = format!("{:.*}", digits as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}
