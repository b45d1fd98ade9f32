//! Fibonacci-anyon braid words and gate approximation by search.
//!
//! Three Fibonacci anyons with total charge tau span a qubit. The two
//! elementary exchanges act on it as
//!
//! * `sigma_1 = diag(e^{-4 pi i/5}, e^{3 pi i/5})`
//! * `sigma_2 = F sigma_1 F`, with `F = [[tau, sqrt tau], [sqrt tau, -tau]]`
//!   and `tau = (sqrt 5 - 1)/2`.
//!
//! The non-computational state of the same three anyons has different total
//! charge and is never mixed in by braiding, so it is not modelled.
//!
//! A word `g_1 g_2 ... g_n` evaluates to the matrix product in written order,
//! which makes evaluation a monoid homomorphism.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::u_theta;
use crate::{Error, Result, C64};

const PI: f64 = std::f64::consts::PI;

/// An elementary exchange or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BraidGenerator {
    index: u8,
    inverse: bool,
}

impl BraidGenerator {
    pub const S1: Self = Self { index: 1, inverse: false };
    pub const S1_INV: Self = Self { index: 1, inverse: true };
    pub const S2: Self = Self { index: 2, inverse: false };
    pub const S2_INV: Self = Self { index: 2, inverse: true };
    pub const ALL: [Self; 4] = [Self::S1, Self::S1_INV, Self::S2, Self::S2_INV];

    pub fn new(index: u8, inverse: bool) -> Result<Self> {
        if index != 1 && index != 2 {
            return Err(Error::BadLetter(format!("index {index}")));
        }
        Ok(Self { index, inverse })
    }

    pub fn index(self) -> u8 {
        self.index
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inverse(self) -> Self {
        Self {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    /// `s1 = 0, s1inv = 1, s2 = 2, s2inv = 3`; also the lexicographic order.
    pub fn code(self) -> u8 {
        2 * (self.index - 1) + self.inverse as u8
    }

    pub fn from_code(code: u8) -> Self {
        Self::ALL[code as usize & 3]
    }

    pub fn matrix(self) -> Matrix2<C64> {
        let (s1, s2) = fibonacci_rep();
        let m = if self.index == 1 { s1 } else { s2 };
        if self.inverse {
            m.adjoint()
        } else {
            m
        }
    }
}

impl fmt::Display for BraidGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}{}", self.index, if self.inverse { "inv" } else { "" })
    }
}

impl FromStr for BraidGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s1" => Ok(Self::S1),
            "s1inv" => Ok(Self::S1_INV),
            "s2" => Ok(Self::S2),
            "s2inv" => Ok(Self::S2_INV),
            other => Err(Error::BadLetter(other.to_string())),
        }
    }
}

impl TryFrom<String> for BraidGenerator {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BraidGenerator> for String {
    fn from(g: BraidGenerator) -> String {
        g.to_string()
    }
}

/// `tau = (sqrt 5 - 1)/2`.
pub fn tau() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// The fusion matrix `F`; real, symmetric and self-inverse.
pub fn fusion_matrix() -> Matrix2<C64> {
    let t = tau();
    let r = t.sqrt();
    Matrix2::new(
        C64::new(t, 0.0),
        C64::new(r, 0.0),
        C64::new(r, 0.0),
        C64::new(-t, 0.0),
    )
}

/// `(sigma_1, sigma_2)` on the charge-tau qubit.
pub fn fibonacci_rep() -> (Matrix2<C64>, Matrix2<C64>) {
    let zero = C64::new(0.0, 0.0);
    let s1 = Matrix2::new(
        C64::from_polar(1.0, -4.0 * PI / 5.0),
        zero,
        zero,
        C64::from_polar(1.0, 3.0 * PI / 5.0),
    );
    let f = fusion_matrix();
    let s2 = f * s1 * f;
    (s1, s2)
}

/// A freely reduced braid word with its matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<BraidGenerator>", into = "Vec<BraidGenerator>")]
pub struct BraidWord {
    letters: Vec<BraidGenerator>,
    matrix: Matrix2<C64>,
}

impl BraidWord {
    /// Cancels adjacent letter/inverse pairs, then evaluates.
    pub fn new(letters: Vec<BraidGenerator>) -> Self {
        let mut reduced: Vec<BraidGenerator> = Vec::with_capacity(letters.len());
        for g in letters {
            if reduced.last() == Some(&g.inverse()) {
                reduced.pop();
            } else {
                reduced.push(g);
            }
        }
        let matrix = product(&reduced);
        Self {
            letters: reduced,
            matrix,
        }
    }

    pub fn identity() -> Self {
        Self::new(Vec::new())
    }

    /// Letters written as `s1 s2inv ...`.
    pub fn parse(text: &str) -> Result<Self> {
        let letters = text
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(letters))
    }

    pub fn letters(&self) -> &[BraidGenerator] {
        &self.letters
    }

    /// Product of the letter matrices in written order, leftmost first.
    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self::new(letters)
    }

    fn codes(&self) -> Vec<u8> {
        self.letters.iter().map(|g| g.code()).collect()
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|g| g.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl From<Vec<BraidGenerator>> for BraidWord {
    fn from(letters: Vec<BraidGenerator>) -> Self {
        Self::new(letters)
    }
}

impl From<BraidWord> for Vec<BraidGenerator> {
    fn from(w: BraidWord) -> Self {
        w.letters
    }
}

fn product(letters: &[BraidGenerator]) -> Matrix2<C64> {
    let (s1, s2) = fibonacci_rep();
    let table = [s1, s1.adjoint(), s2, s2.adjoint()];
    letters
        .iter()
        .fold(Matrix2::identity(), |m, g| m * table[g.code() as usize])
}

/// Ordered product of the letter matrices, recomputed from scratch.
pub fn evaluate(word: &BraidWord) -> Matrix2<C64> {
    product(&word.letters)
}

/// A single-qubit gate to approximate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateTarget {
    pub theta: Option<f64>,
    pub matrix: Matrix2<C64>,
}

impl GateTarget {
    /// `U_theta = [[cos t, sin t], [sin t, -cos t]]`.
    pub fn u_theta(theta: f64) -> Self {
        Self {
            theta: Some(theta),
            matrix: u_theta(theta),
        }
    }

    pub fn unitary(matrix: Matrix2<C64>) -> Result<Self> {
        let dev = (matrix.adjoint() * matrix - Matrix2::identity()).norm();
        if dev > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "target is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self {
            theta: None,
            matrix,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Spectral norm minimized over a global phase on the word.
    PhaseInvariant,
    /// Spectral norm of the plain difference.
    Strict,
}

/// Spectral norm `sqrt(lambda_max((m - t)^dagger (m - t)))`.
pub fn strict_distance(m: &Matrix2<C64>, target: &Matrix2<C64>) -> f64 {
    let d = m - target;
    let h = d.adjoint() * d;
    let (a, b, c) = (h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)].norm());
    let half = (a - b) / 2.0;
    ((a + b) / 2.0 + (half * half + c * c).sqrt()).max(0.0).sqrt()
}

/// `min_phi || e^{i phi} m - t ||` for unitaries.
pub fn phase_distance(m: &Matrix2<C64>, target: &Matrix2<C64>) -> f64 {
    Su2::from_unitary(&(target.adjoint() * m)).distance_to_identity()
}

pub fn distance(m: &Matrix2<C64>, target: &Matrix2<C64>, metric: Metric) -> f64 {
    match metric {
        Metric::PhaseInvariant => phase_distance(m, target),
        Metric::Strict => strict_distance(m, target),
    }
}

/// `[[a, b], [-conj b, conj a]]` with `|a|^2 + |b|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Su2 {
    a: C64,
    b: C64,
}

impl Su2 {
    const IDENTITY: Self = Self {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
    };

    fn from_unitary(m: &Matrix2<C64>) -> Self {
        let s = m.determinant().sqrt();
        Self {
            a: m[(0, 0)] / s,
            b: m[(0, 1)] / s,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            a: self.a * o.a - self.b * o.b.conj(),
            b: self.a * o.b + self.b * o.a.conj(),
        }
    }

    fn adjoint(self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    fn quat(self) -> [f64; 4] {
        [self.a.re, self.a.im, self.b.re, self.b.im]
    }

    fn matrix(self) -> Matrix2<C64> {
        Matrix2::new(self.a, self.b, -self.b.conj(), self.a.conj())
    }

    /// Chord distance to `+-1` on the unit 3-sphere.
    fn distance_to_identity(self) -> f64 {
        let q = self.quat();
        let rest = q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
        let lo = (q[0] - 1.0).powi(2) + rest;
        let hi = (q[0] + 1.0).powi(2) + rest;
        lo.min(hi).sqrt()
    }
}

fn quat_distance(p: &[f64; 4], q: &[f64; 4]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for i in 0..4 {
        minus += (p[i] - q[i]).powi(2);
        plus += (p[i] + q[i]).powi(2);
    }
    minus.min(plus).sqrt()
}

/// Precomputed data for scoring words during enumeration. Every generator
/// is `e^{-+ i pi/10}` times an SU(2) element, so a word is tracked as its
/// SU(2) part plus the signed letter count.
struct Scorer {
    gens: [Su2; 4],
    target: Matrix2<C64>,
    target_su2: Su2,
    metric: Metric,
}

impl Scorer {
    fn new(target: &Matrix2<C64>, metric: Metric) -> Self {
        let (s1, s2) = fibonacci_rep();
        let gens = [s1, s1.adjoint(), s2, s2.adjoint()].map(|m| Su2::from_unitary(&m));
        Self {
            gens,
            target: *target,
            target_su2: Su2::from_unitary(target),
            metric,
        }
    }

    fn full_matrix(&self, s: Su2, exponent: i32) -> Matrix2<C64> {
        s.matrix() * C64::from_polar(1.0, -PI * exponent as f64 / 10.0)
    }

    fn score(&self, s: Su2, exponent: i32) -> f64 {
        match self.metric {
            Metric::PhaseInvariant => quat_distance(&s.quat(), &self.target_su2.quat()),
            Metric::Strict => strict_distance(&self.full_matrix(s, exponent), &self.target),
        }
    }
}

fn letter_exponent(code: u8) -> i32 {
    if code & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Best word found by a search, with both distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub word: BraidWord,
    /// Value of the metric the search minimized.
    pub distance: f64,
    pub distance_phase: f64,
    pub distance_strict: f64,
    pub metric: Metric,
    pub words_scored: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_length: Option<usize>,
}

impl SearchResult {
    /// `score` is the value the search ranked the word by; keeping it (rather
    /// than re-evaluating) makes results exactly monotone in the budget.
    fn from_word(
        word: BraidWord,
        score: f64,
        target: &GateTarget,
        metric: Metric,
        words_scored: u64,
        half_length: Option<usize>,
    ) -> Self {
        let distance_phase = phase_distance(word.matrix(), &target.matrix);
        let distance_strict = strict_distance(word.matrix(), &target.matrix);
        Self {
            distance: score,
            word,
            distance_phase,
            distance_strict,
            metric,
            words_scored,
            half_length,
        }
    }
}

/// Best candidate under the order (distance, length, letters).
#[derive(Debug, Clone)]
struct Best {
    value: f64,
    codes: Vec<u8>,
}

impl Best {
    fn none() -> Self {
        Self {
            value: f64::INFINITY,
            codes: Vec::new(),
        }
    }

    fn cmp_key(value: f64, codes: &[u8], other_value: f64, other: &[u8]) -> Ordering {
        value
            .total_cmp(&other_value)
            .then(codes.len().cmp(&other.len()))
            .then_with(|| codes.cmp(other))
    }

    fn offer(&mut self, value: f64, codes: &[u8]) {
        if Self::cmp_key(value, codes, self.value, &self.codes) == Ordering::Less {
            self.value = value;
            self.codes = codes.to_vec();
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.offer(other.value, &other.codes);
        self
    }
}

struct Dfs<'a> {
    scorer: &'a Scorer,
    max_len: usize,
    path: Vec<u8>,
    best: Best,
    scored: u64,
}

impl Dfs<'_> {
    fn visit(&mut self, s: Su2, exponent: i32) {
        let v = self.scorer.score(s, exponent);
        self.scored += 1;
        self.best.offer(v, &self.path);
        if self.path.len() == self.max_len {
            return;
        }
        let last = self.path.last().copied();
        for code in 0..4u8 {
            if last == Some(code ^ 1) {
                continue;
            }
            self.path.push(code);
            self.visit(
                s.mul(self.scorer.gens[code as usize]),
                exponent + letter_exponent(code),
            );
            self.path.pop();
        }
    }
}

/// All freely reduced code sequences of exactly `len` letters, in
/// lexicographic order.
fn reduced_words(len: usize) -> Vec<Vec<u8>> {
    let mut words = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(words.len() * 3);
        for w in &words {
            for code in 0..4u8 {
                if w.last() != Some(&(code ^ 1)) {
                    let mut v = w.clone();
                    v.push(code);
                    next.push(v);
                }
            }
        }
        words = next;
    }
    words
}

fn word_from_codes(codes: &[u8]) -> BraidWord {
    BraidWord::new(codes.iter().map(|&c| BraidGenerator::from_code(c)).collect())
}

/// Exhaustive search over freely reduced words of length at most
/// `max_length`. Ties go to the shorter, then lexicographically smaller word
/// (letter order `s1 < s1inv < s2 < s2inv`).
pub fn brute_force_search(target: &GateTarget, max_length: usize, metric: Metric) -> SearchResult {
    let scorer = Scorer::new(&target.matrix, metric);
    let split = max_length.min(3);

    // Words shorter than the split depth are scored serially.
    let mut best = Best::none();
    let mut scored = 0u64;
    for len in 0..split {
        for codes in reduced_words(len) {
            let (s, e) = codes.iter().fold((Su2::IDENTITY, 0), |(s, e), &c| {
                (s.mul(scorer.gens[c as usize]), e + letter_exponent(c))
            });
            best.offer(scorer.score(s, e), &codes);
            scored += 1;
        }
    }
    let prefixes = reduced_words(split);
    let (tail_best, tail_scored) = prefixes
        .into_par_iter()
        .map(|prefix| {
            let (s, e) = prefix.iter().fold((Su2::IDENTITY, 0), |(s, e), &c| {
                (s.mul(scorer.gens[c as usize]), e + letter_exponent(c))
            });
            let mut dfs = Dfs {
                scorer: &scorer,
                max_len: max_length,
                path: prefix,
                best: Best::none(),
                scored: 0,
            };
            dfs.visit(s, e);
            (dfs.best, dfs.scored)
        })
        .reduce(
            || (Best::none(), 0),
            |(a, n), (b, m)| (a.merge(b), n + m),
        );
    let best = best.merge(tail_best);
    SearchResult::from_word(
        word_from_codes(&best.codes),
        best.value,
        target,
        metric,
        scored + tail_scored,
        None,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitmConfig {
    pub half_length: usize,
    /// Initial match radius, doubled until a candidate pair is found.
    pub bucket_tol: f64,
    pub memory_budget_bytes: usize,
}

impl Default for MitmConfig {
    fn default() -> Self {
        Self {
            half_length: 12,
            bucket_tol: 1e-2,
            memory_budget_bytes: 1 << 30,
        }
    }
}

/// Conservative footprint of one table entry, including hash-map overhead.
pub const BYTES_PER_HALF_WORD: usize = 200;

struct HalfWord {
    su2: Su2,
    exponent: i32,
    codes: Vec<u8>,
}

/// Identity of a half-word's matrix: projective for the phase-invariant
/// metric, exact otherwise. `(q, e)` and `(-q, e + 10)` are the same matrix.
fn matrix_key(s: Su2, exponent: i32, metric: Metric) -> ([i64; 4], i32) {
    let mut q = s.quat();
    let mut e = exponent;
    if q.iter().find(|x| x.abs() > 1e-9).is_some_and(|&x| x < 0.0) {
        q = q.map(|x| -x);
        e += 10;
    }
    let e = match metric {
        Metric::PhaseInvariant => 0,
        Metric::Strict => e.rem_euclid(20),
    };
    (q.map(|x| (x * 1e9).round() as i64), e)
}

/// Shortest (then lexicographically first) freely reduced word for each
/// distinct matrix reachable in at most `h` letters. Stops early, returning
/// the length actually covered, if the next level would exceed the budget.
fn half_words(scorer: &Scorer, h: usize, budget_bytes: usize) -> (Vec<HalfWord>, usize) {
    let mut out = vec![HalfWord {
        su2: Su2::IDENTITY,
        exponent: 0,
        codes: Vec::new(),
    }];
    let mut seen = HashSet::new();
    seen.insert(matrix_key(Su2::IDENTITY, 0, scorer.metric));
    let mut frontier = 0..1;
    for level in 0..h {
        let start = out.len();
        for i in frontier.clone() {
            for code in 0..4u8 {
                if out[i].codes.last() == Some(&(code ^ 1)) {
                    continue;
                }
                let su2 = out[i].su2.mul(scorer.gens[code as usize]);
                let exponent = out[i].exponent + letter_exponent(code);
                if seen.insert(matrix_key(su2, exponent, scorer.metric)) {
                    let mut codes = out[i].codes.clone();
                    codes.push(code);
                    out.push(HalfWord {
                        su2,
                        exponent,
                        codes,
                    });
                }
            }
            if out.len() * BYTES_PER_HALF_WORD > budget_bytes {
                out.truncate(start);
                return (out, level);
            }
        }
        frontier = start..out.len();
    }
    (out, h)
}

fn cell(q: &[f64; 4], size: f64) -> [i32; 4] {
    q.map(|x| (x / size).floor() as i32)
}

/// Cells of side `2 r` meeting the ball of radius `r` around `q`: per axis,
/// the home cell plus at most the one neighbour lying within `r`.
fn probe_cells(q: &[f64; 4], r: f64) -> Vec<[i32; 4]> {
    let size = 2.0 * r;
    let mut cells = vec![cell(q, size)];
    for axis in 0..4 {
        let x = q[axis] / size;
        let home = x.floor();
        let step = if (x - home) * size <= r {
            -1
        } else if (home + 1.0 - x) * size <= r {
            1
        } else {
            continue;
        };
        let n = cells.len();
        for k in 0..n {
            let mut c = cells[k];
            c[axis] += step;
            cells.push(c);
        }
    }
    cells
}

/// Meet-in-the-middle search over words `u v` with `|u|, |v| <= half_length`.
///
/// Half-words are deduplicated by matrix and hashed by their SU(2)
/// quaternion on a grid whose cell is twice the match radius; for each left half
/// `u` the cells around `+-q(u^dagger T)` are probed and every hit is
/// re-scored exactly on the concatenated word. If nothing lies within the
/// radius it is doubled, so the result is the optimum over the search space.
/// Falls back to a shorter half length when the table would exceed the
/// memory budget.
pub fn mitm_search(target: &GateTarget, config: &MitmConfig, metric: Metric) -> SearchResult {
    let scorer = Scorer::new(&target.matrix, metric);
    let (halves, h) = half_words(&scorer, config.half_length, config.memory_budget_bytes);
    if h < config.half_length {
        log::warn!(
            "half length {} exceeds the memory budget; using {h}",
            config.half_length
        );
    }
    log::debug!("{} distinct half-words up to length {h}", halves.len());
    let target_su2 = scorer.target_su2;

    let mut tol = config.bucket_tol.max(1e-12);
    loop {
        let mut grid: HashMap<[i32; 4], Vec<u32>> = HashMap::new();
        for (i, w) in halves.iter().enumerate() {
            grid.entry(cell(&w.su2.quat(), 2.0 * tol)).or_default().push(i as u32);
        }
        let (best, scored) = halves
            .par_iter()
            .map(|left| {
                let mut best = Best::none();
                let mut scored = 0u64;
                let want = left.su2.adjoint().mul(target_su2).quat();
                for sign in [1.0, -1.0] {
                    let q = want.map(|x| sign * x);
                    for probe in probe_cells(&q, tol) {
                        let Some(bucket) = grid.get(&probe) else {
                            continue;
                        };
                        for &j in bucket {
                            let right = &halves[j as usize];
                            if quat_distance(&right.su2.quat(), &want) > tol {
                                continue;
                            }
                            scored += 1;
                            let v = scorer.score(
                                left.su2.mul(right.su2),
                                left.exponent + right.exponent,
                            );
                            if v > best.value {
                                continue;
                            }
                            // Junction cancellation only matters for the tie-break.
                            let mut codes = left.codes.clone();
                            codes.extend_from_slice(&right.codes);
                            best.offer(v, &word_from_codes(&codes).codes());
                        }
                    }
                }
                (best, scored)
            })
            .reduce(
                || (Best::none(), 0),
                |(a, n), (b, m)| (a.merge(b), n + m),
            );
        // A strict-metric winner above the radius may be beaten by a pair
        // outside it, so widen until the radius covers the winner.
        if best.value <= tol {
            return SearchResult::from_word(
                word_from_codes(&best.codes),
                best.value,
                target,
                metric,
                scored,
                Some(h),
            );
        }
        tol = if best.value.is_finite() {
            best.value * (1.0 + 1e-9)
        } else {
            tol * 2.0
        };
        log::debug!("widening match radius to {tol:e}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

    fn close(a: &Matrix2<C64>, b: &Matrix2<C64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn representation_is_unitary_with_order_ten() {
        let (s1, s2) = fibonacci_rep();
        for m in [s1, s2] {
            assert!(close(&(m.adjoint() * m), &Matrix2::identity(), 1e-12));
            let mut p = Matrix2::identity();
            for _ in 0..10 {
                p *= m;
            }
            assert!(close(&p, &Matrix2::identity(), 1e-12));
            assert!((m.determinant().norm() - 1.0).abs() < 1e-12);
        }
        assert!((s1[(0, 0)] - C64::from_polar(1.0, -4.0 * PI / 5.0)).norm() < 1e-15);
        assert!((s1[(1, 1)] - C64::from_polar(1.0, 3.0 * PI / 5.0)).norm() < 1e-15);
    }

    #[test]
    fn yang_baxter() {
        let (s1, s2) = fibonacci_rep();
        assert!(close(&(s1 * s2 * s1), &(s2 * s1 * s2), 1e-12));
        let f = fusion_matrix();
        assert!(close(&(f * f), &Matrix2::identity(), 1e-12));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(&BraidWord::identity()), Matrix2::identity());
        // reduction cancels the pair
        let w = BraidWord::parse("s1 s1inv").unwrap();
        assert!(w.is_empty());
        let unreduced = product(&[BraidGenerator::S1, BraidGenerator::S1_INV]);
        assert!(close(&unreduced, &Matrix2::identity(), 1e-15));
        let w = BraidWord::new(vec![BraidGenerator::S1; 10]);
        assert!(close(w.matrix(), &Matrix2::identity(), 1e-12));
    }

    #[test]
    fn reduction_is_complete() {
        let w = BraidWord::parse("s2 s1 s1inv s2inv s1").unwrap();
        assert_eq!(w.to_string(), "s1");
        assert!(BraidWord::parse("s3").is_err());
    }

    #[test]
    fn word_serde_roundtrip() {
        let w = BraidWord::parse("s1 s2inv s2inv s1inv").unwrap();
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"["s1","s2inv","s2inv","s1inv"]"#);
        let back: BraidWord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn distance_examples() {
        let id = Matrix2::<C64>::identity();
        assert_eq!(strict_distance(&id, &id), 0.0);
        assert!((strict_distance(&id, &(-id)) - 2.0).abs() < 1e-15);
        assert!(phase_distance(&id, &(-id)) < 1e-15);
        for phi in [0.1, 1.0, 2.5, PI] {
            let d = Matrix2::new(
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, phi),
            );
            assert!((strict_distance(&id, &d) - 2.0 * (phi / 2.0).sin().abs()).abs() < 1e-14);
            // best phase splits the difference: 2 sin(phi/4)
            assert!((phase_distance(&id, &d) - 2.0 * (phi / 4.0).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_target_gives_empty_word() {
        let t = GateTarget::unitary(Matrix2::identity()).unwrap();
        for metric in [Metric::PhaseInvariant, Metric::Strict] {
            let r = brute_force_search(&t, 5, metric);
            assert!(r.word.is_empty());
            assert_eq!(r.distance, 0.0);
        }
    }

    #[test]
    fn recovers_word_in_search_space() {
        let w = BraidWord::parse("s2 s1").unwrap();
        let t = GateTarget::unitary(*w.matrix()).unwrap();
        let r = brute_force_search(&t, 4, Metric::Strict);
        assert!(r.distance <= 1e-12, "{}", r.distance);
        assert!(close(r.word.matrix(), w.matrix(), 1e-12));
    }

    #[test]
    fn brute_force_is_monotone() {
        let t = GateTarget::u_theta(FRAC_PI_6);
        let mut prev = f64::INFINITY;
        for len in 0..=8 {
            let r = brute_force_search(&t, len, Metric::PhaseInvariant);
            assert!(r.distance <= prev);
            assert!(r.word.len() <= len);
            prev = r.distance;
        }
    }

    #[test]
    fn mitm_matches_brute_force_on_small_budget() {
        for theta in [FRAC_PI_6, -FRAC_PI_3] {
            let t = GateTarget::u_theta(theta);
            for metric in [Metric::PhaseInvariant, Metric::Strict] {
                let bf = brute_force_search(&t, 8, metric);
                let cfg = MitmConfig {
                    half_length: 4,
                    ..Default::default()
                };
                let mm = mitm_search(&t, &cfg, metric);
                assert!(mm.distance <= bf.distance + 1e-12, "{} > {}", mm.distance, bf.distance);
                assert!(mm.word.len() <= 8);
            }
        }
    }

    #[test]
    fn memory_budget_fallback() {
        // 1, 5, 17, 42, 90 distinct projective elements up to lengths 0..=4
        let cfg = MitmConfig {
            half_length: 6,
            bucket_tol: 1e-2,
            memory_budget_bytes: 60 * BYTES_PER_HALF_WORD,
        };
        let r = mitm_search(&GateTarget::u_theta(0.3), &cfg, Metric::PhaseInvariant);
        assert_eq!(r.half_length, Some(3));
        assert!(r.word.len() <= 6);
    }

    #[test]
    fn word_counts() {
        let counts: Vec<usize> = (0..=4).map(|l| reduced_words(l).len()).collect();
        assert_eq!(counts, vec![1, 4, 12, 36, 108]);
        let scorer = Scorer::new(&Matrix2::identity(), Metric::PhaseInvariant);
        let (halves, h) = half_words(&scorer, 4, usize::MAX);
        assert_eq!((halves.len(), h), (90, 4));
    }
}
