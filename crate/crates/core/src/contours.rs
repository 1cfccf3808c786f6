//! Nice paths on the dual graph and their α-graded weights.
//!
//! Dual bonds come in three types:
//!
//! | type | direction | open with probability | shift     |
//! |------|-----------|-----------------------|-----------|
//! | 1    | ↙         | 1                     | (−1, −1)  |
//! | 2    | →         | α                     | (2, 0)    |
//! | 3    | ↖         | 1                     | (−1, 1)   |
//!
//! A nice path starts at the origin with a type-1 bond and never contains
//! the factors `13`, `31`, `123` or `321`. Its weight is `α^k` with `k` the
//! number of type-2 bonds. `S_r(i, t, n)` is the total weight of nice paths
//! with `n` bonds ending at `(i, t)` with last bond `r`; it is stored as an
//! exact polynomial in α.
//!
//! Two path families are supported. [`PathFamily::FactorFree`] applies only
//! the factor rules; it is the family the transition equations generate and
//! the one the transfer matrix bounds. [`PathFamily::SelfAvoiding`] also
//! rejects any revisited vertex. The two first differ at six bonds (the
//! closed triangle `112233`), and the factor-free weights dominate the
//! self-avoiding ones coefficientwise.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DualBondType {
    /// Type 1, ↙.
    Descending = 1,
    /// Type 2, →, open with probability α.
    Horizontal = 2,
    /// Type 3, ↖.
    Ascending = 3,
}

/// Open probability of a dual bond, kept symbolic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpenProbability {
    One,
    Alpha,
}

impl OpenProbability {
    pub fn eval(self, alpha: f64) -> f64 {
        match self {
            OpenProbability::One => 1.0,
            OpenProbability::Alpha => alpha,
        }
    }
}

impl DualBondType {
    pub const ALL: [DualBondType; 3] = [Self::Descending, Self::Horizontal, Self::Ascending];

    pub fn kind(self) -> u8 {
        self as u8
    }

    pub fn from_kind(kind: u8) -> Option<Self> {
        match kind {
            1 => Some(Self::Descending),
            2 => Some(Self::Horizontal),
            3 => Some(Self::Ascending),
            _ => None,
        }
    }

    pub fn shift(self) -> (i64, i64) {
        match self {
            Self::Descending => (-1, -1),
            Self::Horizontal => (2, 0),
            Self::Ascending => (-1, 1),
        }
    }

    pub fn open_probability(self) -> OpenProbability {
        match self {
            Self::Horizontal => OpenProbability::Alpha,
            _ => OpenProbability::One,
        }
    }

    pub fn weight_exponent(self) -> u32 {
        u32::from(self == Self::Horizontal)
    }
}

use DualBondType::{Ascending, Descending, Horizontal};

/// Whether `next` may follow a path whose last bonds are `before, last`.
pub fn extension_allowed(before: Option<DualBondType>, last: DualBondType, next: DualBondType) -> bool {
    match (last, next) {
        (Descending, Ascending) | (Ascending, Descending) => false,
        (Horizontal, Ascending) => before != Some(Descending),
        (Horizontal, Descending) => before != Some(Ascending),
        _ => true,
    }
}

/// Polynomial in α with nonnegative integer coefficients; `coefficients()[k]`
/// multiplies `α^k`. The zero polynomial has no coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AlphaPolynomial {
    coeffs: Vec<u64>,
}

impl AlphaPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    /// `count · α^k`.
    pub fn monomial(k: usize, count: u64) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = count;
        Self::from_coefficients(coeffs)
    }

    pub fn from_coefficients(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coefficient(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of coefficients: the number of paths the polynomial counts.
    pub fn total(&self) -> u64 {
        self.coeffs.iter().sum()
    }

    /// Multiplication by `α^k`.
    pub fn times_alpha_pow(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * alpha + c as f64)
    }

    /// Coefficientwise `self ≤ other`.
    pub fn is_dominated_by(&self, other: &Self) -> bool {
        (0..self.coeffs.len()).all(|k| self.coefficient(k) <= other.coefficient(k))
    }
}

impl AddAssign<&AlphaPolynomial> for AlphaPolynomial {
    fn add_assign(&mut self, rhs: &AlphaPolynomial) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), 0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Add for &AlphaPolynomial {
    type Output = AlphaPolynomial;
    fn add(self, rhs: &AlphaPolynomial) -> AlphaPolynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PathFamily {
    /// Factor rules only.
    #[default]
    FactorFree,
    /// Factor rules plus no revisited vertex.
    SelfAvoiding,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NicePath {
    bonds: Vec<DualBondType>,
    endpoint: (i64, i64),
    weight_exponent: u32,
}

impl NicePath {
    /// Validates a bond sequence against the rules of `family`.
    pub fn new(bonds: Vec<DualBondType>, family: PathFamily) -> Result<Self> {
        if bonds.first() != Some(&Descending) {
            return Err(Error::Parameter { name: "bonds", reason: "a nice path starts with a type-1 bond" });
        }
        for k in 1..bonds.len() {
            let before = k.checked_sub(2).map(|b| bonds[b]);
            if !extension_allowed(before, bonds[k - 1], bonds[k]) {
                return Err(Error::Parameter { name: "bonds", reason: "forbidden factor 13, 31, 123 or 321" });
            }
        }
        let path = Self::from_bonds_unchecked(bonds);
        if family == PathFamily::SelfAvoiding && !path.is_self_avoiding() {
            return Err(Error::Parameter { name: "bonds", reason: "path revisits a vertex" });
        }
        Ok(path)
    }

    fn from_bonds_unchecked(bonds: Vec<DualBondType>) -> Self {
        let endpoint = bonds.iter().fold((0, 0), |(i, t), b| (i + b.shift().0, t + b.shift().1));
        let weight_exponent = bonds.iter().map(|b| b.weight_exponent()).sum();
        Self { bonds, endpoint, weight_exponent }
    }

    pub fn bonds(&self) -> &[DualBondType] {
        &self.bonds
    }

    pub fn len(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty()
    }

    pub fn endpoint(&self) -> (i64, i64) {
        self.endpoint
    }

    pub fn weight_exponent(&self) -> u32 {
        self.weight_exponent
    }

    pub fn last(&self) -> DualBondType {
        *self.bonds.last().expect("nice paths are nonempty")
    }

    /// Visited vertices, origin first.
    pub fn vertices(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(self.bonds.len() + 1);
        let mut at = (0, 0);
        out.push(at);
        for b in &self.bonds {
            at = (at.0 + b.shift().0, at.1 + b.shift().1);
            out.push(at);
        }
        out
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut v = self.vertices();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }
}

/// Key `(r, i, t)` of one table entry.
pub type EntryKey = (DualBondType, i64, i64);

/// `S_r(i, t, n)` for one bond count `n`, nonzero entries only.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathTable {
    n: usize,
    entries: BTreeMap<EntryKey, AlphaPolynomial>,
}

impl PathTable {
    pub fn new(n: usize) -> Self {
        Self { n, entries: BTreeMap::new() }
    }

    pub fn bonds(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: DualBondType, i: i64, t: i64) -> Option<&AlphaPolynomial> {
        self.entries.get(&(r, i, t))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&EntryKey, &AlphaPolynomial)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&mut self, r: DualBondType, i: i64, t: i64, poly: &AlphaPolynomial) {
        if poly.is_zero() {
            return;
        }
        *self.entries.entry((r, i, t)).or_default() += poly;
    }

    /// Number of paths counted by the table.
    pub fn total_paths(&self) -> u64 {
        self.entries.values().map(AlphaPolynomial::total).sum()
    }

    /// `Σ_r S_r(i, t, n)` at a single vertex.
    pub fn at_vertex(&self, i: i64, t: i64) -> AlphaPolynomial {
        let mut out = AlphaPolynomial::zero();
        for r in DualBondType::ALL {
            if let Some(p) = self.get(r, i, t) {
                out += p;
            }
        }
        out
    }
}

pub const DEFAULT_ENUMERATION_CAP: usize = 14;

/// Exhaustive depth-first enumeration of nice paths.
#[derive(Clone, Copy, Debug)]
pub struct Enumerator {
    pub family: PathFamily,
    /// Largest bond count accepted.
    pub cap: usize,
    /// Prune paths with more than this many type-2 bonds.
    pub max_horizontal: Option<u32>,
}

impl Default for Enumerator {
    fn default() -> Self {
        Self { family: PathFamily::FactorFree, cap: DEFAULT_ENUMERATION_CAP, max_horizontal: None }
    }
}

impl Enumerator {
    pub fn with_family(family: PathFamily) -> Self {
        Self { family, ..Self::default() }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Parameter { name: "n", reason: "paths have at least one bond" });
        }
        if n > self.cap {
            return Err(Error::Resource { requested: n, cap: self.cap });
        }
        Ok(())
    }

    /// Calls `visit` for every admissible path with `1..=n_max` bonds,
    /// prefixes before extensions.
    pub fn for_each_path<F: FnMut(&NicePath)>(&self, n_max: usize, mut visit: F) -> Result<()> {
        self.check(n_max)?;
        let mut state = Dfs {
            family: self.family,
            max_horizontal: self.max_horizontal,
            n_max,
            bonds: vec![Descending],
            vertices: vec![(0, 0), Descending.shift()],
            horizontal: 0,
        };
        state.run(&mut visit);
        Ok(())
    }

    /// Tables for every `n = 1..=n_max` from one traversal.
    pub fn tables(&self, n_max: usize) -> Result<Vec<PathTable>> {
        let mut tables: Vec<PathTable> = (1..=n_max).map(PathTable::new).collect();
        self.for_each_path(n_max, |path| {
            let (i, t) = path.endpoint();
            let w = AlphaPolynomial::monomial(path.weight_exponent() as usize, 1);
            tables[path.len() - 1].add(path.last(), i, t, &w);
        })?;
        Ok(tables)
    }

    /// The table at exactly `n` bonds restricted to `|i|, |t| ≤ bound`.
    pub fn table(&self, n: usize, bound: i64) -> Result<PathTable> {
        self.check(n)?;
        if bound < n as i64 {
            return Err(Error::Parameter { name: "bound", reason: "window bound must be at least n" });
        }
        let mut table = PathTable::new(n);
        let mut state = Dfs {
            family: self.family,
            max_horizontal: self.max_horizontal,
            n_max: n,
            bonds: vec![Descending],
            vertices: vec![(0, 0), Descending.shift()],
            horizontal: 0,
        };
        state.run(&mut |path: &NicePath| {
            let (i, t) = path.endpoint();
            if path.len() == n && i.abs() <= bound && t.abs() <= bound {
                table.add(path.last(), i, t, &AlphaPolynomial::monomial(path.weight_exponent() as usize, 1));
            }
        });
        Ok(table)
    }
}

struct Dfs {
    family: PathFamily,
    max_horizontal: Option<u32>,
    n_max: usize,
    bonds: Vec<DualBondType>,
    vertices: Vec<(i64, i64)>,
    horizontal: u32,
}

impl Dfs {
    fn run<F: FnMut(&NicePath)>(&mut self, visit: &mut F) {
        let path = NicePath {
            bonds: self.bonds.clone(),
            endpoint: *self.vertices.last().unwrap(),
            weight_exponent: self.horizontal,
        };
        visit(&path);
        if self.bonds.len() == self.n_max {
            return;
        }
        let last = *self.bonds.last().unwrap();
        let before = self.bonds.len().checked_sub(2).map(|k| self.bonds[k]);
        let at = *self.vertices.last().unwrap();
        for next in DualBondType::ALL {
            if !extension_allowed(before, last, next) {
                continue;
            }
            let extra = next.weight_exponent();
            if self.max_horizontal.is_some_and(|cap| self.horizontal + extra > cap) {
                continue;
            }
            let to = (at.0 + next.shift().0, at.1 + next.shift().1);
            if self.family == PathFamily::SelfAvoiding && self.vertices.contains(&to) {
                continue;
            }
            self.bonds.push(next);
            self.vertices.push(to);
            self.horizontal += extra;
            self.run(visit);
            self.horizontal -= extra;
            self.vertices.pop();
            self.bonds.pop();
        }
    }
}

/// `S_r(·, ·, n)` by exhaustive enumeration of the factor-free family,
/// windowed to `|i|, |t| ≤ bound`. Endpoints satisfy `|i| ≤ 2n`, so
/// `bound = 2n` keeps every entry.
pub fn enumerate_nice_paths(n: usize, bound: i64) -> Result<PathTable> {
    Enumerator::default().table(n, bound)
}

/// The single one-bond path `1`, ending at `(−1, −1)` with weight 1.
pub fn initial_table() -> PathTable {
    let mut t = PathTable::new(1);
    t.add(Descending, -1, -1, &AlphaPolynomial::one());
    t
}

/// Tables for `n = 1..=n_max` from the transition equations written in
/// the geometry of the bond shifts:
///
/// ```text
/// S_1(i,t,n+1) = S_1(i+1,t+1,n) + α (S_1 + S_2)(i-1,t+1,n-1)
/// S_2(i,t,n+1) = α (S_1 + S_2 + S_3)(i-2,t,n)
/// S_3(i,t,n+1) = S_3(i+1,t-1,n) + α (S_2 + S_3)(i-1,t-1,n-1)
/// ```
///
/// with `S(·, ·, 0) = 0`. The second terms carry the `21` and `23` endings,
/// which must not be preceded by `3` and `1` respectively.
pub fn s_table_recurrence(n_max: usize) -> Result<Vec<PathTable>> {
    if n_max == 0 {
        return Err(Error::Parameter { name: "n_max", reason: "must be at least 1" });
    }
    let mut levels = vec![initial_table()];
    let empty = PathTable::new(0);
    while levels.len() < n_max {
        let n = levels.len();
        let cur = &levels[n - 1];
        let prev = if n >= 2 { &levels[n - 2] } else { &empty };
        let mut next = PathTable::new(n + 1);
        for (&(r, i, t), poly) in cur.entries() {
            let a = poly.times_alpha_pow(1);
            next.add(Horizontal, i + 2, t, &a);
            match r {
                Descending => next.add(Descending, i - 1, t - 1, poly),
                Ascending => next.add(Ascending, i - 1, t + 1, poly),
                Horizontal => {}
            }
        }
        for (&(r, i, t), poly) in prev.entries() {
            let a = poly.times_alpha_pow(1);
            if matches!(r, Descending | Horizontal) {
                next.add(Descending, i + 1, t - 1, &a);
            }
            if matches!(r, Horizontal | Ascending) {
                next.add(Ascending, i + 1, t + 1, &a);
            }
        }
        levels.push(next);
    }
    Ok(levels)
}

/// Tables from the uncorrected transition equations: the one-step forms
/// produce level 2, and the two-step forms, whose `21` and `23` terms read
/// `S(i, t±1, n)` instead of `S(i−1, t±1, n−1)`, produce every later level.
/// Kept to report where that system departs from the path definition.
pub fn uncorrected_recurrence(n_max: usize) -> Result<Vec<PathTable>> {
    if n_max == 0 {
        return Err(Error::Parameter { name: "n_max", reason: "must be at least 1" });
    }
    let mut levels = vec![initial_table()];
    while levels.len() < n_max {
        let n = levels.len();
        let cur = &levels[n - 1];
        let mut next = PathTable::new(n + 1);
        for (&(_, i, t), poly) in cur.entries() {
            next.add(Horizontal, i + 2, t, &poly.times_alpha_pow(1));
        }
        if n == 1 {
            for (&(r, i, t), poly) in cur.entries() {
                if matches!(r, Descending | Horizontal) {
                    next.add(Descending, i - 1, t - 1, poly);
                }
                if matches!(r, Horizontal | Ascending) {
                    next.add(Ascending, i - 1, t + 1, poly);
                }
            }
        } else {
            for (&(r, i, t), poly) in cur.entries() {
                match r {
                    Descending => next.add(Descending, i - 1, t - 1, poly),
                    Ascending => next.add(Ascending, i - 1, t + 1, poly),
                    Horizontal => {}
                }
            }
            for (&(r, i, t), poly) in levels[n - 2].entries() {
                let a = poly.times_alpha_pow(1);
                if matches!(r, Descending | Horizontal) {
                    next.add(Descending, i, t - 1, &a);
                }
                if matches!(r, Horizontal | Ascending) {
                    next.add(Ascending, i, t + 1, &a);
                }
            }
        }
        levels.push(next);
    }
    Ok(levels)
}

/// One entry on which two tables disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDiff {
    pub n: usize,
    pub key: EntryKey,
    pub left: AlphaPolynomial,
    pub right: AlphaPolynomial,
}

/// Entrywise comparison of two table sequences, level by level.
pub fn compare_tables(left: &[PathTable], right: &[PathTable]) -> Vec<TableDiff> {
    let mut diffs = Vec::new();
    for (n, (a, b)) in left.iter().zip(right).enumerate() {
        let mut keys: Vec<EntryKey> = a.entries.keys().chain(b.entries.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        for key in keys {
            let l = a.entries.get(&key).cloned().unwrap_or_default();
            let r = b.entries.get(&key).cloned().unwrap_or_default();
            if l != r {
                diffs.push(TableDiff { n: n + 1, key, left: l, right: r });
            }
        }
    }
    diffs
}

/// `(G_1, G_2, G_3)` with `G_r = Σ_i Σ_t p^i q^t S_r(i, t, n)` at one level.
pub fn generating_sum(table: &PathTable, p: f64, q: f64, alpha: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (&(r, i, t), poly) in table.entries() {
        g[r.kind() as usize - 1] += pow_i(p, i) * pow_i(q, t) * poly.eval(alpha);
    }
    g
}

pub(crate) fn pow_i(base: f64, exp: i64) -> f64 {
    libm::pow(base, exp as f64)
}

/// `Σ_{n ≤ n_max} Σ_r S_r(2m, 0, n)` as an exact polynomial.
pub fn finite_vertex_polynomial(m: u32, n_max: usize) -> Result<AlphaPolynomial> {
    if n_max > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Resource { requested: n_max, cap: DEFAULT_ENUMERATION_CAP });
    }
    let levels = s_table_recurrence(n_max)?;
    let mut out = AlphaPolynomial::zero();
    for level in &levels {
        out += &level.at_vertex(2 * i64::from(m), 0);
    }
    Ok(out)
}

/// The truncation at `n_max` bonds of the vertex bound, evaluated at α.
pub fn finite_vertex_bound(m: u32, n_max: usize, alpha: f64) -> Result<f64> {
    crate::check_probability("alpha", alpha)?;
    Ok(finite_vertex_polynomial(m, n_max)?.eval(alpha))
}
