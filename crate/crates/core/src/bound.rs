//! The transfer-matrix bound on the weighted contour series.
//!
//! For weights `p > 1, q ≥ 1` the generating sums `G_r(n)` of nice paths obey
//! `G(n+2) ≤ G(n) M` (row vector times matrix), so the full series is
//! bounded by `(G(1) + G(2)) (I − M)^{-1} 1` whenever the Perron root of `M`
//! is below one. Multiplying by `p^{-2m}` bounds the probability that `m`
//! consecutive cells are all 0, and choosing `m` large enough pushes that
//! bound below one, which rules out convergence to the all-zeros measure.

use crate::contours::{generating_sum, initial_table, s_table_recurrence};
use crate::{check_probability, Error, Result, PHI};

/// Slack allowed when testing membership of the admissible region.
pub const REGION_TOL: f64 = 1e-12;
/// Default eigen-solver tolerance.
pub const EIGEN_TOL: f64 = 1e-12;
/// Default power-iteration cap.
pub const MAX_ITERATIONS: usize = 100_000;
/// A certificate needs `λ_pf < 1 − CERTIFY_MARGIN`.
pub const CERTIFY_MARGIN: f64 = 1e-9;

/// Upper end of the admissible `q` range, `1 / √(p(p−1))`.
pub fn q_max(p: f64) -> f64 {
    1.0 / libm::sqrt(p * (p - 1.0))
}

/// Weights `(p, q)` of the generating sums at erasure probability α.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratingParams {
    p: f64,
    q: f64,
    alpha: f64,
}

impl GeneratingParams {
    /// Checks `p ∈ (1, φ]` and `1 ≤ q ≤ 1/√(p(p−1))`.
    pub fn new(p: f64, q: f64, alpha: f64) -> Result<Self> {
        check_probability("alpha", alpha)?;
        if !(p > 1.0 && p <= PHI + REGION_TOL) {
            return Err(Error::Parameter { name: "p", reason: "must lie in (1, (1+√5)/2]" });
        }
        if !(q >= 1.0 - REGION_TOL && q <= q_max(p) + REGION_TOL) {
            return Err(Error::Parameter { name: "q", reason: "must lie in [1, 1/√(p(p−1))]" });
        }
        Ok(Self { p, q, alpha })
    }

    /// The point of the region boundary `q = 1/√(p(p−1))`.
    pub fn on_boundary(p: f64, alpha: f64) -> Result<Self> {
        Self::new(p, q_max(p), alpha)
    }

    /// `p = φ`, where the boundary value of `q` is 1.
    pub fn golden(alpha: f64) -> Result<Self> {
        Self::new(PHI, 1.0, alpha)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.p, self.q, alpha)
    }
}

/// Which matrix to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatrixVariant {
    /// The matrix used for certification. Its `21` and `23` terms are
    /// weighted `α q^{-1}` and `α q`.
    #[default]
    Standard,
    /// The same two-step recurrence with the `21` and `23` terms weighted
    /// by their actual displacement, `α p q^{-1}` and `α p q`.
    ShiftConsistent,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    entries: [[f64; 3]; 3],
}

impl TransferMatrix {
    pub fn new(entries: [[f64; 3]; 3]) -> Result<Self> {
        if entries.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Parameter { name: "entries", reason: "matrix must be finite and nonnegative" });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.entries
    }

    /// Entry at 1-based `(row, col)`.
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.entries[row - 1][col - 1]
    }

    /// A copy with one 1-based entry shifted by `delta`.
    pub fn perturbed(&self, row: usize, col: usize, delta: f64) -> Self {
        let mut entries = self.entries;
        entries[row - 1][col - 1] += delta;
        Self { entries }
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.entries;
        core::array::from_fn(|c| v[0] * m[0][c] + v[1] * m[1][c] + v[2] * m[2][c])
    }

    fn mul_vec(&self, x: &[f64; 3]) -> [f64; 3] {
        let m = &self.entries;
        core::array::from_fn(|r| m[r][0] * x[0] + m[r][1] * x[1] + m[r][2] * x[2])
    }
}

pub fn build_matrix(gp: &GeneratingParams) -> TransferMatrix {
    build_matrix_variant(gp, MatrixVariant::Standard)
}

pub fn build_matrix_variant(gp: &GeneratingParams, variant: MatrixVariant) -> TransferMatrix {
    let GeneratingParams { p, q, alpha: a } = *gp;
    let p2 = p * p;
    let p4 = p2 * p2;
    let turn = match variant {
        MatrixVariant::Standard => 1.0,
        MatrixVariant::ShiftConsistent => p,
    };
    let first = 1.0 / (p2 * q * q) + a * turn / q;
    let top_mid = a * p / q + a * a * p4;
    let centre = top_mid + a * p * q;
    let last = a * turn * q + q * q / p2;
    let bottom_mid = a * a * p4 + a * p * q;
    TransferMatrix { entries: [[first, top_mid, 0.0], [first, centre, last], [0.0, bottom_mid, last]] }
}

/// Diagnostics of one Perron-root computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralReport {
    /// Midpoint of the final Collatz–Wielandt bracket.
    pub lambda: f64,
    pub iterations: usize,
    /// Largest real root of the characteristic cubic, Newton-polished.
    pub cubic_root: f64,
    /// Rounding-error radius of `cubic_root`.
    pub cubic_uncertainty: f64,
}

/// Perron root of a nonnegative 3×3 matrix to within `tol`.
pub fn spectral_radius(m: &TransferMatrix, tol: f64) -> Result<f64> {
    spectral_report(m, tol, MAX_ITERATIONS).map(|r| r.lambda)
}

/// Collatz–Wielandt iteration, cross-checked against the characteristic
/// cubic.
///
/// For a positive iterate `x`, `min_i (Mx)_i / x_i ≤ λ_pf ≤ max_i (Mx)_i / x_i`;
/// iteration stops once the bracket is narrower than `tol`. Components that
/// have decayed below `1e-14` of the largest one are deflated out of the
/// bracket, which lets reducible matrices converge. The first
/// `POWER_PHASE` steps are power iteration (on `M + I` when a diagonal entry
/// is zero, to break periodicity); after that the iterate is driven by
/// `(σI − M)^{-1}` with `σ` just above the cubic's largest root, which
/// separates nearly equal eigenvalues.
pub fn spectral_report(m: &TransferMatrix, tol: f64, max_iterations: usize) -> Result<SpectralReport> {
    const POWER_PHASE: usize = 200;
    if !(tol > 0.0) {
        return Err(Error::Parameter { name: "tol", reason: "must be positive" });
    }
    TransferMatrix::new(m.entries)?;
    let (cubic_root, cubic_uncertainty) = largest_cubic_root(m);
    let shift = if (0..3).any(|k| m.entries[k][k] == 0.0) { 1.0 } else { 0.0 };
    let gap = (2.0 * cubic_uncertainty).max(1e-9 * libm::fabs(cubic_root).max(1e-3));
    let sigma = cubic_root + gap;
    let resolvent: [[f64; 3]; 3] =
        core::array::from_fn(|r| core::array::from_fn(|c| if r == c { sigma } else { 0.0 } - m.entries[r][c]));
    // The adjugate is a positive multiple of the inverse and keeps the zero
    // pattern of M exact, where elimination leaves rounding noise.
    let adj = adjugate(&resolvent);

    let mut x = [1.0 / 3.0; 3];
    let mut found = None;
    for k in 0..max_iterations {
        let y = m.mul_vec(&x);
        let top = x.iter().copied().fold(0.0, f64::max);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for r in 0..3 {
            if x[r] > 1e-14 * top {
                let ratio = y[r] / x[r];
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        if hi - lo <= tol {
            found = Some((0.5 * (lo + hi), k + 1));
            break;
        }
        let z: [f64; 3] = if k < POWER_PHASE {
            core::array::from_fn(|r| y[r] + shift * x[r])
        } else {
            core::array::from_fn(|r| libm::fabs(adj[r][0] * x[0] + adj[r][1] * x[1] + adj[r][2] * x[2]))
        };
        let norm = z[0] + z[1] + z[2];
        if !(norm > 0.0) {
            found = Some((0.0, k + 1));
            break;
        }
        x = z.map(|v| v / norm);
    }
    let (lambda, iterations) = found.ok_or(Error::Numeric("power iteration did not converge"))?;
    if (lambda - cubic_root).abs() > 10.0 * tol + cubic_uncertainty {
        return Err(Error::Numeric("power iteration and characteristic cubic disagree"));
    }
    Ok(SpectralReport { lambda, iterations, cubic_root, cubic_uncertainty })
}

/// Largest real root of `det(λI − M)` and its rounding radius.
fn largest_cubic_root(m: &TransferMatrix) -> (f64, f64) {
    let e = &m.entries;
    let trace = e[0][0] + e[1][1] + e[2][2];
    let minors2 = e[0][0] * e[1][1] - e[0][1] * e[1][0] + e[0][0] * e[2][2] - e[0][2] * e[2][0] + e[1][1] * e[2][2]
        - e[1][2] * e[2][1];
    let det = determinant(e);
    // λ³ + a λ² + b λ + c
    let (a, b, c) = (-trace, minors2, -det);
    let poly = |x: f64| ((x + a) * x + b) * x + c;
    let deriv = |x: f64| (3.0 * x + 2.0 * a) * x + b;

    let scale = |x: f64| {
        let r = libm::fabs(x);
        r * r * r + libm::fabs(a) * r * r + libm::fabs(b) * r + libm::fabs(c)
    };
    let polish = |mut x: f64| {
        for _ in 0..8 {
            let d = deriv(x);
            if d == 0.0 {
                break;
            }
            let next = x - poly(x) / d;
            if !(libm::fabs(poly(next)) < libm::fabs(poly(x))) {
                break;
            }
            x = next;
        }
        x
    };

    // Cardano gives the simple root when the discriminant is near zero, so
    // the trigonometric form is tried too and both are polished.
    let shift = a / 3.0;
    let pp = b - a * a / 3.0;
    let qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = qq * qq / 4.0 + pp * pp * pp / 27.0;
    let s = libm::sqrt(disc.max(0.0));
    let cardano = libm::cbrt(-qq / 2.0 + s) + libm::cbrt(-qq / 2.0 - s) - shift;
    let trig = if pp < 0.0 {
        let r = libm::sqrt(-pp / 3.0);
        let arg = (3.0 * qq / (2.0 * pp) * libm::sqrt(-3.0 / pp)).clamp(-1.0, 1.0);
        Some(2.0 * r * libm::cos(libm::acos(arg) / 3.0) - shift)
    } else {
        None
    };
    let residual = |x: f64| libm::fabs(poly(x)) + 8.0 * f64::EPSILON * scale(x);
    let accepted = |x: f64| libm::fabs(poly(x)) <= 64.0 * f64::EPSILON * scale(x).max(f64::MIN_POSITIVE);
    let mut root = polish(cardano);
    if let Some(t) = trig.map(polish) {
        root = match (accepted(root), accepted(t)) {
            (true, true) => root.max(t),
            (false, true) => t,
            (true, false) => root,
            (false, false) if residual(t) < residual(root) => t,
            _ => root,
        };
    }
    let res = residual(root);
    let linear = res / libm::fabs(deriv(root)).max(f64::MIN_POSITIVE);
    let curvature = libm::fabs(6.0 * root + 2.0 * a).max(f64::MIN_POSITIVE);
    let quadratic = libm::sqrt(2.0 * res / curvature);
    (root, linear.min(quadratic))
}

fn adjugate(e: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let cof = |r: usize, c: usize| {
        let (r0, r1) = ((r + 1) % 3, (r + 2) % 3);
        let (c0, c1) = ((c + 1) % 3, (c + 2) % 3);
        e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0]
    };
    core::array::from_fn(|r| core::array::from_fn(|c| cof(c, r)))
}

fn determinant(e: &[[f64; 3]; 3]) -> f64 {
    e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
}

/// Closed form of `λ_pf` for the standard matrix at `p = φ, q = 1`.
pub fn lambda_closed_form(alpha: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    let s5 = libm::sqrt(5.0);
    let a = alpha;
    let (a2, a3, a4) = (a * a, a * a * a, a * a * a * a);
    let f = 14.0 + 28.0 * a2 * s5 + 72.0 * a2 + 94.0 * a4 + 4.0 * a * s5 + 4.0 * a - 6.0 * s5
        + 172.0 * a3
        + 76.0 * a3 * s5
        + 42.0 * a4 * s5;
    if f < 0.0 {
        return Err(Error::Domain("negative discriminant in closed-form eigenvalue"));
    }
    Ok(0.25 * (2.0 * a * s5 + 3.0 * a2 * s5 + 7.0 * a2 + 4.0 * a + 3.0 - s5) + libm::sqrt(f) / 4.0)
}

/// Leading principal minors of `I − M`.
pub fn leading_minors(m: &TransferMatrix) -> [f64; 3] {
    let e = &m.entries;
    let d: [[f64; 3]; 3] = core::array::from_fn(|r| core::array::from_fn(|c| if r == c { 1.0 } else { 0.0 } - e[r][c]));
    [d[0][0], d[0][0] * d[1][1] - d[0][1] * d[1][0], determinant(&d)]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinorReport {
    pub minors: [f64; 3],
    /// The shortcut condition `1 − p^{-2} q^{-2} − α p^{-1}`. It differs
    /// from the first minor, which carries `α q^{-1}`.
    pub shortcut_inequality: f64,
    /// `1 − M_11`, the first minor written out, `1 − p^{-2} q^{-2} − α q^{-1}`.
    pub first_minor: f64,
}

impl MinorReport {
    pub fn all_positive(&self) -> bool {
        self.minors.iter().all(|&d| d > 0.0)
    }
}

pub fn dominant_minors(gp: &GeneratingParams) -> MinorReport {
    let m = build_matrix(gp);
    let minors = leading_minors(&m);
    let GeneratingParams { p, q, alpha } = *gp;
    MinorReport { minors, shortcut_inequality: 1.0 - 1.0 / (p * p * q * q) - alpha / p, first_minor: minors[0] }
}

/// `G(1)` and `G(2)` from the exact path tables.
pub fn first_levels(gp: &GeneratingParams) -> [[f64; 3]; 2] {
    let levels = s_table_recurrence(2).expect("two levels");
    debug_assert_eq!(levels[0], initial_table());
    let g = |k: usize| generating_sum(&levels[k], gp.p, gp.q, gp.alpha);
    [g(0), g(1)]
}

/// Upper bound on `Σ_{n≥1} (G_1 + G_2 + G_3)(n)` with the given matrix.
pub fn series_total_with(gp: &GeneratingParams, m: &TransferMatrix, tol: f64) -> Result<f64> {
    let lambda = spectral_radius(m, tol)?;
    if !(lambda < 1.0) {
        return Err(Error::SeriesDivergent { lambda });
    }
    let [g1, g2] = first_levels(gp);
    let start: [f64; 3] = core::array::from_fn(|k| g1[k] + g2[k]);
    let e = &m.entries;
    let a: [[f64; 3]; 3] = core::array::from_fn(|r| core::array::from_fn(|c| if r == c { 1.0 } else { 0.0 } - e[r][c]));
    let x = solve3(a, [1.0; 3]).ok_or(Error::Numeric("I − M is singular"))?;
    Ok(start[0] * x[0] + start[1] * x[1] + start[2] * x[2])
}

/// The series bound for the standard matrix.
pub fn series_bound(gp: &GeneratingParams) -> Result<f64> {
    series_total_with(gp, &build_matrix(gp), EIGEN_TOL)
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, &y) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *x -= f * y;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Smallest `m ≥ 1` with `p^{-2m} · series_total < 1`.
pub fn find_m_threshold(p: f64, series_total: f64) -> Result<u32> {
    if !(p > 1.0) || !series_total.is_finite() {
        return Err(Error::Parameter { name: "p", reason: "need p > 1 and a finite series total" });
    }
    let mut m = 1u32;
    let mut bound = series_total / (p * p);
    while !(bound < 1.0) {
        m += 1;
        bound /= p * p;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub eigen_tol: f64,
    pub certify_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eigen_tol: EIGEN_TOL, certify_margin: CERTIFY_MARGIN }
    }
}

/// A checked witness that the series bound is finite and drops below one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub params: GeneratingParams,
    pub lambda_pf: f64,
    pub minors: [f64; 3],
    pub series_total: f64,
    pub m_threshold: u32,
    pub tolerances: Tolerances,
}

/// Why a certificate failed re-validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mismatch {
    Lambda,
    Minors,
    SeriesTotal,
    Threshold,
    NotBelowOne,
    Recompute,
}

impl Certificate {
    /// Computes every field from `gp`; `None` when `λ_pf ≥ 1 − margin`.
    pub fn issue(gp: &GeneratingParams, tolerances: Tolerances) -> Result<Option<Self>> {
        let m = build_matrix(gp);
        let lambda_pf = spectral_radius(&m, tolerances.eigen_tol)?;
        if !(lambda_pf < 1.0 - tolerances.certify_margin) {
            return Ok(None);
        }
        let minors = leading_minors(&m);
        if !minors.iter().all(|&d| d > 0.0) {
            return Err(Error::Numeric("λ_pf < 1 but a leading minor of I − M is not positive"));
        }
        let series_total = series_total_with(gp, &m, tolerances.eigen_tol)?;
        let m_threshold = find_m_threshold(gp.p, series_total)?;
        Ok(Some(Self { params: *gp, lambda_pf, minors, series_total, m_threshold, tolerances }))
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    /// `p^{-2m} · series_total` at the threshold `m`.
    pub fn bound_at_threshold(&self) -> f64 {
        self.bound_at(self.m_threshold)
    }

    pub fn bound_at(&self, m: u32) -> f64 {
        self.series_total * libm::pow(self.params.p, -2.0 * f64::from(m))
    }

    /// Recomputes every field from `(α, p, q)` and compares bit for bit.
    pub fn revalidate(&self) -> core::result::Result<(), Mismatch> {
        let gp =
            GeneratingParams::new(self.params.p, self.params.q, self.params.alpha).map_err(|_| Mismatch::Recompute)?;
        let fresh = Self::issue(&gp, self.tolerances).map_err(|_| Mismatch::Recompute)?.ok_or(Mismatch::NotBelowOne)?;
        if fresh.lambda_pf.to_bits() != self.lambda_pf.to_bits() {
            return Err(Mismatch::Lambda);
        }
        if fresh.minors.iter().zip(&self.minors).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(Mismatch::Minors);
        }
        if fresh.series_total.to_bits() != self.series_total.to_bits() {
            return Err(Mismatch::SeriesTotal);
        }
        if fresh.m_threshold != self.m_threshold || !(self.bound_at_threshold() < 1.0) {
            return Err(Mismatch::Threshold);
        }
        Ok(())
    }
}

/// Grid used by [`certify_alpha`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSettings {
    /// Points `p_k = 1 + (φ − 1) k / p_points`, `k = 1..=p_points`.
    pub p_points: usize,
    /// Interior points `q = 1 + (q_max − 1) j / q_points`, `j = 0..q_points`,
    /// searched together with the boundary `q_max`.
    pub q_points: usize,
    pub tolerances: Tolerances,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self { p_points: 200, q_points: 16, tolerances: Tolerances::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CertifyOutcome {
    Certified(Certificate),
    /// No searched point reached `λ_pf < 1`; not a proof of ergodicity.
    NotCertified {
        best: GeneratingParams,
        lambda: f64,
    },
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            CertifyOutcome::Certified(c) => Some(c),
            CertifyOutcome::NotCertified { .. } => None,
        }
    }
}

/// Grid search of the admissible region for the smallest `λ_pf`, issuing a
/// certificate at the minimizer when possible.
pub fn certify_alpha(alpha: f64, settings: &SearchSettings) -> Result<CertifyOutcome> {
    check_probability("alpha", alpha)?;
    if alpha >= 1.0 {
        return Err(Error::Parameter { name: "alpha", reason: "must be below 1" });
    }
    if settings.p_points == 0 {
        return Err(Error::Parameter { name: "p_points", reason: "must be positive" });
    }
    let tol = settings.tolerances.eigen_tol;
    let mut best: Option<(f64, GeneratingParams)> = None;
    let mut consider = |gp: GeneratingParams| -> Result<()> {
        let lambda = spectral_radius(&build_matrix(&gp), tol)?;
        if best.is_none_or(|(l, _)| lambda < l) {
            best = Some((lambda, gp));
        }
        Ok(())
    };
    for k in 1..=settings.p_points {
        let p = if k == settings.p_points { PHI } else { 1.0 + (PHI - 1.0) * k as f64 / settings.p_points as f64 };
        let top = q_max(p).max(1.0);
        consider(GeneratingParams::new(p, top, alpha)?)?;
        for j in 0..settings.q_points {
            let q = 1.0 + (top - 1.0) * j as f64 / settings.q_points as f64;
            consider(GeneratingParams::new(p, q, alpha)?)?;
        }
    }
    let (lambda, gp) = best.expect("grid is nonempty");
    certify_or_report(&gp, lambda, settings.tolerances)
}

/// Certification at a single point.
pub fn certify_at(gp: &GeneratingParams, tolerances: Tolerances) -> Result<CertifyOutcome> {
    let lambda = spectral_radius(&build_matrix(gp), tolerances.eigen_tol)?;
    certify_or_report(gp, lambda, tolerances)
}

fn certify_or_report(gp: &GeneratingParams, lambda: f64, tolerances: Tolerances) -> Result<CertifyOutcome> {
    Ok(match Certificate::issue(gp, tolerances)? {
        Some(c) => CertifyOutcome::Certified(c),
        None => CertifyOutcome::NotCertified { best: *gp, lambda },
    })
}

/// Bisection on `[0, 0.5]` for the largest α certified at `p = φ, q = 1`.
/// Returns the certified end of the final bracket, within `tol` of the
/// supremum.
pub fn max_certified_alpha(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Parameter { name: "tol", reason: "must be positive" });
    }
    let tolerances = Tolerances::default();
    let certified = |alpha: f64| -> Result<bool> {
        Ok(certify_at(&GeneratingParams::golden(alpha)?, tolerances)?.certificate().is_some())
    };
    let (mut lo, mut hi) = (0.0, 0.5);
    if !certified(lo)? || certified(hi)? {
        return Err(Error::Numeric("bisection bracket does not straddle the threshold"));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if certified(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub params: GeneratingParams,
    pub lambda: f64,
    pub below_one: bool,
}

/// Minimizes `λ_pf` over the admissible region: golden-section search on
/// the boundary curve `q = q_max(p)`, then a compass search over `(p, s)`
/// with `q = 1 + s (q_max(p) − 1)`, started from the better of the boundary
/// optimum and `(φ, 1)`.
pub fn optimize_pq(alpha: f64) -> Result<Optimum> {
    check_probability("alpha", alpha)?;
    let lam = |p: f64, s: f64| -> Result<f64> {
        let p = p.clamp(1.0 + 1e-9, PHI);
        let top = q_max(p).max(1.0);
        let gp = GeneratingParams::new(p, 1.0 + s.clamp(0.0, 1.0) * (top - 1.0), alpha)?;
        spectral_radius(&build_matrix(&gp), EIGEN_TOL)
    };

    let inv_phi = 1.0 / PHI;
    let (mut a, mut b) = (1.0 + 1e-6, PHI);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (lam(c, 1.0)?, lam(d, 1.0)?);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = lam(c, 1.0)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = lam(d, 1.0)?;
        }
    }
    let boundary_p = 0.5 * (a + b);
    let mut candidates = [(boundary_p, 1.0, lam(boundary_p, 1.0)?), (PHI, 0.0, lam(PHI, 0.0)?)];
    candidates.sort_by(|x, y| x.2.total_cmp(&y.2));
    let (mut p, mut s, mut best) = candidates[0];

    let mut step = 0.05;
    while step > 1e-10 {
        let mut moved = false;
        for (dp, ds) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let np = (p + dp).clamp(1.0 + 1e-9, PHI);
            let ns = (s + ds).clamp(0.0, 1.0);
            let v = lam(np, ns)?;
            if v < best {
                best = v;
                p = np;
                s = ns;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    let top = q_max(p).max(1.0);
    let params = GeneratingParams::new(p, 1.0 + s * (top - 1.0), alpha)?;
    let lambda = spectral_radius(&build_matrix(&params), EIGEN_TOL)?;
    Ok(Optimum { params, lambda, below_one: lambda < 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN_AT_ZERO: f64 = 0.381_966_011_250_105_15; // (3 − √5)/2

    fn golden(alpha: f64) -> GeneratingParams {
        GeneratingParams::golden(alpha).unwrap()
    }

    #[test]
    fn region_checks() {
        assert!(GeneratingParams::new(1.0, 1.0, 0.1).is_err());
        assert!(GeneratingParams::new(1.7, 1.0, 0.1).is_err());
        assert!(GeneratingParams::new(1.5, 0.99, 0.1).is_err());
        assert!(GeneratingParams::new(1.5, q_max(1.5) + 1e-6, 0.1).is_err());
        assert!(GeneratingParams::on_boundary(1.5, 0.1).is_ok());
        assert!(GeneratingParams::new(1.5, 1.0, 1.2).is_err());
        assert!((q_max(PHI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_at_zero_alpha() {
        let m = build_matrix(&golden(0.0));
        assert!((m.at(1, 1) - GOLDEN_AT_ZERO).abs() < 1e-15);
        assert_eq!((m.at(1, 2), m.at(1, 3)), (0.0, 0.0));
        assert_eq!((m.at(2, 2), m.at(3, 2)), (0.0, 0.0));
    }

    #[test]
    fn matrix_zero_pattern() {
        for &(p, q, a) in &[(1.2, 1.5, 0.3), (PHI, 1.0, 0.11), (1.4, 1.0, 0.9)] {
            let m = build_matrix(&GeneratingParams::new(p, q, a).unwrap());
            assert_eq!((m.at(1, 3), m.at(3, 1)), (0.0, 0.0));
            assert!(m.entries().iter().flatten().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn nearly_equal_eigenvalues() {
        let (a, c) = (0.381_966_011_042_098_26, 0.381_966_011_972_333);
        let m = TransferMatrix::new([[a, 0.0, 0.0], [a, 0.0, c], [0.0, 0.0, c]]).unwrap();
        assert!((spectral_radius(&m, 1e-12).unwrap() - c).abs() < 1e-12);
    }

    #[test]
    fn diagonal_radius() {
        let m = TransferMatrix::new([[0.2, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.1]]).unwrap();
        assert!((spectral_radius(&m, 1e-12).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn radius_at_zero_alpha() {
        let l = spectral_radius(&build_matrix(&golden(0.0)), 1e-12).unwrap();
        assert!((l - GOLDEN_AT_ZERO).abs() < 1e-12);
    }

    #[test]
    fn radius_near_threshold() {
        let l = spectral_radius(&build_matrix(&golden(0.1142)), 1e-12).unwrap();
        assert!((l - 0.9995).abs() <= 5e-4, "{l}");
    }

    #[test]
    fn radius_rejects_bad_input() {
        let m = build_matrix(&golden(0.1));
        assert!(spectral_radius(&m, 0.0).is_err());
        assert!(TransferMatrix::new([[-1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]).is_err());
        // Jordan block: plain power iteration closes the bracket only like 1/k.
        let j = TransferMatrix::new([[0.5, 1.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(spectral_report(&j, 1e-12, 150), Err(Error::Numeric(_))));
        assert!((spectral_radius(&j, 1e-12).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn permutation_matrix_converges() {
        let m = TransferMatrix::new([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        assert!((spectral_radius(&m, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_values() {
        assert!((lambda_closed_form(0.0).unwrap() - GOLDEN_AT_ZERO).abs() < 1e-15);
        assert!(lambda_closed_form(0.1142).unwrap() < 1.0);
        assert!(lambda_closed_form(0.1143).unwrap() > 1.0);
        assert!(lambda_closed_form(1.5).is_err());
    }

    #[test]
    fn closed_form_matches_eigensolver() {
        for k in 0..=50 {
            let a = 0.5 * k as f64 / 50.0;
            let l = spectral_radius(&build_matrix(&golden(a)), 1e-12).unwrap();
            assert!((l - lambda_closed_form(a).unwrap()).abs() <= 1e-10, "alpha {a}");
        }
    }

    #[test]
    fn minors_examples() {
        let r = dominant_minors(&golden(0.0));
        assert!(r.all_positive());
        assert!(!dominant_minors(&golden(0.5)).all_positive());
        // At p = φ, q = 1 the shortcut inequality and the first minor differ by α(1 − 1/φ).
        let r = dominant_minors(&golden(0.1));
        assert!((r.shortcut_inequality - r.first_minor - 0.1 * (1.0 - 1.0 / PHI)).abs() < 1e-15);
    }

    #[test]
    fn series_at_zero_alpha_is_phi() {
        let s = series_bound(&golden(0.0)).unwrap();
        assert!((s - PHI).abs() < 1e-12, "{s}");
    }

    #[test]
    fn series_diverges_above_threshold() {
        assert!(matches!(series_bound(&golden(0.12)), Err(Error::SeriesDivergent { .. })));
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(find_m_threshold(PHI, 0.5).unwrap(), 1);
        assert_eq!(find_m_threshold(PHI, 10.0).unwrap(), 3);
        assert!(find_m_threshold(1.0, 10.0).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let c = Certificate::issue(&golden(0.11), Tolerances::default()).unwrap().unwrap();
        assert!(c.lambda_pf < 1.0);
        assert!(c.bound_at_threshold() < 1.0);
        assert_eq!(c.revalidate(), Ok(()));
        let mut forged = c;
        forged.series_total *= 1.0 + 1e-15;
        assert_eq!(forged.revalidate(), Err(Mismatch::SeriesTotal));
        let mut forged = c;
        forged.m_threshold += 1;
        assert_eq!(forged.revalidate(), Err(Mismatch::Threshold));
    }

    #[test]
    fn certify_examples() {
        let s = SearchSettings::default();
        let c = *certify_alpha(0.0, &s).unwrap().certificate().unwrap();
        assert!((c.lambda_pf - GOLDEN_AT_ZERO).abs() < 1e-12);
        assert_eq!(c.params.p(), PHI);
        assert!(certify_alpha(0.11, &s).unwrap().certificate().is_some());
        assert!(
            matches!(certify_alpha(0.20, &s).unwrap(), CertifyOutcome::NotCertified { lambda, .. } if lambda > 1.0)
        );
        assert!(certify_alpha(1.0, &s).is_err());
    }

    #[test]
    fn bisection_threshold() {
        let a = max_certified_alpha(1e-4).unwrap();
        assert!((a - 0.1142).abs() <= 5e-4, "{a}");
        assert!(a > 0.11 && a < 0.2945);
    }

    #[test]
    fn optimizer_examples() {
        let o = optimize_pq(0.05).unwrap();
        assert!((o.params.p() - PHI).abs() < 1e-2, "{o:?}");
        let o = optimize_pq(0.0).unwrap();
        assert!(o.lambda <= GOLDEN_AT_ZERO + 1e-12);
        for a in [0.02, 0.11, 0.3] {
            let o = optimize_pq(a).unwrap();
            assert_eq!(o.lambda, spectral_radius(&build_matrix(&o.params), EIGEN_TOL).unwrap());
            assert!(o.lambda <= spectral_radius(&build_matrix(&golden(a)), EIGEN_TOL).unwrap() + 1e-12);
        }
    }

    #[test]
    fn shift_consistent_matrix_reproduces_third_level() {
        use crate::contours::{generating_sum, s_table_recurrence};
        let levels = s_table_recurrence(3).unwrap();
        for a in [0.0, 0.05, 0.2] {
            let gp = GeneratingParams::new(1.3, 1.4, a).unwrap();
            let g1 = generating_sum(&levels[0], gp.p(), gp.q(), a);
            let g3 = generating_sum(&levels[2], gp.p(), gp.q(), a);
            let pred = build_matrix_variant(&gp, MatrixVariant::ShiftConsistent).left_mul(g1);
            for r in 0..3 {
                assert!((pred[r] - g3[r]).abs() < 1e-14, "alpha {a} r {r}");
            }
        }
    }
}
