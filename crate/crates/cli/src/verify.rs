//! Cross-module oracles.

use std::io::Write;

use anyhow::Result;
use stavskaya_core::bound::{
    build_matrix, certify_alpha, dominant_minors, lambda_closed_form, max_certified_alpha, series_bound,
    spectral_radius, CertifyOutcome, GeneratingParams, SearchSettings, EIGEN_TOL,
};
use stavskaya_core::contours::{
    compare_tables, generating_sum, s_table_recurrence, uncorrected_recurrence, Enumerator,
};
use stavskaya_core::percolation::coupled_outcome;
use stavskaya_core::process::{all_zero_at, Estimate};
use stavskaya_core::rng::{mix_seed, RngStream};

use crate::certificate;
use crate::config::VerifyConfig;
use crate::parallel::ordered_map;
use crate::Status;

pub const COUPLING_ALPHAS: [f64; 3] = [0.1, 0.3, 0.5];
pub const COUPLING_MAX_HEIGHT: i64 = 6;
pub const TABLE_BONDS: usize = 12;
pub const EIGEN_GRID: usize = 1000;
pub const FORMULA_TOL: f64 = 1e-10;
pub const LAMBDA_ZERO_TOL: f64 = 1e-12;
pub const THRESHOLD_RANGE: (f64, f64) = (0.1137, 0.1147);
pub const MC_ALPHA: f64 = 0.09;
pub const MC_TIME: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Coupling battery: every apex height `0..=6` per trial, apex position
/// varying with the trial. Returns (comparisons, mismatches).
pub fn coupling_battery(trials: u64, seed: u64) -> Result<(u64, u64)> {
    let mut total = (0, 0);
    for (ai, &alpha) in COUPLING_ALPHAS.iter().enumerate() {
        let counts = ordered_map(trials, |trial| {
            let mut rng = RngStream::new(mix_seed(seed, ai as u64), trial);
            let apex = (trial % 11) as i64 - 5;
            let mut bad = 0u64;
            for t in 0..=COUPLING_MAX_HEIGHT {
                if !coupled_outcome((apex, t), alpha, &mut rng)?.agrees() {
                    bad += 1;
                }
            }
            Ok(bad)
        })?;
        total.0 += trials * (COUPLING_MAX_HEIGHT as u64 + 1);
        total.1 += counts.iter().sum::<u64>();
    }
    Ok(total)
}

/// Worst `|closed form − eigensolver|` on the α grid and the value at 0.
/// `fault` is added to `M[1][1]` first; a failed solve counts as infinite.
pub fn formula_gap(fault: Option<f64>) -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    let mut at_zero = f64::NAN;
    for k in 0..=EIGEN_GRID {
        let alpha = 0.5 * k as f64 / EIGEN_GRID as f64;
        let mut m = build_matrix(&GeneratingParams::golden(alpha)?);
        if let Some(delta) = fault {
            m = m.perturbed(1, 1, delta);
        }
        let gap = match spectral_radius(&m, EIGEN_TOL) {
            Ok(l) => {
                if k == 0 {
                    at_zero = l;
                }
                (l - lambda_closed_form(alpha)?).abs()
            }
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(gap);
    }
    Ok((worst, at_zero))
}

/// Grid points where positivity of the minors and `λ_pf < 1` disagree.
pub fn minor_disagreements() -> Result<Vec<f64>> {
    let mut bad = Vec::new();
    for k in 0..=EIGEN_GRID {
        let alpha = 0.5 * k as f64 / EIGEN_GRID as f64;
        let gp = GeneratingParams::golden(alpha)?;
        let lambda = spectral_radius(&build_matrix(&gp), EIGEN_TOL)?;
        if dominant_minors(&gp).all_positive() != (lambda < 1.0) {
            bad.push(alpha);
        }
    }
    Ok(bad)
}

/// Monte Carlo estimate of `P(x_1 = … = x_m = 0)` at time `t`, one stream
/// per replica.
pub fn all_zero_probability(m: usize, t: usize, alpha: f64, replicas: u64, seed: u64) -> Result<Estimate> {
    let hits = ordered_map(replicas, |r| {
        let mut rng = RngStream::new(seed, r);
        Ok(all_zero_at(m, t, alpha, &mut rng)?)
    })?;
    Ok(Estimate::from_hits(hits.iter().filter(|&&h| h).count() as u64, replicas))
}

pub fn run_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let (compared, mismatches) = coupling_battery(cfg.trials, cfg.seed)?;
    checks.push(Check::new(
        "coupling",
        mismatches == 0,
        format!("{mismatches} mismatches in {compared} process/percolation comparisons"),
    ));

    let enumerated = Enumerator::default().tables(TABLE_BONDS)?;
    let recurrence = s_table_recurrence(TABLE_BONDS)?;
    let diffs = compare_tables(&enumerated, &recurrence);
    checks.push(Check::new(
        "enumeration-vs-recurrence",
        diffs.is_empty(),
        format!("{} differing entries for n <= {TABLE_BONDS}", diffs.len()),
    ));
    let uncorrected = compare_tables(&recurrence, &uncorrected_recurrence(TABLE_BONDS)?);
    let first = uncorrected.iter().map(|d| d.n).min();
    checks.push(Check::new(
        "uncorrected-transitions",
        true,
        match first {
            Some(n) => format!(
                "uncorrected transition equations depart from the path definition at n = {n} ({} entries by n = {TABLE_BONDS}); corrected recurrence in use",
                uncorrected.len()
            ),
            None => "uncorrected transition equations agree with the path definition".into(),
        },
    ));

    let (gap, at_zero) = formula_gap(cfg.inject_fault)?;
    let zero_ok = (at_zero - (3.0 - 5f64.sqrt()) / 2.0).abs() <= LAMBDA_ZERO_TOL;
    checks.push(Check::new(
        "formula-vs-eigensolver",
        gap <= FORMULA_TOL && zero_ok,
        format!("max gap {gap:e} on {} points, lambda(0) = {at_zero}", EIGEN_GRID + 1),
    ));

    let bad = minor_disagreements()?;
    checks.push(Check::new(
        "minors-vs-eigenvalue",
        bad.is_empty(),
        format!("{} disagreements on {} points", bad.len(), EIGEN_GRID + 1),
    ));

    let mut series_ok = true;
    let mut detail = String::new();
    for alpha in [0.0, 0.05] {
        let gp = GeneratingParams::golden(alpha)?;
        let total = series_bound(&gp)?;
        let mut running = 0.0;
        for level in s_table_recurrence(24)? {
            running += generating_sum(&level, gp.p(), gp.q(), alpha).iter().sum::<f64>();
            series_ok &= running <= total;
        }
        detail.push_str(&format!("alpha {alpha}: partial {running:.6} <= total {total:.6}; "));
    }
    checks.push(Check::new("series-vs-enumeration", series_ok, detail.trim_end_matches("; ").into()));

    let threshold = max_certified_alpha(1e-4)?;
    checks.push(Check::new(
        "threshold",
        (THRESHOLD_RANGE.0..=THRESHOLD_RANGE.1).contains(&threshold),
        format!("largest certified alpha {threshold}"),
    ));

    let settings = SearchSettings::default();
    let revalidated = match certify_alpha(0.11, &settings)? {
        CertifyOutcome::Certified(c) => certificate::recheck(&certificate::to_json(&c))?.is_ok(),
        CertifyOutcome::NotCertified { .. } => false,
    };
    checks.push(Check::new("certificate-0.11", revalidated, "issued, serialized and re-validated".into()));

    let mc = match certify_alpha(MC_ALPHA, &settings)? {
        CertifyOutcome::Certified(c) => {
            let est = all_zero_probability(c.m_threshold as usize, MC_TIME, MC_ALPHA, cfg.replicas, cfg.seed)?;
            let bound = c.bound_at_threshold();
            Check::new(
                "mc-vs-bound",
                est.mean <= bound + 3.0 * est.std_err,
                format!(
                    "P(all {} zero at t={MC_TIME}) = {} +- {} vs bound {bound}",
                    c.m_threshold, est.mean, est.std_err
                ),
            )
        }
        CertifyOutcome::NotCertified { lambda, .. } => {
            Check::new("mc-vs-bound", false, format!("alpha {MC_ALPHA} not certified (lambda {lambda})"))
        }
    };
    checks.push(mc);
    Ok(checks)
}

pub fn verify(cfg: &VerifyConfig, stdout: &mut dyn Write) -> Result<Status> {
    let checks = run_checks(cfg)?;
    for c in &checks {
        writeln!(stdout, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(if checks.iter().all(|c| c.passed) { Status::Success } else { Status::ChecksFailed })
}
