use std::fs;
use std::io::Write;

use anyhow::{bail, Context, Result};
use stavskaya_core::bound::{certify_alpha, max_certified_alpha, CertifyOutcome, SearchSettings, Tolerances};
use stavskaya_core::contours::{s_table_recurrence, uncorrected_recurrence, Enumerator, PathFamily, PathTable};
use stavskaya_core::process::{run_cone, simulate_density};
use stavskaya_core::rng::{RngStream, UniformField};

use crate::certificate;
use crate::config::{CertifyConfig, EnumerateConfig, Family, SimulateConfig, SweepConfig, TableSource};
use crate::output::{real, sink, CsvTable};
use crate::parallel::ordered_map;
use crate::Status;

fn check_replicas(replicas: u64) -> Result<()> {
    if replicas == 0 {
        bail!("--replicas must be at least 1");
    }
    Ok(())
}

/// Density trajectories, one independent stream per replica.
pub fn simulate(cfg: &SimulateConfig, stdout: &mut dyn Write) -> Result<Status> {
    check_replicas(cfg.replicas)?;
    let curves = ordered_map(cfg.replicas, |r| {
        let mut rng = RngStream::new(cfg.seed, r);
        Ok(simulate_density(cfg.m, cfg.t_max, cfg.alpha, &mut rng)?)
    })?;
    let mut table = CsvTable::new(sink(cfg.out.as_deref(), stdout)?, &["t", "replica", "density"])?;
    for (r, curve) in curves.iter().enumerate() {
        for (t, d) in curve.iter().enumerate() {
            table.row([t.to_string(), r.to_string(), real(*d)])?;
        }
    }
    table.finish()?;
    Ok(Status::Success)
}

/// Final density at every α of the grid. Replica `r` uses the same
/// uniform field at every α, so rows with equal replica are coupled.
pub fn sweep(cfg: &SweepConfig, stdout: &mut dyn Write) -> Result<Status> {
    check_replicas(cfg.replicas)?;
    if cfg.alphas.is_empty() {
        bail!("--grid needs at least one α");
    }
    let per_alpha = cfg.replicas;
    let finals = ordered_map(cfg.alphas.len() as u64 * per_alpha, |k| {
        let alpha = cfg.alphas[(k / per_alpha) as usize];
        let mut field = UniformField::new(cfg.seed, k % per_alpha);
        let c = run_cone(cfg.m, cfg.t_max, alpha, &mut field, |_, _| {})?;
        Ok(c.density_prefix(cfg.m))
    })?;
    let mut table = CsvTable::new(sink(cfg.out.as_deref(), stdout)?, &["alpha", "replica", "t_final", "density"])?;
    for (k, d) in finals.iter().enumerate() {
        let k = k as u64;
        let alpha = cfg.alphas[(k / per_alpha) as usize];
        table.row([real(alpha), (k % per_alpha).to_string(), cfg.t_max.to_string(), real(*d)])?;
    }
    table.finish()?;
    Ok(Status::Success)
}

pub fn tables_for(cfg: &EnumerateConfig) -> Result<Vec<PathTable>> {
    if cfg.bonds == 0 {
        bail!("need at least one bond");
    }
    if cfg.family == Family::SelfAvoiding && cfg.source != TableSource::Enumeration {
        bail!("the recurrences count the factor-free family only");
    }
    let family = match cfg.family {
        Family::FactorFree => PathFamily::FactorFree,
        Family::SelfAvoiding => PathFamily::SelfAvoiding,
    };
    Ok(match cfg.source {
        TableSource::Enumeration => Enumerator::with_family(family).tables(cfg.bonds)?,
        TableSource::Recurrence => s_table_recurrence(cfg.bonds)?,
        TableSource::Uncorrected => uncorrected_recurrence(cfg.bonds)?,
    })
}

/// One row per nonzero coefficient: `count` paths of `n` bonds ending with
/// type `r` at `(i, t)` with `k` horizontal bonds.
pub fn enumerate(cfg: &EnumerateConfig, stdout: &mut dyn Write) -> Result<Status> {
    let tables = tables_for(cfg)?;
    let mut table = CsvTable::new(sink(cfg.out.as_deref(), stdout)?, &["n", "r", "i", "t", "k", "count"])?;
    for level in &tables {
        for (&(r, i, t), poly) in level.entries() {
            for (k, &count) in poly.coefficients().iter().enumerate() {
                if count != 0 {
                    table.row([
                        level.bonds().to_string(),
                        r.kind().to_string(),
                        i.to_string(),
                        t.to_string(),
                        k.to_string(),
                        count.to_string(),
                    ])?;
                }
            }
        }
    }
    table.finish()?;
    Ok(Status::Success)
}

pub fn certify(cfg: &CertifyConfig, stdout: &mut dyn Write) -> Result<Status> {
    if let Some(path) = &cfg.check {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(match certificate::recheck(&text)? {
            Ok(c) => {
                writeln!(
                    stdout,
                    "certificate valid: alpha {} lambda_pf {} m {}",
                    c.alpha(),
                    c.lambda_pf,
                    c.m_threshold
                )?;
                Status::Success
            }
            Err(mismatch) => {
                writeln!(stdout, "certificate invalid: {mismatch:?} does not reproduce")?;
                Status::NotCertified
            }
        });
    }
    if cfg.max {
        let alpha = max_certified_alpha(cfg.tol)?;
        writeln!(stdout, "{alpha}")?;
        return Ok(Status::Success);
    }
    let Some(alpha) = cfg.alpha else {
        bail!("certify needs --alpha, --max or --check");
    };
    let settings = SearchSettings { p_points: cfg.p_grid, q_points: cfg.q_grid, tolerances: Tolerances::default() };
    match certify_alpha(alpha, &settings)? {
        CertifyOutcome::Certified(c) => {
            let mut out = sink(cfg.out.as_deref(), stdout)?;
            out.write_all(certificate::to_json(&c).as_bytes())?;
            out.flush()?;
            Ok(Status::Success)
        }
        CertifyOutcome::NotCertified { best, lambda } => {
            eprintln!(
                "not certified: smallest lambda_pf {lambda} at p {} q {} exceeds 1 - {}",
                best.p(),
                best.q(),
                settings.tolerances.certify_margin
            );
            Ok(Status::NotCertified)
        }
    }
}
