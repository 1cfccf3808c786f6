//! Certificate JSON. Reals are written with 17 significant digits, which
//! round-trips every f64 exactly, so a parsed certificate re-validates
//! bit for bit.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use stavskaya_core::bound::{Certificate, GeneratingParams, Mismatch, Tolerances};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json(c: &Certificate) -> String {
    let mut s = String::from("{\n");
    let mut field = |name: &str, value: String| {
        let _ = writeln!(s, "  \"{name}\": {value},");
    };
    field("alpha", sig17(c.params.alpha()));
    field("p", sig17(c.params.p()));
    field("q", sig17(c.params.q()));
    field("lambda_pf", sig17(c.lambda_pf));
    field("minors", format!("[{}]", c.minors.map(sig17).join(", ")));
    field("series_total", sig17(c.series_total));
    field("m_threshold", c.m_threshold.to_string());
    field(
        "tolerances",
        format!(
            "{{\"eigen_tol\": {}, \"certify_margin\": {}}}",
            sig17(c.tolerances.eigen_tol),
            sig17(c.tolerances.certify_margin)
        ),
    );
    let _ = writeln!(s, "  \"code_version\": \"{CODE_VERSION}\"\n}}");
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    alpha: f64,
    p: f64,
    q: f64,
    lambda_pf: f64,
    minors: [f64; 3],
    series_total: f64,
    m_threshold: u32,
    tolerances: ToleranceRecord,
    code_version: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ToleranceRecord {
    eigen_tol: f64,
    certify_margin: f64,
}

/// Parses a certificate and the code version that wrote it.
pub fn from_json(text: &str) -> Result<(Certificate, String)> {
    let r: Record = serde_json::from_str(text).context("parsing certificate JSON")?;
    let params = GeneratingParams::new(r.p, r.q, r.alpha).context("certificate parameters")?;
    let cert = Certificate {
        params,
        lambda_pf: r.lambda_pf,
        minors: r.minors,
        series_total: r.series_total,
        m_threshold: r.m_threshold,
        tolerances: Tolerances { eigen_tol: r.tolerances.eigen_tol, certify_margin: r.tolerances.certify_margin },
    };
    Ok((cert, r.code_version))
}

/// Recomputes a parsed certificate from scratch.
pub fn recheck(text: &str) -> Result<std::result::Result<Certificate, Mismatch>> {
    let (cert, version) = from_json(text)?;
    if version.is_empty() {
        bail!("certificate has an empty code_version");
    }
    Ok(cert.revalidate().map(|()| cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_bitwise() {
        let gp = GeneratingParams::golden(0.11).unwrap();
        let c = Certificate::issue(&gp, Tolerances::default()).unwrap().unwrap();
        let text = to_json(&c);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in
            ["alpha", "p", "q", "lambda_pf", "minors", "series_total", "m_threshold", "tolerances", "code_version"]
        {
            assert!(value.get(key).is_some(), "{key}");
        }
        let (back, version) = from_json(&text).unwrap();
        assert_eq!(version, CODE_VERSION);
        assert_eq!(back.lambda_pf.to_bits(), c.lambda_pf.to_bits());
        assert_eq!(back.series_total.to_bits(), c.series_total.to_bits());
        assert_eq!(recheck(&text).unwrap(), Ok(back));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn tampered_certificate_fails() {
        let gp = GeneratingParams::golden(0.09).unwrap();
        let c = Certificate::issue(&gp, Tolerances::default()).unwrap().unwrap();
        let text = to_json(&c).replace(&format!("\"m_threshold\": {}", c.m_threshold), "\"m_threshold\": 1");
        assert_eq!(recheck(&text).unwrap(), Err(Mismatch::Threshold));
        assert!(from_json("{}").is_err());
    }
}
