//! Curve records and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use quasih_core::analytics::entropy;
use serde::Serialize;

use crate::config::{Format, Scenario};
use crate::CliError;

pub const CSV_HEADER: &str = "t,p,q,entropy_H,entropy_hW";
pub const SWEEP_CSV_HEADER: &str = "sweep_param,sweep_value,t,p,q,entropy_H,entropy_hW";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_param: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
    pub t: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "entropy_H")]
    pub entropy_h: f64,
    #[serde(rename = "entropy_hW")]
    pub entropy_hw: f64,
}

/// Entropy unit for display; computation is always in nats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    fn scale(self) -> f64 {
        match self {
            Unit::Nats => 1.0,
            Unit::Bits => std::f64::consts::LOG2_E,
        }
    }
}

/// `samples + 1` records on `[0, t_max]`.
pub fn curve(s: &Scenario, unit: Unit) -> Result<Vec<CurveRecord>, CliError> {
    let traj = &s.trajectory;
    let ent = |pop: f64, t: f64| {
        entropy(pop)
            .map(|e| e * unit.scale())
            .map_err(|e| CliError::Numeric(format!("entropy at t = {t}: {e}")))
    };
    (0..=s.samples)
        .map(|i| {
            let t = s.t_max * i as f64 / s.samples as f64;
            let (p, q) = (traj.p(t), traj.q(t));
            Ok(CurveRecord {
                sweep_param: None,
                sweep_value: None,
                t,
                p,
                q,
                entropy_h: ent(p, t)?,
                entropy_hw: ent(q, t)?,
            })
        })
        .collect()
}

pub fn csv(rows: &[CurveRecord], sweep: bool) -> String {
    let mut out = String::with_capacity(rows.len() * 128);
    out.push_str(if sweep { SWEEP_CSV_HEADER } else { CSV_HEADER });
    out.push('\n');
    for r in rows {
        if sweep {
            let _ = write!(out, "{},{:.16e},", r.sweep_param.unwrap_or(""), r.sweep_value.unwrap_or(f64::NAN));
        }
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.t, r.p, r.q, r.entropy_h, r.entropy_hw);
    }
    out
}

#[derive(Serialize)]
pub struct CurveMeta<'a, C: Serialize> {
    pub command: &'static str,
    pub config: &'a C,
    pub omega: f64,
    pub t_max: f64,
    pub samples: usize,
    pub entropy_unit: Unit,
}

#[derive(Serialize)]
struct CurveDocument<'a, C: Serialize> {
    meta: CurveMeta<'a, C>,
    rows: &'a [CurveRecord],
}

pub fn json<C: Serialize>(meta: CurveMeta<'_, C>, rows: &[CurveRecord]) -> String {
    let mut s = serde_json::to_string_pretty(&CurveDocument { meta, rows }).expect("finite curve serializes");
    s.push('\n');
    s
}

pub fn render<C: Serialize>(format: Format, meta: CurveMeta<'_, C>, rows: &[CurveRecord], sweep: bool) -> String {
    match format {
        Format::Csv => csv(rows, sweep),
        Format::Json => json(meta, rows),
    }
}

/// Write to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64) -> CurveRecord {
        CurveRecord { sweep_param: None, sweep_value: None, t, p: 0.5, q: 0.25, entropy_h: 0.1, entropy_hw: 0.2 }
    }

    #[test]
    fn csv_is_round_trip_exact() {
        let t = 0.1 + 0.2;
        let text = csv(&[rec(0.0), rec(t)], false);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        lines.next();
        let cols: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[0].to_bits(), t.to_bits());
        assert!(!text.contains('\r'));
    }

    #[test]
    fn sweep_rows_carry_labels() {
        let mut r = rec(1.0);
        r.sweep_param = Some("alpha");
        r.sweep_value = Some(0.15);
        let text = csv(&[r], true);
        let line = text.lines().nth(1).unwrap();
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert_eq!(cols[0], "alpha");
        assert_eq!(cols[1].parse::<f64>().unwrap(), 0.15);
    }
}
