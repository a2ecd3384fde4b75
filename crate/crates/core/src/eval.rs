//! Procrustes-based comparison of each aligned biplot with the target
//! configuration.
//!
//! For a configuration `X` and target `T` (rows matched), `X` is first
//! aligned to `T` by the full similarity Procrustes fit, giving `A`. With
//! `D = A − T` flattened over all 2m coordinates:
//!
//! | measure | definition |
//! |---------|------------|
//! | PS   | ‖A − T‖² / ‖T − mean(T)‖² |
//! | CC   | ⟨A_c, T_c⟩ / (‖A_c‖ ‖T_c‖), centered and flattened |
//! | AMB  | mean \|D\| |
//! | MB   | mean D |
//! | RMSB | sqrt(mean D²) |

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::align::{centered, orthogonal_procrustes, AlignmentResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub level: String,
    #[serde(rename = "PS")]
    pub ps: f64,
    #[serde(rename = "CC")]
    pub cc: f64,
    #[serde(rename = "AMB")]
    pub amb: f64,
    #[serde(rename = "MB")]
    pub mb: f64,
    #[serde(rename = "RMSB")]
    pub rmsb: f64,
}

/// One record per level, in level order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvaluationReport {
    pub records: Vec<EvaluationRecord>,
}

/// Compares `config` with `target` after optimally aligning `config`.
pub fn evaluate_pair(config: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<EvaluationRecord> {
    let target_c = centered(target);
    let target_ss = target_c.norm_squared();
    if target_ss == 0.0 {
        return Err(Error::DegenerateConfiguration(
            "target configuration has zero variance".into(),
        ));
    }
    let fit = orthogonal_procrustes(config, target, true)?;
    let aligned = fit.apply(config);
    Ok(measures("", &aligned, target, target_ss))
}

pub(crate) fn measures(
    level: &str,
    aligned: &DMatrix<f64>,
    target: &DMatrix<f64>,
    target_ss: f64,
) -> EvaluationRecord {
    let diff = aligned - target;
    let count = diff.len() as f64;
    let ps = diff.norm_squared() / target_ss;

    let a_c = centered(aligned);
    let t_c = centered(target);
    let cc = (a_c.dot(&t_c) / (a_c.norm() * t_c.norm())).clamp(-1.0, 1.0);

    let amb = diff.iter().map(|d| d.abs()).sum::<f64>() / count;
    let mb = diff.sum() / count;
    let rmsb = (diff.norm_squared() / count).sqrt();
    EvaluationRecord {
        level: level.to_owned(),
        ps,
        cc,
        amb,
        mb,
        rmsb,
    }
}

/// Scores every aligned level against the alignment target.
pub fn evaluate_series(aligned: &AlignmentResult) -> Result<EvaluationReport> {
    let records = aligned
        .aligned_states
        .iter()
        .zip(&aligned.aligned_configs)
        .map(|(state, config)| {
            let mut r = evaluate_pair(config, &aligned.consensus)?;
            r.level = state.level.clone();
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport { records })
}

impl EvaluationReport {
    pub fn levels(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.level.as_str()).collect()
    }

    /// (level, PS, CC) per level.
    pub fn fit_series(&self) -> Vec<(String, f64, f64)> {
        self.records
            .iter()
            .map(|r| (r.level.clone(), r.ps, r.cc))
            .collect()
    }

    /// (level, AMB, MB, RMSB) per level.
    pub fn bias_series(&self) -> Vec<(String, f64, f64, f64)> {
        self.records
            .iter()
            .map(|r| (r.level.clone(), r.amb, r.mb, r.rmsb))
            .collect()
    }

    /// Measures as rows, one `Target vs. <level>` column per level, four
    /// decimals.
    pub fn to_table(&self) -> String {
        let headers: Vec<String> = self
            .records
            .iter()
            .map(|r| format!("Target vs. {}", r.level))
            .collect();
        let width = headers.iter().map(String::len).max().unwrap_or(0).max(7);
        let mut out = String::new();
        let _ = write!(out, "{:<6}", "");
        for h in &headers {
            let _ = write!(out, "  {h:>width$}");
        }
        out.push('\n');
        let rows: [(&str, fn(&EvaluationRecord) -> f64); 5] = [
            ("PS", |r| r.ps),
            ("CC", |r| r.cc),
            ("AMB", |r| r.amb),
            ("MB", |r| r.mb),
            ("RMSB", |r| r.rmsb),
        ];
        for (name, get) in rows {
            let _ = write!(out, "{name:<6}");
            for r in &self.records {
                // Avoid printing "-0.0000" for values that round to zero.
                let v = get(r);
                let v = if v.abs() < 5e-5 { 0.0 } else { v };
                let _ = write!(out, "  {v:>width$.4}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Internal(format!("CSV buffer: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
