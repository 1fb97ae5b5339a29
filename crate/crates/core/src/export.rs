//! CSV writers for curves, detections, ROC tables and corpus summaries.
//!
//! All files use `,` as delimiter, `.` as decimal mark and LF line endings.
//! Floats are written in their shortest round-trip form so output is
//! byte-stable for identical inputs.

use std::io::Write;

use crate::error::{Error, Result};
use crate::evaluation::{CorpusSummary, RocCurve};
use crate::pipeline::PipelineOutput;

pub const CURVE_HEADER: &str = "t,D,D_filtered,P,is_alarm";

/// One row per `t` in `[N, T − N]`.
pub fn write_curve_csv<W: Write>(mut w: W, out: &PipelineOutput) -> Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    let raw = out.dissimilarity.values();
    let filtered = out.filtered.values();
    let scores = out.scores.values();
    if raw.len() != filtered.len() || raw.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: raw.len(),
            right: scores.len(),
        });
    }
    let mut alarms = out.alarms.iter().peekable();
    for (i, t) in out.dissimilarity.times().enumerate() {
        let is_alarm = alarms.next_if(|&&a| a == t).is_some();
        writeln!(
            w,
            "{t},{},{},{},{}",
            raw[i],
            filtered[i],
            scores[i],
            u8::from(is_alarm)
        )?;
    }
    Ok(())
}

pub fn write_detections_csv<W: Write>(mut w: W, alarms: &[usize]) -> Result<()> {
    writeln!(w, "t")?;
    for t in alarms {
        writeln!(w, "{t}")?;
    }
    Ok(())
}

/// Reads a detections file back: header `t`, then one time stamp per line.
pub fn read_detections_csv(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "t") {
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        let t = field.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("expected a time stamp, got '{field}'"),
        })?;
        out.push(t);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `tau,fpr,tpr` rows; the appended `(1, 1)` corner has an empty `tau`.
pub fn write_roc_csv<W: Write>(mut w: W, roc: &RocCurve) -> Result<()> {
    writeln!(w, "tau,fpr,tpr")?;
    for p in &roc.points {
        match p.tau {
            Some(tau) => writeln!(w, "{tau},{},{}", p.fpr, p.tpr)?,
            None => writeln!(w, ",{},{}", p.fpr, p.tpr)?,
        }
    }
    Ok(())
}

pub fn write_corpus_csv<W: Write>(mut w: W, names: &[String], aucs: &[f64], summary: &CorpusSummary) -> Result<()> {
    if names.len() != aucs.len() {
        return Err(Error::LengthMismatch {
            left: names.len(),
            right: aucs.len(),
        });
    }
    writeln!(w, "series,auc")?;
    for (name, auc) in names.iter().zip(aucs) {
        writeln!(w, "{name},{auc}")?;
    }
    writeln!(w, "mean,{}", summary.mean)?;
    writeln!(w, "se,{}", summary.std_error)?;
    Ok(())
}
