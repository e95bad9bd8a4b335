//! CSV and summary writers. Every CSV starts with a `# schema=` line naming
//! its fixed column layout and version.

use std::io::{self, Write};

use super::EvalCurve;
use crate::spectral::DictionaryErrors;

pub const CURVE_SCHEMA: &str = "diffwave.curve.v1";
pub const ERROR_SCHEMA: &str = "diffwave.dict-error.v1";
pub const SWEEP_SCHEMA: &str = "diffwave.sweep.v1";

/// One row of a parameter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub parameter: String,
    pub value: String,
    pub mean_error: f64,
    pub auc_025: f64,
}

/// Columns `label,threshold,fraction`.
pub fn write_curves_csv(mut out: impl Write, curves: &[(String, EvalCurve)]) -> io::Result<()> {
    writeln!(out, "# schema={CURVE_SCHEMA}")?;
    writeln!(out, "label,threshold,fraction")?;
    for (label, c) in curves {
        for (t, f) in c.thresholds.iter().zip(&c.fractions) {
            writeln!(out, "{label},{t},{f}")?;
        }
    }
    out.flush()
}

/// Columns `method,scale,l2,linf`; a final `mean` row per method.
pub fn write_errors_csv(
    mut out: impl Write,
    rows: &[(String, DictionaryErrors)],
) -> io::Result<()> {
    writeln!(out, "# schema={ERROR_SCHEMA}")?;
    writeln!(out, "method,scale,l2,linf")?;
    for (method, e) in rows {
        for ((s, l2), linf) in e.scales.iter().zip(&e.l2).zip(&e.linf) {
            writeln!(out, "{method},{s},{l2},{linf}")?;
        }
        writeln!(out, "{method},mean,{},{}", e.l2_mean, e.linf_mean)?;
    }
    out.flush()
}

/// Columns `method,parameter,value,mean_error,auc_025`.
pub fn write_sweep_csv(mut out: impl Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "# schema={SWEEP_SCHEMA}")?;
    writeln!(out, "method,parameter,value,mean_error,auc_025")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.method, r.parameter, r.value, r.mean_error, r.auc_025
        )?;
    }
    out.flush()
}

/// `key=value` lines in the given order.
pub fn write_summary(mut out: impl Write, entries: &[(String, String)]) -> io::Result<()> {
    for (k, v) in entries {
        writeln!(out, "{k}={v}")?;
    }
    out.flush()
}
