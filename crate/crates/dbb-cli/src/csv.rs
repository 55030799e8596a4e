//! CSV emission with a fixed column order and deterministic formatting
//! (shortest round-trip decimal via the standard float formatter, LF line
//! endings, no quoting).

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dbb_core::IterationRecord;

pub const HEADER: &str = "round,consensus_err,opt_err,ratio,grad_norm_avg,alpha_min,alpha_max,clamp_events,breach_events,bound_consensus,bound_ratio";

pub fn format_records(records: &[IterationRecord]) -> Result<String> {
    if records.is_empty() {
        bail!("no records to emit");
    }
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.round,
            r.consensus_err,
            r.opt_err,
            r.ratio,
            r.grad_norm_avg,
            r.alpha_min,
            r.alpha_max,
            r.clamp_events,
            r.breach_events,
            r.bound_consensus,
            r.bound_ratio,
        ));
    }
    Ok(out)
}

pub fn emit_csv(records: &[IterationRecord], path: &Path) -> Result<()> {
    let body = format_records(records)?;
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> IterationRecord {
        IterationRecord {
            round: 1,
            consensus_err: 0.0,
            opt_err: 0.5,
            ratio: 0.25,
            grad_norm_avg: 1.0,
            alpha_min: 0.1,
            alpha_max: 0.2,
            clamp_events: 0,
            breach_events: 1,
            bound_consensus: 3.5,
            bound_ratio: 0.9,
        }
    }

    #[test]
    fn one_record_is_two_lines() {
        let body = format_records(&[record()]).unwrap();
        let lines: Vec<_> = body.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines[1], "1,0,0.5,0.25,1,0.1,0.2,0,1,3.5,0.9");
    }

    #[test]
    fn empty_records_error() {
        assert!(format_records(&[]).is_err());
    }

    #[test]
    fn lf_only() {
        let body = format_records(&[record(), record()]).unwrap();
        assert!(!body.contains('\r'));
        assert!(body.ends_with('\n'));
    }
}
