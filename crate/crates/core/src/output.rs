//! CSV and JSON sinks. Floats are written in their shortest round-trip form.

use std::fs;
use std::path::Path;

use crate::config::SweepRow;
use crate::error::{Error, Result};
use crate::simulator::RegretCurve;
use crate::verification::SuiteOutcome;

pub const REGRET_HEADER: [&str; 5] = ["policy", "t", "mean_regret", "stderr", "runs"];
pub const SWEEP_HEADER: [&str; 4] = ["sweep_param", "sweep_value", "policy", "normalized_regret"];
pub const VERIFY_HEADER: [&str; 11] = [
    "criterion",
    "bound_name",
    "subject",
    "n",
    "param",
    "empirical",
    "bound",
    "margin",
    "stderr",
    "violation",
    "runs",
];

fn table<F>(header: &[&str], fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)
        .and_then(|()| fill(&mut w))
        .expect("writing to memory cannot fail");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// `policy,t,mean_regret,stderr,runs`, one row per policy and recorded round.
pub fn regret_csv(curve: &RegretCurve) -> String {
    table(&REGRET_HEADER, |w| {
        for row in curve.rows() {
            w.write_record([
                row.policy.to_string(),
                row.t.to_string(),
                row.mean_regret.to_string(),
                row.stderr.to_string(),
                row.runs.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// `sweep_param,sweep_value,policy,normalized_regret`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    table(&SWEEP_HEADER, |w| {
        for r in rows {
            w.write_record([
                r.sweep_param.name().to_string(),
                r.sweep_value.to_string(),
                r.policy.clone(),
                r.normalized_regret.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Every checked point of every report, tagged with its criterion id.
pub fn verify_csv(outcome: &SuiteOutcome) -> String {
    table(&VERIFY_HEADER, |w| {
        for c in &outcome.criteria {
            for r in &c.reports {
                for p in &r.points {
                    w.write_record([
                        c.id.clone(),
                        r.bound_name.clone(),
                        r.subject.clone(),
                        p.n.to_string(),
                        p.param.to_string(),
                        p.empirical.to_string(),
                        p.bound.to_string(),
                        p.margin.to_string(),
                        p.stderr.to_string(),
                        p.violation.to_string(),
                        r.runs.to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    })
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}
