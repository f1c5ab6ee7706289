//! CSV and JSON rendering.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, with `.` as decimal separator and LF line endings. Absent values
//! are empty CSV fields and `null` in JSON.

use serde::Serialize;
use std::io::Write;

use crate::error::Result;
use crate::montecarlo::SimulatedProtocol;
use crate::protocol::{ProtocolReport, ThresholdFit};
use crate::robustness::RobustnessRow;
use crate::sweep::SweepRecord;

pub const SWEEP_HEADER: [&str; 11] = [
    "vA",
    "vB",
    "d",
    "r",
    "x_sep",
    "x_th",
    "x_used",
    "nu",
    "sigma_step2",
    "sigma_step3",
    "status",
];

/// Shortest round-trip representation; scientific notation far from unity.
pub fn format_number(v: f64) -> String {
    let magnitude = v.abs();
    if v != 0.0 && v.is_finite() && !(1e-5..1e16).contains(&magnitude) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in records {
        w.write_record([
            format_number(r.v_a),
            format_number(r.v_b),
            format_number(r.d),
            format_number(r.r),
            format_opt(r.x_sep),
            format_opt(r.x_th),
            format_opt(r.x_used),
            format_opt(r.nu),
            format_opt(r.sigma_step2),
            format_opt(r.sigma_step3),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_robustness_csv<W: Write>(rows: &[RobustnessRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record([
        "epsilon",
        "nu",
        "sigma_step2",
        "sigma_step3",
        "ab_separable",
        "c_separable_step2",
        "c_separable_step3",
    ])?;
    for r in rows {
        w.write_record([
            format_number(r.epsilon),
            format_number(r.nu),
            format_number(r.sigma_step2),
            format_number(r.sigma_step3),
            r.ab_separable.to_string(),
            r.c_separable_step2.to_string(),
            r.c_separable_step3.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_threshold_csv<W: Write>(fits: &[ThresholdFit], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["step", "u", "v", "x_th", "separable_up_to", "residual"])?;
    for f in fits {
        w.write_record([
            f.step.index().to_string(),
            format_number(f.u),
            format_number(f.v),
            format_opt(f.x_th),
            format_opt(f.separable_up_to),
            format_number(f.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_key_values<W: Write>(rows: Vec<(String, String)>, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

/// Scalar summary of a report as `key,value` rows; matrices are left to JSON.
pub fn write_report_csv<W: Write>(report: &ProtocolReport, out: W) -> Result<()> {
    let p = &report.params;
    let sq = &p.squeezing;
    let mut rows: Vec<(String, String)> = vec![
        ("d".into(), format_number(sq.d)),
        ("r".into(), format_number(sq.r)),
        ("vA".into(), format_number(sq.v_a())),
        ("vB".into(), format_number(sq.v_b())),
        ("x".into(), format_number(p.x)),
        ("phi".into(), format_number(sq.phi)),
        ("delta".into(), format_number(sq.delta)),
        ("x_sep".into(), format_number(sq.x_sep)),
        ("x_th".into(), format_opt(report.x_th)),
        ("u".into(), format_number(report.threshold_step2.u)),
        ("v".into(), format_number(report.threshold_step2.v)),
        ("w".into(), format_number(report.threshold_step3.u)),
        ("z".into(), format_number(report.threshold_step3.v)),
        ("alpha".into(), format_number(report.local_states.alpha)),
        ("beta".into(), format_number(report.local_states.beta)),
        ("tau".into(), format_number(report.local_states.tau)),
        ("s".into(), format_number(report.local_states.s)),
        ("theta".into(), format_number(report.local_states.theta)),
        ("nu".into(), format_number(report.nu)),
        ("log_negativity".into(), format_number(report.log_negativity)),
        ("nu_m".into(), format_opt(report.nu_m)),
        ("sigma_step2".into(), format_number(report.sigma_step2)),
        ("sigma_step3".into(), format_number(report.sigma_step3)),
    ];
    for v in &report.verdicts {
        let key = format!("step{}.{}.{}", v.step, criterion_name(&v.verdict), v.verdict.partition);
        rows.push((format!("{key}.statistic"), format_number(v.verdict.statistic)));
        rows.push((format!("{key}.separable"), v.verdict.separable.to_string()));
    }
    for (i, flag) in report.flags.iter().enumerate() {
        rows.push((format!("flag.{i}"), flag.clone()));
    }
    write_key_values(rows, out)
}

fn criterion_name(v: &crate::separability::SeparabilityVerdict) -> &'static str {
    match v.criterion {
        crate::separability::Criterion::PsdWitness => "psd-witness",
        crate::separability::Criterion::Serafini => "serafini",
        crate::separability::Criterion::Ppt => "ppt",
    }
}

pub fn write_sample_csv<W: Write>(run: &SimulatedProtocol, out: W) -> Result<()> {
    let mut rows: Vec<(String, String)> = vec![
        ("n".into(), run.estimate.n.to_string()),
        ("stderr_scale".into(), format_number(run.estimate.stderr_scale)),
        ("deviation_gamma1".into(), format_number(run.deviation_gamma1)),
        ("deviation_gamma3".into(), format_number(run.deviation_gamma3)),
        ("nu".into(), format_number(run.simon.statistic)),
        ("ab_separable".into(), run.simon.separable.to_string()),
        ("sigma_step3".into(), format_number(run.sigma_step3)),
        ("reliable".into(), run.reliable.to_string()),
    ];
    if let Some(note) = &run.simon.note {
        rows.push(("note".into(), note.clone()));
    }
    let m = run.estimate.cm.matrix();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            rows.push((format!("gamma1[{i}][{j}]"), format_number(m[(i, j)])));
        }
    }
    write_key_values(rows, out)
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
