//! CSV and summary output of a run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::{RunReport, Scheme};

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

/// `(x − base)/|base|·100`, or `None` when the base is zero.
pub fn improvement_pct(x: f64, base: f64) -> Option<f64> {
    (base != 0.0).then(|| (x - base) / base.abs() * 100.0)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Writes `sg_profit.csv`, `cp_profit.csv`, `prices.csv`, `partitions.csv`,
/// `improvement.csv` and `summary.txt` into `out_dir`, creating it if
/// needed. Returns the written paths.
pub fn write_report(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let path = out_dir.join("sg_profit.csv");
    let mut w = writer(&path)?;
    w.write_record(["slot", "scheme", "sg_profit", "revenue_term", "mismatch_term"])?;
    for r in &report.records {
        w.write_record([
            r.slot.to_string(),
            r.scheme.to_string(),
            r.sg_profit.to_string(),
            r.revenue_term.to_string(),
            r.mismatch_term.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = out_dir.join("cp_profit.csv");
    let mut w = writer(&path)?;
    w.write_record(["slot", "scheme", "provider", "profit"])?;
    for r in &report.records {
        for (i, p) in r.cp_profit.iter().enumerate() {
            w.write_record([r.slot.to_string(), r.scheme.to_string(), (i + 1).to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = out_dir.join("prices.csv");
    let mut w = writer(&path)?;
    w.write_record(["slot", "scheme", "provider", "price"])?;
    for r in &report.records {
        for (i, p) in r.prices.iter().enumerate() {
            w.write_record([r.slot.to_string(), r.scheme.to_string(), (i + 1).to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = out_dir.join("partitions.csv");
    let mut w = writer(&path)?;
    w.write_record(["slot", "scheme", "state", "partition", "probability"])?;
    for r in &report.records {
        for &(k, p) in &r.partitions {
            w.write_record([
                r.slot.to_string(),
                r.scheme.to_string(),
                k.to_string(),
                report.partition_labels[k].clone(),
                p.to_string(),
            ])?;
        }
    }
    w.flush()?;
    written.push(path);

    let baseline: Vec<_> = report.records_for(Scheme::NoCoop).collect();
    if !baseline.is_empty() {
        let path = out_dir.join("improvement.csv");
        let mut w = writer(&path)?;
        w.write_record(["slot", "scheme", "sg_improvement_pct", "cp_improvement_pct"])?;
        for r in report.records.iter().filter(|r| r.scheme != Scheme::NoCoop) {
            let base = baseline.iter().find(|b| b.slot == r.slot).expect("every slot has a baseline record");
            let sg = improvement_pct(r.sg_profit, base.sg_profit);
            let cp = improvement_pct(r.cp_profit.iter().sum(), base.cp_profit.iter().sum());
            w.write_record([r.slot.to_string(), r.scheme.to_string(), fmt_opt(sg), fmt_opt(cp)])?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = out_dir.join("summary.txt");
    fs::write(&path, summary(report))?;
    written.push(path);
    Ok(written)
}

/// `key = value` lines with horizon averages and improvement percentages.
pub fn summary(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario = {}", report.scenario);
    let _ = writeln!(out, "seed = {}", report.seed);
    let _ = writeln!(out, "horizon = {}", report.horizon);
    let _ = writeln!(out, "providers = {}", report.providers);
    for &s in &report.schemes {
        let _ = writeln!(out, "{s}_avg_sg_profit = {}", fmt_opt(report.mean_sg(s)));
        let _ = writeln!(out, "{s}_avg_cp_profit_total = {}", fmt_opt(report.mean_cp_total(s)));
    }
    let has = |s: Scheme| report.schemes.contains(&s);
    let pairs = [
        (Scheme::Icg, Scheme::NoCoop),
        (Scheme::Cent, Scheme::NoCoop),
        (Scheme::Cent, Scheme::Icg),
    ];
    for (x, base) in pairs {
        if !(has(x) && has(base)) {
            continue;
        }
        let sg = improvement_pct(report.mean_sg(x).unwrap_or(0.0), report.mean_sg(base).unwrap_or(0.0));
        let cp = improvement_pct(report.mean_cp_total(x).unwrap_or(0.0), report.mean_cp_total(base).unwrap_or(0.0));
        let _ = writeln!(out, "{x}_vs_{base}_sg_improvement_pct = {}", fmt_opt(sg));
        let _ = writeln!(out, "{x}_vs_{base}_cp_improvement_pct = {}", fmt_opt(cp));
        // Mean of the per-slot percentages, skipping slots with a zero base.
        let per_slot: Vec<f64> = report
            .records_for(x)
            .filter_map(|r| {
                let b = report.records_for(base).find(|b| b.slot == r.slot)?;
                improvement_pct(r.sg_profit, b.sg_profit)
            })
            .collect();
        let slot_mean = (!per_slot.is_empty()).then(|| per_slot.iter().sum::<f64>() / per_slot.len() as f64);
        let _ = writeln!(out, "{x}_vs_{base}_sg_improvement_pct_slot_mean = {}", fmt_opt(slot_mean));
    }
    out
}
