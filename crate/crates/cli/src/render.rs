//! Plain-text tables for `--pretty`.

use std::fmt::Write;

use fpcal::{ComponentKind, ValidationReport};

use crate::commands::{CalibrateReport, ComponentEstimate, FitReport, FuzzyPoint, ProjectEstimate};

pub fn fit(r: &FitReport) -> String {
    let d = &r.diagnostics;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "effort = {:.4} * UFP^{:.4}  ({} records)",
        r.model.a, r.model.b, r.n_records
    );
    let _ = writeln!(s, "log-scale R2          {:.4}", d.r2);
    let _ = writeln!(s, "residual mean         {:.4}", d.mean_log_residual);
    let _ = writeln!(s, "residual std          {:.4}", d.std_log_residual);
    let _ = writeln!(s, "residual skewness     {:.4}", d.skewness_log_residual);
    s
}

pub fn calibration(r: &CalibrateReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<5} {:>15} {:>15} {:>15}",
        "", "Low", "Average", "High"
    );
    let _ = writeln!(
        s,
        "{:<5} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "", "orig", "cal", "orig", "cal", "orig", "cal"
    );
    for row in &r.table {
        let _ = writeln!(
            s,
            "{:<5} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
            row.component,
            row.low_original,
            row.low_calibrated,
            row.average_original,
            row.average_calibrated,
            row.high_original,
            row.high_calibrated
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "model        effort = {:.4} * UFP^{:.4}",
        r.model.a, r.model.b
    );
    let _ = writeln!(
        s,
        "loss         {:.6} -> {:.6}",
        r.initial_loss, r.final_loss
    );
    let _ = writeln!(
        s,
        "epochs       {}{}",
        r.epochs_run,
        if r.converged { " (converged)" } else { "" }
    );
    let _ = writeln!(s, "outliers     {}", r.excluded_outliers.len());
    s
}

pub fn validation(r: &ValidationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "train {} / test {}, seed {}",
        r.train_size, r.test_size, r.master_seed
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<10} {:>14} {:>16} {:>12}",
        "experiment", "MMRE original", "MMRE calibrated", "improvement"
    );
    for e in &r.experiments {
        let _ = writeln!(
            s,
            "{:<10} {:>14.2} {:>16.2} {:>11}%",
            e.experiment_index, e.mmre_original, e.mmre_calibrated, e.improvement_pct_rounded
        );
    }
    let a = &r.average;
    let _ = writeln!(
        s,
        "{:<10} {:>14.2} {:>16.2} {:>11}%",
        "average", a.mmre_original, a.mmre_calibrated, a.improvement_pct_rounded
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<10} {:>10} {:>11}", "", "original", "calibrated");
    for p in &a.pred {
        let _ = writeln!(
            s,
            "{:<10} {:>9.0}% {:>10.0}%",
            format!("PRED({})", p.p),
            p.original * 100.0,
            p.calibrated * 100.0
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "average calibrated weights");
    for k in ComponentKind::ALL {
        let [l, m, h] = a.calibrated_weights.row(k);
        let _ = writeln!(s, "{:<5} {:>7.2} {:>7.2} {:>7.2}", k.code(), l, m, h);
    }
    s
}

pub fn component(e: &ComponentEstimate) -> String {
    let mut s = format!(
        "{} det={} records={}: level {}, weight {}\n",
        e.kind, e.det, e.records, e.level, e.weight
    );
    if let Some(w) = e.fuzzy_weight {
        let _ = writeln!(s, "fuzzy weight {w:.4}");
    }
    s
}

pub fn project(e: &ProjectEstimate) -> String {
    let mut s = format!("UFP {}\n", e.ufp);
    if let Some(h) = e.effort {
        let _ = writeln!(s, "effort {h:.1} hours");
    }
    if let Some(f) = e.fuzzy_ufp {
        let _ = writeln!(s, "fuzzy UFP {f:.4}");
    }
    if let Some(h) = e.fuzzy_effort {
        let _ = writeln!(s, "fuzzy effort {h:.1} hours");
    }
    s
}

pub fn fuzzy_point(p: &FuzzyPoint) -> String {
    format!(
        "{} det={} records={}\ncrisp level   {}\ncrisp weight  {}\nfuzzy weight  {:.4}\n",
        p.kind, p.det, p.records, p.crisp_level, p.crisp_weight, p.fuzzy_weight
    )
}
