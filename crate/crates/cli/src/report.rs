use crate::error::CliError;
use crate::problem::PatchKind;
use femu::inversion::{ConvergenceHistory, Stage};
use femu::measurement::{GridStrains, MeasurementGrid};
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub counts: [usize; 2],
}

impl From<&MeasurementGrid> for GridInfo {
    fn from(g: &MeasurementGrid) -> Self {
        GridInfo { origin: g.origin, spacing: g.spacing, counts: g.counts }
    }
}

/// Per-point absolute residuals `|exp - num|` and their root-sum-square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMap {
    pub exx: Vec<f64>,
    pub eyy: Vec<f64>,
    pub exy: Vec<f64>,
    pub rss: Vec<f64>,
}

impl ResidualMap {
    pub fn new(measured: &GridStrains, numerical: &GridStrains) -> ResidualMap {
        let abs = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>();
        let exx = abs(&measured.exx, &numerical.exx);
        let eyy = abs(&measured.eyy, &numerical.eyy);
        let exy = abs(&measured.exy, &numerical.exy);
        let rss = (0..exx.len()).map(|i| (exx[i] * exx[i] + eyy[i] * eyy[i] + exy[i] * exy[i]).sqrt()).collect();
        ResidualMap { exx, eyy, exy, rss }
    }

    pub fn to_csv(&self, grid: &MeasurementGrid) -> String {
        let mut out = String::from("x_mm,y_mm,abs_exx,abs_eyy,abs_exy,rss\n");
        for (i, p) in grid.points().iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p[0], p[1], self.exx[i], self.eyy[i], self.exy[i], self.rss[i]
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub schema_version: u32,
    pub patch_kinds: Vec<PatchKind>,
    /// Patches held at their bound (the scale reference).
    pub fixed: Vec<bool>,
    pub initial_design: Vec<f64>,
    pub recovered: Vec<f64>,
    pub truth: Option<Vec<f64>>,
    /// `(recovered - truth) / truth` per patch.
    pub relative_error: Option<Vec<f64>>,
    /// Cost at the initial design, before updating.
    pub initial_cost: f64,
    /// Best cost at the end of the GA stage.
    pub ga_cost: f64,
    pub final_cost: f64,
    /// `initial_cost / final_cost`; null when the final cost is exactly zero.
    pub cost_reduction: Option<f64>,
    pub stalled: bool,
    pub grid: GridInfo,
    pub residual_before: ResidualMap,
    pub residual_after: ResidualMap,
    pub history: ConvergenceHistory,
    /// Forward solves spent by the optimizer.
    pub forward_solve_count: usize,
    pub wall_time_s: f64,
}

impl InversionReport {
    pub fn load(path: &Path) -> Result<InversionReport, CliError> {
        let file = if path.is_dir() { path.join("report.json") } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file)
            .map_err(|e| CliError::Usage(format!("cannot read report {}: {e}", file.display())))?;
        let report: InversionReport = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("corrupt report {}: {e}", file.display())))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "report schema version {} is not supported (expected {SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `stage,iteration,best_cost,E_1..E_p`
    pub fn convergence_csv(&self) -> String {
        let mut out = String::from("stage,iteration,best_cost");
        for k in 1..=self.recovered.len() {
            let _ = write!(out, ",E_{k}");
        }
        out.push('\n');
        for r in &self.history.records {
            let _ = write!(out, "{},{},{:.16e}", r.stage.as_str(), r.iteration, r.best_cost);
            for v in &r.design {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let sections = self.patch_kinds.iter().filter(|k| **k == PatchKind::Section).count();
        let defects = self.recovered.len() - sections;
        let plural = |n: usize| if n == 1 { "" } else { "s" };
        let _ = writeln!(
            s,
            "patches: {} ({sections} section{}, {defects} defect{})\n",
            self.recovered.len(),
            plural(sections),
            plural(defects)
        );
        let _ = write!(s, "{:>5}  {:<7}  {:>14}  {:>14}", "patch", "kind", "initial MPa", "final MPa");
        if self.truth.is_some() {
            let _ = write!(s, "  {:>14}  {:>9}", "truth MPa", "error");
        }
        s.push('\n');
        for k in 0..self.recovered.len() {
            let kind = match self.patch_kinds[k] {
                PatchKind::Section => "section",
                PatchKind::Defect => "defect",
            };
            let _ = write!(s, "{k:>5}  {kind:<7}  {:>14.1}  {:>14.1}", self.initial_design[k], self.recovered[k]);
            if let (Some(t), Some(e)) = (&self.truth, &self.relative_error) {
                let _ = write!(s, "  {:>14.1}  {:>+8.3}%", t[k], 100.0 * e[k]);
            }
            if self.fixed[k] {
                s.push_str("  (fixed)");
            }
            s.push('\n');
        }
        s.push('\n');
        let _ = write!(s, "cost: initial {:.6e} -> final {:.6e}", self.initial_cost, self.final_cost);
        match self.cost_reduction {
            Some(f) => {
                let _ = writeln!(s, " (reduction factor {f:.6e})");
            }
            None => s.push_str(" (exact fit)\n"),
        }
        let generations = self.history.stage(Stage::Ga).count().saturating_sub(1);
        let iterations = self.history.stage(Stage::Gradient).count().saturating_sub(1);
        let _ = writeln!(s, "GA: {generations} generations, best cost {:.6e}", self.ga_cost);
        let _ = writeln!(
            s,
            "gradient: {iterations} iterations{}",
            if self.stalled { ", stopped by line-search failure" } else { "" }
        );
        let _ = writeln!(s, "forward solves: {}", self.forward_solve_count);
        let _ = writeln!(s, "wall time: {:.2} s", self.wall_time_s);
        s
    }
}
