//! CSV-backed plot data derived from a pipeline report. Each plot is one CSV
//! file; `manifest.json` lists the files with their axes and annotations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bootstrap::log_log_slope;
use crate::error::Result;

use super::pipeline::PipelineReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x: String,
    pub y: String,
    pub log_x: bool,
    pub log_y: bool,
    pub annotation: Option<String>,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl Plot {
    pub fn file(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotBundle {
    pub plots: Vec<Plot>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: String,
    points: usize,
    #[serde(flatten)]
    plot: &'a Plot,
}

impl PlotBundle {
    pub fn from_report(report: &PipelineReport) -> PlotBundle {
        let refinement = Plot {
            name: "morrey_refinement".into(),
            title: "hypothesis Morrey norm under plan refinement".into(),
            x: "sampled cylinders".into(),
            y: "norm".into(),
            log_x: true,
            log_y: false,
            annotation: None,
            columns: vec!["level".into(), "cylinders".into(), "r_min".into(), "stride_x".into(), "norm".into()],
            rows: report
                .bootstrap
                .refinement
                .iter()
                .enumerate()
                .map(|(i, p)| vec![i as f64, p.cylinders as f64, p.plan.r_min, p.plan.stride_x as f64, p.norm])
                .collect(),
        };
        let chain = &report.bootstrap.chain_f64;
        let chain = Plot {
            name: "bootstrap_chain".into(),
            title: "first Morrey index along the bootstrap".into(),
            x: "step".into(),
            y: "p".into(),
            log_x: false,
            log_y: false,
            annotation: Some(format!("{} points, nu = {}", chain.len(), report.bootstrap.nu)),
            columns: vec!["step".into(), "p".into()],
            rows: chain.iter().enumerate().map(|(i, p)| vec![i as f64, *p]).collect(),
        };
        let series = &report.monitor.series;
        let tail = &series.entries[series.entries.len().saturating_sub(3)..];
        let slope = series.slope.or_else(|| log_log_slope(tail));
        let monitor = Plot {
            name: "ckn_series".into(),
            title: "scaled local energy on shrinking cylinders".into(),
            x: "r".into(),
            y: "(1/r) local energy".into(),
            log_x: true,
            log_y: true,
            annotation: Some(match slope {
                Some(s) => format!("log-log slope {s:.4} over the three smallest radii"),
                None => "slope undefined".into(),
            }),
            columns: vec!["r".into(), "value".into()],
            rows: series.entries.iter().map(|e| vec![e.r, e.value]).collect(),
        };
        PlotBundle {
            plots: vec![refinement, chain, monitor],
        }
    }
}

/// Writes every plot and the manifest into `dir`.
pub fn emit_plots(bundle: &PlotBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    for p in &bundle.plots {
        std::fs::write(dir.join(p.file()), p.to_csv())?;
        manifest.push(ManifestEntry {
            file: p.file(),
            points: p.rows.len(),
            plot: p,
        });
    }
    let text = serde_json::to_string_pretty(&serde_json::json!({ "plots": manifest }))?;
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}
