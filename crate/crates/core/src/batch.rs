//! Running many recipes at once, the embedded corpus, and the geography
//! chart.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::ledger::{half_noether_line, noether_line};
use crate::recipe::{run_text, RecipeError};
use crate::report::Report;

macro_rules! corpus {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".json")))),*]
    };
}

/// Every construction shipped with the crate, as (name, recipe text).
pub const CORPUS: &[(&str, &str)] = corpus![
    "X_noether",
    "Y_between",
    "Z_between",
    "T_noether",
    "T_alt",
    "M_above",
    "R_above",
    "remark_qr_e1",
    "remark_33a",
    "remark_33b",
    "remark_kl_e1",
    "remark_s2t2_e1",
    "remark_uv_e1",
    "pencil_i6i3i2",
    "geography_only",
];

#[derive(Debug)]
pub struct BatchEntry {
    pub source: String,
    pub result: Result<Report, RecipeError>,
}

impl BatchEntry {
    pub fn passed(&self, strict: bool) -> bool {
        self.result.as_ref().is_ok_and(|r| r.passed(strict))
    }
}

#[derive(Debug)]
pub struct BatchSummary {
    /// Sorted by source, whatever order the work finished in.
    pub entries: Vec<BatchEntry>,
}

/// Process exit status for a set of recipe results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Usage = 2,
}

impl BatchSummary {
    pub fn passed_count(&self, strict: bool) -> usize {
        self.entries.iter().filter(|e| e.passed(strict)).count()
    }

    pub fn exit_status(&self, strict: bool) -> ExitStatus {
        if self.entries.iter().any(|e| e.result.as_ref().is_err_and(RecipeError::is_usage_error)) {
            ExitStatus::Usage
        } else if self.entries.iter().all(|e| e.passed(strict)) {
            ExitStatus::Pass
        } else {
            ExitStatus::Fail
        }
    }

    pub fn reports(&self) -> impl Iterator<Item = &Report> {
        self.entries.iter().filter_map(|e| e.result.as_ref().ok())
    }

    pub fn to_json(&self, strict: bool) -> serde_json::Value {
        let recipes: Vec<_> = self
            .entries
            .iter()
            .map(|e| match &e.result {
                Ok(r) => json!({ "source": e.source, "passed": r.passed(strict), "report": r.to_json() }),
                Err(err) => json!({ "source": e.source, "passed": false, "error": err.to_string() }),
            })
            .collect();
        json!({
            "recipes": recipes,
            "summary": {
                "total": self.entries.len(),
                "passed": self.passed_count(strict),
                "strict": strict,
            },
        })
    }

    pub fn render_human(&self, strict: bool) -> String {
        let mut out = String::new();
        for e in &self.entries {
            match &e.result {
                Ok(r) => out.push_str(&r.render_human(strict)),
                Err(err) => {
                    let _ = writeln!(out, "== {} [ERROR]\n   {err}", e.source);
                }
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{}/{} recipes passed", self.passed_count(strict), self.entries.len());
        for e in self.entries.iter().filter(|e| !e.passed(strict)) {
            match &e.result {
                Ok(r) => {
                    for f in r.failures() {
                        let _ = writeln!(out, "  failed: {}: {}", e.source, f.description);
                    }
                    if strict && !r.discrepancies.is_empty() {
                        let _ = writeln!(out, "  failed: {}: {} discrepancies (strict)", e.source, r.discrepancies.len());
                    }
                }
                Err(err) => {
                    let _ = writeln!(out, "  failed: {}: {err}", e.source);
                }
            }
        }
        out
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Runs (source, text) pairs in parallel.
pub fn batch_sources(sources: &[(String, String)], jobs: Option<usize>) -> BatchSummary {
    let mut entries: Vec<BatchEntry> = in_pool(jobs, || {
        sources
            .par_iter()
            .map(|(source, text)| BatchEntry { source: source.clone(), result: run_text(text) })
            .collect()
    });
    entries.sort_by(|a, b| a.source.cmp(&b.source));
    BatchSummary { entries }
}

/// Runs recipe files. Unreadable files become failed entries; they do not
/// stop the rest of the batch.
pub fn batch(paths: &[PathBuf], jobs: Option<usize>) -> Result<BatchSummary, RecipeError> {
    if paths.is_empty() {
        return Err(RecipeError::EmptyBatch);
    }
    let mut entries: Vec<BatchEntry> = in_pool(jobs, || {
        paths
            .par_iter()
            .map(|p| {
                let source = p.display().to_string();
                let result = std::fs::read_to_string(p)
                    .map_err(|e| RecipeError::Io { path: source.clone(), message: e.to_string() })
                    .and_then(|text| run_text(&text));
                BatchEntry { source, result }
            })
            .collect()
    });
    entries.sort_by(|a, b| a.source.cmp(&b.source));
    Ok(BatchSummary { entries })
}

/// `*.json` files directly inside `dir`, sorted.
pub fn recipe_files(dir: &Path) -> Result<Vec<PathBuf>, RecipeError> {
    let io = |e: std::io::Error| RecipeError::Io { path: dir.display().to_string(), message: e.to_string() };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn run_corpus(jobs: Option<usize>) -> BatchSummary {
    let sources: Vec<(String, String)> =
        CORPUS.iter().map(|(name, text)| (name.to_string(), text.to_string())).collect();
    batch_sources(&sources, jobs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChartPoint {
    pub name: String,
    pub chi_h: i64,
    pub c1sq: i64,
    pub position: String,
}

pub fn chart_points<'a>(reports: impl IntoIterator<Item = &'a Report>) -> Vec<ChartPoint> {
    reports
        .into_iter()
        .filter_map(|r| {
            let g = r.geography.as_ref()?;
            Some(ChartPoint { name: r.name.clone(), chi_h: g.chi_h, c1sq: g.c1sq, position: g.position.to_string() })
        })
        .collect()
}

pub fn chart_csv(points: &[ChartPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "chi_h", "c1sq", "position"]).expect("in-memory write");
    for p in points {
        w.serialize((&p.name, p.chi_h, p.c1sq, &p.position)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Plots the points with the Noether and half-Noether lines.
pub fn chart_svg(points: &[ChartPoint]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 48.0;
    let chi_max = points.iter().map(|p| p.chi_h).max().unwrap_or(1).max(1) + 1;
    let c_max = points.iter().map(|p| p.c1sq).chain([noether_line(chi_max)]).max().unwrap_or(1).max(1) + 1;
    let c_min = points.iter().map(|p| p.c1sq).chain([half_noether_line(0), 0]).min().unwrap_or(0) - 1;
    let x = |chi: f64| PAD + chi / chi_max as f64 * (W - 2.0 * PAD);
    let y = |c: f64| H - PAD - (c - c_min as f64) / (c_max - c_min) as f64 * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        x(0.0), y(c_min as f64), x(chi_max as f64), y(c_min as f64)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        x(0.0), y(c_min as f64), x(0.0), y(c_max as f64)
    );
    for (label, colour, f) in [
        ("c1^2 = 2chi_h - 6", "#1f77b4", noether_line as fn(i64) -> i64),
        ("c1^2 = chi_h - 3", "#ff7f0e", half_noether_line as fn(i64) -> i64),
    ] {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}"/><text x="{:.1}" y="{:.1}" fill="{colour}">{label}</text>"#,
            x(0.0), y(f(0) as f64), x(chi_max as f64), y(f(chi_max) as f64),
            x(chi_max as f64) - 110.0, y(f(chi_max) as f64) - 6.0
        );
    }
    for p in points {
        let (cx, cy) = (x(p.chi_h as f64), y(p.c1sq as f64));
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="3.5" fill="black"><title>{}: ({}, {})</title></circle><text x="{:.1}" y="{:.1}">{}</text>"#,
            p.name, p.chi_h, p.c1sq, cx + 5.0, cy - 5.0, p.name
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_quoting() {
        let pts = vec![
            ChartPoint { name: "X".into(), chi_h: 5, c1sq: 4, position: "on_noether".into() },
            ChartPoint { name: "a,b".into(), chi_h: 1, c1sq: 0, position: "above_noether".into() },
        ];
        let csv = chart_csv(&pts);
        assert_eq!(csv, "name,chi_h,c1sq,position\nX,5,4,on_noether\n\"a,b\",1,0,above_noether\n");
        let svg = chart_svg(&pts);
        assert!(svg.starts_with("<svg") && svg.contains("X: (5, 4)"));
    }

    #[test]
    fn empty_batch() {
        assert!(matches!(batch(&[], None), Err(RecipeError::EmptyBatch)));
    }

    #[test]
    fn missing_file_does_not_stop_batch() {
        let summary = batch(&[PathBuf::from("/nonexistent/a.json"), PathBuf::from("/nonexistent/b.json")], Some(2)).unwrap();
        assert_eq!(summary.entries.len(), 2);
        assert_eq!(summary.exit_status(false), ExitStatus::Usage);
    }

    #[test]
    fn sources_sorted_regardless_of_jobs() {
        let text = CORPUS[0].1.to_string();
        let sources = vec![("b".to_string(), text.clone()), ("a".to_string(), text)];
        let one = batch_sources(&sources, Some(1));
        let four = batch_sources(&sources, Some(4));
        assert_eq!(one.entries[0].source, "a");
        assert_eq!(one.to_json(false), four.to_json(false));
    }
}
