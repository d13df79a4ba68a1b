//! Experiment reports and the files written next to them.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use crate::error::Result;
use crate::euler::Verdict;

#[derive(Debug, Clone, Serialize)]
pub struct VerdictEntry {
    pub name: String,
    pub status: Verdict,
    pub measured: f64,
    /// Comparison the measurement was judged by, such as `< 1e-4`.
    pub criterion: String,
    pub detail: String,
}

impl VerdictEntry {
    fn judged(name: &str, measured: f64, ok: bool, criterion: String) -> Self {
        Self {
            name: name.into(),
            status: if ok { Verdict::Pass } else { Verdict::Fail },
            measured,
            criterion,
            detail: String::new(),
        }
    }

    pub fn below(name: &str, measured: f64, tol: f64) -> Self {
        Self::judged(name, measured, measured < tol, format!("< {tol:e}"))
    }

    pub fn at_most(name: &str, measured: f64, tol: f64) -> Self {
        Self::judged(name, measured, measured <= tol, format!("<= {tol}"))
    }

    pub fn at_least(name: &str, measured: f64, tol: f64) -> Self {
        Self::judged(name, measured, measured >= tol, format!(">= {tol}"))
    }

    pub fn flag(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok { Verdict::Pass } else { Verdict::Fail },
            measured: if ok { 1.0 } else { 0.0 },
            criterion: "true".into(),
            detail: detail.into(),
        }
    }

    pub fn inconclusive(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Verdict::Inconclusive,
            measured: f64::NAN,
            criterion: String::new(),
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Verdict::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: RunConfig,
    pub config_hash: String,
    pub verdicts: Vec<VerdictEntry>,
    pub series_files: Vec<String>,
    pub fitted: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    /// Kept out of `report.json` so that the report is reproducible byte for
    /// byte; written to `timing.json` instead.
    #[serde(skip)]
    pub runtime_s: f64,
}

impl ExperimentReport {
    pub fn new(name: &str, config: &RunConfig) -> Self {
        Self {
            name: name.into(),
            config: config.clone(),
            config_hash: config.hash(),
            verdicts: vec![],
            series_files: vec![],
            fitted: BTreeMap::new(),
            notes: vec![],
            runtime_s: 0.0,
        }
    }

    pub fn push(&mut self, v: VerdictEntry) {
        self.verdicts.push(v);
    }

    pub fn fit(&mut self, key: &str, value: f64) {
        self.fitted.insert(key.into(), value);
    }

    /// All verdicts pass; an empty list passes vacuously.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(VerdictEntry::passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&VerdictEntry> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}\n", self.name, if self.passed() { "PASS" } else { "FAIL" });
        for v in &self.verdicts {
            let tag = match v.status {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "inconclusive",
            };
            s.push_str(&format!("  [{tag}] {} = {:e} {}", v.name, v.measured, v.criterion));
            if !v.detail.is_empty() {
                s.push_str(&format!(" ({})", v.detail));
            }
            s.push('\n');
        }
        for (k, v) in &self.fitted {
            s.push_str(&format!("  fitted {k} = {v}\n"));
        }
        s
    }
}

/// One curve family of the generated gnuplot script.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub file: String,
    pub x: usize,
    pub ys: Vec<usize>,
    pub title: String,
    pub log_y: bool,
}

/// Output directory of one run; remembers what was written.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    plots: Vec<PlotSpec>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: vec![],
            plots: vec![],
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Creates `name` inside the directory and hands a buffered writer to `f`.
    pub fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.into());
        Ok(())
    }

    /// Writes a CSV from a header and rows of numbers.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        self.write(name, |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(header)?;
            for r in rows {
                c.write_record(r.iter().map(|v| v.to_string()))?;
            }
            c.flush()?;
            Ok(())
        })
    }

    pub fn plot(&mut self, spec: PlotSpec) {
        self.plots.push(spec);
    }

    /// Writes `report.json`, `timing.json` and `plot.gp` and records the
    /// series files in the report.
    pub fn finish(mut self, report: &mut ExperimentReport) -> Result<()> {
        report.series_files = self.files.clone();
        let script = plot_script(&self.plots);
        self.write("plot.gp", |w| Ok(w.write_all(script.as_bytes())?))?;
        let json = report.to_json();
        self.write("report.json", |w| Ok(w.write_all(json.as_bytes())?))?;
        let timing = format!("{{\n  \"runtime_s\": {}\n}}\n", report.runtime_s);
        std::fs::write(self.dir.join("timing.json"), timing)?;
        Ok(())
    }
}

fn plot_script(plots: &[PlotSpec]) -> String {
    let mut s = String::from(
        "# gnuplot script; run with: gnuplot -p plot.gp\nset datafile separator ','\nset key autotitle columnhead\n",
    );
    for p in plots {
        s.push_str(&format!("\nset title \"{}\"\n", p.title));
        s.push_str(if p.log_y {
            "set logscale y\n"
        } else {
            "unset logscale y\n"
        });
        let curves: Vec<String> = p
            .ys
            .iter()
            .map(|y| format!("'{}' using {}:{} with linespoints", p.file, p.x, y))
            .collect();
        s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
        s.push_str("pause -1 \"press return\"\n");
    }
    s
}
