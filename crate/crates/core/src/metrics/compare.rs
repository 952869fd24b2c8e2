//! A/B comparison of two finished runs that differ in exactly one setting.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use super::{MetricId, MetricSeries, MetricsError};

/// Settings a comparison may vary. Any other difference between the two
/// runs is a mismatch.
pub const COMPARABLE_AXES: [&str; 2] = ["auth.protocol", "topology.coupling"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Lower,
    Equal,
    Higher,
}

impl Direction {
    pub fn of(a: f64, b: f64) -> Self {
        if a < b {
            Direction::Lower
        } else if a > b {
            Direction::Higher
        } else {
            Direction::Equal
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Lower => Direction::Higher,
            Direction::Higher => Direction::Lower,
            Direction::Equal => Direction::Equal,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Equal => "equal",
            Direction::Higher => "higher",
        })
    }
}

/// All metric series from one run, plus the resolved settings that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub settings: BTreeMap<String, String>,
    pub series: Vec<MetricSeries>,
}

impl RunMetrics {
    pub fn new(settings: BTreeMap<String, String>) -> Self {
        RunMetrics {
            settings,
            series: MetricId::ALL.iter().map(|&m| MetricSeries::new(m)).collect(),
        }
    }

    pub fn series(&self, id: MetricId) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.id == id)
    }

    pub fn series_mut(&mut self, id: MetricId) -> &mut MetricSeries {
        if let Some(i) = self.series.iter().position(|s| s.id == id) {
            &mut self.series[i]
        } else {
            self.series.push(MetricSeries::new(id));
            self.series.last_mut().unwrap()
        }
    }

    pub fn final_average(&self, id: MetricId) -> Option<f64> {
        self.series(id)?.final_average()
    }

    /// One `<metric_id>.csv` per metric.
    pub fn export_csv(&self, dir: &Path) -> Result<(), MetricsError> {
        fs::create_dir_all(dir)?;
        for s in &self.series {
            s.write_csv(dir)?;
        }
        Ok(())
    }

    /// Reads back every metric CSV in `dir`.
    pub fn load_csv(dir: &Path, settings: BTreeMap<String, String>) -> Result<Self, MetricsError> {
        let mut series = Vec::new();
        for m in MetricId::ALL {
            let text = fs::read_to_string(dir.join(m.file_name()))?;
            series.push(MetricSeries::from_csv(m, &text)?);
        }
        Ok(RunMetrics { settings, series })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: MetricId,
    pub a: f64,
    pub b: f64,
    /// `a - b`
    pub delta: f64,
    /// How A sits relative to B.
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// The one setting that differs, if any.
    pub axis: Option<String>,
    pub label_a: String,
    pub label_b: String,
    pub rows: Vec<ComparisonRow>,
}

/// Compares final time-averages of two runs, metric by metric.
pub fn compare(a: &RunMetrics, b: &RunMetrics) -> Result<ComparisonReport, MetricsError> {
    let keys: std::collections::BTreeSet<&String> = a.settings.keys().chain(b.settings.keys()).collect();
    let differing: Vec<String> = keys
        .into_iter()
        .filter(|k| a.settings.get(*k) != b.settings.get(*k))
        .cloned()
        .collect();
    let axis = match differing.as_slice() {
        [] => None,
        [k] if COMPARABLE_AXES.contains(&k.as_str()) => Some(k.clone()),
        _ => return Err(MetricsError::ScenarioMismatch(differing)),
    };
    let label = |r: &RunMetrics| match &axis {
        Some(k) => r.settings.get(k).cloned().unwrap_or_default(),
        None => "run".to_string(),
    };
    let mut rows = Vec::new();
    for m in MetricId::ALL {
        let fa = a.final_average(m).unwrap_or(0.0);
        let fb = b.final_average(m).unwrap_or(0.0);
        rows.push(ComparisonRow {
            metric: m,
            a: fa,
            b: fb,
            delta: fa - fb,
            direction: Direction::of(fa, fb),
        });
    }
    Ok(ComparisonReport { label_a: label(a), label_b: label(b), axis, rows })
}

impl ComparisonReport {
    /// Per metric: does the proposed run sit on the expected side of the
    /// baseline? `None` unless the two runs are exactly that pair.
    pub fn expectations(&self, proposed: &str, baseline: &str) -> Option<Vec<(MetricId, bool)>> {
        let flip = if self.label_a == proposed && self.label_b == baseline {
            false
        } else if self.label_a == baseline && self.label_b == proposed {
            true
        } else {
            return None;
        };
        Some(
            self.rows
                .iter()
                .map(|r| {
                    let d = if flip { r.direction.flip() } else { r.direction };
                    (r.metric, d == r.metric.expected_for_proposed())
                })
                .collect(),
        )
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "A = {}  B = {}  (axis: {})",
            self.label_a,
            self.label_b,
            self.axis.as_deref().unwrap_or("none")
        );
        let _ = writeln!(out, "{:<28}{:>18}{:>18}{:>18}  A vs B", "metric", "A", "B", "A-B");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<28}{:>18.6e}{:>18.6e}{:>18.6e}  {}",
                r.metric.name(),
                r.a,
                r.b,
                r.delta,
                r.direction
            );
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("metric,a,b,delta,direction\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.metric.name(), r.a, r.b, r.delta, r.direction);
        }
        out
    }

    /// Writes `comparison.txt` and `comparison.csv`.
    pub fn write(&self, dir: &Path) -> Result<(), MetricsError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("comparison.txt"), self.render_text())?;
        fs::write(dir.join("comparison.csv"), self.render_csv())?;
        Ok(())
    }
}
