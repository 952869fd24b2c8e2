//! QoS metric series: recording, zero-order-hold time averaging, CSV
//! export and A/B comparison between two runs.
//!
//! Every series is a list of `(time, value)` samples with strictly
//! increasing times. Between samples a value is held (zero-order hold);
//! before the first sample the first value is assumed to have held since
//! `t = 0`.

mod compare;

use std::fmt;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub use compare::{compare, ComparisonReport, ComparisonRow, Direction, RunMetrics};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("sample at t={t} does not follow the last sample at t={last}")]
    NonMonotonicTime { last: f64, t: f64 },
    #[error("series is empty")]
    EmptySeries,
    #[error("runs differ in more than the compared setting: {0:?}")]
    ScenarioMismatch(Vec<String>),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricId {
    WlanLoad,
    WlanMediaAccessDelay,
    WlanDelay,
    WlanThroughput,
    FtpTrafficSent,
    HttpTrafficSent,
    UmtsRxThroughput,
    UmtsTxLoad,
}

impl MetricId {
    pub const ALL: [MetricId; 8] = [
        MetricId::WlanLoad,
        MetricId::WlanMediaAccessDelay,
        MetricId::WlanDelay,
        MetricId::WlanThroughput,
        MetricId::FtpTrafficSent,
        MetricId::HttpTrafficSent,
        MetricId::UmtsRxThroughput,
        MetricId::UmtsTxLoad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::WlanLoad => "wlan_load_bps",
            MetricId::WlanMediaAccessDelay => "wlan_media_access_delay_s",
            MetricId::WlanDelay => "wlan_delay_s",
            MetricId::WlanThroughput => "wlan_throughput_bps",
            MetricId::FtpTrafficSent => "ftp_traffic_sent_bps",
            MetricId::HttpTrafficSent => "http_traffic_sent_bps",
            MetricId::UmtsRxThroughput => "umts_rx_throughput_bps",
            MetricId::UmtsTxLoad => "umts_tx_load_bps",
        }
    }

    /// Direction the ECDH variant is expected to show against baseline
    /// EAP-AKA on this metric.
    pub fn expected_for_proposed(self) -> Direction {
        match self {
            MetricId::WlanThroughput | MetricId::UmtsRxThroughput => Direction::Higher,
            _ => Direction::Lower,
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| MetricsError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub id: MetricId,
    samples: Vec<(f64, f64)>,
}

impl MetricSeries {
    pub fn new(id: MetricId) -> Self {
        MetricSeries { id, samples: Vec::new() }
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        self.samples.last().copied()
    }

    /// Appends a sample; times must strictly increase.
    pub fn record(&mut self, t: f64, v: f64) -> Result<(), MetricsError> {
        if let Some(&(last, _)) = self.samples.last() {
            // `!(t > last)` also rejects NaN
            if !(t > last) {
                return Err(MetricsError::NonMonotonicTime { last, t });
            }
        } else if t.is_nan() {
            return Err(MetricsError::NonMonotonicTime { last: f64::NEG_INFINITY, t });
        }
        self.samples.push((t, v));
        Ok(())
    }

    /// Running time-weighted mean: output sample k is
    /// `(1/t_k) ∫₀^{t_k} v dt` under zero-order hold.
    pub fn time_average(&self) -> Result<MetricSeries, MetricsError> {
        let &(t0, v0) = self.samples.first().ok_or(MetricsError::EmptySeries)?;
        let mut out = MetricSeries::new(self.id);
        out.samples.reserve(self.samples.len());
        let mut area = v0 * t0;
        let mut prev = (t0, v0);
        for &(t, v) in &self.samples {
            area += prev.1 * (t - prev.0);
            let mean = if t > 0.0 { area / t } else { v };
            out.samples.push((t, mean));
            prev = (t, v);
        }
        Ok(out)
    }

    /// Final time-average, or `None` for an empty series.
    pub fn final_average(&self) -> Option<f64> {
        self.time_average().ok()?.last().map(|(_, v)| v)
    }

    /// CSV text with header `time_s,value`; floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(16 + self.samples.len() * 24);
        s.push_str("time_s,value\n");
        for (t, v) in &self.samples {
            s.push_str(&format!("{t},{v}\n"));
        }
        s
    }

    pub fn from_csv(id: MetricId, text: &str) -> Result<Self, MetricsError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "time_s,value")) => {}
            _ => {
                return Err(MetricsError::Csv { line: 1, reason: "expected header `time_s,value`".into() });
            }
        }
        let mut series = MetricSeries::new(id);
        for (i, line) in lines {
            let err = |reason: &str| MetricsError::Csv { line: i + 1, reason: reason.to_string() };
            let (t, v) = line.split_once(',').ok_or_else(|| err("missing comma"))?;
            let t: f64 = t.parse().map_err(|_| err("bad time"))?;
            let v: f64 = v.parse().map_err(|_| err("bad value"))?;
            series.record(t, v).map_err(|e| err(&e.to_string()))?;
        }
        Ok(series)
    }

    pub fn write_csv(&self, dir: &Path) -> Result<(), MetricsError> {
        let mut f = fs::File::create(dir.join(self.id.file_name()))?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}
