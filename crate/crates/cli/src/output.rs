//! Output directories and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use convlab_core::netsim::{AuthKind, PacketKind};
use convlab_core::{MetricId, Scenario, SimOutput};

use crate::CliError;

pub const MANIFEST: &str = "manifest.scn";

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Creates `dir` fresh. An existing non-empty directory is only replaced
/// when `force` is set.
pub fn prepare(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() {
        let occupied = fs::read_dir(dir).map_err(io_err(dir))?.next().is_some();
        if occupied && !force {
            return Err(CliError::Config(format!("{} exists and is not empty; pass --force to replace it", dir.display())));
        }
        if occupied {
            fs::remove_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write(path: PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(&path, text).map_err(io_err(&path))
}

/// The resolved scenario plus provenance and overhead comments. Parsing the
/// manifest back yields the same scenario, so it doubles as a rerun input.
pub fn manifest(command: &str, out: &SimOutput) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "# convlab {} - {command}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "# rerun: convlab run --scenario {MANIFEST} --out <dir>");
    let _ = writeln!(m, "#");
    let _ = writeln!(m, "# authentication overhead (mean over successful sessions)");
    for kind in AuthKind::ALL {
        let o = out.overhead(kind);
        if o.sessions == 0 {
            continue;
        }
        let _ = writeln!(
            m,
            "#   {:<14} sessions={} failures={} resyncs={} messages={:.3} bytes={:.1} duration_s={:.6}",
            kind.name(),
            o.sessions,
            o.failures,
            o.resyncs,
            o.mean_messages,
            o.mean_bytes,
            o.mean_duration_s
        );
    }
    let _ = writeln!(m, "# packets (sent/delivered/dropped/in-flight)");
    for kind in PacketKind::ALL {
        let c = out.flows[&kind];
        let _ = writeln!(m, "#   {:<8} {}/{}/{}/{}", kind.name(), c.sent, c.delivered, c.dropped, c.in_flight);
    }
    let _ = writeln!(m, "# sgsn link drops: {}", out.sgsn_link_drops);
    let _ = writeln!(m, "# trace digest: {:016x} over {} events", out.trace_digest, out.events);
    let _ = writeln!(m);
    m.push_str(&out.scenario.to_text());
    m
}

pub fn write_run(dir: &Path, command: &str, out: &SimOutput) -> Result<(), CliError> {
    out.metrics.export_csv(dir).map_err(|e| CliError::Runtime(e.to_string()))?;
    write(dir.join(MANIFEST), &manifest(command, out))
}

pub fn summary(label: &str, scenario: &Scenario, out: &SimOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{label}: protocol={} coupling={} seed={} duration={}s",
        scenario.auth.protocol.name(),
        scenario.topology.coupling,
        scenario.sim.seed,
        scenario.sim.duration_s
    );
    for m in MetricId::ALL {
        match out.metrics.final_average(m) {
            Some(v) => {
                let _ = writeln!(s, "  {:<28} {v:.6}", m.name());
            }
            None => {
                let _ = writeln!(s, "  {:<28} (no samples)", m.name());
            }
        }
    }
    s
}
