//! Subcommand implementations.

use std::path::{Path, PathBuf};

use convlab_core::seceval::{render_csv, render_text};
use convlab_core::{
    compare as compare_runs, evaluate_matrix, matches_reference, reference_table, run_self_tests, Protocol,
    RunMetrics, Scenario,
};

use crate::output::{self, MANIFEST};
use crate::{AttackArgs, CliError, Common, CompareArgs, RunArgs, ValidateArgs, Verdict};

fn config<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

/// Scenario file (or defaults) with command-line overrides applied.
fn resolve(common: &Common, protocol: Option<&str>, coupling: Option<&str>) -> Result<Scenario, CliError> {
    let mut s = match &common.scenario {
        Some(path) => Scenario::load(path).map_err(config)?,
        None => Scenario::default(),
    };
    let seed = common.seed.map(|v| v.to_string());
    let duration = common.duration.map(|v| v.to_string());
    for (key, value) in [
        ("auth.protocol", protocol),
        ("topology.coupling", coupling),
        ("sim.seed", seed.as_deref()),
        ("sim.duration_s", duration.as_deref()),
    ] {
        if let Some(v) = value {
            s.set(key, v).map_err(config)?;
        }
    }
    s.validate().map_err(config)?;
    Ok(s)
}

fn simulate(s: &Scenario) -> Result<convlab_core::SimOutput, CliError> {
    convlab_core::run(s).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn run(a: RunArgs) -> Result<Verdict, CliError> {
    let s = resolve(&a.common, a.protocol.as_deref(), a.coupling.as_deref())?;
    output::prepare(&a.common.out, a.common.force)?;
    let out = simulate(&s)?;
    output::write_run(&a.common.out, "run", &out)?;
    print!("{}", output::summary("run", &s, &out));
    println!("wrote {}", a.common.out.display());
    Ok(Verdict::Ok)
}

/// `A,B` → two values; a single value is used on both sides.
fn pair(v: Option<&str>) -> Result<Option<(String, String)>, CliError> {
    let Some(v) = v else { return Ok(None) };
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x] => Ok(Some((x.to_string(), x.to_string()))),
        [x, y] => Ok(Some((x.to_string(), y.to_string()))),
        _ => Err(CliError::Config(format!("expected VALUE or A,B, got `{v}`"))),
    }
}

fn load_run(dir: &Path) -> Result<RunMetrics, CliError> {
    let s = Scenario::load(&dir.join(MANIFEST)).map_err(config)?;
    RunMetrics::load_csv(dir, s.settings()).map_err(config)
}

pub fn compare(a: CompareArgs) -> Result<Verdict, CliError> {
    let (ma, mb) = if let Some(runs) = &a.runs {
        if a.protocol.is_some() || a.coupling.is_some() {
            return Err(CliError::Config("--runs cannot be combined with --protocol/--coupling".into()));
        }
        let (da, db) = pair(Some(runs))?.expect("value present");
        let ma = load_run(Path::new(&da))?;
        let mb = load_run(Path::new(&db))?;
        output::prepare(&a.common.out, a.common.force)?;
        (ma, mb)
    } else {
        let mut protocol = pair(a.protocol.as_deref())?;
        let coupling = pair(a.coupling.as_deref())?;
        let differs = |p: &Option<(String, String)>| p.as_ref().is_some_and(|(x, y)| x != y);
        if differs(&protocol) && differs(&coupling) {
            return Err(CliError::Config("compare varies one axis at a time".into()));
        }
        if protocol.is_none() && !differs(&coupling) {
            protocol = Some(("ecdh-aka".into(), "aka".into()));
        }
        let side = |pick: fn(&(String, String)) -> &String| {
            resolve(
                &a.common,
                protocol.as_ref().map(|p| pick(p).as_str()),
                coupling.as_ref().map(|c| pick(c).as_str()),
            )
        };
        let sa = side(|p| &p.0)?;
        let sb = side(|p| &p.1)?;
        output::prepare(&a.common.out, a.common.force)?;
        // isolated engines, so the two runs can proceed side by side
        let (ra, rb) = std::thread::scope(|scope| {
            let ha = scope.spawn(|| simulate(&sa));
            let rb = simulate(&sb);
            (ha.join().expect("simulation thread"), rb)
        });
        let (ra, rb) = (ra?, rb?);
        for (name, s, r) in [("a", &sa, &ra), ("b", &sb, &rb)] {
            let dir = a.common.out.join(name);
            std::fs::create_dir_all(&dir).map_err(output::io_err(&dir))?;
            output::write_run(&dir, "compare", r)?;
            print!("{}", output::summary(name, s, r));
        }
        (ra.metrics, rb.metrics)
    };
    let report = compare_runs(&ma, &mb).map_err(config)?;
    report.write(&a.common.out).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!();
    print!("{}", report.render_text());
    let proposed = Protocol::EcdhAka.name();
    let baseline = Protocol::Aka.name();
    if let Some(checks) = report.expectations(proposed, baseline) {
        let failed: Vec<_> = checks.iter().filter(|(_, ok)| !ok).map(|(m, _)| m.name()).collect();
        if !failed.is_empty() {
            println!("directional expectations failed for: {}", failed.join(", "));
            return Ok(Verdict::ExpectationFailed);
        }
        println!("all directional expectations hold");
    }
    Ok(Verdict::Ok)
}

pub fn attack(a: AttackArgs) -> Result<Verdict, CliError> {
    let protocols = match a.protocol.as_deref() {
        None | Some("all") => Protocol::ALL.to_vec(),
        Some(p) => vec![Protocol::parse(p).ok_or_else(|| CliError::Config(format!("unknown protocol `{p}`")))?],
    };
    output::prepare(&a.out, a.force)?;
    let reports: Vec<_> = protocols.into_iter().map(evaluate_matrix).collect();
    let table = reference_table();
    let text = render_text(&reports, &table);
    output::write(a.out.join("attack_report.txt"), &text)?;
    output::write(a.out.join("attack_report.csv"), &render_csv(&reports))?;
    print!("{text}");
    Ok(if matches_reference(&reports, &table) { Verdict::Ok } else { Verdict::MatrixMismatch })
}

pub fn validate(a: ValidateArgs) -> Result<Verdict, CliError> {
    let report = run_self_tests(1000, a.seed);
    let text = report.render();
    print!("{text}");
    if let Some(out) = &a.out {
        output::prepare(out, a.force)?;
        output::write(PathBuf::from(out).join("validate.txt"), &text)?;
    }
    Ok(if report.passed() { Verdict::Ok } else { Verdict::SelfTestFailed })
}
