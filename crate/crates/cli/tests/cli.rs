use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn convlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convlab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const METRICS: [&str; 8] = [
    "wlan_load_bps",
    "wlan_media_access_delay_s",
    "wlan_delay_s",
    "wlan_throughput_bps",
    "ftp_traffic_sent_bps",
    "http_traffic_sent_bps",
    "umts_rx_throughput_bps",
    "umts_tx_load_bps",
];

#[test]
fn run_writes_every_metric_and_a_manifest() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("r");
    let o = convlab(&["run", "--out", p(&out), "--duration", "20", "--coupling", "loose"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for m in METRICS {
        let text = fs::read_to_string(out.join(format!("{m}.csv"))).unwrap();
        assert!(text.starts_with("time_s,value\n"));
        assert!(text.lines().count() > 1, "{m}");
    }
    let manifest = fs::read_to_string(out.join("manifest.scn")).unwrap();
    assert!(manifest.contains("topology.coupling = loose"));
    assert!(manifest.contains("sim.duration_s = 20"));
    assert!(manifest.contains("# convlab "));
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert_eq!(code(&convlab(&["run", "--out", p(&a), "--duration", "30", "--seed", "9"])), 0);
    let manifest = a.join("manifest.scn");
    assert_eq!(code(&convlab(&["run", "--scenario", p(&manifest), "--out", p(&b)])), 0);
    for m in METRICS {
        let f = format!("{m}.csv");
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{m}");
    }
    assert_eq!(fs::read(&manifest).unwrap(), fs::read(b.join("manifest.scn")).unwrap());
}

#[test]
fn configuration_errors_exit_2() {
    let t = tempfile::tempdir().unwrap();
    let scn = t.path().join("bad.scn");
    fs::write(&scn, "links.warp_factor = 9\n").unwrap();
    assert_eq!(code(&convlab(&["run", "--scenario", p(&scn), "--out", p(&t.path().join("x"))])), 2);
    assert_eq!(code(&convlab(&["run", "--protocol", "wep", "--out", p(&t.path().join("y"))])), 2);
    assert_eq!(code(&convlab(&["run", "--duration", "-1", "--out", p(&t.path().join("z"))])), 2);
    assert_eq!(code(&convlab(&["compare", "--protocol", "aka,ecdh-aka", "--coupling", "loose,tight", "--out", p(&t.path().join("w"))])), 2);
}

#[test]
fn occupied_output_needs_force() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("r");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "x").unwrap();
    assert_eq!(code(&convlab(&["run", "--out", p(&out), "--duration", "0"])), 2);
    assert!(out.join("keep.txt").exists());
    assert_eq!(code(&convlab(&["run", "--out", p(&out), "--duration", "0", "--force"])), 0);
    assert!(!out.join("keep.txt").exists());
}

#[test]
fn zero_duration_gives_header_only_csvs() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("r");
    assert_eq!(code(&convlab(&["run", "--out", p(&out), "--duration", "0"])), 0);
    for m in METRICS {
        assert_eq!(fs::read_to_string(out.join(format!("{m}.csv"))).unwrap(), "time_s,value\n");
    }
}

#[test]
fn self_compare_has_zero_deltas() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("c");
    let o = convlab(&["compare", "--protocol", "aka,aka", "--duration", "20", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("comparison.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.0, "{line}");
        assert_eq!(f[4], "equal");
    }
    assert!(out.join("comparison.txt").exists());
}

#[test]
fn swapped_runs_flip_every_delta() {
    let t = tempfile::tempdir().unwrap();
    let (x, y) = (t.path().join("x"), t.path().join("y"));
    assert_eq!(code(&convlab(&["run", "--protocol", "aka", "--duration", "20", "--out", p(&x)])), 0);
    assert_eq!(code(&convlab(&["run", "--protocol", "ecdh-aka", "--duration", "20", "--out", p(&y)])), 0);
    let deltas = |a: &Path, b: &Path, name: &str| {
        let out = t.path().join(name);
        let o = convlab(&["compare", "--runs", &format!("{},{}", p(a), p(b)), "--out", p(&out)]);
        assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("comparison.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    let (ab, ba) = (deltas(&x, &y, "xy"), deltas(&y, &x, "yx"));
    assert_eq!(ab.len(), 8);
    for (u, v) in ab.iter().zip(&ba) {
        assert_eq!(*u, -*v);
    }
}

#[test]
fn runs_differing_in_two_axes_are_refused() {
    let t = tempfile::tempdir().unwrap();
    let (x, y) = (t.path().join("x"), t.path().join("y"));
    assert_eq!(code(&convlab(&["run", "--duration", "5", "--seed", "1", "--out", p(&x)])), 0);
    assert_eq!(code(&convlab(&["run", "--duration", "5", "--seed", "2", "--out", p(&y)])), 0);
    let o = convlab(&["compare", "--runs", &format!("{},{}", p(&x), p(&y)), "--out", p(&t.path().join("c"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn attack_writes_reports_and_matches() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("a");
    let o = convlab(&["attack", "--protocol", "ecdh-aka", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("attack_report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(fs::read_to_string(out.join("attack_report.txt")).unwrap().contains("MATCH"));
    assert_eq!(code(&convlab(&["attack", "--protocol", "wep", "--out", p(&t.path().join("b"))])), 2);
}

#[test]
fn validate_passes_on_a_pristine_build() {
    let o = convlab(&["validate"]);
    assert_eq!(code(&o), 0);
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
