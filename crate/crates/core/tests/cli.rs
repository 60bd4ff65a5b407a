use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gft_core::generators::{table_sha256, WORST_CASE_SELLER_TABLE_SHA256};
use gft_core::report::parse_gft_report;
use gft_core::{DiscreteDistribution, ExactRational};

const GFT: &str = env!("CARGO_BIN_EXE_gft");

fn gft(args: &[&str]) -> Output {
    Command::new(GFT).args(args).output().expect("spawn gft")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn two_point_files(dir: &Path) -> (PathBuf, PathBuf) {
    let s = write(
        dir,
        "seller.dist",
        "kind = seller_cdf\nH = 2\nscale = 1000000000000000\n0,500000000000000\n1,500000000000000\n2,1000000000000000\n",
    );
    let b = write(
        dir,
        "buyer.dist",
        "# equal halves on 1 and 2\nkind = buyer_sf\nH = 2\nscale = 1000000000000000\n0,1000000000000000\n1,1000000000000000\n2,500000000000000\n",
    );
    (s, b)
}

#[test]
fn verify_reproduces_and_reports_checks() {
    let o = gft(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains(&format!("seller_sha256 = {WORST_CASE_SELLER_TABLE_SHA256}")));
    assert!(text.contains("seller_table = pinned"));
    assert!(text.contains("ratio = 2.0749\n"));
    assert!(text.contains("fb_over_max_offerer"));
    assert!(text.ends_with("verdict = reproduced\n"));
}

#[test]
fn verify_digits_controls_rendering_only() {
    let o = gft(&["verify", "--digits", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[decimal digits=2]"));
    assert!(text.contains("ratio = 2.07\n"));
    let four = parse_gft_report(&stdout(&gft(&["verify"]))).unwrap();
    assert_eq!(parse_gft_report(&text).unwrap(), four);
}

#[test]
fn verify_reference_engine_matches_fast() {
    let fast = parse_gft_report(&stdout(&gft(&["verify"]))).unwrap();
    let o = gft(&["verify", "--engine", "reference"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(parse_gft_report(&stdout(&o)).unwrap(), fast);
}

#[test]
fn verify_detects_corrupted_seller_table() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.dist");
    assert!(gft(&["gen", "--out", path_str(&good)]).status.success());
    // Replace the CDF tail (m >= 2000) with a uniform CDF: still valid, wrong instance.
    let text = fs::read_to_string(&good).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let first_row = lines.iter().position(|l| !l.contains('=')).unwrap();
    for m in 2000..=20000usize {
        let (_, value) = lines[first_row + m].split_once(',').unwrap();
        let current: u64 = value.parse().unwrap();
        let uniform = ((m as u128 + 1) * 1_000_000_000_000_000 / 20001) as u64;
        lines[first_row + m] = format!("{m},{}", current.max(uniform));
    }
    let bad = write(dir.path(), "bad.dist", &(lines.join("\n") + "\n"));
    let o = gft(&["verify", "--seller", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("seller_table = differs from pinned"));
    assert!(text.contains("verdict = mismatch"));
    assert!(text.contains("MISMATCH"));
}

#[test]
fn eval_two_point_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (s, b) = two_point_files(dir.path());
    for engine in ["fast", "reference"] {
        let o = gft(&["eval", "--seller", path_str(&s), "--buyer", path_str(&b), "--engine", engine]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let r = parse_gft_report(&stdout(&o)).unwrap();
        assert_eq!(r.ratio, Some(ExactRational::new(6, 5)));
        assert_eq!(r.ro, ExactRational::new(5, 8));
        assert!(stdout(&o).contains("ratio = 1.2000\n"));
    }
    let o = gft(&["eval", "--seller", path_str(&s), "--buyer", path_str(&b), "--exhaustive-prices"]);
    assert_eq!(parse_gft_report(&stdout(&o)).unwrap().ratio, Some(ExactRational::new(6, 5)));
}

#[test]
fn eval_without_trade_reports_undefined_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.dist");
    let b = dir.path().join("b.dist");
    let gen = |v: &str, kind: &str, out: &Path| {
        let o =
            gft(&["gen", "--family", "point-mass", "--value", v, "--kind", kind, "--H", "3", "--out", path_str(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    gen("2", "seller-cdf", &s);
    gen("1", "buyer-sf", &b);
    let o = gft(&["eval", "--seller", path_str(&s), "--buyer", path_str(&b)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("fb = 0 / 1\n"));
    assert!(text.contains("ratio = undefined\n"));
    assert_eq!(parse_gft_report(&text).unwrap().ratio, None);
}

#[test]
fn eval_monte_carlo_engine() {
    let dir = tempfile::tempdir().unwrap();
    let (s, b) = two_point_files(dir.path());
    let o = gft(&[
        "eval",
        "--seller",
        path_str(&s),
        "--buyer",
        path_str(&b),
        "--engine",
        "mc",
        "--samples",
        "100000",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("samples = 100000\nseed = 3\nrng = chacha8\n[estimate]\n"));
    let mean: f64 = text.lines().find_map(|l| l.strip_prefix("fb.mean = ")).unwrap().parse().unwrap();
    assert!((mean - 0.75).abs() < 0.01);
}

#[test]
fn eval_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (s, b) = two_point_files(dir.path());

    let malformed =
        write(dir.path(), "m.dist", "kind = seller_cdf\nH = 2\nscale = 1000000000000000\n0,1\n1,nope\n2,3\n");
    let o = gft(&["eval", "--seller", path_str(&malformed), "--buyer", path_str(&b)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    // A buyer file where a seller file is expected.
    let o = gft(&["eval", "--seller", path_str(&b), "--buyer", path_str(&b)]);
    assert_eq!(o.status.code(), Some(2));

    let decreasing = write(
        dir.path(),
        "d.dist",
        "kind = seller_cdf\nH = 2\nscale = 1000000000000000\n0,600000000000000\n1,500000000000000\n2,1000000000000000\n",
    );
    let o = gft(&["eval", "--seller", path_str(&decreasing), "--buyer", path_str(&b)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1"), "violation should name the index: {}", stderr(&o));

    let o = gft(&["eval", "--seller", path_str(&s), "--buyer", path_str(&dir.path().join("missing.dist"))]);
    assert_eq!(o.status.code(), Some(2));

    let o = gft(&["eval", "--seller", path_str(&s), "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_default_parameters_match_golden_hash() {
    let o = gft(&["gen"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("kind = seller_cdf\nH = 20000\n"));
    let d = DiscreteDistribution::from_text(&text).unwrap();
    assert_eq!(d.h(), 20000);
    assert_eq!(table_sha256(&d), WORST_CASE_SELLER_TABLE_SHA256);
    let explicit = gft(&[
        "gen",
        "--w",
        "0.2",
        "--a1-base",
        "0.15",
        "--a1-amp",
        "0.05",
        "--a1-freq",
        "2",
        "--a2",
        "4",
        "--H",
        "20000",
    ]);
    assert_eq!(explicit.stdout, o.stdout);
}

#[test]
fn gen_config_file_and_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", "w = 0.2\na1_base = 0.15\na1_amp = 0.05\na1_freq = 2.0\na2 = 4.0\nH = 50\n");
    let o = gft(&["gen", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(o.stdout, gft(&["gen", "--H", "50"]).stdout);

    assert_eq!(gft(&["gen", "--config", path_str(&cfg), "--w", "0.3"]).status.code(), Some(2));
    let unknown = write(dir.path(), "u.toml", "w = 0.2\nextra = 1\n");
    assert_eq!(gft(&["gen", "--config", path_str(&unknown)]).status.code(), Some(2));
    // Violates a1_base - a1_amp > 0.
    assert_eq!(gft(&["gen", "--H", "10", "--a1-amp", "0.2"]).status.code(), Some(2));
    assert_eq!(gft(&["gen", "--family", "uniform"]).status.code(), Some(2));
}

#[test]
fn gen_export_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.dist");
    assert!(gft(&["gen", "--family", "uniform", "--H", "3", "--out", path_str(&u)]).status.success());
    let o = gft(&["export", path_str(&u)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "m,cdf_real\n0,0.25\n1,0.5\n2,0.75\n3,1.0\n");

    let csv = dir.path().join("u.csv");
    assert!(gft(&["export", path_str(&u), "--out", path_str(&csv)]).status.success());
    assert_eq!(fs::read_to_string(csv).unwrap(), stdout(&o));
}

#[test]
fn gen_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.dist");
    let b = dir.path().join("b.dist");
    assert!(gft(&["gen", "--out", path_str(&s)]).status.success());
    assert!(gft(&["gen", "--family", "equal-revenue", "--H", "20000", "--out", path_str(&b)]).status.success());
    let eval = parse_gft_report(&stdout(&gft(&["eval", "--seller", path_str(&s), "--buyer", path_str(&b)]))).unwrap();
    let verify = parse_gft_report(&stdout(&gft(&["verify"]))).unwrap();
    assert_eq!(eval, verify);
}

#[test]
fn search_writes_report_and_best_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "search.toml",
        "budget = 12\nrestarts = 2\nseed = 5\nH = 300\n\n[bounds]\nw = [0.18, 0.22]\na1_base = [0.14, 0.16]\n\
         a1_amp = [0.04, 0.06]\na1_freq = [1.8, 2.2]\na2 = [3.6, 4.4]\n",
    );
    let out = dir.path().join("best.txt");
    let o = gft(&["search", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(&out).unwrap();
    assert!(o.stdout.is_empty());
    assert!(report.contains("evaluations = 12\n"));
    assert!(report.contains("[trace digits=6]\nevaluation,restart,w,a1_base,a1_amp,a1_freq,a2,ratio\n"));
    let table = fs::read_to_string(out.with_extension("dist")).unwrap();
    assert!(table.starts_with("kind = seller_cdf\nH = 300\n"));

    assert_eq!(gft(&["search", "--budget", "0"]).status.code(), Some(2));
}

#[test]
fn zero_threads_is_usage_error() {
    assert_eq!(gft(&["--threads", "0", "verify"]).status.code(), Some(2));
}
