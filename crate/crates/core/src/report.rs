//! Plain-text report documents with stable field order.
//!
//! A GFT report carries a header block, the exact values as
//! `name = numerator / denominator`, and a decimal block whose section header
//! holds the `digits` attribute:
//!
//! ```text
//! engine = fast
//! H = 2
//! [exact]
//! fb = 3 / 4
//! so = 1 / 2
//! bo = 3 / 4
//! ro = 5 / 8
//! ratio = 6 / 5
//! [decimal digits=4]
//! fb = 0.7500
//! so = 0.5000
//! bo = 0.7500
//! ro = 0.6250
//! ratio = 1.2000
//! ```

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::mechanisms::GftReport;
use crate::oracles::McReport;
use crate::rational::ExactRational;
use crate::search::{SearchConfig, SearchResult};

pub const UNDEFINED: &str = "undefined";

fn quantities(r: &GftReport) -> [(&'static str, Option<&ExactRational>); 5] {
    [("fb", Some(&r.fb)), ("so", Some(&r.so)), ("bo", Some(&r.bo)), ("ro", Some(&r.ro)), ("ratio", r.ratio.as_ref())]
}

pub fn gft_report_text(report: &GftReport, header: &[(&str, String)], digits: u32) -> String {
    let mut s = String::new();
    for (k, v) in header {
        let _ = writeln!(s, "{k} = {v}");
    }
    s.push_str("[exact]\n");
    for (name, q) in quantities(report) {
        match q {
            Some(q) => {
                let _ = writeln!(s, "{name} = {q}");
            }
            None => {
                let _ = writeln!(s, "{name} = {UNDEFINED}");
            }
        }
    }
    let _ = writeln!(s, "[decimal digits={digits}]");
    for (name, q) in quantities(report) {
        let rendered = q.map_or_else(|| UNDEFINED.to_string(), |q| q.to_decimal(digits));
        let _ = writeln!(s, "{name} = {rendered}");
    }
    s
}

/// Reads the `[exact]` block of a GFT report.
pub fn parse_gft_report(text: &str) -> Result<GftReport> {
    let mut in_exact = false;
    let mut found: [Option<Option<ExactRational>>; 5] = Default::default();
    const NAMES: [&str; 5] = ["fb", "so", "bo", "ro", "ratio"];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('[') {
            in_exact = line == "[exact]";
            continue;
        }
        if !in_exact || line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected `name = value`, got `{line}`")))?;
        let idx =
            NAMES.iter().position(|n| *n == k.trim()).ok_or_else(|| err(format!("unknown quantity `{}`", k.trim())))?;
        let v = v.trim();
        found[idx] = Some(if v == UNDEFINED { None } else { Some(v.parse().map_err(err)?) });
    }
    let missing = |n: &str| Error::Parse { line: 0, msg: format!("missing quantity `{n}`") };
    let mut take = |i: usize| found[i].take().ok_or_else(|| missing(NAMES[i]));
    let fb = take(0)?.ok_or_else(|| missing("fb"))?;
    let so = take(1)?.ok_or_else(|| missing("so"))?;
    let bo = take(2)?.ok_or_else(|| missing("bo"))?;
    let ro = take(3)?.ok_or_else(|| missing("ro"))?;
    let ratio = take(4)?;
    Ok(GftReport { fb, so, bo, ro, ratio })
}

pub fn mc_report_text(report: &McReport, header: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in header {
        let _ = writeln!(s, "{k} = {v}");
    }
    let _ = writeln!(s, "samples = {}", report.fb.samples);
    let _ = writeln!(s, "seed = {}", report.fb.seed);
    s.push_str("rng = chacha8\n[estimate]\n");
    for (name, e) in [("fb", &report.fb), ("so", &report.so), ("bo", &report.bo), ("ro", &report.ro)] {
        let _ = writeln!(s, "{name}.mean = {:?}", e.mean);
        let _ = writeln!(s, "{name}.std_error = {:?}", e.std_error);
    }
    s
}

pub fn search_report_text(cfg: &SearchConfig, result: &SearchResult, digits: u32) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "H = {}", cfg.h);
    if let Some(e) = cfg.eval_h {
        let _ = writeln!(s, "eval_H = {e}");
    }
    let _ = writeln!(s, "budget = {}", cfg.budget);
    let _ = writeln!(s, "restarts = {}", cfg.restarts);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s, "evaluations = {}", result.evaluations);
    let _ = writeln!(s, "screened_evaluations = {}", result.screened_evaluations);
    s.push_str("[best]\n");
    let p = &result.best_params;
    let _ = writeln!(s, "w = {:?}", p.w);
    let _ = writeln!(s, "a1_base = {:?}", p.a1_base);
    let _ = writeln!(s, "a1_amp = {:?}", p.a1_amp);
    let _ = writeln!(s, "a1_freq = {:?}", p.a1_freq);
    let _ = writeln!(s, "a2 = {:?}", p.a2);
    let _ = writeln!(s, "ratio = {}", result.best_ratio);
    let _ = writeln!(s, "ratio.decimal = {}", result.best_ratio.to_decimal(digits));
    let _ = writeln!(s, "[trace digits={digits}]");
    s.push_str("evaluation,restart,w,a1_base,a1_amp,a1_freq,a2,ratio\n");
    for t in &result.trace {
        let p = &t.params;
        let _ = writeln!(
            s,
            "{},{},{:?},{:?},{:?},{:?},{:?},{}",
            t.evaluation,
            t.restart,
            p.w,
            p.a1_base,
            p.a1_amp,
            p.a1_freq,
            p.a2,
            t.ratio.to_decimal(digits)
        );
    }
    s
}
