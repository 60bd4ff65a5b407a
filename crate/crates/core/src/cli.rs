//! `gft` command-line front end.
//!
//! Exit codes: 0 success, 1 validation or verification failure, 2 usage error
//! or malformed input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dist::{DiscreteDistribution, DistKind, SCALE};
use crate::error::Error;
use crate::generators::{
    equal_revenue_buyer, modulated_power_mixture_seller, point_mass, table_sha256, uniform_seller, SellerFamilyParams,
    WORST_CASE_SELLER_TABLE_SHA256,
};
use crate::mechanisms::{evaluate_detailed, GftReport, PriceSearch};
use crate::oracles::{monte_carlo_gft, reference_evaluate};
use crate::report::{gft_report_text, mc_report_text, search_report_text};
use crate::reproduction::{check_fb_over_best_offerer, compare_with_published, worst_case_instance, QuantityCheck};
use crate::search::{run_search, ParamBounds, SearchConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "gft", version, about = "Exact gains-from-trade evaluation for bilateral trade")]
struct Cli {
    /// Maximum worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recompute the worst-case instance and compare with the published values.
    Verify(VerifyArgs),
    /// Evaluate a seller CDF file against a buyer SF file.
    Eval(EvalArgs),
    /// Write a generated distribution file.
    Gen(GenArgs),
    /// Search the modulated power-law family for large ratios.
    Search(SearchArgs),
    /// Convert a distribution file to `m,value` CSV.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExactEngine {
    Fast,
    Reference,
}

impl From<ExactEngine> for Engine {
    fn from(e: ExactEngine) -> Self {
        match e {
            ExactEngine::Fast => Engine::Fast,
            ExactEngine::Reference => Engine::Reference,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Fast,
    Reference,
    Mc,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    digits: u32,
    /// Replace the generated seller table with this file.
    #[arg(long)]
    seller: Option<PathBuf>,
    /// Replace the generated buyer table with this file.
    #[arg(long)]
    buyer: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fast")]
    engine: ExactEngine,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    seller: PathBuf,
    #[arg(long)]
    buyer: PathBuf,
    #[arg(long, value_enum, default_value = "fast")]
    engine: Engine,
    /// Use the quadratic price scan in the fast engine.
    #[arg(long)]
    exhaustive_prices: bool,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    digits: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Modulated,
    Uniform,
    EqualRevenue,
    PointMass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    SellerCdf,
    BuyerSf,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "modulated")]
    family: Family,
    #[arg(long = "H")]
    h: Option<usize>,
    #[arg(long, conflicts_with = "config")]
    w: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    a1_base: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    a1_amp: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    a1_freq: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    a2: Option<f64>,
    /// TOML file with w, a1_base, a1_amp, a1_freq, a2 and H.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Support point for the point-mass family.
    #[arg(long)]
    value: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// TOML search configuration; without it the search runs within 10% of the
    /// discovered parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "H")]
    h: Option<usize>,
    #[arg(long = "eval-H")]
    eval_h: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 6)]
    digits: u32,
    /// Report path; the best seller table goes next to it with a `.dist` extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying its exit code and message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn failed(message: impl Into<String>) -> Self {
        Failure { code: EXIT_FAILURE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(ref v) => {
                let mut msg = format!("{e}");
                for viol in v {
                    let _ = write!(msg, "\n  {viol}");
                }
                Failure::failed(msg)
            }
            Error::Parse { .. }
            | Error::LengthMismatch { .. }
            | Error::ScaledOutOfRange { .. }
            | Error::ProbabilityOutOfRange { .. }
            | Error::SupportOutOfRange(_)
            | Error::WrongKind { .. }
            | Error::SupportMismatch { .. }
            | Error::PointOutOfDomain { .. }
            | Error::InvalidParams(_)
            | Error::InvalidConfig(_) => Failure::usage(e.to_string()),
            Error::UndefinedRatio | Error::Overflow | Error::NoEvaluations => Failure::failed(e.to_string()),
        }
    }
}

type CmdResult = Result<(String, i32), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::failed(format!("cannot start thread pool: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Verify(a) => cmd_verify(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Search(a) => cmd_search(a),
        Command::Export(a) => cmd_export(a),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::failed(format!("cannot write {}: {e}", path.display())))
}

/// Writes to `--out` when given, otherwise returns the text for stdout.
fn emit(out: Option<&Path>, text: String) -> Result<String, Failure> {
    match out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn load_distribution(path: &Path, kind: DistKind, role: &str) -> Result<DiscreteDistribution, Failure> {
    let text = read_file(path)?;
    let d = DiscreteDistribution::from_text(&text)
        .map_err(|e| Failure::usage(format!("{role} file {}: {e}", path.display())))?;
    if d.kind() != kind {
        return Err(Failure::usage(format!(
            "{role} file {} holds a {} table, expected {kind}",
            path.display(),
            d.kind()
        )));
    }
    Ok(d)
}

fn validation_failure(seller: &DiscreteDistribution, buyer: &DiscreteDistribution) -> Option<Failure> {
    let mut msg = String::new();
    for (role, d) in [("seller", seller), ("buyer", buyer)] {
        for v in d.validate() {
            let _ = write!(msg, "\n  {role}: {v}");
        }
    }
    (!msg.is_empty()).then(|| Failure::failed(format!("distribution validation failed:{msg}")))
}

fn evaluate_with_engine(
    engine: Engine,
    seller: &DiscreteDistribution,
    buyer: &DiscreteDistribution,
    search: PriceSearch,
) -> Result<GftReport, Failure> {
    Ok(match engine {
        Engine::Fast => evaluate_detailed(seller, buyer, search)?.report,
        Engine::Reference => reference_evaluate(seller, buyer)?,
        Engine::Mc => return Err(Failure::usage("the mc engine produces estimates, not an exact report")),
    })
}

fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Fast => "fast",
        Engine::Reference => "reference",
        Engine::Mc => "mc",
    }
}

fn check_line(c: &QuantityCheck, digits: u32) -> String {
    let computed = c.computed.as_ref().map_or_else(|| "undefined".into(), |v| v.to_decimal(digits));
    let diff = c.abs_diff.as_ref().map_or_else(|| "undefined".into(), |d| d.to_decimal(8));
    format!(
        "{} computed={} published={} abs_diff={} {}",
        c.name,
        computed,
        c.published.to_decimal(4),
        diff,
        if c.pass { "ok" } else { "MISMATCH" }
    )
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let (mut seller, mut buyer) = worst_case_instance()?;
    if let Some(p) = &a.seller {
        seller = load_distribution(p, DistKind::SellerCdf, "seller")?;
    }
    if let Some(p) = &a.buyer {
        buyer = load_distribution(p, DistKind::BuyerSf, "buyer")?;
    }
    if let Some(f) = validation_failure(&seller, &buyer) {
        return Err(f);
    }
    let engine = Engine::from(a.engine);
    let report = evaluate_with_engine(engine, &seller, &buyer, PriceSearch::Monotone)?;
    let hash = table_sha256(&seller);
    let header = [
        ("instance", "modulated power mixture seller vs equal-revenue buyer".to_string()),
        ("engine", engine_name(engine).to_string()),
        ("H", seller.h().to_string()),
        ("seller_sha256", hash.clone()),
        (
            "seller_table",
            if hash == WORST_CASE_SELLER_TABLE_SHA256 { "pinned" } else { "differs from pinned" }.to_string(),
        ),
    ];
    let mut text = gft_report_text(&report, &header, a.digits);
    let checks = compare_with_published(&report);
    text.push_str("[check tolerance=0.00005]\n");
    for c in &checks {
        text.push_str(&check_line(c, a.digits));
        text.push('\n');
    }
    text.push_str("[derived]\n");
    text.push_str(&check_line(&check_fb_over_best_offerer(&report), a.digits));
    text.push('\n');
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let verdict = if failed.is_empty() {
        "verdict = reproduced\n".to_string()
    } else {
        format!("verdict = mismatch ({})\n", failed.join(", "))
    };
    text.push_str(&verdict);
    let text = emit(a.out.as_deref(), text)?;
    Ok((text, if failed.is_empty() { EXIT_OK } else { EXIT_FAILURE }))
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    let seller = load_distribution(&a.seller, DistKind::SellerCdf, "seller")?;
    let buyer = load_distribution(&a.buyer, DistKind::BuyerSf, "buyer")?;
    if seller.h() != buyer.h() {
        return Err(Error::SupportMismatch { seller: seller.h(), buyer: buyer.h() }.into());
    }
    if let Some(f) = validation_failure(&seller, &buyer) {
        return Err(f);
    }
    let header = [("engine", engine_name(a.engine).to_string()), ("H", seller.h().to_string())];
    let search = if a.exhaustive_prices { PriceSearch::Exhaustive } else { PriceSearch::Monotone };
    let text = match a.engine {
        Engine::Mc => {
            let ev = evaluate_detailed(&seller, &buyer, PriceSearch::Monotone)?;
            let mc = monte_carlo_gft(&seller, &buyer, &ev.seller_prices, &ev.buyer_prices, a.samples, a.seed)?;
            mc_report_text(&mc, &header)
        }
        engine => gft_report_text(&evaluate_with_engine(engine, &seller, &buyer, search)?, &header, a.digits),
    };
    Ok((emit(a.out.as_deref(), text)?, EXIT_OK))
}

fn family_params(a: &GenArgs) -> Result<SellerFamilyParams, Failure> {
    if let Some(path) = &a.config {
        let text = read_file(path)?;
        let mut p: SellerFamilyParams =
            toml::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
        if let Some(h) = a.h {
            p.h = h;
        }
        return Ok(p);
    }
    let d = SellerFamilyParams::WORST_CASE;
    Ok(SellerFamilyParams {
        w: a.w.unwrap_or(d.w),
        a1_base: a.a1_base.unwrap_or(d.a1_base),
        a1_amp: a.a1_amp.unwrap_or(d.a1_amp),
        a1_freq: a.a1_freq.unwrap_or(d.a1_freq),
        a2: a.a2.unwrap_or(d.a2),
        h: a.h.unwrap_or(d.h),
    })
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let has_family_flags = a.w.is_some()
        || a.a1_base.is_some()
        || a.a1_amp.is_some()
        || a.a1_freq.is_some()
        || a.a2.is_some()
        || a.config.is_some();
    if a.family != Family::Modulated && has_family_flags {
        return Err(Failure::usage("family parameters only apply to --family modulated"));
    }
    let require_h = || a.h.ok_or_else(|| Failure::usage("--H is required for this family"));
    let d = match a.family {
        Family::Modulated => modulated_power_mixture_seller(&family_params(&a)?)?,
        Family::Uniform => uniform_seller(require_h()?)?,
        Family::EqualRevenue => equal_revenue_buyer(require_h()?)?,
        Family::PointMass => {
            let v = a.value.ok_or_else(|| Failure::usage("--value is required for point-mass"))?;
            let kind = match a.kind.ok_or_else(|| Failure::usage("--kind is required for point-mass"))? {
                KindArg::SellerCdf => DistKind::SellerCdf,
                KindArg::BuyerSf => DistKind::BuyerSf,
            };
            point_mass(v, kind, require_h()?)?
        }
    };
    Ok((emit(a.out.as_deref(), d.to_text())?, EXIT_OK))
}

fn cmd_search(a: SearchArgs) -> CmdResult {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = read_file(path)?;
            toml::from_str::<SearchConfig>(&text)
                .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?
        }
        None => SearchConfig {
            bounds: ParamBounds::around(&SellerFamilyParams::WORST_CASE, 0.10),
            budget: 500,
            restarts: 4,
            seed: 0,
            h: SellerFamilyParams::WORST_CASE.h,
            eval_h: None,
        },
    };
    if let Some(h) = a.h {
        cfg.h = h;
    }
    if let Some(e) = a.eval_h {
        cfg.eval_h = Some(e);
    }
    if let Some(b) = a.budget {
        cfg.budget = b;
    }
    if let Some(r) = a.restarts {
        cfg.restarts = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let result = run_search(&cfg)?;
    let text = search_report_text(&cfg, &result, a.digits);
    if let Some(out) = &a.out {
        let best = modulated_power_mixture_seller(&result.best_params)?;
        write_file(&out.with_extension("dist"), &best.to_text())?;
    }
    Ok((emit(a.out.as_deref(), text)?, EXIT_OK))
}

fn cmd_export(a: ExportArgs) -> CmdResult {
    let text = read_file(&a.file)?;
    let d = DiscreteDistribution::from_text(&text).map_err(|e| Failure::usage(format!("{}: {e}", a.file.display())))?;
    let column = match d.kind() {
        DistKind::SellerCdf => "cdf_real",
        DistKind::BuyerSf => "sf_real",
    };
    let mut csv = format!("m,{column}\n");
    for (m, v) in d.table().iter().enumerate() {
        let _ = writeln!(csv, "{m},{:?}", v.get() as f64 / SCALE as f64);
    }
    Ok((emit(a.out.as_deref(), csv)?, EXIT_OK))
}
