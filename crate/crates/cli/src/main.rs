//! `sqfn`: construct filtrations, run the verifier suites, and emit reports.

mod config;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sqfn_core::certificates::{self, TwoPointStrategy};
use sqfn_core::constructions::{self, SharpAlpha};
use sqfn_core::filtration::build_nadic;
use sqfn_core::operators::StepFunctionJson;
use sqfn_core::random::{self, RandomTreeParams};
use sqfn_core::{FiltrationTree, StepFunction};

use config::ExperimentConfig;
use report::Row;

#[derive(Parser)]
#[command(name = "sqfn", version, about = "Martingale square function laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate trees and random step functions.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Apply an operator to a step function.
    Op {
        /// Step function JSON; a string "tree" field is a file reference.
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, value_enum)]
        op: OpKind,
        /// Moment exponent for --op sp.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a weight characteristic.
    Weight {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long = "char", value_enum)]
        characteristic: CharKind,
    },
    /// Run verifier suites on random inputs.
    Verify {
        /// Comma-separated suite names, or "all".
        #[arg(long, value_delimiter = ',', default_value = "all")]
        suite: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate a scalar certificate.
    Certify {
        #[arg(long, value_enum)]
        name: CertName,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
        /// Constant C for --name rm1.
        #[arg(long)]
        c: Option<f64>,
        /// Truncation threshold for --name series.
        #[arg(long, default_value_t = 1e-15)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one of the named examples.
    Construct {
        #[arg(long, value_enum)]
        which: Construction,
        #[arg(long)]
        alpha: Option<f64>,
        /// Number of differences (sharpness) or depth (example2d).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a TOML experiment config and write report artifacts.
    Run {
        config: PathBuf,
        /// Override the config's out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    Tree {
        /// Branching factor for a uniform n-adic tree.
        #[arg(long)]
        nadic: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// Draw a random homogeneous tree instead.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 7)]
        max_depth: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha_min: f64,
        #[arg(long, default_value_t = 4)]
        max_branch: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a random step function on an existing tree.
    Fn {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value = "random-haar-coefficients")]
        model: String,
        #[arg(long, default_value_t = 4.0)]
        target_sup: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpKind {
    Square,
    Maximal,
    Sp,
    Sinf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CharKind {
    Martingale,
    Semiclassical,
    A1,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "lower")]
enum CertName {
    Dzili,
    Twopoint,
    Rm1,
    #[value(name = "optimalC", alias = "optimalc")]
    OptimalC,
    Series,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    #[value(name = "example2d")]
    Example2d,
    Sharpness,
    Flambda,
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("SQFN_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { config, out_dir } => cmd_run(&config, out_dir.as_deref()),
        other => match dispatch(other) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                2
            }
        },
    };
    ExitCode::from(code)
}

fn dispatch(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Gen { what } => cmd_gen(what).map(|()| 0),
        Cmd::Op { function, op, p, out } => cmd_op(&function, op, p, out.as_deref()).map(|()| 0),
        Cmd::Weight { function, characteristic } => {
            cmd_weight(&function, characteristic).map(|()| 0)
        }
        Cmd::Verify { suite, trials, seed, out, format } => {
            cmd_verify(suite, trials, seed, out.as_deref(), format)
        }
        Cmd::Certify { name, alpha, n, grid, c, eps, out } => {
            cmd_certify(name, alpha, n, grid, c, eps, out.as_deref())
        }
        Cmd::Construct { which, alpha, n, lambda, out } => {
            cmd_construct(which, alpha, n, lambda, out.as_deref()).map(|()| 0)
        }
        Cmd::Run { .. } => unreachable!("handled in main"),
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn load_tree(path: &Path) -> Result<std::sync::Arc<FiltrationTree>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read tree {}", path.display()))?;
    let j = serde_json::from_str(&text).context("malformed tree JSON")?;
    Ok(FiltrationTree::from_json(&j)?)
}

/// Load a step function; a string `tree` field is resolved as a path
/// relative to the function file.
fn load_function(path: &Path) -> Result<StepFunction> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read function {}", path.display()))?;
    let mut j: StepFunctionJson = serde_json::from_str(&text).context("malformed function JSON")?;
    if let serde_json::Value::String(tree_ref) = &j.tree {
        let base = path.parent().unwrap_or(Path::new("."));
        let tree_path = base.join(tree_ref);
        let tree_text = std::fs::read_to_string(&tree_path)
            .with_context(|| format!("cannot read referenced tree {}", tree_path.display()))?;
        j.tree = serde_json::from_str(&tree_text).context("malformed referenced tree JSON")?;
    }
    Ok(StepFunction::from_json(&j)?)
}

fn function_json(f: &StepFunction) -> Result<String> {
    Ok(serde_json::to_string_pretty(&f.to_json())? + "\n")
}

fn cmd_gen(what: GenCmd) -> Result<()> {
    match what {
        GenCmd::Tree { nadic, depth, random: rnd, seed, max_depth, alpha_min, max_branch, out } => {
            let tree = match (nadic, rnd) {
                (Some(n), false) => {
                    let d = depth.context("--nadic needs --depth")?;
                    build_nadic(n, d)?
                }
                (None, true) => {
                    let mut rng = random::rng_from_seed(seed);
                    random::random_tree(
                        &mut rng,
                        &RandomTreeParams { max_depth, alpha_min, max_branch },
                    )?
                }
                _ => bail!("pass exactly one of --nadic or --random"),
            };
            let json = serde_json::to_string_pretty(&tree.to_json())? + "\n";
            write_or_print(out.as_deref(), &json)
        }
        GenCmd::Fn { tree, model, target_sup, seed, out } => {
            let t = load_tree(&tree)?;
            let spec = config::FunctionSpec { model, target_sup };
            let m = suites::parse_model(&spec)?;
            let mut rng = random::rng_from_seed(seed);
            let f = random::random_function(&t, &mut rng, m);
            write_or_print(out.as_deref(), &function_json(&f)?)
        }
    }
}

fn cmd_op(path: &Path, op: OpKind, p: Option<f64>, out: Option<&Path>) -> Result<()> {
    let f = load_function(path)?;
    let g = match op {
        OpKind::Square => f.square_function(),
        OpKind::Maximal => f.maximal_function(),
        OpKind::Sp => {
            let p = p.context("--op sp needs --p")?;
            f.square_function_p(p)?
        }
        OpKind::Sinf => f.square_function_p(f64::INFINITY)?,
    };
    write_or_print(out, &function_json(&g)?)
}

fn cmd_weight(path: &Path, characteristic: CharKind) -> Result<()> {
    let w = load_function(path)?;
    let c = sqfn_core::weights::characteristics(&w)?;
    let v = match characteristic {
        CharKind::Martingale => c.a_infty_martingale,
        CharKind::Semiclassical => c.a_infty_semiclassical,
        CharKind::A1 => c.a1,
    };
    println!("{v}");
    Ok(())
}

fn cmd_verify(
    suite: Vec<String>,
    trials: usize,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<u8> {
    let cfg = ExperimentConfig {
        seed,
        trials,
        out_dir: String::new(),
        plots: false,
        suites: suite,
        tree: Default::default(),
        function: Default::default(),
        grids: Default::default(),
        certs: None,
        sharpness: None,
    };
    let reports = suites::run_suites(&cfg)?;
    let mut rows: Vec<Row> = reports.iter().map(Row::from_report).collect();
    report::sort_rows(&mut rows);
    let text = match format {
        Format::Csv => report::to_csv(&rows),
        Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
    };
    write_or_print(out, &text)?;
    let failed = rows.iter().filter(|r| r.strict_failure()).count();
    if failed > 0 {
        eprintln!("{failed} strict-bound failures");
        return Ok(1);
    }
    Ok(0)
}

fn cmd_certify(
    name: CertName,
    alpha: Option<f64>,
    n: Option<f64>,
    grid: usize,
    c: Option<f64>,
    eps: f64,
    out: Option<&Path>,
) -> Result<u8> {
    let json;
    let mut failed = false;
    match name {
        CertName::Dzili => {
            let cert = certificates::check_dzili(n.context("--name dzili needs --n")?, grid)?;
            failed = !cert.pass;
            json = serde_json::to_string_pretty(&cert)?;
        }
        CertName::Twopoint => {
            let cert = certificates::check_two_point_lemma(
                alpha.context("--name twopoint needs --alpha")?,
                TwoPointStrategy::Reduced { grid },
            )?;
            failed = !cert.pass;
            json = serde_json::to_string_pretty(&cert)?;
        }
        CertName::Rm1 => {
            let a = alpha.context("--name rm1 needs --alpha")?;
            let c = c.context("--name rm1 needs --c")?;
            let margin = certificates::check_rm1(c, a);
            json = serde_json::to_string_pretty(&serde_json::json!({
                "name": "rm1", "c": c, "alpha": a, "margin": margin,
            }))?;
        }
        CertName::OptimalC => {
            let a = alpha.context("--name optimalC needs --alpha")?;
            let value = certificates::optimal_c(a, 1e-3)?;
            json = serde_json::to_string_pretty(&serde_json::json!({
                "name": "optimalC", "alpha": a, "tol": 1e-3, "value": value,
            }))?;
        }
        CertName::Series => {
            let s = certificates::superexp_constant(eps);
            json = serde_json::to_string_pretty(&s)?;
        }
    }
    write_or_print(out, &(json + "\n"))?;
    Ok(if failed { 1 } else { 0 })
}

fn cmd_construct(
    which: Construction,
    alpha: Option<f64>,
    n: Option<usize>,
    lambda: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let f = match which {
        Construction::Example2d => {
            constructions::build_example_2d(n.context("--which example2d needs --n (depth)")?)?
        }
        Construction::Sharpness => {
            let a = alpha.context("--which sharpness needs --alpha")?;
            let n = n.context("--which sharpness needs --n")?;
            constructions::build_sharpness(SharpAlpha::Float(a), n)?.g
        }
        Construction::Flambda => {
            let a = alpha.context("--which flambda needs --alpha")?;
            let l = lambda.context("--which flambda needs --lambda")?;
            let fam = constructions::build_f_lambda(a, l)?;
            fam.f_lambda.expect("present after build_f_lambda")
        }
    };
    write_or_print(out, &function_json(&f)?)
}

fn cmd_run(config_path: &Path, out_dir_override: Option<&Path>) -> u8 {
    let cfg = match config::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    match execute_run(&cfg, out_dir_override) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute_run(cfg: &ExperimentConfig, out_dir_override: Option<&Path>) -> Result<u8> {
    let out_dir = out_dir_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut failed = false;

    if !cfg.suites.is_empty() {
        let reports = suites::run_suites(cfg)?;
        let mut rows: Vec<Row> = reports.iter().map(Row::from_report).collect();
        report::sort_rows(&mut rows);
        std::fs::write(out_dir.join("report.csv"), report::to_csv(&rows))?;
        let failures: Vec<&Row> = rows.iter().filter(|r| r.strict_failure()).collect();
        if !failures.is_empty() {
            failed = true;
            for r in &failures {
                eprintln!(
                    "FAIL {} lhs={} rhs={} margin={}",
                    r.name, r.lhs, r.rhs, r.margin
                );
            }
        }
        if cfg.plots {
            write_distribution_plot(&out_dir, &rows)?;
        }
        let suites_seen: std::collections::BTreeSet<&str> =
            rows.iter().map(|r| r.name.as_str()).collect();
        println!(
            "report.csv: {} rows across {} report kinds",
            rows.len(),
            suites_seen.len()
        );
    }

    if let Some(certs) = &cfg.certs {
        let mut entries = Vec::new();
        for &n in &certs.dzili_n {
            let c = certificates::check_dzili(n, certs.grid)?;
            failed |= !c.pass;
            entries.push(serde_json::to_value(&c)?);
        }
        for &a in &certs.twopoint_alpha {
            let c = certificates::check_two_point_lemma(a, TwoPointStrategy::Reduced {
                grid: certs.grid,
            })?;
            failed |= !c.pass;
            entries.push(serde_json::to_value(&c)?);
        }
        for &[c, a] in &certs.rm1 {
            let margin = certificates::check_rm1(c, a);
            entries.push(serde_json::json!({
                "name": "rm1", "c": c, "alpha": a, "margin": margin,
            }));
        }
        for &a in &certs.optimal_c_alpha {
            let value = certificates::optimal_c(a, 1e-3)?;
            entries.push(serde_json::json!({
                "name": "optimalC", "alpha": a, "tol": 1e-3, "value": value,
            }));
        }
        let series = certificates::superexp_constant(certs.series_eps);
        entries.push(serde_json::json!({
            "name": "series",
            "value": series.value,
            "terms": series.terms,
            "tail_bound": series.tail_bound,
        }));
        std::fs::write(
            out_dir.join("certs.json"),
            serde_json::to_string_pretty(&entries)? + "\n",
        )?;
        println!("certs.json: {} certificates", entries.len());
    }

    if let Some(s) = &cfg.sharpness {
        let rows = suites::run_sharpness(s.alpha, s.c, s.lambda_min, s.count)?;
        let mut csv = String::from("lambda,measure,bound,ratio\n");
        for r in &rows {
            use std::fmt::Write as _;
            let _ = writeln!(csv, "{},{},{},{}", r.lambda, r.measure, r.bound, r.ratio);
        }
        std::fs::write(out_dir.join("sharpness.csv"), csv)?;
        if cfg.plots {
            let measured: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.lambda * r.lambda, r.measure.ln()))
                .collect();
            let bound: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.lambda * r.lambda, r.bound.ln()))
                .collect();
            report::svg_line_plot(
                &out_dir.join("sharpness.svg"),
                "log measure vs lambda^2",
                &[("measured".into(), measured), ("bound".into(), bound)],
            )?;
        }
        println!("sharpness.csv: {} rows", rows.len());
    }

    Ok(if failed { 1 } else { 0 })
}

/// Overlay of measured log-distribution against the exponential bound, taken
/// from the sorted distribution-suite rows.
fn write_distribution_plot(out_dir: &Path, rows: &[Row]) -> Result<()> {
    let pts: Vec<&Row> = rows
        .iter()
        .filter(|r| r.name == "superexp-distribution" && r.lhs > 0.0)
        .collect();
    if pts.len() < 2 {
        return Ok(());
    }
    let measured: Vec<(f64, f64)> = pts
        .iter()
        .map(|r| (r.lambda.unwrap_or(0.0).powi(2), r.lhs.ln()))
        .collect();
    let bound: Vec<(f64, f64)> = pts
        .iter()
        .map(|r| (r.lambda.unwrap_or(0.0).powi(2), r.rhs.ln()))
        .collect();
    report::svg_line_plot(
        &out_dir.join("distribution.svg"),
        "log measure vs lambda^2",
        &[("measured".into(), measured), ("bound".into(), bound)],
    )
}
