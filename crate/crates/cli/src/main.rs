use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipdsaw_core::beads::bead_survey;
use ipdsaw_core::continuum::k_constants;
use ipdsaw_core::exact::{
    asymptotics_fit, enumerate_all, evaluate_counts, excursion_table, llt_scan, stretch_dp, TableBudget, Variant,
    ENUMERATE_MAX,
};
use ipdsaw_core::finite_n::{em_gap_scan, tilt_gap_scan};
use ipdsaw_core::io::{write_excursion_csv, write_series_csv, Sidecar};
use ipdsaw_core::laplace::{beta_c, delta_coeffs, r_beta, zeta_beta};
use ipdsaw_core::sampling::{sample_polymer, SampleBatch};
use ipdsaw_core::ModelParams;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

mod report;
mod verify;

use report::{write_rows_csv, Check, Report};
use verify::{verify_all, VerifyConfig};

const DEFAULT_BUDGET: u64 = 2 << 30;

#[derive(Parser)]
#[command(name = "ipdsaw", version, about = "Collapsed-phase IPDSAW laboratory")]
struct Cli {
    /// Memory budget for dynamic-programming tables, in bytes
    #[arg(long, global = true, env = "IPDSAW_TABLE_BUDGET_BYTES", default_value_t = DEFAULT_BUDGET)]
    table_budget: u64,

    /// Output file; standard output when absent
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Laplace scalars and the collapsed-phase constants
    Constants(BetaArg),
    /// Partition functions for L = 0..=lmax
    Partition(PartitionArgs),
    /// Excursion probabilities by area
    Excursion(ExcursionArgs),
    /// Local limit ratios
    LltScan(LltArgs),
    /// Discretisation gaps of G_n and h_n^q
    EmScan(EmArgs),
    /// Fit of log Z_L against sqrt(L) and log(L)
    Fit(FitArgs),
    /// Exact Boltzmann samples
    Sample(SampleArgs),
    /// Largest-bead survey
    Beads(BeadArgs),
    /// Every acceptance check, as one report
    VerifyAll(VerifyArgs),
}

#[derive(Args, Serialize)]
struct BetaArg {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
}

#[derive(Args, Serialize)]
struct PartitionArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long)]
    lmax: usize,
    /// full, circ, hat_circ, bar_circ or c_end
    #[arg(long, default_value = "full")]
    variant: Variant,
    /// Compare the full series with exhaustive enumeration where feasible
    #[arg(long)]
    check_bruteforce: bool,
}

#[derive(Args, Serialize)]
struct ExcursionArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    area_cap: usize,
    #[arg(long)]
    height_cap: Option<usize>,
}

#[derive(Args, Serialize)]
struct LltArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [16, 24, 32, 40, 48])]
    n: Vec<usize>,
}

#[derive(Args, Serialize)]
struct EmArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [100, 200, 500, 1000])]
    n: Vec<usize>,
    /// Half-width of the tilt window for the G_n gap
    #[arg(long, default_value_t = 0.3)]
    k: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 1.0, 3.0])]
    q: Vec<f64>,
}

#[derive(Args, Serialize)]
struct FitArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 300)]
    lmin: usize,
    #[arg(long, default_value_t = 1000)]
    lmax: usize,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct BeadArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 400)]
    length: usize,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 5, 10, 20, 40])]
    k_grid: Vec<usize>,
    /// Survey a saved sample file instead of drawing new samples
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Numeric(#[from] ipdsaw_core::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

/// What a command hands back for writing.
enum Output {
    Report(Report),
    /// Text already laid out, plus an optional JSON sidecar
    Text(Vec<u8>, Option<String>),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

/// Runs the command; `Ok(false)` when a check failed.
fn run(cli: &Cli) -> Result<bool, CliError> {
    let budget = TableBudget {
        bytes: cli.table_budget,
    };
    let out = match &cli.command {
        Command::Constants(a) => constants(a)?,
        Command::Partition(a) => partition(cli, a, &budget)?,
        Command::Excursion(a) => excursion(cli, a, &budget)?,
        Command::LltScan(a) => {
            let pts = llt_scan(&ModelParams::new(a.beta)?, a.q, &a.n, &budget)?;
            rows_output(cli, "llt-scan", config(a, cli), to_rows(&pts), Vec::new())?
        }
        Command::EmScan(a) => em_scan(cli, a)?,
        Command::Fit(a) => {
            let f = asymptotics_fit(&ModelParams::new(a.beta)?, a.lmin, a.lmax, &budget)?;
            rows_output(cli, "fit", config(a, cli), to_rows(&[f]), Vec::new())?
        }
        Command::Sample(a) => sample(cli, a, &budget)?,
        Command::Beads(a) => beads(cli, a, &budget)?,
        Command::VerifyAll(a) => verify(cli, a)?,
    };
    let passed = match &out {
        Output::Report(r) => {
            for c in r.checks.iter().filter(|c| !c.passed) {
                eprintln!("{}", c.failure_line());
            }
            r.all_passed
        }
        Output::Text(..) => true,
    };
    write_output(cli.output.as_deref(), out)?;
    Ok(passed)
}

fn config<T: Serialize>(args: &T, cli: &Cli) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    if let Value::Object(m) = &mut v {
        m.insert("table_budget_bytes".into(), json!(cli.table_budget));
        m.insert("format".into(), json!(cli.format));
    }
    v
}

fn to_rows<T: Serialize>(items: &[T]) -> Vec<Value> {
    items
        .iter()
        .map(|i| serde_json::to_value(i).expect("rows serialize"))
        .collect()
}

fn rows_output(
    cli: &Cli,
    command: &'static str,
    cfg: Value,
    rows: Vec<Value>,
    checks: Vec<Check>,
) -> Result<Output, CliError> {
    Ok(match cli.format {
        Format::Json => Output::Report(Report::new(command, cfg, Value::Array(rows), checks)),
        Format::Csv => {
            let mut buf = Vec::new();
            write_rows_csv(&rows, &mut buf)?;
            Output::Text(buf, None)
        }
    })
}

fn json_only(cli: &Cli, command: &str) -> Result<(), CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Usage(format!("{command} writes JSON only")));
    }
    Ok(())
}

fn write_output(path: Option<&Path>, out: Output) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match out {
        Output::Report(r) => r.write_json(&mut sink)?,
        Output::Text(bytes, sidecar) => {
            sink.write_all(&bytes)?;
            if let Some(meta) = sidecar {
                match path {
                    Some(p) => std::fs::write(p.with_extension("json"), meta + "\n")?,
                    None => eprintln!("{meta}"),
                }
            }
        }
    }
    sink.flush()?;
    Ok(())
}

fn constants(a: &BetaArg) -> Result<Output, CliError> {
    let p = ModelParams::new(a.beta)?;
    let k = k_constants(&p)?;
    let d = delta_coeffs(&p)?;
    let results = json!({
        "beta_c": beta_c(),
        "c_beta": p.c_beta(),
        "gamma_beta": p.gamma_beta(),
        "zeta_beta": zeta_beta(&p)?,
        "r_beta": r_beta(&p)?,
        "delta1": d.delta1,
        "delta2": d.delta2,
        "constants": k,
    });
    let checks = vec![
        Check::named("delta2_below_one", "laplace", "delta_coeffs").below(d.delta2, 1.0),
        Check::named("route_gap", "continuum", "k_constants").below(k.route_gap(), 1e-9),
    ];
    Ok(Output::Report(Report::new(
        "constants",
        json!({"beta": a.beta}),
        results,
        checks,
    )))
}

fn partition(cli: &Cli, a: &PartitionArgs, budget: &TableBudget) -> Result<Output, CliError> {
    let p = ModelParams::new(a.beta)?;
    let series = stretch_dp(&p, a.lmax, a.variant, budget)?;
    let mut checks = Vec::new();
    if a.check_bruteforce {
        let full = if a.variant == Variant::Full {
            series.clone()
        } else {
            stretch_dp(&p, a.lmax, Variant::Full, budget)?
        };
        let top = a.lmax.min(ENUMERATE_MAX);
        let mut worst: f64 = 0.0;
        for l in 1..=top {
            let exact = evaluate_counts(&enumerate_all(l)?, a.beta);
            worst = worst.max((full.get(l).ln() - exact).exp_m1().abs());
        }
        checks.push(Check::named(format!("bruteforce_l<={top}"), "exact", "stretch_dp").below(worst, 1e-12));
    }
    match cli.format {
        Format::Json => {
            let rows: Vec<Value> = series
                .values
                .iter()
                .enumerate()
                .map(|(l, v)| json!({"L": l, "log_value": v.ln()}))
                .collect();
            let cfg = config(a, cli);
            let results = json!({"variant": a.variant, "rows": rows});
            Ok(Output::Report(Report::new("partition", cfg, results, checks)))
        }
        Format::Csv => {
            if checks.iter().any(|c| !c.passed) {
                for c in &checks {
                    eprintln!("{}", c.failure_line());
                }
                return Err(CliError::Usage("brute-force check failed".into()));
            }
            let mut buf = Vec::new();
            write_series_csv(&series, &mut buf)?;
            Ok(Output::Text(buf, Some(Sidecar::for_series(&series).to_json())))
        }
    }
}

fn excursion(cli: &Cli, a: &ExcursionArgs, budget: &TableBudget) -> Result<Output, CliError> {
    let t = excursion_table(&ModelParams::new(a.beta)?, a.n, a.area_cap, a.height_cap, budget)?;
    let retained = t.total();
    let check = Check::named("height_cap_tail", "exact", "excursion_table")
        .below(if retained > 0.0 { t.tail_bound / retained } else { 0.0 }, 1e-14);
    match cli.format {
        Format::Json => {
            let results = json!({"height_cap": t.height_cap, "tail_bound": t.tail_bound, "rows": t.probabilities});
            Ok(Output::Report(Report::new(
                "excursion",
                config(a, cli),
                results,
                vec![check],
            )))
        }
        Format::Csv => {
            if !check.passed {
                eprintln!("{}", check.failure_line());
            }
            let mut buf = Vec::new();
            write_excursion_csv(&t, &mut buf)?;
            Ok(Output::Text(buf, Some(Sidecar::for_excursion(&t).to_json())))
        }
    }
}

fn em_scan(cli: &Cli, a: &EmArgs) -> Result<Output, CliError> {
    let p = ModelParams::new(a.beta)?;
    let mut rows = Vec::new();
    for order in [0u8, 1] {
        for r in em_gap_scan(&p, &a.n, a.k, order)? {
            rows.push(json!({"quantity": format!("g_n_order{order}"), "param": a.k, "n": r.n, "gap": r.sup_gap, "scaled": r.scaled}));
        }
    }
    for &q in &a.q {
        for r in tilt_gap_scan(&p, &a.n, q)? {
            let gap = (r.h_n_q - r.h_tilde).abs();
            rows.push(json!({"quantity": "h_n_q", "param": q, "n": r.n, "gap": gap, "scaled": r.scaled}));
        }
    }
    rows_output(cli, "em-scan", config(a, cli), rows, Vec::new())
}

fn sample(cli: &Cli, a: &SampleArgs, budget: &TableBudget) -> Result<Output, CliError> {
    let batch = sample_polymer(&ModelParams::new(a.beta)?, a.length, a.count, a.seed, budget)?;
    match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            batch.write_to(&mut buf)?;
            Ok(Output::Text(buf, None))
        }
        Format::Json => {
            let rows: Vec<String> = batch.trajectories.iter().map(|t| t.to_string()).collect();
            Ok(Output::Report(Report::new(
                "sample",
                config(a, cli),
                json!(rows),
                Vec::new(),
            )))
        }
    }
}

fn beads(cli: &Cli, a: &BeadArgs, budget: &TableBudget) -> Result<Output, CliError> {
    let batch = match &a.input {
        Some(path) => SampleBatch::read_from(BufReader::new(File::open(path)?))?,
        None => sample_polymer(&ModelParams::new(a.beta)?, a.length, a.count, a.seed, budget)?,
    };
    let survey = bead_survey(&batch, &a.k_grid)?;
    match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            survey.write_csv(&mut buf)?;
            Ok(Output::Text(buf, None))
        }
        Format::Json => {
            let results = serde_json::to_value(&survey).expect("survey serializes");
            Ok(Output::Report(Report::new(
                "beads",
                config(a, cli),
                results,
                Vec::new(),
            )))
        }
    }
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<Output, CliError> {
    json_only(cli, "verify-all")?;
    let cfg = VerifyConfig {
        beta: a.beta,
        seed: a.seed,
        table_budget_bytes: cli.table_budget,
    };
    ModelParams::new(a.beta)?;
    // wall-clock goes to stderr so the report itself stays reproducible
    let (results, checks) = verify_all(&cfg, |stage, secs| {
        eprintln!(
            "timing criterion={} seconds={secs:.3} budget_seconds={} stage=\"{}\"",
            stage.criterion, stage.budget_seconds, stage.title
        );
    });
    let config = serde_json::to_value(cfg).expect("config serializes");
    Ok(Output::Report(Report::new("verify-all", config, results, checks)))
}
