use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conclusive_teleport::fidelity::{FidelityReport, Simulation};
use conclusive_teleport::figure::{figure1, write_csv, write_jsonl};
use conclusive_teleport::format::fmt12;
use conclusive_teleport::verify::{
    all_passed, default_channel, render_table, run_checks, ChannelSpec, LambdaSpec, VerifyConfig,
};
use conclusive_teleport::{
    build_conclusive_povm, build_weyl_basis, refine_inconclusive_product,
    refine_inconclusive_residual, report, simulate, Corrections, Error, SchmidtChannel,
    SimulationOptions, TranscriptRecord,
};
use serde_json::json;

const WORKERS_ENV: &str = "CTELEPORT_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "cteleport", version, about = "Conclusive teleportation fidelity toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the numerical self-check battery.
    Verify(VerifyArgs),
    /// Emit the optimum-fidelity curves against cos(theta).
    Figure1(OutputArgs),
    /// Exact (and optionally sampled) fidelity report for one configuration.
    Teleport(TeleportArgs),
}

#[derive(Args, Debug, Clone, PartialEq)]
#[group(multiple = false)]
struct ChannelArgs {
    /// Schmidt coefficients a_1,...,a_d (normalized to unit sum of squares).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    coeffs: Option<Vec<f64>>,
    /// Two-level channel with this entanglement entropy (bits).
    #[arg(long)]
    entropy: Option<f64>,
    /// Two-level channel with a_1^2 = (1 + c)/2.
    #[arg(long = "cos-theta-c", allow_hyphen_values = true)]
    cos_theta_c: Option<f64>,
}

impl ChannelArgs {
    fn spec(&self) -> Option<ChannelSpec> {
        if let Some(c) = &self.coeffs {
            Some(ChannelSpec::Coeffs(c.clone()))
        } else if let Some(s) = self.entropy {
            Some(ChannelSpec::Entropy(s))
        } else {
            self.cos_theta_c.map(ChannelSpec::CosThetaC)
        }
    }

    fn flag(&self) -> &'static str {
        if self.coeffs.is_some() {
            "--coeffs"
        } else if self.entropy.is_some() {
            "--entropy"
        } else if self.cos_theta_c.is_some() {
            "--cos-theta-c"
        } else {
            "--d"
        }
    }

    fn echo(&self) -> Vec<String> {
        if let Some(c) = &self.coeffs {
            let list: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            vec!["--coeffs".into(), list.join(",")]
        } else if let Some(s) = self.entropy {
            vec!["--entropy".into(), s.to_string()]
        } else if let Some(c) = self.cos_theta_c {
            vec!["--cos-theta-c".into(), c.to_string()]
        } else {
            Vec::new()
        }
    }
}

fn parse_lambda(s: &str) -> Result<LambdaSpec, String> {
    if s == "max" {
        return Ok(LambdaSpec::Max);
    }
    let v: f64 = s.parse().map_err(|_| format!("expected a number or 'max', got '{s}'"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("lambda must be a finite nonnegative number, got {v}"));
    }
    Ok(LambdaSpec::Value(v))
}

fn echo_lambda(l: &LambdaSpec) -> String {
    match l {
        LambdaSpec::Max => "max".into(),
        LambdaSpec::Value(v) => v.to_string(),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Product,
    Residual,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CorrectionArg {
    Auto,
    Paper,
}

impl From<CorrectionArg> for Corrections {
    fn from(c: CorrectionArg) -> Self {
        match c {
            CorrectionArg::Auto => Corrections::Auto,
            CorrectionArg::Paper => Corrections::Paper,
        }
    }
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

#[derive(Args, Debug, Clone, PartialEq)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug, Clone, PartialEq)]
struct VerifyArgs {
    /// Local dimensions to check (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    d: Vec<usize>,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_parser = parse_lambda, default_value = "max")]
    lambda: LambdaSpec,
    #[arg(long, default_value_t = 20_000)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone, PartialEq)]
struct TeleportArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_parser = parse_lambda, default_value = "max")]
    lambda: LambdaSpec,
    #[arg(long, value_enum, default_value = "residual")]
    strategy: Strategy,
    #[arg(long, value_enum, default_value = "auto")]
    corrections: CorrectionArg,
    /// Monte Carlo runs; 0 gives the exact report only.
    #[arg(long, default_value_t = 0)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the classical message stream here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

impl TeleportArgs {
    /// Command line reproducing this configuration.
    fn echo(&self) -> Vec<String> {
        let mut v = vec!["teleport".into(), "--d".into(), self.d.to_string()];
        v.extend(self.channel.echo());
        v.extend([
            "--lambda".into(),
            echo_lambda(&self.lambda),
            "--strategy".into(),
            value_name(&self.strategy),
            "--corrections".into(),
            value_name(&self.corrections),
            "--runs".into(),
            self.runs.to_string(),
            "--seed".into(),
            self.seed.to_string(),
            "--format".into(),
            value_name(&self.output.format),
        ]);
        if let Some(p) = &self.output.out {
            v.extend(["--out".into(), p.display().to_string()]);
        }
        if let Some(p) = &self.transcript {
            v.extend(["--transcript".into(), p.display().to_string()]);
        }
        v
    }
}

/// Failure attributed to the flag that caused it.
#[derive(Debug)]
struct CliError {
    flag: &'static str,
    message: String,
}

impl CliError {
    fn new(flag: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            flag,
            message: err.to_string(),
        }
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::new("--out", format!("{}: {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_err(flag: &'static str) -> impl Fn(io::Error) -> CliError {
    move |e| CliError::new(flag, e)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, CliError> {
    let cfg = VerifyConfig {
        dims: args.d.clone(),
        channel: args.channel.spec(),
        lambda: args.lambda,
        seed: args.seed,
        mc_runs: args.runs,
    };
    let rows = run_checks(&cfg);
    let passed = all_passed(&rows);
    match &args.output.out {
        None => print!("{}", render_table(&rows)),
        Some(_) => {
            eprint!("{}", render_table(&rows));
            let mut w = open_out(&args.output.out)?;
            match args.output.format {
                Format::Csv => {
                    writeln!(w, "group,name,residual,tolerance,bound,passed").map_err(io_err("--out"))?;
                    for r in &rows {
                        let bound = serde_json::to_value(r.bound).expect("serializable");
                        writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            r.group,
                            r.name.replace(',', ";"),
                            fmt12(r.residual),
                            fmt12(r.tolerance),
                            bound.as_str().unwrap_or_default(),
                            r.passed as u8
                        )
                        .map_err(io_err("--out"))?;
                    }
                }
                Format::Jsonl => {
                    for r in &rows {
                        serde_json::to_writer(&mut w, r).map_err(|e| CliError::new("--out", e))?;
                        writeln!(w).map_err(io_err("--out"))?;
                    }
                }
            }
            w.flush().map_err(io_err("--out"))?;
        }
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    eprintln!(
        "{} checks, {} failed",
        rows.len(),
        failed
    );
    Ok(passed)
}

fn cmd_figure1(args: &OutputArgs) -> Result<(), CliError> {
    let rows = figure1().map_err(|e| CliError::new("figure1", e))?;
    let mut w = open_out(&args.out)?;
    match args.format {
        Format::Csv => write_csv(&rows, &mut w),
        Format::Jsonl => write_jsonl(&rows, &mut w),
    }
    .map_err(io_err("--out"))?;
    w.flush().map_err(io_err("--out"))
}

fn teleport_channel(args: &TeleportArgs) -> Result<SchmidtChannel, CliError> {
    let flag = args.channel.flag();
    let ch = match args.channel.spec() {
        Some(spec) => spec.build(),
        None => default_channel(args.d),
    }
    .map_err(|e| CliError::new(flag, e))?;
    if ch.dim() != args.d {
        return Err(CliError::new(
            flag,
            format!("channel has dimension {} but --d is {}", ch.dim(), args.d),
        ));
    }
    Ok(ch)
}

fn attribute(err: Error) -> CliError {
    let flag = match &err {
        Error::Positivity { .. } | Error::Domain(_) => "--lambda",
        Error::DecompositionRequired { .. } => "--strategy",
        Error::SingularChannel { .. } => "--coeffs",
        _ => "teleport",
    };
    CliError::new(flag, err)
}

fn write_report_csv(w: &mut dyn Write, exact: &FidelityReport, sampled: Option<&FidelityReport>) -> io::Result<()> {
    writeln!(w, "method,alpha,kind,conclusive,probability,fidelity_term,probability_se,fidelity_term_se")?;
    for r in std::iter::once(exact).chain(sampled) {
        let method = serde_json::to_value(r.method).expect("serializable");
        let method = method.as_str().unwrap_or_default();
        for o in &r.outcomes {
            writeln!(
                w,
                "{method},{},{},{},{},{},{},{}",
                o.alpha,
                o.kind.label(),
                o.kind.is_conclusive() as u8,
                fmt12(o.probability),
                fmt12(o.fidelity_term),
                fmt12(o.probability_se),
                fmt12(o.fidelity_term_se)
            )?;
        }
        for (name, p, f, se) in [
            ("conclusive", r.p_conclusive, r.f_conclusive, r.f_conclusive_se),
            ("inconclusive", r.p_inconclusive, r.f_inconclusive, r.f_inconclusive_se),
            ("total", r.p_conclusive + r.p_inconclusive, r.f_total, r.f_total_se),
        ] {
            let p_se = if name == "total" { 0.0 } else { r.p_inconclusive_se };
            writeln!(w, "{method},{name},,,{},{},{},{}", fmt12(p), fmt12(f), fmt12(p_se), fmt12(se))?;
        }
    }
    Ok(())
}

fn write_transcript(path: &PathBuf, format: Format, records: &[TranscriptRecord]) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::new("--transcript", format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    let res: io::Result<()> = (|| {
        match format {
            Format::Csv => {
                writeln!(w, "run_index,outcome_alpha,conclusive_flag,bits_sent")?;
                for r in records {
                    writeln!(w, "{},{},{},{}", r.run_index, r.outcome_alpha, r.conclusive_flag, r.bits_sent)?;
                }
            }
            Format::Jsonl => {
                for r in records {
                    serde_json::to_writer(&mut w, r)?;
                    writeln!(w)?;
                }
            }
        }
        w.flush()
    })();
    res.map_err(io_err("--transcript"))
}

fn cmd_teleport(args: &TeleportArgs) -> Result<(), CliError> {
    if args.transcript.is_some() && args.runs == 0 {
        return Err(CliError::new("--transcript", "a transcript needs --runs > 0"));
    }
    let basis = build_weyl_basis(args.d).map_err(|e| CliError::new("--d", e))?;
    let ch = teleport_channel(args)?;
    let lambda = args.lambda.resolve(&ch);
    let base = build_conclusive_povm(&ch, &basis, lambda).map_err(attribute)?;
    let povm = match args.strategy {
        Strategy::Product => refine_inconclusive_product(&base),
        Strategy::Residual => refine_inconclusive_residual(&base, &basis),
    }
    .map_err(|e| CliError::new("--strategy", e))?;
    let corrections: Corrections = args.corrections.into();
    let exact = report(&povm, &ch, &basis, corrections).map_err(|e| CliError::new("--corrections", e))?;
    let sampled: Option<Simulation> = if args.runs > 0 {
        let opts = SimulationOptions {
            record_transcript: args.transcript.is_some(),
        };
        Some(
            simulate(&povm, &ch, &basis, corrections, args.runs, args.seed, &opts)
                .map_err(|e| CliError::new("--runs", e))?,
        )
    } else {
        None
    };
    let echo = args.echo().join(" ");
    eprintln!("# cteleport {echo}");
    let mut w = open_out(&args.output.out)?;
    let sampled_report = sampled.as_ref().map(|s| &s.report);
    match args.output.format {
        Format::Csv => write_report_csv(&mut *w, &exact, sampled_report).map_err(io_err("--out"))?,
        Format::Jsonl => {
            let mut lines = vec![json!({
                "record": "config",
                "args": args.echo(),
                "d": args.d,
                "coeffs": ch.coeffs(),
                "lambda": lambda,
                "strategy": value_name(&args.strategy),
                "corrections": corrections.as_str(),
                "runs": args.runs,
                "seed": args.seed,
            })];
            for r in std::iter::once(&exact).chain(sampled_report) {
                for o in &r.outcomes {
                    let mut v = serde_json::to_value(o).expect("serializable");
                    v["record"] = json!("outcome");
                    v["method"] = serde_json::to_value(r.method).expect("serializable");
                    lines.push(v);
                }
                let mut v = serde_json::to_value(r).expect("serializable");
                v.as_object_mut().expect("object").remove("outcomes");
                v["record"] = json!("summary");
                lines.push(v);
            }
            for l in lines {
                writeln!(w, "{l}").map_err(io_err("--out"))?;
            }
        }
    }
    w.flush().map_err(io_err("--out"))?;
    if let (Some(path), Some(sim)) = (&args.transcript, &sampled) {
        write_transcript(path, args.output.format, sim.transcript.as_deref().unwrap_or_default())?;
    }
    Ok(())
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::new(WORKERS_ENV, format!("expected a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new(WORKERS_ENV, e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {}: {}", e.flag, e.message);
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a).map(|ok| if ok { 0 } else { 1 }),
        Command::Figure1(a) => cmd_figure1(a).map(|_| 0),
        Command::Teleport(a) => cmd_teleport(a).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}: {}", e.flag, e.message);
            ExitCode::from(2)
        }
    }
}
