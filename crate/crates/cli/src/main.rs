use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use netq_core::analysis::{estimate, BoundsReport, CycleRecord};
use netq_core::config::load_network;
use netq_core::dynamics::{run, run_replicas};
use netq_core::maxplus::longest_path;
use netq_core::stochastic::ServiceSampler;
use netq_core::tables::{self, Table};
use netq_core::{Error, MatrixF64};

#[derive(Parser)]
#[command(name = "netq", version, about = "Max-plus analysis of acyclic fork-join queueing networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a network config, print its partial graphs
    Validate { config: PathBuf },
    /// Simulate the network and write the per-cycle trajectory
    Simulate {
        config: PathBuf,
        #[arg(long, default_value_t = tables::DEFAULT_CYCLES as u64, value_parser = clap::value_parser!(u64).range(1..))]
        cycles: u64,
        #[arg(long, env = "NETQ_SEED", default_value_t = tables::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        replicas: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Lower and upper bounds on the mean cycle time
    Bounds {
        config: PathBuf,
        /// Append a simulated estimate of the mean cycle time
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = tables::DEFAULT_CYCLES as u64, value_parser = clap::value_parser!(u64).range(1..))]
        cycles: u64,
        #[arg(long, env = "NETQ_SEED", default_value_t = tables::DEFAULT_SEED)]
        seed: u64,
    },
    /// Regenerate one of the reference tables and compare with the printed values
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        table: u8,
        #[arg(long, default_value_t = tables::DEFAULT_CYCLES as u64)]
        cycles: u64,
        #[arg(long, env = "NETQ_SEED", default_value_t = tables::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Markdown)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 1 if any row disagrees with the printed table
        #[arg(long)]
        check: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Markdown,
    Csv,
}

enum Failure {
    Config(Error),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => validate(&config),
        Command::Simulate {
            config,
            cycles,
            seed,
            replicas,
            out,
            format,
        } => simulate(&config, cycles as usize, seed, replicas, out.as_deref(), format),
        Command::Bounds {
            config,
            simulate,
            cycles,
            seed,
        } => bounds(&config, simulate.then_some((cycles as usize, seed))),
        Command::Reproduce {
            table,
            cycles,
            seed,
            format,
            out,
            check,
        } => reproduce(table, cycles as usize, seed, format, out.as_deref(), check),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn pattern(m: &MatrixF64) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let cells: Vec<&str> = m
            .row(i)
            .iter()
            .map(|x| if x.is_epsilon() { "." } else { "0" })
            .collect();
        let _ = writeln!(s, "  {}", cells.join(" "));
    }
    s
}

fn validate(config: &Path) -> Result<(), Failure> {
    let net = load_network(config)?;
    let pg = net.partial_graphs::<f64>();
    let mut s = String::new();
    let _ = writeln!(s, "n = {}", net.node_count());
    let _ = writeln!(s, "M = {}", pg.max_buffer());
    let _ = writeln!(s, "p = {}", pg.p());
    let _ = writeln!(s, "q = {}", pg.q());
    for m in 0..=pg.max_buffer() {
        let _ = writeln!(s, "G{m}:");
        s.push_str(&pattern(pg.graph(m)));
    }
    debug_assert_eq!(longest_path(pg.all()).ok(), Some(pg.q()));
    emit(&s, None)
}

fn trajectory_text(records: &[CycleRecord], replica: Option<u32>, format: Format, out: &mut String) {
    for r in records {
        let prefix = replica.map_or(String::new(), |rep| format!("{rep},"));
        match format {
            Format::Csv => {
                let _ = writeln!(
                    out,
                    "{prefix}{},{:.6},{:.6},{:.6},{:.6}",
                    r.k, r.norm, r.lower, r.upper, r.gamma_hat
                );
            }
            Format::Table => {
                let prefix = replica.map_or(String::new(), |rep| format!("{rep:>8} "));
                let _ = writeln!(
                    out,
                    "{prefix}{:>10} {:>16.6} {:>16.6} {:>16.6} {:>12.6}",
                    r.k, r.norm, r.lower, r.upper, r.gamma_hat
                );
            }
        }
    }
}

fn simulate(
    config: &Path,
    cycles: usize,
    seed: u64,
    replicas: u32,
    out: Option<&Path>,
    format: Format,
) -> Result<(), Failure> {
    let net = load_network(config)?;
    let sampler = ServiceSampler::new(net.service().clone(), seed, 0);
    let trajectories = if replicas == 1 {
        vec![run::<f64>(&net, &mut sampler.clone(), cycles)]
    } else {
        run_replicas(&net, &sampler, cycles, replicas)
    };
    let multi = replicas > 1;
    let mut text = String::new();
    match format {
        Format::Csv => {
            text.push_str(if multi { "replica," } else { "" });
            text.push_str("k,norm_x,lower_k,upper_k,gamma_hat\n");
        }
        Format::Table => {
            if multi {
                let _ = write!(text, "{:>8} ", "replica");
            }
            let _ = writeln!(
                text,
                "{:>10} {:>16} {:>16} {:>16} {:>12}",
                "k", "norm_x", "lower_k", "upper_k", "gamma_hat"
            );
        }
    }
    for (r, traj) in trajectories.iter().enumerate() {
        trajectory_text(traj.records(), multi.then_some(r as u32), format, &mut text);
    }
    emit(&text, out)?;

    let gammas: Vec<f64> = trajectories.iter().map(|t| estimate(t).gamma_hat).collect();
    let violations: usize = trajectories.iter().map(|t| t.violations()).sum();
    let mean = gammas.iter().sum::<f64>() / gammas.len() as f64;
    if multi {
        let var = gammas.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (gammas.len() - 1) as f64;
        eprintln!(
            "gamma_hat = {mean:.6} (mean of {replicas} replicas, std error {:.6}), sandwich violations: {violations}",
            (var / gammas.len() as f64).sqrt()
        );
    } else {
        eprintln!("gamma_hat = {mean:.6}, sandwich violations: {violations}");
    }
    if violations > 0 {
        return Err(Failure::Runtime(format!(
            "{violations} cycles violated the sandwich bounds"
        )));
    }
    Ok(())
}

fn bounds(config: &Path, simulate: Option<(usize, u64)>) -> Result<(), Failure> {
    let net = load_network(config)?;
    let mut report = BoundsReport::new(net.service());
    if let Some((cycles, seed)) = simulate {
        let mut sampler = ServiceSampler::new(net.service().clone(), seed, 0);
        let traj = run::<f64>(&net, &mut sampler, cycles);
        report = report.with_estimate(&estimate(&traj));
    }
    let mut s = String::new();
    let _ = writeln!(s, "lower  = {:.6}", report.lower);
    let _ = writeln!(s, "upper  = {:.6}", report.upper);
    let _ = writeln!(s, "method = {}", report.method);
    if let Some(g) = report.gamma_estimate {
        let _ = writeln!(s, "gamma_hat  = {g:.6}");
        let _ = writeln!(s, "throughput = {:.6}", report.throughput.unwrap_or(f64::NAN));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(&s, None)
}

fn reproduce(
    table: u8,
    cycles: usize,
    seed: u64,
    format: TableFormat,
    out: Option<&Path>,
    check: bool,
) -> Result<(), Failure> {
    let mut which = vec![Table::from_number(table).expect("validated by clap")];
    if table == 3 {
        which.push(Table::TandemErlang { nodes: 5 });
    }
    let mut text = String::new();
    let mut passed = true;
    for (i, t) in which.into_iter().enumerate() {
        let report = tables::reproduce(t, seed, cycles);
        passed &= i > 0 || report.passed();
        match format {
            TableFormat::Markdown => {
                if i > 0 {
                    text.push('\n');
                }
                text.push_str(&report.to_markdown());
            }
            TableFormat::Csv => {
                let csv = report.to_csv();
                let body = if i == 0 { &csv[..] } else { csv.split_once('\n').map_or("", |x| x.1) };
                if let Table::TandemErlang { nodes } = t {
                    // tag the variant in the table column
                    for line in body.lines() {
                        if line.starts_with("table,") {
                            let _ = writeln!(text, "{line}");
                        } else {
                            let _ = writeln!(text, "3n{nodes}{}", &line[1..]);
                        }
                    }
                } else {
                    text.push_str(body);
                }
            }
        }
    }
    emit(&text, out)?;
    if check && !passed {
        return Err(Failure::Runtime("reproduction differs from the printed table".into()));
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(format!("stdout: {e}"))),
    }
}
