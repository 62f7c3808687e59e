mod args;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{resolve, Cli, Format, Resolved, UsageError, SEED_ENV};
use lindet_core::props;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

enum Outcome {
    Done,
    Violations(usize),
}

fn open_sink(resolved: &Resolved) -> Result<Box<dyn Write>> {
    Ok(match &resolved.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_output(resolved: &Resolved, table: &lindet_core::ResultTable, mut sink: Box<dyn Write>) -> Result<()> {
    match resolved.format {
        Format::Csv => output::write_csv(table, &mut sink)?,
        Format::Json => output::write_json(table, &mut sink)?,
    }
    sink.flush()?;
    if let (Some(script), Some(data)) = (&resolved.emit_plot, &resolved.out) {
        std::fs::write(script, output::plot_script(table, data))
            .with_context(|| format!("cannot write {}", script.display()))?;
    }
    Ok(())
}

fn execute(resolved: &Resolved) -> Result<Outcome> {
    let Some(experiment) = resolved.experiment else {
        let mut sink = open_sink(resolved)?;
        let reports = props::run_all(resolved.config.master_seed)?;
        let mut text = String::new();
        for report in &reports {
            text.push_str(&format!("{report}\n"));
        }
        let failed = reports.iter().filter(|r| !r.passed()).count();
        text.push_str(&format!(
            "{} of {} properties passed\n",
            reports.len() - failed,
            reports.len()
        ));
        sink.write_all(text.as_bytes())?;
        sink.flush()?;
        return Ok(if failed == 0 {
            Outcome::Done
        } else {
            Outcome::Violations(failed)
        });
    };
    let sink = open_sink(resolved)?;
    let table = resolved.config.run(experiment)?;
    write_output(resolved, &table, sink)?;
    Ok(Outcome::Done)
}

fn run_cli(argv: impl IntoIterator<Item = String>) -> ExitCode {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let seed_env = std::env::var(SEED_ENV).ok();
    let resolved = match resolve(&cli.command, seed_env.as_deref()) {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match resolved.workers {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| execute(&resolved)),
            Err(e) => Err(e.into()),
        },
        None => execute(&resolved),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Violations(n)) => {
            eprintln!("error: {n} properties violated");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(e) => {
            eprintln!("error: {}: {e:#}", resolved.command);
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    run_cli(std::env::args())
}
