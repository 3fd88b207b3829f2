use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use tsp_adjacency::cli::{parse_args, render_table, run_experiment, write_csv, RunError, Source};
use tsp_adjacency::instances::serialize_witness;

fn main() -> ExitCode {
    let plan = match parse_args(std::env::args_os()) {
        Ok(p) => p,
        Err(e) if e.is_informational() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&plan) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(plan: &tsp_adjacency::cli::RunPlan) -> Result<(), RunError> {
    let report = run_experiment(plan)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |source| RunError::Io {
        path: "<stdout>".into(),
        source,
    };
    if matches!(plan.source, Source::File(_)) {
        for t in &report.trials {
            match &t.witness {
                Some((z, w)) => {
                    writeln!(out, "not adjacent").map_err(io_err)?;
                    write!(out, "{}", serialize_witness(z, w)).map_err(io_err)?;
                }
                None => writeln!(out, "probably adjacent").map_err(io_err)?,
            }
        }
    }
    write!(out, "{}", render_table(&report.rows, report.label)).map_err(io_err)?;
    if let Some(path) = &plan.out {
        let file = File::create(path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        write_csv(&report.rows, file).map_err(|e| RunError::Io {
            path: path.clone(),
            source: e.into(),
        })?;
    }
    Ok(())
}
