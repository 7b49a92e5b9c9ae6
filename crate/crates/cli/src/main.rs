use std::path::{Path, PathBuf};
use std::process::ExitCode;

use mpbo_cli::{
    dump_landscape, load_config, run_experiment, summary_to_table, verify_dir, CliError, CliResult,
};

const USAGE: &str = "usage:
  mpbo run <config.json>
  mpbo dump-landscape <config.json> --policy <j> --resolution <n>
  mpbo verify <results-dir>

The MPBO_OUT environment variable overrides the config's output directory.
Exit codes: 0 ok, 1 verification mismatch, 2 config error, 3 i/o error.";

fn out_dir_for(config: &mpbo_cli::ExperimentConfig) -> PathBuf {
    mpbo_cli::experiment::resolve_out_dir(config)
}

fn cmd_run(config_path: &Path) -> CliResult<()> {
    let config = load_config(config_path)?;
    let out_dir = out_dir_for(&config);
    let summaries = run_experiment(&config, &out_dir)?;
    print!("{}", summary_to_table(&summaries));
    println!("results written to {}", out_dir.display());
    Ok(())
}

fn cmd_dump(config_path: &Path, policy: usize, resolution: usize) -> CliResult<()> {
    let config = load_config(config_path)?;
    let out_dir = out_dir_for(&config);
    let path = dump_landscape(&config, &out_dir, policy, resolution)?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_verify(dir: &Path) -> CliResult<()> {
    let n = verify_dir(dir)?;
    println!("verified {n} records in {}", dir.display());
    Ok(())
}

/// Pull the value following a `--flag` and parse it.
fn flag_value<T: std::str::FromStr>(args: &[String], flag: &str) -> CliResult<T> {
    let pos = args
        .iter()
        .position(|a| a == flag)
        .ok_or_else(|| CliError::Config(format!("missing required flag {flag}")))?;
    let value = args
        .get(pos + 1)
        .ok_or_else(|| CliError::Config(format!("{flag} needs a value")))?;
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value '{value}' for {flag}")))
}

fn dispatch(args: &[String]) -> CliResult<()> {
    match args.first().map(String::as_str) {
        Some("run") if args.len() == 2 => cmd_run(Path::new(&args[1])),
        Some("dump-landscape") if args.len() == 6 => {
            let policy = flag_value(&args[2..], "--policy")?;
            let resolution = flag_value(&args[2..], "--resolution")?;
            cmd_dump(Path::new(&args[1]), policy, resolution)
        }
        Some("verify") if args.len() == 2 => cmd_verify(Path::new(&args[1])),
        _ => Err(CliError::Config(format!("unrecognized arguments\n{USAGE}"))),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
