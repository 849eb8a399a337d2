mod args;
mod commands;
mod grid;
mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Format};

const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_IO: u8 = 1;

/// Turns `{"h": 0.5, "t-grid": "0:30:0.01", "asymptotic": true}` into flag
/// tokens. `false` and `null` drop the flag.
fn config_tokens(path: &str) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| format!("config {path} is not valid JSON: {e}"))?;
    let Value::Object(map) = value else {
        return Err(format!("config {path} must be a flat JSON object"));
    };
    let mut tokens = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.trim_start_matches('-'));
        match value {
            Value::Bool(true) => tokens.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => tokens.extend([flag.into(), n.to_string().into()]),
            Value::String(s) => tokens.extend([flag.into(), s.into()]),
            _ => return Err(format!("config key `{key}` must map to a scalar")),
        }
    }
    Ok(tokens)
}

/// Splices the `--config` file's flags in front of the command-line flags,
/// so that explicit flags override it.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            let value = iter.next().ok_or_else(|| "--config needs a file path".to_string())?;
            path = Some(value.to_string_lossy().into_owned());
        } else if let Some(value) = text.strip_prefix("--config=") {
            path = Some(value.to_owned());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let tokens = config_tokens(&path)?;
    // argv[0] is the program, argv[1] the subcommand.
    let at = rest.len().min(2);
    rest.splice(at..at, tokens);
    Ok(rest)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("MAGNON_BATH_THREADS") else { return Ok(()) };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MAGNON_BATH_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot size the worker pool: {e}"))
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }

    let table = match commands::run(&cli.command) {
        Ok(table) => table,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DOMAIN);
        }
    };

    let common = cli.command.common();
    let result = (|| -> io::Result<()> {
        let mut out: Box<dyn Write> = match &common.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        match common.format {
            Format::Csv => table.write_csv(&mut out)?,
            Format::Json => table.write_json(&mut out)?,
        }
        out.flush()
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not a failure.
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
