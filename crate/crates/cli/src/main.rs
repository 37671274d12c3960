use std::io::Write;
use std::process::ExitCode;

use xmlward::args::USAGE;
use xmlward::run::{EXIT_IO, EXIT_USAGE};
use xmlward::{parse_args, run, Io, UsageError};

fn main() -> ExitCode {
    let argv: Result<Vec<String>, UsageError> = std::env::args_os()
        .skip(1)
        .map(|a| a.into_string().map_err(|_| UsageError::NotUtf8))
        .collect();
    let cmd = match argv.and_then(|a| parse_args(&a)) {
        Ok(cmd) => cmd,
        Err(e) => {
            let mut err = std::io::stderr().lock();
            let _ = writeln!(err, "xmlward: {e}");
            let _ = writeln!(err, "{}", USAGE.lines().next().unwrap_or_default());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let worker = std::thread::Builder::new()
        .name("xmlward".into())
        .stack_size(xmlward::WORKER_STACK)
        .spawn(move || {
            let mut stdin = std::io::stdin();
            let mut stdout = std::io::stdout().lock();
            let mut stderr = std::io::stderr().lock();
            let mut io = Io {
                stdin: &mut stdin,
                stdout: &mut stdout,
                stderr: &mut stderr,
            };
            run(&cmd, &mut io, &timestamp)
        });
    let code = match worker.map(|h| h.join()) {
        Ok(Ok(code)) => code,
        _ => {
            let _ = writeln!(std::io::stderr(), "xmlward: internal error");
            EXIT_IO
        }
    };
    ExitCode::from(code as u8)
}
