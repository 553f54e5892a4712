use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use mts::cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.first().map(String::as_str) == Some(cli::WORKER_COMMAND) {
        return match cli::serve_worker(io::stdin().lock(), io::stdout().lock()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("mts worker: {e}");
                ExitCode::from(cli::EXIT_ABORT as u8)
            }
        };
    }
    let stdout = io::stdout();
    let mut out = BufWriter::with_capacity(1 << 16, stdout.lock());
    let stderr = io::stderr();
    let mut err = stderr.lock();
    let code = cli::main_with(&argv, &mut io::stdin().lock(), &mut out, &mut err);
    if let Err(e) = out.flush() {
        if e.kind() != io::ErrorKind::BrokenPipe {
            let _ = writeln!(err, "mts: {e}");
        }
    }
    ExitCode::from(code as u8)
}
