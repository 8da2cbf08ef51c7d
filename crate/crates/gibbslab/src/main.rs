use std::io::ErrorKind;

use clap::Parser;

use gibbslab::cli::{run, RunConfig};
use gibbslab::GibbsError;

fn main() {
    let config = RunConfig::parse();
    let code = match run(&config, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        // downstream consumer closed the pipe; not an error of ours
        Err(GibbsError::Io(e)) if e.kind() == ErrorKind::BrokenPipe => 0,
        Err(GibbsError::Json(e)) if e.io_error_kind() == Some(ErrorKind::BrokenPipe) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    std::process::exit(code);
}
