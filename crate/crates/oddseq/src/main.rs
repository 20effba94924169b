use clap::Parser;
use oddseq::cli::{run, Cli};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::try_parse_from(&args).unwrap_or_else(|e| e.exit());
    if let Err(e) = run(cli, &args) {
        eprintln!("oddseq: {e}");
        std::process::exit(e.exit_code());
    }
}
