use clap::Parser;
use entroute::cli::{execute, exit_code, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("entroute: {e}");
        std::process::exit(exit_code(&e));
    }
}
