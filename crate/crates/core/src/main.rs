use clap::Parser;
use prodfade::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("prodfade: {e}");
        std::process::exit(e.code);
    }
}
