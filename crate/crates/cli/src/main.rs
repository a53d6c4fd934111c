use clap::Parser;
use colorgns_cli::tasks::{run_cli, Cli};

fn main() {
    let cli = Cli::parse();
    let (outcome, format) = run_cli(&cli);
    print!("{}", outcome.render(format));
    std::process::exit(outcome.exit_code);
}
