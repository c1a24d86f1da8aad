use clap::Parser;

fn main() {
    let cli = cks_cli::Cli::parse();
    std::process::exit(cks_cli::run(cli));
}
