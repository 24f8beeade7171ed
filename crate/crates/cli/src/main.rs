use clap::Parser;

fn main() {
    let cli = qknit_cli::Cli::parse();
    std::process::exit(qknit_cli::run(cli));
}
