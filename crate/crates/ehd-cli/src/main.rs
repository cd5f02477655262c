use clap::Parser;

fn main() {
    let cli = ehd_cli::Cli::parse();
    std::process::exit(ehd_cli::run(cli));
}
