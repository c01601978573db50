use clap::Parser;

fn main() {
    std::process::exit(bodypath_cli::run(bodypath_cli::Cli::parse()));
}
