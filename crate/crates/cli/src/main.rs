use clap::Parser;

fn main() {
    let cli = stepopt_cli::Cli::parse();
    if let Err(e) = stepopt_cli::run(cli) {
        eprintln!("stepopt: {e}");
        std::process::exit(e.exit_code());
    }
}
