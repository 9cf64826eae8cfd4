use clap::Parser;
use mfgp_cli::args::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MFGP_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Err(e) = mfgp_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
