use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = vqt_cli::Cli::parse();
    if let Err(e) = vqt_cli::run(&cli) {
        eprintln!("vqt: {e}");
        std::process::exit(e.exit_code());
    }
}
