use clap::Parser;

use netctl::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETCTL_LOG", "warn")).init();
    let cli = Cli::parse();
    let cfg = match cli.into_run_config() {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("{}", serde_json::json!({ "error": "usage", "exit_code": 2, "message": msg }));
            std::process::exit(2);
        }
    };
    match run(&cfg) {
        Ok(dir) => log::info!("results written to {}", dir.display()),
        Err(err) => {
            eprintln!("{}", err.record());
            std::process::exit(err.exit_code());
        }
    }
}
