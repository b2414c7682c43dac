use clap::Parser;

use mdfc_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => println!("{} ({} rows)", summary.csv.display(), summary.rows),
        Err(e) => {
            eprintln!("mdfc {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
