use clap::Parser;
use ssmt_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = cli.into_config().and_then(|config| run(&config));
    match result {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
        }
        Err(e) => {
            eprintln!("ssmt: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
