use clap::error::ErrorKind;
use clap::Parser;
use leurn::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            std::process::exit(2);
        }
    };
    if let Err(e) = run(cli) {
        if e.is_broken_pipe() {
            return;
        }
        eprintln!("{}", e.one_line());
        std::process::exit(1);
    }
}
