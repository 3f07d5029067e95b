use clap::Parser;
use grushin::cli::{run, Cli, EXIT_CONFIG};

fn main() {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("GRUSHIN_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("grushin: GRUSHIN_THREADS must be a positive integer, got {v:?}");
                std::process::exit(EXIT_CONFIG);
            }
        }
    }
    std::process::exit(run(cli));
}
