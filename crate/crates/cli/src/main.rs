use clap::Parser;
use netctl_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("NETCTL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: NETCTL_THREADS ignored: {e}");
        }
    }
    let code = match run(&cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    };
    std::process::exit(code);
}
