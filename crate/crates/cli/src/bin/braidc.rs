//! `braidc --theta <rad> --max-len <L> [--mitm] [--strict-phase]`

use clap::Parser;
use steering_cli::{run_braid, BraidArgs};

#[derive(Parser)]
#[command(name = "braidc", version, about = "Fibonacci-anyon braid word for U_theta")]
struct Opts {
    #[command(flatten)]
    args: BraidArgs,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let opts = Opts::parse();
    if let Err(e) = run_braid(&opts.args) {
        eprintln!("braidc: {e}");
        std::process::exit(e.exit_code());
    }
}
