// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use ionsim_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("ionsim: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
