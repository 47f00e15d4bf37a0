use std::process::ExitCode;

use clap::Parser;
use fmfix::cli::{main_with, Args};

fn main() -> ExitCode {
    main_with(Args::parse())
}
