//! Binary entry point for the `corpusgate` CLI.

fn main() {
    std::process::exit(corpusgate_harness::cli::main_from_args(std::env::args_os()));
}
