fn main() {
    std::process::exit(logsplit::cli::run_cli(std::env::args_os()));
}
