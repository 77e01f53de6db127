fn main() {
    std::process::exit(repro_lifts::cli::run_cli(std::env::args_os()));
}
