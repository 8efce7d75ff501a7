fn main() {
    std::process::exit(jobcast_cli::run_from(std::env::args_os()));
}
