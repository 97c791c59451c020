fn main() {
    std::process::exit(commlab::cli::run_from_args(std::env::args_os()));
}
