fn main() {
    std::process::exit(ilgap::cli::run_from_args(std::env::args_os()));
}
