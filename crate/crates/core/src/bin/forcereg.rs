fn main() {
    std::process::exit(forcereg::cli::run_from(std::env::args_os()));
}
