fn main() {
    std::process::exit(cct::cli::run_from_env());
}
