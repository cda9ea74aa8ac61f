fn main() {
    std::process::exit(tvfrac_cli::run_from(std::env::args_os()));
}
