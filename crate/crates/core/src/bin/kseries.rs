fn main() {
    std::process::exit(kseries::cli::main_with_args(std::env::args_os()));
}
