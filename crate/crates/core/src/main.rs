fn main() {
    std::process::exit(tsqc::cli::main_with_args(std::env::args_os()));
}
