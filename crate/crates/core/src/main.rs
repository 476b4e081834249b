fn main() {
    std::process::exit(hrplab::cli::main_with_args(std::env::args_os()));
}
