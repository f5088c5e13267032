fn main() {
    std::process::exit(sqfib::cli::main_with_args(std::env::args_os()));
}
