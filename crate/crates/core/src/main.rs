fn main() {
    std::process::exit(badlab::cli::main_with_args(std::env::args_os()));
}
