fn main() {
    std::process::exit(dgp::cli::main_with_args(std::env::args_os()));
}
