fn main() {
    std::process::exit(uclab::cli::main_with_args(std::env::args_os()));
}
