fn main() {
    std::process::exit(lcburden::cli::main_with_args(std::env::args_os()));
}
