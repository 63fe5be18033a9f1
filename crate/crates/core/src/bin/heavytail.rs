fn main() {
    std::process::exit(heavytail::cli::main_with_args(std::env::args_os()));
}
