fn main() {
    std::process::exit(squish_server::cli::main_with_args(std::env::args_os()));
}
