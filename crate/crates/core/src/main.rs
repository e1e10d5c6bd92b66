fn main() {
    std::process::exit(dglimit::cli::main_with_args(std::env::args_os()));
}
