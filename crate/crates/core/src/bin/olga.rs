fn main() {
    std::process::exit(olga::cli::main_with_args(std::env::args_os()));
}
