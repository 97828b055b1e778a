fn main() {
    std::process::exit(nclandau::cli::main_with_args(std::env::args_os()));
}
