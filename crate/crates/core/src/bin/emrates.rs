fn main() {
    std::process::exit(emrates::cli::main_with_args(std::env::args_os()));
}
