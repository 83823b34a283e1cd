fn main() {
    std::process::exit(palpate::cli::main_with_args(std::env::args_os()));
}
