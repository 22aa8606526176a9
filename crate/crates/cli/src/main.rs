fn main() {
    std::process::exit(binarise_cli::main_with_args(std::env::args_os()));
}
