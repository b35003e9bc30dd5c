fn main() {
    std::process::exit(vibex::cli::main_with_args(std::env::args_os()));
}
