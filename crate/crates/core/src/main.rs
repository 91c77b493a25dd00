fn main() {
    std::process::exit(jordan_angles::cli::main_with_args(std::env::args_os()));
}
