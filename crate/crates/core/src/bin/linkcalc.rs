fn main() {
    std::process::exit(linkcalc::cli::main_with_args(std::env::args_os()));
}
