fn main() {
    std::process::exit(mixrate::cli::run(std::env::args_os()));
}
