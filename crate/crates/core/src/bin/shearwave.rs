fn main() {
    std::process::exit(shearwave::cli::run(std::env::args_os()));
}
